//! Root counting in `K` by digit-by-digit branching.
//!
//! Starting from `phi_0 = phi^#`, each branch reduces its polynomial modulo
//! the uniformizer. A linear reduction pins down exactly one root, a
//! constant reduction or one without roots in `k` kills the branch, and
//! otherwise the branch splits over the roots `b` of the reduction with
//! `phi_{i+1} = phi_i^#(pi x + lift(b))`.
//!
//! Roots outside the valuation ring are counted through the reversed
//! polynomial. [`oracle_count`] is an independent brute-force count over
//! residue classes certified with Hensel's criterion; it shares no code
//! with the branching search beyond field arithmetic.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, LocalField};
use crate::linalg;
use crate::padic::{PadicNumber, Valuation};
use crate::poly::PolyOverK;
use crate::residue::{ResidueElement, ResidueField};

/// A live branch of the search.
#[derive(Clone, Debug)]
pub struct PanayiBranch {
    /// Current normalized polynomial `phi_i^#`.
    pub phi: PolyOverK,
    pub digits: Vec<ResidueElement>,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct RootApproximation {
    /// Digits accumulated when the branch terminated.
    pub digits: Vec<ResidueElement>,
    /// `sum lift(digit_i) * pi^i`, or its reciprocal image for roots of
    /// negative valuation.
    pub approximation: FieldElement,
    /// `nu_K(phi(approximation))`.
    pub residual_valuation: Valuation,
    /// The root refined by Newton iteration to working precision, when
    /// refinement was requested.
    pub root: Option<FieldElement>,
    /// True when the root has negative valuation; the digits then describe
    /// `z` with `root = 1 / (pi z)`.
    pub reciprocal: bool,
}

#[derive(Clone, Debug)]
pub struct RootReport {
    pub count: usize,
    pub roots: Vec<RootApproximation>,
    pub discriminant_valuation: i64,
}

/// Terminal state of an integral branch with a linear reduction.
struct Terminal {
    digits: Vec<ResidueElement>,
    phi: PolyOverK,
    last_root: ResidueElement,
}

enum Step {
    Found(Terminal),
    Dead,
    Split(Vec<PanayiBranch>),
}

fn step(field: &LocalField, branch: PanayiBranch) -> Result<Step> {
    let k = field.residue_field();
    let reduced = branch.phi.reduce(field)?;
    let Some(deg) = ResidueField::poly_degree(&reduced) else {
        return Err(Error::PrecisionExhausted(
            "normalized polynomial reduced to zero".into(),
        ));
    };
    match deg {
        0 => Ok(Step::Dead),
        1 => {
            let root = k.mul(&k.neg(&reduced[0]), &k.inv(&reduced[1])?);
            Ok(Step::Found(Terminal {
                digits: branch.digits,
                phi: branch.phi,
                last_root: root,
            }))
        }
        _ => {
            let roots = k.roots_in_k(&reduced)?;
            if roots.is_empty() {
                return Ok(Step::Dead);
            }
            let children = roots
                .into_iter()
                .map(|b| {
                    let shifted =
                        branch
                            .phi
                            .substitute(field, &field.lift(&b), field.uniformizer());
                    let mut digits = branch.digits.clone();
                    digits.push(b);
                    Ok(PanayiBranch {
                        phi: shifted.normalize(field)?,
                        digits,
                        depth: branch.depth + 1,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Step::Split(children))
        }
    }
}

/// Breadth-first exploration of the integral roots of `phi`.
fn explore(field: &LocalField, phi: &PolyOverK, max_depth: usize) -> Result<Vec<Terminal>> {
    let mut frontier = vec![PanayiBranch {
        phi: phi.normalize(field)?,
        digits: vec![],
        depth: 0,
    }];
    let mut found = Vec::new();
    while !frontier.is_empty() {
        if let Some(b) = frontier.iter().find(|b| b.depth > max_depth) {
            return Err(Error::DepthExceeded(b.depth - 1));
        }
        let steps: Vec<Result<Step>> = frontier.into_par_iter().map(|b| step(field, b)).collect();
        let mut next = Vec::new();
        for s in steps {
            match s? {
                Step::Found(t) => found.push(t),
                Step::Dead => {}
                Step::Split(children) => next.extend(children),
            }
        }
        frontier = next;
    }
    Ok(found)
}

/// `sum lift(d_i) pi^i`.
pub fn digits_value(field: &LocalField, digits: &[ResidueElement]) -> FieldElement {
    let mut acc = field.zero();
    let mut power = field.one();
    for d in digits {
        acc = field.add(&acc, &field.mul(&field.lift(d), &power));
        power = field.mul(&power, field.uniformizer());
    }
    acc
}

/// Newton iteration from `z`, stopping once the residual is zero to
/// precision or stops improving. The inverse of `phi'` is itself updated by
/// Newton's rule `s -> s (2 - phi'(z) s)`, so only one field inversion is
/// needed.
pub fn newton(field: &LocalField, phi: &PolyOverK, mut z: FieldElement) -> Result<FieldElement> {
    let dphi = phi.derivative(field);
    let two = field.from_i64(2);
    let mut s = field.inv(&dphi.eval(field, &z))?;
    let mut last = i64::MIN;
    for _ in 0..128 {
        let value = phi.eval(field, &z);
        match field.valuation(&value)? {
            Valuation::AtLeast(_) => break,
            Valuation::Exact(v) if v <= last => break,
            Valuation::Exact(v) => last = v,
        }
        z = field.sub(&z, &field.mul(&value, &s));
        let d = dphi.eval(field, &z);
        s = field.mul(&s, &field.sub(&two, &field.mul(&d, &s)));
    }
    Ok(z)
}

fn finish(
    field: &LocalField,
    original: &PolyOverK,
    t: Terminal,
    reciprocal: bool,
    refine: bool,
) -> Result<RootApproximation> {
    let depth = t.digits.len() as u32;
    let head = digits_value(field, &t.digits);
    let z = if refine {
        let tail = newton(field, &t.phi, field.lift(&t.last_root))?;
        let scale = field.pow(field.uniformizer(), depth);
        Some(field.add(&head, &field.mul(&scale, &tail)))
    } else {
        None
    };
    let (approximation, root) = if reciprocal {
        let to_root = |w: &FieldElement| field.inv(&field.mul(field.uniformizer(), w));
        let root = z.map(|z| to_root(&z)).transpose()?;
        (to_root(&head).unwrap_or_else(|_| field.zero()), root)
    } else {
        (head, z)
    };
    let residual_valuation = if reciprocal {
        // residual of the reversed polynomial at the digit expansion
        Valuation::AtLeast(0)
    } else {
        field.valuation(&original.eval(field, &approximation))?
    };
    Ok(RootApproximation {
        digits: t.digits,
        approximation,
        residual_valuation,
        root,
        reciprocal,
    })
}

/// Valuation of the discriminant of `phi`, via the Sylvester matrix of
/// `phi` and `phi'`. Fails when `phi` is not squarefree to precision.
pub fn discriminant_valuation(field: &LocalField, phi: &PolyOverK) -> Result<i64> {
    let d = phi.degree();
    if d <= 1 {
        return Ok(0);
    }
    let dphi = phi.derivative(field);
    let size = 2 * d - 1;
    let mut m: Vec<Vec<FieldElement>> = vec![vec![field.zero(); size]; size];
    // rows 0..d-1: shifts of phi, rows d-1..: shifts of phi'
    for r in 0..d - 1 {
        for (j, c) in phi.coeffs.iter().rev().enumerate() {
            m[r][r + j] = c.clone();
        }
    }
    for r in 0..d {
        for (j, c) in dphi.coeffs.iter().rev().enumerate() {
            m[d - 1 + r][r + j] = c.clone();
        }
    }
    let res = determinant_valuation(field, m)?;
    let lead = field.exact_valuation(&phi.coeffs[d])?;
    match res {
        Valuation::Exact(v) => Ok(v - lead),
        Valuation::AtLeast(_) => Err(Error::InvalidInput(
            "polynomial is not squarefree (discriminant is zero to precision)".into(),
        )),
    }
}

/// Valuation of a determinant over `K`, by elimination with
/// minimal-valuation pivots.
fn determinant_valuation(field: &LocalField, mut m: Vec<Vec<FieldElement>>) -> Result<Valuation> {
    let n = m.len();
    let mut total = 0i64;
    for k in 0..n {
        let mut best: Option<(usize, i64)> = None;
        for (r, row) in m.iter().enumerate().skip(k) {
            if let Valuation::Exact(v) = field.valuation(&row[k])? {
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((r, v));
                }
            }
        }
        let Some((r, v)) = best else {
            return Ok(Valuation::AtLeast(total));
        };
        m.swap(r, k);
        total += v;
        let inv = field.inv(&m[k][k])?;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let factor = field.mul(&m[i][k], &inv);
            for j in k + 1..n {
                let t = field.mul(&factor, &m[k][j]);
                m[i][j] = field.sub(&m[i][j], &t);
            }
        }
    }
    Ok(Valuation::Exact(total))
}

/// Counts and approximates the roots of a squarefree `phi` in `K`.
///
/// `max_depth` defaults to twice the discriminant valuation plus four.
pub fn count_roots(
    phi: &PolyOverK,
    field: &LocalField,
    max_depth: Option<usize>,
) -> Result<RootReport> {
    find_roots(phi, field, max_depth, false)
}

/// As [`count_roots`], additionally refining every root by Newton
/// iteration to working precision.
pub fn refined_roots(
    phi: &PolyOverK,
    field: &LocalField,
    max_depth: Option<usize>,
) -> Result<RootReport> {
    find_roots(phi, field, max_depth, true)
}

fn find_roots(
    phi: &PolyOverK,
    field: &LocalField,
    max_depth: Option<usize>,
    refine: bool,
) -> Result<RootReport> {
    if phi.coeffs.iter().all(FieldElement::is_zero) {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    let phi = PolyOverK::new(phi.coeffs.clone());
    if phi.degree() == 0 {
        return Ok(RootReport {
            count: 0,
            roots: vec![],
            discriminant_valuation: 0,
        });
    }
    let dv = discriminant_valuation(field, &phi)?;
    let max_depth = max_depth.unwrap_or(2 * dv.max(0) as usize + 4);
    let normalized = phi.normalize(field)?;
    let mut roots = Vec::new();
    for t in explore(field, &normalized, max_depth)? {
        roots.push(finish(field, &phi, t, false, refine)?);
    }
    let lead = normalized.coeffs.last().unwrap();
    if field.exact_valuation(lead)? > 0 {
        // roots of negative valuation are 1/(pi z) with z a root of
        // rev(phi)(pi z) in the valuation ring
        let rev = normalized
            .reversed()
            .substitute(field, &field.zero(), field.uniformizer());
        for t in explore(field, &rev, max_depth)? {
            roots.push(finish(field, &rev, t, true, refine)?);
        }
    }
    Ok(RootReport {
        count: roots.len(),
        roots,
        discriminant_valuation: dv,
    })
}

/// Every root of an integer polynomial in `K`, refined to precision.
pub fn roots_in_field(field: &LocalField, poly: &[BigInt]) -> Result<Vec<FieldElement>> {
    let phi = PolyOverK::from_ints(field, poly);
    Ok(refined_roots(&phi, field, None)?
        .roots
        .into_iter()
        .filter_map(|r| r.root)
        .collect())
}

/// A root of `subfield_poly` in `K`, which realizes the subfield it defines
/// inside `K`.
pub fn embed_subfield(field: &LocalField, subfield_poly: &[BigInt]) -> Result<FieldElement> {
    roots_in_field(field, subfield_poly)?
        .into_iter()
        .next()
        .ok_or(Error::NoRootInField)
}

/// Whether `x` generates `K` over `Q_p`, that is whether
/// `1, x, ..., x^(n-1)` are linearly independent.
pub fn generates_field(field: &LocalField, x: &FieldElement) -> bool {
    !generating_det(field, x).is_zero()
}

fn generating_det(field: &LocalField, x: &FieldElement) -> PadicNumber {
    let mut rows = Vec::with_capacity(field.degree());
    let mut power = field.one();
    for _ in 0..field.degree() {
        rows.push(power.coeffs().to_vec());
        power = field.mul(&power, x);
    }
    linalg::determinant(rows, field.p())
}

/// Whether some root of `phi` in `K` generates `K`. A monic integer `phi`
/// of degree `n` with such a root is irreducible over `Q_p` and defines
/// `K`. Roots are first refined at a reduced precision. When `phi` has
/// coefficients in `Q_p`, a generating root `r` satisfies
/// `disc(phi) = c^(2n-2) det(M)^2 disc(g)` with `M` the matrix of
/// `1, r, ..., r^(n-1)`, so the valuation of `det(M)` is known in advance
/// and a determinant vanishing beyond it rules `r` out; if the identity
/// has no integral solution, no root generates `K`.
pub fn has_generating_root(phi: &PolyOverK, field: &LocalField) -> Result<bool> {
    let expected = match expected_det_valuation(phi, field) {
        DetValuation::Impossible => return Ok(false),
        DetValuation::Expected(v) => Some(v),
        DetValuation::Unknown => None,
    };
    let quick = expected.map_or(40, |v| v + 12);
    if quick < field.precision() {
        let truncated = PolyOverK::new(
            phi.coeffs
                .iter()
                .map(|c| {
                    FieldElement::from_coords(
                        c.coeffs().iter().map(|a| a.truncate(quick)).collect(),
                    )
                })
                .collect(),
        );
        if let Ok(report) = refined_roots(&truncated, field, None) {
            let mut undecided = false;
            for r in &report.roots {
                let Some(root) = &r.root else {
                    undecided = true;
                    continue;
                };
                match (generating_det(field, root).valuation(), expected) {
                    (Valuation::Exact(_), _) => return Ok(true),
                    (Valuation::AtLeast(b), Some(v)) if b > v => {}
                    _ => undecided = true,
                }
            }
            if !undecided && report.count == report.roots.len() {
                return Ok(false);
            }
        }
    }
    let report = refined_roots(phi, field, None)?;
    Ok(report
        .roots
        .iter()
        .filter_map(|r| r.root.as_ref())
        .any(|r| generates_field(field, r)))
}

enum DetValuation {
    /// `phi` is not over `Q_p` or its discriminant is not separated.
    Unknown,
    /// The discriminant identity has no solution: no root generates `K`.
    Impossible,
    Expected(i64),
}

/// `v_p(det M)` for a generating root, when `phi` is defined over `Q_p`.
fn expected_det_valuation(phi: &PolyOverK, field: &LocalField) -> DetValuation {
    let rational = phi
        .coeffs
        .iter()
        .all(|c| c.coeffs()[1..].iter().all(PadicNumber::is_zero));
    if phi.degree() != field.degree() || !rational {
        return DetValuation::Unknown;
    }
    let e = field.ramification_index() as i64;
    let n = phi.degree() as i64;
    let g = PolyOverK::from_ints(field, field.defining_polynomial());
    let parts = (
        field.exact_valuation(&phi.coeffs[phi.degree()]),
        discriminant_valuation(field, phi),
        discriminant_valuation(field, &g),
    );
    let (Ok(lead), Ok(dphi), Ok(dg)) = parts else {
        return DetValuation::Unknown;
    };
    let twice = dphi - (2 * n - 2) * lead - dg;
    if twice >= 0 && twice % (2 * e) == 0 {
        DetValuation::Expected(twice / (2 * e))
    } else {
        DetValuation::Impossible
    }
}

/// Brute-force count of roots of a squarefree `phi` in `K`, by refining
/// residue classes modulo `pi^m` for `m <= modulus_depth`.
///
/// A class `d + pi^m O_K` holds no root when `nu(phi(d)) < m`, and exactly
/// one when `w = nu(phi'(d)) < m <= nu(phi(d)) - w` (Hensel's criterion with
/// the root confined to the class).
pub fn oracle_count(phi: &PolyOverK, field: &LocalField, modulus_depth: usize) -> Result<usize> {
    let integral = scale_to_integral(field, phi)?;
    let mut count = 0;
    let mut uncertified = 0;
    count_classes(
        field,
        &integral,
        modulus_depth,
        &mut count,
        &mut uncertified,
    )?;

    let lead = integral.coeffs.last().unwrap();
    if field.valuation(lead)?.at_least(1) != Some(false) {
        let rev = integral
            .reversed()
            .substitute(field, &field.zero(), field.uniformizer());
        let rev = scale_to_integral(field, &rev)?;
        count_classes(field, &rev, modulus_depth, &mut count, &mut uncertified)?;
    }
    if uncertified > 0 {
        return Err(Error::Inconclusive(uncertified));
    }
    Ok(count)
}

fn scale_to_integral(field: &LocalField, phi: &PolyOverK) -> Result<PolyOverK> {
    let mut min_v = i64::MAX;
    for c in &phi.coeffs {
        if let Valuation::Exact(v) = field.valuation(c)? {
            min_v = min_v.min(v);
        }
    }
    if min_v >= 0 {
        return Ok(phi.clone());
    }
    let e = field.ramification_index() as i64;
    let shift = (-min_v + e - 1) / e;
    Ok(PolyOverK::new(
        phi.coeffs
            .iter()
            .map(|c| field.mul_pow_p(c, shift))
            .collect(),
    ))
}

fn count_classes(
    field: &LocalField,
    phi: &PolyOverK,
    modulus_depth: usize,
    count: &mut usize,
    uncertified: &mut usize,
) -> Result<()> {
    let dphi = phi.derivative(field);
    let lifts = field.lifts()?.to_vec();
    // (center, m): the class center + pi^m O_K
    let mut stack = vec![(field.zero(), 0usize, field.one())];
    while let Some((center, m, pi_m)) = stack.pop() {
        let m_i = m as i64;
        let v = field.valuation(&phi.eval(field, &center))?;
        if v.at_least(m_i) == Some(false) {
            continue;
        }
        let w = field.valuation(&dphi.eval(field, &center))?;
        if let Valuation::Exact(w) = w {
            if w < m_i && v.at_least(m_i + w) == Some(true) {
                *count += 1;
                continue;
            }
        }
        if m >= modulus_depth {
            *uncertified += 1;
            continue;
        }
        let next_pi = field.mul(&pi_m, field.uniformizer());
        for l in lifts.iter().rev() {
            let c = field.add(&center, &field.mul(l, &pi_m));
            stack.push((c, m + 1, next_pi.clone()));
        }
    }
    Ok(())
}
