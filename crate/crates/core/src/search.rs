//! Digit search for the free parameter of a generic polynomial.
//!
//! With all but one parameter fixed, `P(b, x)` becomes `phi(x, t)`. Each
//! branch carries `phi` together with the `pi_F`-adic digits of `t` chosen
//! so far. A branch forks over the digits of `k_F` (`t -> lift(d) + pi_F t`)
//! whenever `t` survives in the reduction of `phi^#`; otherwise it behaves
//! like a root-counting branch in `x`: a linear reduction means every `t`
//! with the current digits gives a polynomial with a root in `K`, a
//! constant reduction or one without roots in `k` is a dead end, and a
//! root `b` of the reduction gives `phi^#(pi_K x + lift(b), t)`.
//!
//! Digit lifts range over the residue field of the subfield `F`, embedded
//! in `K` through a root of its defining polynomial, so that the resulting
//! parameter lies in `F`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::catalog::GenericPolynomial;
use crate::error::{Error, Result};
use crate::field::{FieldElement, LocalField};
use crate::intpoly;
use crate::panayi::{count_roots, embed_subfield, has_generating_root};
use crate::poly::{BivariatePoly, PolyOverK};
use crate::residue::{ResidueElement, ResidueField};

pub const DEFAULT_FRONTIER_CAP: usize = 10_000;

#[derive(Clone, Debug)]
pub struct SearchJob {
    pub generic: GenericPolynomial,
    /// Values of the fixed parameters, in parameter order with the free one
    /// omitted. Each is a rational polynomial in the subfield generator
    /// (constant term first); over the trivial subfield only the constant
    /// term matters.
    pub fixed_params: Vec<Vec<BigRational>>,
    /// Index of the free parameter; the last one when `None`.
    pub free_param: Option<usize>,
    /// Defining polynomial of `F`; `x` (that is `[0, 1]`) for `F = Q_p`.
    pub subfield: Vec<BigInt>,
    pub digit_bound: usize,
    pub frontier_cap: usize,
    /// Forks (digit substitutions and lifts in `x`) allowed per branch;
    /// `4 * digit_bound` when `None`.
    pub iteration_cap: Option<usize>,
    pub record_trace: bool,
}

impl SearchJob {
    pub fn new(
        generic: GenericPolynomial,
        fixed_params: Vec<Vec<BigRational>>,
        digit_bound: usize,
    ) -> Self {
        SearchJob {
            generic,
            fixed_params,
            free_param: None,
            subfield: intpoly::from_i64s(&[0, 1]),
            digit_bound,
            frontier_cap: DEFAULT_FRONTIER_CAP,
            iteration_cap: None,
            record_trace: false,
        }
    }

    fn free_index(&self) -> usize {
        self.free_param.unwrap_or(self.generic.arity - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchStatus {
    RootFound,
    Dead,
    BoundHit,
}

impl BranchStatus {
    pub fn label(self) -> &'static str {
        match self {
            BranchStatus::RootFound => "root-found",
            BranchStatus::Dead => "dead",
            BranchStatus::BoundHit => "bound-hit",
        }
    }
}

#[derive(Clone, Debug)]
pub enum TraceStep {
    /// `t -> lift(digit) + pi_F t`, applied to the unnormalized polynomial.
    SubstituteT {
        digit: ResidueElement,
        poly: BivariatePoly,
    },
    /// `x -> pi_K x + lift(root)`.
    LiftX {
        root: ResidueElement,
        poly: BivariatePoly,
    },
    /// Division by `p^q pi_K^r`, where `valuation = q e + r`, `0 <= r < e`.
    Normalize { valuation: i64, poly: BivariatePoly },
}

impl TraceStep {
    pub fn poly(&self) -> &BivariatePoly {
        match self {
            TraceStep::SubstituteT { poly, .. }
            | TraceStep::LiftX { poly, .. }
            | TraceStep::Normalize { poly, .. } => poly,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchOutcome {
    /// Digits of `t` over `k_F`, least significant first.
    pub digits: Vec<ResidueElement>,
    /// Roots in `k_K` chosen by the lifts in `x`.
    pub x_digits: Vec<ResidueElement>,
    pub status: BranchStatus,
    /// `sum lift(d_i) pi_F^i` (root-found branches).
    pub t_star: Option<FieldElement>,
    /// `P(b, t_star, x)` over `K` (root-found branches).
    pub specialized: Option<PolyOverK>,
    /// The same polynomial over `Q`, when the subfield is trivial and the
    /// fixed parameters are rational.
    pub specialized_rational: Option<Vec<BigRational>>,
    /// The integer parameter, when the subfield is trivial.
    pub reconstruction: Option<BigInt>,
    /// Whether the specialized polynomial has a root generating `K`, so
    /// that it defines `K` locally (root-found branches).
    pub defines_field: Option<bool>,
    pub trace: Vec<TraceStep>,
}

#[derive(Clone, Debug, Default)]
pub struct SearchResult {
    pub branches: Vec<BranchOutcome>,
}

impl SearchResult {
    pub fn with_status(&self, s: BranchStatus) -> impl Iterator<Item = &BranchOutcome> {
        self.branches.iter().filter(move |b| b.status == s)
    }

    pub fn count(&self, s: BranchStatus) -> usize {
        self.with_status(s).count()
    }

    /// Integer parameters of the root-found branches, in branch order.
    pub fn reconstructions(&self) -> Vec<BigInt> {
        self.with_status(BranchStatus::RootFound)
            .filter_map(|b| b.reconstruction.clone())
            .collect()
    }

    /// Root-found branches whose specialized polynomial defines `K`.
    pub fn field_defining(&self) -> impl Iterator<Item = &BranchOutcome> {
        self.with_status(BranchStatus::RootFound)
            .filter(|b| b.defines_field == Some(true))
    }
}

/// The subfield `F` as seen from inside `K`.
pub struct EmbeddedSubfield {
    pub trivial: bool,
    /// Image of the generator of `F` in `K` (a root of its polynomial).
    pub generator: FieldElement,
    pub uniformizer: FieldElement,
    pub residue: ResidueField,
    /// `(digit, lift in K)` in enumeration order.
    pub digits: Vec<(ResidueElement, FieldElement)>,
}

impl EmbeddedSubfield {
    pub fn new(k: &LocalField, subfield: &[BigInt]) -> Result<Self> {
        let p = k.p();
        if intpoly::trim(subfield.to_vec()) == intpoly::from_i64s(&[0, 1]) {
            let residue = ResidueField::with_default_modulus(p, 1)?;
            let digits = residue
                .enumerate()?
                .into_iter()
                .map(|d| {
                    let lift = k.from_i64(d.coeffs()[0] as i64);
                    (d, lift)
                })
                .collect();
            return Ok(EmbeddedSubfield {
                trivial: true,
                generator: k.zero(),
                uniformizer: k.from_i64(p as i64),
                residue,
                digits,
            });
        }
        let f = LocalField::new(p, subfield, k.precision())
            .map_err(|e| Error::EmbeddingFailed(format!("subfield: {e}")))?;
        let generator = match embed_subfield(k, subfield) {
            Ok(r) => r,
            Err(Error::NoRootInField) => {
                return Err(Error::EmbeddingFailed(
                    "subfield polynomial has no root in K".into(),
                ))
            }
            Err(e) => return Err(e),
        };
        let image = |x: &FieldElement| -> FieldElement {
            let mut acc = k.zero();
            let mut power = k.one();
            for c in x.coeffs() {
                acc = k.add(&acc, &k.scale(&power, c));
                power = k.mul(&power, &generator);
            }
            acc
        };
        let uniformizer = image(f.uniformizer());
        let residue = f.residue_field().clone();
        let digits = residue
            .enumerate()?
            .into_iter()
            .zip(f.lifts()?)
            .map(|(d, l)| (d, image(l)))
            .collect();
        Ok(EmbeddedSubfield {
            trivial: false,
            generator,
            uniformizer,
            residue,
            digits,
        })
    }

    /// `sum c_i g^i` for a rational polynomial in the generator.
    pub fn element(&self, k: &LocalField, poly: &[BigRational]) -> Result<FieldElement> {
        let mut acc = k.zero();
        let mut power = k.one();
        for (i, c) in poly.iter().enumerate() {
            if i > 0 {
                if self.trivial {
                    break;
                }
                power = k.mul(&power, &self.generator);
            }
            acc = k.add(&acc, &k.mul(&k.from_rational(c)?, &power));
        }
        Ok(acc)
    }

    fn lift(&self, d: &ResidueElement) -> &FieldElement {
        &self
            .digits
            .iter()
            .find(|(e, _)| e == d)
            .expect("digit of k_F")
            .1
    }

    /// `sum lift(d_i) pi_F^i`.
    pub fn digits_value(&self, k: &LocalField, digits: &[ResidueElement]) -> FieldElement {
        let mut acc = k.zero();
        let mut power = k.one();
        for d in digits {
            acc = k.add(&acc, &k.mul(self.lift(d), &power));
            power = k.mul(&power, &self.uniformizer);
        }
        acc
    }
}

/// The integer `sum d_i p^i` with digits in `[0, p)`, for `F = Q_p`.
pub fn reconstruct_global(
    digits: &[ResidueElement],
    p: u64,
    trivial_subfield: bool,
) -> Result<BigInt> {
    if !trivial_subfield {
        return Err(Error::UnsupportedReconstruction);
    }
    let mut acc = BigInt::zero();
    for d in digits.iter().rev() {
        acc = acc * p + d.coeffs().first().copied().unwrap_or(0);
    }
    Ok(acc)
}

#[derive(Clone)]
struct Branch {
    phi: BivariatePoly,
    digits: Vec<ResidueElement>,
    x_digits: Vec<ResidueElement>,
    iterations: usize,
    trace: Vec<TraceStep>,
}

enum Step {
    Done(Branch, BranchStatus),
    Split(Vec<Branch>),
}

struct Context<'a> {
    k: &'a LocalField,
    sub: &'a EmbeddedSubfield,
    digit_bound: usize,
    iteration_cap: usize,
    record: bool,
}

impl Context<'_> {
    fn step(&self, mut b: Branch) -> Result<Step> {
        let k = self.k;
        let (normalized, v) = b.phi.normalize(k)?;
        let reduced = normalized.reduce(k)?;
        if reduced.deg_t().unwrap_or(0) > 0 {
            // t still matters modulo pi_K: fix its next digit
            if b.digits.len() >= self.digit_bound || b.iterations >= self.iteration_cap {
                return Ok(Step::Done(b, BranchStatus::BoundHit));
            }
            let children = self
                .sub
                .digits
                .iter()
                .map(|(d, lift)| {
                    let phi = b.phi.substitute_t(k, lift, &self.sub.uniformizer);
                    let mut child = Branch {
                        phi: phi.clone(),
                        digits: b.digits.clone(),
                        x_digits: b.x_digits.clone(),
                        iterations: b.iterations + 1,
                        trace: b.trace.clone(),
                    };
                    child.digits.push(d.clone());
                    if self.record {
                        child.trace.push(TraceStep::SubstituteT {
                            digit: d.clone(),
                            poly: phi,
                        });
                    }
                    child
                })
                .collect();
            return Ok(Step::Split(children));
        }
        if v != 0 && self.record {
            b.trace.push(TraceStep::Normalize {
                valuation: v,
                poly: normalized.clone(),
            });
        }
        b.phi = normalized;
        let kk = k.residue_field();
        let xpoly = reduced.constant_in_t(kk);
        match ResidueField::poly_degree(&xpoly) {
            None | Some(0) => return Ok(Step::Done(b, BranchStatus::Dead)),
            Some(1) => return Ok(Step::Done(b, BranchStatus::RootFound)),
            Some(_) => {}
        }
        let roots = kk.roots_in_k(&xpoly)?;
        if roots.is_empty() {
            return Ok(Step::Done(b, BranchStatus::Dead));
        }
        if b.iterations >= self.iteration_cap {
            return Ok(Step::Done(b, BranchStatus::BoundHit));
        }
        let children = roots
            .into_iter()
            .map(|r| {
                let phi = b.phi.substitute_x(k, &k.lift(&r), k.uniformizer());
                let mut child = Branch {
                    phi: phi.clone(),
                    digits: b.digits.clone(),
                    x_digits: b.x_digits.clone(),
                    iterations: b.iterations + 1,
                    trace: b.trace.clone(),
                };
                child.x_digits.push(r.clone());
                if self.record {
                    child.trace.push(TraceStep::LiftX { root: r, poly: phi });
                }
                child
            })
            .collect();
        Ok(Step::Split(children))
    }
}

/// Runs the digit search for `job` inside `k`.
pub fn search(k: &LocalField, job: &SearchJob) -> Result<SearchResult> {
    let g = &job.generic;
    if job.fixed_params.len() + 1 != g.arity {
        return Err(Error::InvalidInput(format!(
            "{} takes {} parameters; {} fixed values given",
            g.name,
            g.arity,
            job.fixed_params.len()
        )));
    }
    let sub = EmbeddedSubfield::new(k, &job.subfield)?;
    let free = job.free_index();
    let fixed: Vec<FieldElement> = job
        .fixed_params
        .iter()
        .map(|c| sub.element(k, c))
        .collect::<Result<_>>()?;
    let phi = g.bivariate(k, &fixed, free)?;
    let ctx = Context {
        k,
        sub: &sub,
        digit_bound: job.digit_bound,
        iteration_cap: job.iteration_cap.unwrap_or(4 * job.digit_bound),
        record: job.record_trace,
    };

    let mut frontier = vec![Branch {
        phi,
        digits: vec![],
        x_digits: vec![],
        iterations: 0,
        trace: vec![],
    }];
    let mut finished: Vec<(Branch, BranchStatus)> = Vec::new();
    while !frontier.is_empty() {
        let steps: Vec<Result<Step>> = frontier.into_par_iter().map(|b| ctx.step(b)).collect();
        let mut next = Vec::new();
        for s in steps {
            match s? {
                Step::Done(b, status) => finished.push((b, status)),
                Step::Split(children) => next.extend(children),
            }
        }
        if next.len() > job.frontier_cap {
            let partial = finalize(k, job, &sub, &fixed, free, finished)?;
            return Err(Error::FrontierExplosion {
                cap: job.frontier_cap,
                partial: Box::new(partial),
            });
        }
        frontier = next;
    }
    finalize(k, job, &sub, &fixed, free, finished)
}

fn finalize(
    k: &LocalField,
    job: &SearchJob,
    sub: &EmbeddedSubfield,
    fixed: &[FieldElement],
    free: usize,
    finished: Vec<(Branch, BranchStatus)>,
) -> Result<SearchResult> {
    let rational_fixed: Option<Vec<BigRational>> = if sub.trivial {
        Some(
            job.fixed_params
                .iter()
                .map(|c| c.first().cloned().unwrap_or_else(BigRational::zero))
                .collect(),
        )
    } else {
        None
    };
    let branches = finished
        .into_par_iter()
        .map(|(b, status)| {
            let mut out = BranchOutcome {
                digits: b.digits,
                x_digits: b.x_digits,
                status,
                t_star: None,
                specialized: None,
                specialized_rational: None,
                reconstruction: None,
                defines_field: None,
                trace: b.trace,
            };
            if status != BranchStatus::RootFound {
                return Ok(out);
            }
            let t_star = sub.digits_value(k, &out.digits);
            let mut params = fixed.to_vec();
            params.insert(free, t_star.clone());
            let specialized = job.generic.specialize(k, &params)?;
            if let Some(rf) = &rational_fixed {
                let t = reconstruct_global(&out.digits, k.p(), true)?;
                let mut params = rf.clone();
                params.insert(free, BigRational::from_integer(t.clone()));
                out.specialized_rational = Some(job.generic.specialize_rational(&params)?);
                out.reconstruction = Some(t);
            }
            // a repeated factor does not affect which roots exist, so the
            // check runs on the squarefree part when it is available
            let to_verify = match &out.specialized_rational {
                Some(q) => PolyOverK::from_rationals(k, &intpoly::squarefree_part_q(q))?,
                None => specialized.clone(),
            };
            let verified = count_roots(&to_verify, k, None).map_err(|e| {
                Error::VerificationFailed(format!("digits {:?}: {e}", digit_list(&out.digits)))
            })?;
            if verified.count == 0 {
                return Err(Error::VerificationFailed(format!(
                    "digits {:?}: specialized polynomial has no root",
                    digit_list(&out.digits)
                )));
            }
            out.defines_field =
                Some(to_verify.degree() == k.degree() && has_generating_root(&to_verify, k)?);
            out.t_star = Some(t_star);
            out.specialized = Some(specialized);
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchResult { branches })
}

fn digit_list(ds: &[ResidueElement]) -> Vec<Vec<u64>> {
    ds.iter().map(|d| d.coeffs().to_vec()).collect()
}

/// Local half of the splitting-model confirmation: whether
/// `Q_p[x]/(candidate)` contains a root of `local_poly`.
///
/// When the candidate's quotient cannot be analyzed directly (its Newton
/// polygon data is not of the supported shape), the equivalent question
/// is asked the other way round: for irreducible polynomials of equal
/// degree, `local_poly` has a root in `Q_p[x]/(candidate)` exactly when
/// `candidate` has a root in `Q_p[x]/(local_poly)`.
pub fn check_gsm_local(
    p: u64,
    local_poly: &[BigInt],
    candidate: &[BigInt],
    precision: i64,
) -> Result<bool> {
    let local_poly = intpoly::trim(local_poly.to_vec());
    let candidate = intpoly::trim(candidate.to_vec());
    if !intpoly::is_monic(&candidate) || !intpoly::is_monic(&local_poly) {
        return Err(Error::InvalidInput("polynomials must be monic".into()));
    }
    if local_poly.len() != candidate.len() {
        return Ok(false);
    }
    let (field, target) = match LocalField::new(p, &candidate, precision) {
        Ok(f) => (f, &local_poly),
        Err(Error::UniformizerNotFound(_)) => {
            (LocalField::new(p, &local_poly, precision)?, &candidate)
        }
        Err(e) => return Err(e),
    };
    let phi = PolyOverK::from_ints(&field, target);
    Ok(count_roots(&phi, &field, None)?.count >= 1)
}
