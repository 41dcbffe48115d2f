//! Finite extensions `K = Q_p[x]/(g)` with their valuation, uniformizer and
//! residue map.
//!
//! Elements are coordinate vectors over the power basis `1, a, ..., a^(n-1)`
//! of a root `a` of the defining polynomial. The valuation is read off the
//! norm, computed as the determinant of the multiplication matrix.
//!
//! Ramification data comes from one Newton-polygon step: the reduction of
//! `g` must be a power of a single irreducible `psi`, and the `psi`-adic
//! Newton polygon of `g` then has one side of slope `-h/e'`. The residual
//! polynomial attached to that side decides `e` and `f` when it is
//! irreducible (and either `psi` is linear or the residual polynomial is).
//! Fields needing a second-order polygon are rejected with
//! `UniformizerNotFound`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::intpoly;
use crate::linalg;
use crate::padic::{int_valuation, is_prime, PadicNumber, Valuation, DEFAULT_PRECISION};
use crate::residue::{fp_poly, ResidueElement, ResidueField, ENUMERATION_GUARD};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    coeffs: Vec<PadicNumber>,
}

impl FieldElement {
    /// Wraps power-basis coordinates; the caller keeps them consistent with
    /// the field they are used in.
    pub fn from_coords(coeffs: Vec<PadicNumber>) -> Self {
        FieldElement { coeffs }
    }

    pub fn coeffs(&self) -> &[PadicNumber] {
        &self.coeffs
    }

    /// Zero to the tracked precision in every coordinate.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PadicNumber::is_zero)
    }

    /// Coordinates as rationals, when every coordinate is nonzero-or-zero to
    /// the tracked precision (always succeeds).
    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.coeffs.iter().map(PadicNumber::to_rational).collect()
    }

    /// Smallest absolute precision among the coordinates.
    pub fn abs_precision(&self) -> i64 {
        self.coeffs
            .iter()
            .map(PadicNumber::abs_precision)
            .min()
            .unwrap_or(0)
    }

    /// The element as a single rational, if it lies in `Q_p`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(PadicNumber::is_zero) {
            Some(self.coeffs[0].to_rational())
        } else {
            None
        }
    }
}

/// Construction options for [`LocalField`].
#[derive(Clone, Debug)]
pub struct FieldOptions {
    /// Relative precision, in base-`p` digits, of freshly created coordinates.
    pub precision: i64,
    /// Monic modulus for the residue field (constant term first).
    pub residue_modulus: Option<Vec<u64>>,
    /// Declared `(e, f)`, checked against the computed values.
    pub e_f_hint: Option<(usize, usize)>,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions {
            precision: DEFAULT_PRECISION,
            residue_modulus: None,
            e_f_hint: None,
        }
    }
}

/// What the Newton-polygon step found.
#[derive(Clone, Debug)]
pub struct Ramification {
    /// Lift of the irreducible factor of the reduction of `g`.
    pub psi: Vec<BigInt>,
    /// Slope of the `psi`-polygon is `-slope_num / slope_den`.
    pub slope_num: i64,
    pub slope_den: i64,
}

#[derive(Debug)]
pub struct LocalField {
    p: u64,
    defining: Vec<BigInt>,
    n: usize,
    e: usize,
    f: usize,
    prec: i64,
    /// `-g_i` as p-adic numbers, `None` for vanishing coefficients.
    reduction: Vec<Option<PadicNumber>>,
    uniformizer: FieldElement,
    uniformizer_inv: FieldElement,
    inertial_gen: FieldElement,
    residue: ResidueField,
    ramification: Ramification,
    lifts: OnceLock<Vec<FieldElement>>,
    /// Root of an Eisenstein polynomial: valuations follow from the
    /// coordinates directly.
    eisenstein: bool,
    /// Residues of `1, a, ..., a^(n-1)`.
    residue_basis: OnceLock<Vec<ResidueElement>>,
}

impl LocalField {
    pub fn new(p: u64, defining: &[BigInt], precision: i64) -> Result<Self> {
        Self::with_options(
            p,
            defining,
            FieldOptions {
                precision,
                ..Default::default()
            },
        )
    }

    /// `Q_p` itself.
    pub fn rationals(p: u64, precision: i64) -> Result<Self> {
        Self::new(p, &intpoly::from_i64s(&[0, 1]), precision)
    }

    pub fn with_options(p: u64, defining: &[BigInt], opts: FieldOptions) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        let g = intpoly::trim(defining.to_vec());
        if g.len() < 2 || !intpoly::is_monic(&g) {
            return Err(Error::InvalidInput(
                "defining polynomial must be monic of degree >= 1".into(),
            ));
        }
        if opts.precision < 2 {
            return Err(Error::InvalidInput("precision must be at least 2".into()));
        }
        let n = g.len() - 1;
        let prec = opts.precision;
        let ram = analyze(&g, p)?;
        if let Some((he, hf)) = opts.e_f_hint {
            if (he, hf) != (ram.e, ram.f) {
                return Err(Error::InvalidInput(format!(
                    "declared (e, f) = ({he}, {hf}) but the field has ({}, {})",
                    ram.e, ram.f
                )));
            }
        }
        let const_prec = 2 * prec + 16;
        let reduction = g[..n]
            .iter()
            .map(|c| (!c.is_zero()).then(|| PadicNumber::from_integer(&-c, p, const_prec)))
            .collect();
        let residue = match &opts.residue_modulus {
            Some(m) => {
                let k = ResidueField::new(p, m.clone())?;
                if k.degree() != ram.f {
                    return Err(Error::InvalidInput(format!(
                        "residue modulus has degree {} but f = {}",
                        k.degree(),
                        ram.f
                    )));
                }
                k
            }
            None => ResidueField::with_default_modulus(p, ram.f)?,
        };
        let placeholder = FieldElement { coeffs: vec![] };
        let mut field = LocalField {
            p,
            defining: g,
            n,
            e: ram.e,
            f: ram.f,
            prec,
            reduction,
            uniformizer: placeholder.clone(),
            uniformizer_inv: placeholder.clone(),
            inertial_gen: placeholder,
            residue,
            ramification: Ramification {
                psi: ram.psi.clone(),
                slope_num: ram.h,
                slope_den: ram.e_prime,
            },
            lifts: OnceLock::new(),
            eisenstein: ram.e == n && ram.h == 1 && ram.psi == intpoly::from_i64s(&[0, 1]),
            residue_basis: OnceLock::new(),
        };
        field.uniformizer = field.build_uniformizer(&ram)?;
        field.uniformizer_inv = field.inv(&field.uniformizer)?;
        field.inertial_gen = field.build_inertial_generator(&ram)?;
        Ok(field)
    }

    fn build_uniformizer(&self, ram: &Analysis) -> Result<FieldElement> {
        let pi = if ram.e == 1 {
            self.from_int(&BigInt::from(self.p))
        } else {
            let theta = self.eval_int_poly(&ram.psi, &self.generator());
            // a*h + b*e = 1 with a in [0, e)
            let e = ram.e as i64;
            let a = modular_inverse_i64(ram.h.rem_euclid(e), e).ok_or_else(|| {
                Error::UniformizerNotFound(format!(
                    "gcd(valuation {}, e {}) is not 1",
                    ram.h, ram.e
                ))
            })?;
            let b = (1 - a * ram.h) / e;
            self.mul_pow_p(&self.pow(&theta, a as u32), b)
        };
        if self.valuation(&pi)? != Valuation::Exact(1) {
            return Err(Error::UniformizerNotFound(
                "candidate uniformizer does not have valuation 1".into(),
            ));
        }
        Ok(pi)
    }

    fn build_inertial_generator(&self, ram: &Analysis) -> Result<FieldElement> {
        let p = self.p;
        let modulus = self.residue.modulus().to_vec();
        if self.f == 1 {
            // monic linear modulus x + c has the integer root -c
            return Ok(self.from_int(&-BigInt::from(modulus[0])));
        }
        // residue of `raw` generates k and is a root of `raw_modulus`
        let (raw, raw_modulus) = match &ram.generator {
            RawGenerator::Root => (self.generator(), ram.psi_bar.clone()),
            RawGenerator::Residual { theta_power, shift } => {
                let theta = self.eval_int_poly(&ram.psi, &self.generator());
                let y = self.mul_pow_p(&self.pow(&theta, *theta_power as u32), -shift);
                (y, ram.residual.clone())
            }
        };
        let raw_field = ResidueField::new(p, raw_modulus)?;
        let start = raw_field
            .enumerate()?
            .into_iter()
            .find(|z| raw_field.eval_fp(&modulus, z).is_zero())
            .ok_or_else(|| Error::InvalidInput("residue modulus has no root in k".into()))?;
        let mut approx = self.zero();
        let mut power = self.one();
        for &c in start.coeffs() {
            approx = self.add(&approx, &self.scale_int(&power, &BigInt::from(c)));
            power = self.mul(&power, &raw);
        }
        let m_int: Vec<BigInt> = modulus.iter().map(|&c| BigInt::from(c)).collect();
        let dm: Vec<BigInt> = m_int
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        self.newton_refine(&m_int, &dm, approx)
    }

    /// Newton iteration for a root of an integer polynomial whose derivative
    /// is a unit at the root.
    fn newton_refine(
        &self,
        poly: &[BigInt],
        deriv: &[BigInt],
        mut z: FieldElement,
    ) -> Result<FieldElement> {
        let mut last = i64::MIN;
        for _ in 0..96 {
            let value = self.eval_int_poly(poly, &z);
            let v = self.valuation(&value)?;
            match v {
                Valuation::AtLeast(_) => return Ok(z),
                Valuation::Exact(v) if v <= last => return Ok(z),
                Valuation::Exact(v) => last = v,
            }
            let d = self.eval_int_poly(deriv, &z);
            z = self.sub(&z, &self.div(&value, &d)?);
        }
        Ok(z)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn ramification_index(&self) -> usize {
        self.e
    }

    pub fn residue_degree(&self) -> usize {
        self.f
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn defining_polynomial(&self) -> &[BigInt] {
        &self.defining
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.residue
    }

    pub fn uniformizer(&self) -> &FieldElement {
        &self.uniformizer
    }

    pub fn uniformizer_inv(&self) -> &FieldElement {
        &self.uniformizer_inv
    }

    pub fn inertial_generator(&self) -> &FieldElement {
        &self.inertial_gen
    }

    pub fn ramification(&self) -> &Ramification {
        &self.ramification
    }

    // ---- constructors ----

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: vec![PadicNumber::zero(self.p, self.prec); self.n],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(&BigInt::one())
    }

    pub fn from_int(&self, c: &BigInt) -> FieldElement {
        self.from_padic(PadicNumber::from_integer(c, self.p, self.prec))
    }

    pub fn from_i64(&self, c: i64) -> FieldElement {
        self.from_int(&BigInt::from(c))
    }

    pub fn from_rational(&self, q: &BigRational) -> Result<FieldElement> {
        Ok(self.from_padic(PadicNumber::from_big_rational(q, self.p, self.prec)?))
    }

    pub fn from_padic(&self, c: PadicNumber) -> FieldElement {
        let mut coeffs = vec![PadicNumber::zero(self.p, self.prec); self.n];
        coeffs[0] = c;
        FieldElement { coeffs }
    }

    pub fn from_coeffs(&self, coeffs: Vec<PadicNumber>) -> Result<FieldElement> {
        if coeffs.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates, got {}",
                self.n,
                coeffs.len()
            )));
        }
        Ok(FieldElement { coeffs })
    }

    /// Coordinates given as integers (missing ones are zero).
    pub fn from_int_coeffs(&self, cs: &[BigInt]) -> Result<FieldElement> {
        if cs.len() > self.n {
            return Err(Error::InvalidInput("too many coordinates".into()));
        }
        let mut coeffs: Vec<PadicNumber> = cs
            .iter()
            .map(|c| PadicNumber::from_integer(c, self.p, self.prec))
            .collect();
        coeffs.resize(self.n, PadicNumber::zero(self.p, self.prec));
        Ok(FieldElement { coeffs })
    }

    /// The root `a` of the defining polynomial.
    pub fn generator(&self) -> FieldElement {
        if self.n == 1 {
            return self.from_int(&-&self.defining[0]);
        }
        let mut cs = vec![BigInt::zero(); self.n];
        cs[1] = BigInt::one();
        self.from_int_coeffs(&cs).unwrap()
    }

    // ---- arithmetic ----

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x.add_ref(y))
                .collect(),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x.sub_ref(y))
                .collect(),
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().map(PadicNumber::neg_ref).collect(),
        }
    }

    pub fn scale(&self, a: &FieldElement, c: &PadicNumber) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().map(|x| x.mul_ref(c)).collect(),
        }
    }

    pub fn scale_int(&self, a: &FieldElement, c: &BigInt) -> FieldElement {
        if c.is_one() {
            return a.clone();
        }
        self.scale(a, &PadicNumber::from_integer(c, self.p, 2 * self.prec + 16))
    }

    /// Multiplication by `p^k`, exact.
    pub fn mul_pow_p(&self, a: &FieldElement, k: i64) -> FieldElement {
        FieldElement {
            coeffs: a.coeffs.iter().map(|x| x.shift(k)).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let n = self.n;
        let mut prod: Vec<Option<PadicNumber>> = vec![None; 2 * n - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            for (j, y) in b.coeffs.iter().enumerate() {
                let t = x.mul_ref(y);
                prod[i + j] = Some(match prod[i + j].take() {
                    None => t,
                    Some(acc) => acc.add_ref(&t),
                });
            }
        }
        let mut prod: Vec<PadicNumber> = prod.into_iter().map(Option::unwrap).collect();
        for k in (n..2 * n - 1).rev() {
            let c = prod[k].clone();
            for (i, r) in self.reduction.iter().enumerate() {
                if let Some(r) = r {
                    prod[k - n + i] = prod[k - n + i].add_ref(&c.mul_ref(r));
                }
            }
        }
        prod.truncate(n);
        FieldElement { coeffs: prod }
    }

    /// Multiplication by the generator `a`.
    fn mul_by_generator(&self, x: &FieldElement) -> FieldElement {
        let n = self.n;
        if n == 1 {
            return self.mul(x, &self.generator());
        }
        let top = x.coeffs[n - 1].clone();
        let mut coeffs = Vec::with_capacity(n);
        coeffs.push(PadicNumber::zero(
            self.p,
            top.abs_precision().max(self.prec),
        ));
        coeffs.extend(x.coeffs[..n - 1].iter().cloned());
        for (i, r) in self.reduction.iter().enumerate() {
            if let Some(r) = r {
                coeffs[i] = coeffs[i].add_ref(&top.mul_ref(r));
            }
        }
        FieldElement { coeffs }
    }

    pub fn pow(&self, a: &FieldElement, mut e: u32) -> FieldElement {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        r
    }

    /// Rows are the coordinates of `x * a^j`.
    fn multiplication_matrix(&self, x: &FieldElement) -> Vec<Vec<PadicNumber>> {
        let mut rows = Vec::with_capacity(self.n);
        let mut cur = x.clone();
        for j in 0..self.n {
            if j > 0 {
                cur = self.mul_by_generator(&cur);
            }
            rows.push(cur.coeffs.clone());
        }
        rows
    }

    pub fn norm(&self, x: &FieldElement) -> PadicNumber {
        linalg::determinant(self.multiplication_matrix(x), self.p)
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.is_zero() {
            return Err(Error::PrecisionExhausted(
                "inverse of an element that is zero to precision".into(),
            ));
        }
        // x * y = 1, i.e. sum_j y_j * (x a^j) = 1; transpose the row matrix
        let rows = self.multiplication_matrix(x);
        let cols: Vec<Vec<PadicNumber>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| rows[j][i].clone()).collect())
            .collect();
        let rhs = self.one().coeffs;
        let y = linalg::solve(cols, rhs)?;
        Ok(FieldElement { coeffs: y })
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Evaluates an integer polynomial at `x`.
    pub fn eval_int_poly(&self, poly: &[BigInt], x: &FieldElement) -> FieldElement {
        let mut acc = self.zero();
        for (i, c) in poly.iter().enumerate().rev() {
            if i + 1 < poly.len() {
                acc = self.mul(&acc, x);
            }
            acc = self.add(&acc, &self.from_int(c));
        }
        acc
    }

    /// Evaluates a rational polynomial at `x`.
    pub fn eval_rational_poly(
        &self,
        poly: &[BigRational],
        x: &FieldElement,
    ) -> Result<FieldElement> {
        let mut acc = self.zero();
        for (i, c) in poly.iter().enumerate().rev() {
            if i + 1 < poly.len() {
                acc = self.mul(&acc, x);
            }
            acc = self.add(&acc, &self.from_rational(c)?);
        }
        Ok(acc)
    }

    /// Evaluates a polynomial with coefficients in this field at `x`.
    pub fn eval_poly(&self, poly: &[FieldElement], x: &FieldElement) -> FieldElement {
        let mut acc = self.zero();
        for (i, c) in poly.iter().enumerate().rev() {
            if i + 1 < poly.len() {
                acc = self.mul(&acc, x);
            }
            acc = self.add(&acc, c);
        }
        acc
    }

    // ---- valuation, residue, lift ----

    /// `nu_K`, normalized so the uniformizer has valuation 1.
    pub fn valuation(&self, x: &FieldElement) -> Result<Valuation> {
        if self.eisenstein {
            return Ok(self.eisenstein_valuation(x));
        }
        self.norm_valuation(x)
    }

    /// `min(e * v_p(c_i) + i)`, valid when the generator is a uniformizer:
    /// the terms have distinct valuations.
    fn eisenstein_valuation(&self, x: &FieldElement) -> Valuation {
        let e = self.e as i64;
        let mut exact = i64::MAX;
        let mut bound = i64::MAX;
        for (i, c) in x.coeffs.iter().enumerate() {
            let i = i as i64;
            if c.is_zero() {
                bound = bound.min(e * c.lower_valuation() + i);
            } else {
                exact = exact.min(e * c.lower_valuation() + i);
                bound = bound.min(e * c.abs_precision() + i);
            }
        }
        if exact < bound {
            Valuation::Exact(exact)
        } else {
            Valuation::AtLeast(bound)
        }
    }

    /// `v_p(N(x)) / f`, valid in every field.
    pub fn norm_valuation(&self, x: &FieldElement) -> Result<Valuation> {
        let f = self.f as i64;
        if x.is_zero() {
            // coordinates all vanish: each term has nu >= e * abs
            let bound = x.abs_precision() * self.e as i64;
            return Ok(Valuation::AtLeast(bound));
        }
        match self.norm(x).valuation() {
            Valuation::Exact(v) => {
                if v.rem_euclid(f) != 0 {
                    return Err(Error::ZeroDivisorDetected(format!(
                        "norm valuation {v} is not divisible by f = {f}; defining polynomial reducible?"
                    )));
                }
                Ok(Valuation::Exact(v / f))
            }
            Valuation::AtLeast(b) => Ok(Valuation::AtLeast(Integer::div_ceil(&b, &f))),
        }
    }

    /// Exact valuation or a precision error.
    pub fn exact_valuation(&self, x: &FieldElement) -> Result<i64> {
        match self.valuation(x)? {
            Valuation::Exact(v) => Ok(v),
            Valuation::AtLeast(b) => Err(Error::PrecisionExhausted(format!(
                "element is zero to valuation {b}"
            ))),
        }
    }

    /// Lifts of all residue classes in enumeration order.
    pub fn lifts(&self) -> Result<&[FieldElement]> {
        if self.residue.order() > ENUMERATION_GUARD {
            return Err(Error::FieldTooLarge(self.residue.order()));
        }
        Ok(self.lifts.get_or_init(|| {
            self.residue
                .enumerate()
                .expect("guard checked")
                .iter()
                .map(|c| self.lift_uncached(c))
                .collect()
        }))
    }

    fn lift_uncached(&self, c: &ResidueElement) -> FieldElement {
        let mut acc = self.zero();
        let mut power = self.one();
        for (i, &d) in c.coeffs().iter().enumerate() {
            if i > 0 {
                power = self.mul(&power, &self.inertial_gen);
            }
            if d != 0 {
                acc = self.add(&acc, &self.scale_int(&power, &BigInt::from(d)));
            }
        }
        acc
    }

    /// Canonical lift: integer representatives of the coordinates evaluated
    /// at the inertial generator.
    pub fn lift(&self, c: &ResidueElement) -> FieldElement {
        match self.lifts() {
            Ok(table) => table[self.residue.index_of(c) as usize].clone(),
            Err(_) => self.lift_uncached(c),
        }
    }

    pub fn residue(&self, x: &FieldElement) -> Result<ResidueElement> {
        match self.valuation(x)? {
            Valuation::Exact(v) if v < 0 => return Err(Error::NotIntegral(v)),
            Valuation::Exact(v) if v > 0 => return Ok(self.residue.zero()),
            Valuation::AtLeast(b) if b >= 1 => return Ok(self.residue.zero()),
            Valuation::AtLeast(_) => {
                return Err(Error::PrecisionExhausted(
                    "residue of an imprecise zero".into(),
                ))
            }
            Valuation::Exact(_) => {}
        }
        if x.coeffs.iter().all(|c| c.lower_valuation() >= 0) {
            // integral coordinates: the residue map is linear in them
            let basis = self.residue_basis()?;
            let mut acc = self.residue.zero();
            for (c, b) in x.coeffs.iter().zip(basis) {
                let d = c.residue_digit()?;
                if d != 0 {
                    acc = self
                        .residue
                        .add(&acc, &self.residue.mul(&self.residue.from_int(d), b));
                }
            }
            return Ok(acc);
        }
        self.residue_by_search(x)
    }

    fn residue_basis(&self) -> Result<&[ResidueElement]> {
        if let Some(b) = self.residue_basis.get() {
            return Ok(b);
        }
        let mut basis = Vec::with_capacity(self.n);
        let mut power = self.one();
        for _ in 0..self.n {
            basis.push(self.residue_by_search(&power)?);
            power = self.mul_by_generator(&power);
        }
        Ok(self.residue_basis.get_or_init(|| basis))
    }

    /// Exhaustive search for the class `c` with `nu(x - lift(c)) >= 1`,
    /// for `x` of valuation zero.
    fn residue_by_search(&self, x: &FieldElement) -> Result<ResidueElement> {
        if self.valuation(x)?.at_least(1) == Some(true) {
            return Ok(self.residue.zero());
        }
        let lifts = self.lifts()?;
        let classes = self.residue.enumerate()?;
        for (c, l) in classes.iter().zip(lifts).skip(1) {
            if self.valuation(&self.sub(x, l))?.at_least(1) == Some(true) {
                return Ok(c.clone());
            }
        }
        Err(Error::PrecisionExhausted(
            "no residue class matched; precision too low".into(),
        ))
    }
}

fn modular_inverse_i64(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    (0..m).find(|&x| (a * x).rem_euclid(m) == 1)
}

#[derive(Clone, Debug)]
enum RawGenerator {
    /// The root `a` itself; its residue is a root of `psi_bar`.
    Root,
    /// `psi(a)^theta_power / p^shift`; its residue is a root of the residual
    /// polynomial.
    Residual { theta_power: i64, shift: i64 },
}

#[derive(Clone, Debug)]
struct Analysis {
    psi: Vec<BigInt>,
    psi_bar: Vec<u64>,
    e: usize,
    f: usize,
    e_prime: i64,
    h: i64,
    residual: Vec<u64>,
    generator: RawGenerator,
}

/// One Newton-polygon step on `g` (monic, integral).
fn analyze(g: &[BigInt], p: u64) -> Result<Analysis> {
    let n = g.len() - 1;
    let g_bar = intpoly::mod_p(g, p);
    let psi_bar = fp_poly::radical(&g_bar, p);
    let d = psi_bar.len() - 1;
    if !n.is_multiple_of(d) || fp_poly::pow(&psi_bar, n / d, p) != fp_poly::trim(g_bar.clone()) {
        return Err(Error::ZeroDivisorDetected(
            "reduction of the defining polynomial has several irreducible factors".into(),
        ));
    }
    if !fp_poly::is_irreducible(&psi_bar, p) {
        return Err(Error::ZeroDivisorDetected(
            "reduction of the defining polynomial has several irreducible factors".into(),
        ));
    }
    let m = n / d;
    let psi: Vec<BigInt> = psi_bar.iter().map(|&c| BigInt::from(c)).collect();
    if m == 1 {
        // unramified
        return Ok(Analysis {
            psi,
            psi_bar,
            e: 1,
            f: d,
            e_prime: 1,
            h: 0,
            residual: vec![],
            generator: RawGenerator::Root,
        });
    }
    let parts = intpoly::adic_expansion(g, &psi);
    let vals: Vec<Option<i64>> = (0..=m)
        .map(|k| {
            parts
                .get(k)
                .and_then(|a| a.iter().filter_map(|c| int_valuation(c, p)).min())
        })
        .collect();
    let Some(l) = vals[0] else {
        return Err(Error::ZeroDivisorDetected(
            "psi divides the defining polynomial".into(),
        ));
    };
    let mi = m as i64;
    for (k, v) in vals.iter().enumerate() {
        if let Some(v) = v {
            if v * mi < l * (mi - k as i64) {
                return Err(Error::ZeroDivisorDetected(
                    "Newton polygon has more than one side".into(),
                ));
            }
        }
    }
    let gcd = l.gcd(&mi);
    let h = l / gcd;
    let e_prime = mi / gcd;
    let deg_r = (mi / e_prime) as usize;
    // residual coefficients live in GF(p)[x]/psi_bar
    let mut residual: Vec<Vec<u64>> = Vec::with_capacity(deg_r + 1);
    for j in 0..=deg_r {
        let k = j * e_prime as usize;
        let on_line = vals[k].is_some_and(|v| v == l - h * j as i64);
        if on_line {
            let shift = crate::padic::pow_p(p, l - h * j as i64);
            let scaled: Vec<BigInt> = parts[k].iter().map(|c| c / &shift).collect();
            let reduced = fp_poly::div_rem(&intpoly::mod_p(&scaled, p), &psi_bar, p).1;
            residual.push(reduced);
        } else {
            residual.push(vec![]);
        }
    }
    if d == 1 {
        let r: Vec<u64> = residual
            .iter()
            .map(|c| c.first().copied().unwrap_or(0))
            .collect();
        if !fp_poly::is_irreducible(&r, p) {
            return Err(Error::UniformizerNotFound(format!(
                "residual polynomial {r:?} is not irreducible; a higher-order Newton polygon is needed"
            )));
        }
        let r = fp_poly::monic(&r, p);
        Ok(Analysis {
            psi,
            psi_bar,
            e: e_prime as usize,
            f: deg_r,
            e_prime,
            h,
            residual: r,
            generator: RawGenerator::Residual {
                theta_power: e_prime,
                shift: h,
            },
        })
    } else if deg_r == 1 {
        Ok(Analysis {
            psi,
            psi_bar,
            e: e_prime as usize,
            f: d,
            e_prime,
            h,
            residual: vec![],
            generator: RawGenerator::Root,
        })
    } else {
        Err(Error::UniformizerNotFound(
            "residual polynomial over a nonprime residue field of degree > 1".into(),
        ))
    }
}
