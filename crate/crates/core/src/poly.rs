//! Polynomials over `K` in `x`, and the bivariate `phi(x, t)` used by the
//! parameter search.

use crate::error::{Error, Result};
use crate::field::{FieldElement, LocalField};
use crate::padic::Valuation;
use crate::residue::{ResidueElement, ResidueField};

/// Minimum valuation over coefficients. Zero-to-precision coefficients are
/// skipped, but only while their bound exceeds the minimum found; otherwise
/// the minimum is not trustworthy.
fn content_of<'a, I>(field: &LocalField, coeffs: I) -> Result<i64>
where
    I: IntoIterator<Item = &'a FieldElement>,
{
    let mut min_exact: Option<i64> = None;
    let mut min_bound: Option<i64> = None;
    for c in coeffs {
        match field.valuation(c)? {
            Valuation::Exact(v) => min_exact = Some(min_exact.map_or(v, |m| m.min(v))),
            Valuation::AtLeast(b) => min_bound = Some(min_bound.map_or(b, |m| m.min(b))),
        }
    }
    match (min_exact, min_bound) {
        (None, _) => Err(Error::PrecisionExhausted(
            "every coefficient is zero to precision".into(),
        )),
        (Some(v), Some(b)) if b <= v => Err(Error::PrecisionExhausted(format!(
            "content valuation {v} not separated from precision bound {b}"
        ))),
        (Some(v), _) => Ok(v),
    }
}

/// Division by `p^q pi^r` where `v = q e + r` with `0 <= r < e`: the
/// power of `p` is removed exactly and only `pi^-r` is multiplied in.
struct Normalizer {
    q: i64,
    pi_inv_r: Option<FieldElement>,
}

impl Normalizer {
    fn new(field: &LocalField, v: i64) -> Self {
        let e = field.ramification_index() as i64;
        let (q, r) = (v.div_euclid(e), v.rem_euclid(e));
        Normalizer {
            q,
            pi_inv_r: (r > 0).then(|| field.pow(field.uniformizer_inv(), r as u32)),
        }
    }

    fn apply(&self, field: &LocalField, c: &FieldElement) -> FieldElement {
        let c = field.mul_pow_p(c, -self.q);
        match &self.pi_inv_r {
            Some(m) => field.mul(&c, m),
            None => c,
        }
    }
}

/// Univariate polynomial over `K`, constant term first.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyOverK {
    pub coeffs: Vec<FieldElement>,
}

impl PolyOverK {
    pub fn new(coeffs: Vec<FieldElement>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(FieldElement::is_zero) {
            coeffs.pop();
        }
        PolyOverK { coeffs }
    }

    pub fn from_ints(field: &LocalField, cs: &[num_bigint::BigInt]) -> Self {
        Self::new(cs.iter().map(|c| field.from_int(c)).collect())
    }

    pub fn from_rationals(field: &LocalField, cs: &[num_rational::BigRational]) -> Result<Self> {
        Ok(Self::new(
            cs.iter()
                .map(|c| field.from_rational(c))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, field: &LocalField, x: &FieldElement) -> FieldElement {
        field.eval_poly(&self.coeffs, x)
    }

    pub fn derivative(&self, field: &LocalField) -> PolyOverK {
        if self.coeffs.len() <= 1 {
            return PolyOverK::new(vec![field.zero()]);
        }
        PolyOverK::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| field.scale_int(c, &(i as i64).into()))
                .collect(),
        )
    }

    pub fn content_valuation(&self, field: &LocalField) -> Result<i64> {
        content_of(field, &self.coeffs)
    }

    /// Divides by `p^q pi^r`, where `v = q e + r` is the content valuation.
    pub fn normalize(&self, field: &LocalField) -> Result<PolyOverK> {
        let v = self.content_valuation(field)?;
        if v == 0 {
            return Ok(self.clone());
        }
        let m = Normalizer::new(field, v);
        Ok(PolyOverK {
            coeffs: self.coeffs.iter().map(|c| m.apply(field, c)).collect(),
        })
    }

    /// Coefficient-wise residue of a normalized polynomial.
    pub fn reduce(&self, field: &LocalField) -> Result<Vec<ResidueElement>> {
        let v = self.content_valuation(field)?;
        if v != 0 {
            return Err(Error::NotNormalized(v));
        }
        self.coeffs.iter().map(|c| field.residue(c)).collect()
    }

    /// `phi(scale * x + shift)`.
    pub fn substitute(
        &self,
        field: &LocalField,
        shift: &FieldElement,
        scale: &FieldElement,
    ) -> PolyOverK {
        // Horner with the linear polynomial scale*x + shift
        let mut acc: Vec<FieldElement> = vec![];
        for c in self.coeffs.iter().rev() {
            let mut next = vec![field.zero(); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i] = field.add(&next[i], &field.mul(a, shift));
                next[i + 1] = field.add(&next[i + 1], &field.mul(a, scale));
            }
            next[0] = field.add(&next[0], c);
            acc = next;
        }
        PolyOverK { coeffs: acc }
    }

    /// `x^d * phi(1/x)`.
    pub fn reversed(&self) -> PolyOverK {
        PolyOverK {
            coeffs: self.coeffs.iter().rev().cloned().collect(),
        }
    }
}

/// `phi(x, t) = sum_i (sum_j a_{i,j} t^j) x^i`. `rows[i][j] = a_{i,j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly {
    pub rows: Vec<Vec<FieldElement>>,
}

/// Reduction of a normalized bivariate polynomial: `rows[i][j]` in `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedBivariate {
    pub rows: Vec<Vec<ResidueElement>>,
}

impl ReducedBivariate {
    pub fn deg_x(&self) -> Option<usize> {
        self.rows
            .iter()
            .rposition(|r| r.iter().any(|c| !c.is_zero()))
    }

    pub fn deg_t(&self) -> Option<usize> {
        self.rows
            .iter()
            .filter_map(|r| r.iter().rposition(|c| !c.is_zero()))
            .max()
    }

    /// The polynomial in `x` when `deg_t <= 0`.
    pub fn constant_in_t(&self, k: &ResidueField) -> Vec<ResidueElement> {
        self.rows
            .iter()
            .map(|r| r.first().cloned().unwrap_or_else(|| k.zero()))
            .collect()
    }
}

impl BivariatePoly {
    pub fn new(rows: Vec<Vec<FieldElement>>) -> Self {
        BivariatePoly { rows }
    }

    pub fn deg_x(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    fn coefficients(&self) -> impl Iterator<Item = &FieldElement> {
        self.rows.iter().flatten()
    }

    pub fn content_valuation(&self, field: &LocalField) -> Result<i64> {
        content_of(field, self.coefficients())
    }

    /// Returns the normalized polynomial and the valuation divided out.
    pub fn normalize(&self, field: &LocalField) -> Result<(BivariatePoly, i64)> {
        let v = self.content_valuation(field)?;
        if v == 0 {
            return Ok((self.clone(), 0));
        }
        let m = Normalizer::new(field, v);
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|c| m.apply(field, c)).collect())
            .collect();
        Ok((BivariatePoly { rows }, v))
    }

    pub fn reduce(&self, field: &LocalField) -> Result<ReducedBivariate> {
        let v = self.content_valuation(field)?;
        if v != 0 {
            return Err(Error::NotNormalized(v));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| field.residue(c))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ReducedBivariate { rows })
    }

    /// `phi(scale * x + shift, t)`.
    pub fn substitute_x(
        &self,
        field: &LocalField,
        shift: &FieldElement,
        scale: &FieldElement,
    ) -> BivariatePoly {
        let width = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut acc: Vec<Vec<FieldElement>> = vec![];
        for row in self.rows.iter().rev() {
            let mut next = vec![vec![field.zero(); width]; acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                for (j, c) in a.iter().enumerate() {
                    next[i][j] = field.add(&next[i][j], &field.mul(c, shift));
                    next[i + 1][j] = field.add(&next[i + 1][j], &field.mul(c, scale));
                }
            }
            for (j, c) in row.iter().enumerate() {
                next[0][j] = field.add(&next[0][j], c);
            }
            acc = next;
        }
        BivariatePoly { rows: acc }
    }

    /// `phi(x, shift + scale * t)`, row by row.
    pub fn substitute_t(
        &self,
        field: &LocalField,
        shift: &FieldElement,
        scale: &FieldElement,
    ) -> BivariatePoly {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: Vec<FieldElement> = vec![];
                for c in row.iter().rev() {
                    let mut next = vec![field.zero(); acc.len() + 1];
                    for (j, a) in acc.iter().enumerate() {
                        next[j] = field.add(&next[j], &field.mul(a, shift));
                        next[j + 1] = field.add(&next[j + 1], &field.mul(a, scale));
                    }
                    next[0] = field.add(&next[0], c);
                    acc = next;
                }
                acc
            })
            .collect();
        BivariatePoly { rows }
    }

    /// `phi(x, t0)`.
    pub fn evaluate_t(&self, field: &LocalField, t0: &FieldElement) -> PolyOverK {
        PolyOverK::new(
            self.rows
                .iter()
                .map(|row| field.eval_poly(row, t0))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intpoly::from_i64s;

    fn q5() -> LocalField {
        LocalField::rationals(5, 30).unwrap()
    }

    fn poly(k: &LocalField, cs: &[i64]) -> PolyOverK {
        PolyOverK::from_ints(k, &from_i64s(cs))
    }

    #[test]
    fn content_examples() {
        let k = q5();
        assert_eq!(poly(&k, &[25, 0, 5]).content_valuation(&k).unwrap(), 1);
        let e5 = LocalField::new(5, &from_i64s(&[5, 0, 15, 0, 0, 1]), 30).unwrap();
        let pi3 = e5.pow(e5.uniformizer(), 3);
        let f = PolyOverK::new(vec![pi3.clone(), pi3]);
        assert_eq!(f.content_valuation(&e5).unwrap(), 3);
        let zero = PolyOverK::new(vec![k.zero()]);
        assert!(matches!(
            zero.content_valuation(&k),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let k = q5();
        assert_eq!(poly(&k, &[25, 5]).normalize(&k).unwrap(), poly(&k, &[5, 1]));
        let g = poly(&k, &[3, 1, 1]);
        assert_eq!(g.normalize(&k).unwrap(), g);
    }

    #[test]
    fn reduce_examples() {
        let e5 = LocalField::new(5, &from_i64s(&[5, 0, 15, 0, 0, 1]), 30).unwrap();
        let kk = e5.residue_field();
        let f = PolyOverK::new(vec![e5.from_i64(5), e5.uniformizer().clone(), e5.one()]);
        let r = f.reduce(&e5).unwrap();
        assert_eq!(r, vec![kk.zero(), kk.zero(), kk.one()]);
        let unnormalized = poly(&e5, &[5, 5]);
        assert!(matches!(
            unnormalized.reduce(&e5),
            Err(Error::NotNormalized(5))
        ));
    }

    #[test]
    fn substitute_examples() {
        let k = q5();
        let f = poly(&k, &[0, 0, 1]);
        let g = f.substitute(&k, &k.from_i64(3), &k.from_i64(5));
        // (5x + 3)^2 = 25x^2 + 30x + 9
        let expect = poly(&k, &[9, 30, 25]);
        for (a, b) in g.coeffs.iter().zip(&expect.coeffs) {
            assert!(k.sub(a, b).is_zero());
        }
        let h = poly(&k, &[1, -2, 7]);
        assert_eq!(h.substitute(&k, &k.zero(), &k.one()), h);
    }
}
