//! The residue field `k = GF(p^f)` and exhaustive root finding over it.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::is_prime;

/// Largest field order `enumerate` and `roots_in_k` will walk.
pub const ENUMERATION_GUARD: u128 = 1 << 16;

/// Dense polynomials over `GF(p)`, constant term first, without trailing zeros.
pub mod fp_poly {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn degree(a: &[u64]) -> Option<usize> {
        a.iter().rposition(|&c| c != 0)
    }

    pub fn inv_mod(a: u64, p: u64) -> u64 {
        pow_mod(a, p - 2, p)
    }

    pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1 % p;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut r = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x * y) % p;
            }
        }
        trim(r)
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let r = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(r)
    }

    /// Quotient and remainder; `b` must be nonzero.
    pub fn div_rem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let db = degree(b).expect("division by the zero polynomial");
        let lead_inv = inv_mod(b[db], p);
        let mut r = trim(a.to_vec());
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let mut q = vec![0u64; r.len() - db];
        while let Some(dr) = degree(&r) {
            if dr < db {
                break;
            }
            let c = r[dr] * lead_inv % p;
            q[dr - db] = c;
            for i in 0..=db {
                r[dr - db + i] = (r[dr - db + i] + p * p - c * b[i] % p) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn derivative(a: &[u64], p: u64) -> Vec<u64> {
        trim(
            a.iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| (i as u64 % p) * c % p)
                .collect(),
        )
    }

    pub fn monic(a: &[u64], p: u64) -> Vec<u64> {
        match degree(a) {
            None => Vec::new(),
            Some(d) => {
                let inv = inv_mod(a[d], p);
                a[..=d].iter().map(|&c| c * inv % p).collect()
            }
        }
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let (_, r) = div_rem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(&a, p)
    }

    pub fn pow(a: &[u64], e: usize, p: u64) -> Vec<u64> {
        let mut r = vec![1 % p];
        for _ in 0..e {
            r = mul(&r, a, p);
        }
        trim(r)
    }

    /// Product of the distinct monic irreducible factors of `a`.
    pub fn radical(a: &[u64], p: u64) -> Vec<u64> {
        let a = monic(a, p);
        if degree(&a).unwrap_or(0) == 0 {
            return a;
        }
        let da = derivative(&a, p);
        if da.is_empty() {
            // a(x) = b(x^p) = b(x)^p over GF(p)
            let b: Vec<u64> = a.iter().step_by(p as usize).copied().collect();
            return radical(&b, p);
        }
        let g = gcd(&a, &da, p);
        let (squarefree, _) = div_rem(&a, &g, p);
        // factors of g that did not survive in squarefree are p-th powers
        let rest = radical(&g, p);
        let joint = gcd(&squarefree, &rest, p);
        let (extra, _) = div_rem(&rest, &joint, p);
        monic(&mul(&squarefree, &extra, p), p)
    }

    /// Irreducibility by trial division against every monic polynomial of
    /// degree at most `deg/2`.
    pub fn is_irreducible(a: &[u64], p: u64) -> bool {
        let Some(d) = degree(a) else { return false };
        if d == 0 {
            return false;
        }
        for k in 1..=d / 2 {
            let count = (p as u128).pow(k as u32);
            for idx in 0..count {
                let mut cand = Vec::with_capacity(k + 1);
                let mut r = idx;
                for _ in 0..k {
                    cand.push((r % p as u128) as u64);
                    r /= p as u128;
                }
                cand.push(1);
                let (_, rem) = div_rem(a, &cand, p);
                if rem.is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// `GF(p^f) = GF(p)[y]/(modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    p: u64,
    /// Monic, degree `f`, constant term first.
    modulus: Vec<u64>,
}

/// Coordinates over `1, y, ..., y^(f-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueElement {
    coeffs: Vec<u64>,
}

impl ResidueElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "y".to_string(),
                (1, c) => format!("{c}y"),
                (i, 1) => format!("y^{i}"),
                (i, c) => format!("{c}y^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

impl ResidueField {
    /// Field with the given monic modulus (constant term first).
    pub fn new(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        let modulus: Vec<u64> = fp_poly::trim(modulus.into_iter().map(|c| c % p).collect());
        match fp_poly::degree(&modulus) {
            Some(d) if d >= 1 && modulus[d] == 1 => {}
            _ => {
                return Err(Error::InvalidInput(
                    "residue modulus must be monic of degree >= 1".into(),
                ))
            }
        }
        if !fp_poly::is_irreducible(&modulus, p) {
            return Err(Error::InvalidInput(format!(
                "residue modulus {modulus:?} is reducible over GF({p})"
            )));
        }
        Ok(ResidueField { p, modulus })
    }

    /// Field of degree `f` with the first irreducible monic modulus in
    /// enumeration order (constant term varying fastest).
    pub fn with_default_modulus(p: u64, f: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        if f == 0 {
            return Err(Error::InvalidInput(
                "residue degree must be positive".into(),
            ));
        }
        let count = (p as u128).checked_pow(f as u32).unwrap_or(u128::MAX);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(f + 1);
            let mut r = idx;
            for _ in 0..f {
                cand.push((r % p as u128) as u64);
                r /= p as u128;
            }
            cand.push(1);
            if fp_poly::is_irreducible(&cand, p) {
                return Ok(ResidueField { p, modulus: cand });
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.degree() as u32)
    }

    pub fn element(&self, coeffs: &[u64]) -> ResidueElement {
        let reduced = fp_poly::div_rem(
            &coeffs.iter().map(|c| c % self.p).collect::<Vec<_>>(),
            &self.modulus,
            self.p,
        )
        .1;
        let mut c = reduced;
        c.resize(self.degree(), 0);
        ResidueElement { coeffs: c }
    }

    pub fn zero(&self) -> ResidueElement {
        self.element(&[])
    }

    pub fn one(&self) -> ResidueElement {
        self.element(&[1])
    }

    pub fn from_int(&self, c: u64) -> ResidueElement {
        self.element(&[c % self.p])
    }

    /// The class of `y`, a root of the modulus.
    pub fn generator(&self) -> ResidueElement {
        self.element(&[0, 1])
    }

    pub fn add(&self, a: &ResidueElement, b: &ResidueElement) -> ResidueElement {
        ResidueElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| (x + y) % self.p)
                .collect(),
        }
    }

    pub fn neg(&self, a: &ResidueElement) -> ResidueElement {
        ResidueElement {
            coeffs: a.coeffs.iter().map(|x| (self.p - x) % self.p).collect(),
        }
    }

    pub fn sub(&self, a: &ResidueElement, b: &ResidueElement) -> ResidueElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &ResidueElement, b: &ResidueElement) -> ResidueElement {
        self.element(&fp_poly::mul(&a.coeffs, &b.coeffs, self.p))
    }

    pub fn pow(&self, a: &ResidueElement, mut e: u128) -> ResidueElement {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: &ResidueElement) -> Result<ResidueElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// All `p^f` elements, lexicographic by coefficient vector with the
    /// constant term varying fastest.
    pub fn enumerate(&self) -> Result<Vec<ResidueElement>> {
        let q = self.order();
        if q > ENUMERATION_GUARD {
            return Err(Error::FieldTooLarge(q));
        }
        let f = self.degree();
        Ok((0..q)
            .map(|idx| {
                let mut r = idx;
                let coeffs = (0..f)
                    .map(|_| {
                        let c = (r % self.p as u128) as u64;
                        r /= self.p as u128;
                        c
                    })
                    .collect();
                ResidueElement { coeffs }
            })
            .collect())
    }

    /// Position of `a` in enumeration order.
    pub fn index_of(&self, a: &ResidueElement) -> u128 {
        a.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &c| acc * self.p as u128 + c as u128)
    }

    /// Horner evaluation of a polynomial over `k` (constant term first).
    pub fn eval(&self, poly: &[ResidueElement], x: &ResidueElement) -> ResidueElement {
        poly.iter()
            .rev()
            .fold(self.zero(), |acc, c| self.add(&self.mul(&acc, x), c))
    }

    /// Evaluation of a polynomial with `GF(p)` coefficients.
    pub fn eval_fp(&self, poly: &[u64], x: &ResidueElement) -> ResidueElement {
        poly.iter().rev().fold(self.zero(), |acc, &c| {
            self.add(&self.mul(&acc, x), &self.from_int(c))
        })
    }

    /// Every root of `poly` in `k`, in enumeration order, without
    /// multiplicities.
    pub fn roots_in_k(&self, poly: &[ResidueElement]) -> Result<Vec<ResidueElement>> {
        if poly.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidInput("roots of the zero polynomial".into()));
        }
        Ok(self
            .enumerate()?
            .into_iter()
            .filter(|x| self.eval(poly, x).is_zero())
            .collect())
    }

    /// Degree of a polynomial over `k`, `None` for zero.
    pub fn poly_degree(poly: &[ResidueElement]) -> Option<usize> {
        poly.iter().rposition(|c| !c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(k: &ResidueField, cs: &[u64]) -> Vec<ResidueElement> {
        cs.iter().map(|&c| k.from_int(c)).collect()
    }

    #[test]
    fn roots_examples() {
        let gf3 = ResidueField::with_default_modulus(3, 1).unwrap();
        // x^2 - x - 1 over GF(3)
        assert!(gf3
            .roots_in_k(&consts(&gf3, &[2, 2, 1]))
            .unwrap()
            .is_empty());

        let gf5 = ResidueField::with_default_modulus(5, 1).unwrap();
        let r = gf5.roots_in_k(&consts(&gf5, &[4, 0, 1])).unwrap();
        assert_eq!(r, vec![gf5.from_int(1), gf5.from_int(4)]);
        let r = gf5.roots_in_k(&consts(&gf5, &[3, 1])).unwrap();
        assert_eq!(r, vec![gf5.from_int(2)]);

        assert!(matches!(
            gf5.roots_in_k(&consts(&gf5, &[0, 0])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn enumerate_examples() {
        let gf3 = ResidueField::with_default_modulus(3, 1).unwrap();
        let e: Vec<u64> = gf3
            .enumerate()
            .unwrap()
            .iter()
            .map(|x| x.coeffs()[0])
            .collect();
        assert_eq!(e, vec![0, 1, 2]);

        let gf9 = ResidueField::new(3, vec![2, 2, 1]).unwrap();
        let e: Vec<Vec<u64>> = gf9
            .enumerate()
            .unwrap()
            .iter()
            .map(|x| x.coeffs().to_vec())
            .collect();
        let expected: Vec<Vec<u64>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![2, 0],
            vec![0, 1],
            vec![1, 1],
            vec![2, 1],
            vec![0, 2],
            vec![1, 2],
            vec![2, 2],
        ];
        assert_eq!(e, expected);
    }

    #[test]
    fn guard_and_modulus_checks() {
        let big = ResidueField::with_default_modulus(257, 2).unwrap();
        assert!(matches!(big.enumerate(), Err(Error::FieldTooLarge(_))));
        assert!(ResidueField::new(3, vec![2, 0, 1]).is_err()); // x^2 + 2 = (x-1)(x+1)
        assert!(ResidueField::new(4, vec![1, 1]).is_err());
    }

    #[test]
    fn default_modulus_is_first_irreducible() {
        assert_eq!(
            ResidueField::with_default_modulus(3, 2).unwrap().modulus(),
            &[1, 0, 1]
        );
        assert_eq!(
            ResidueField::with_default_modulus(2, 3).unwrap().modulus(),
            &[1, 1, 0, 1]
        );
        assert_eq!(
            ResidueField::with_default_modulus(5, 1).unwrap().modulus(),
            &[0, 1]
        );
    }

    #[test]
    fn frobenius_and_field_polynomial() {
        for (p, f) in [(2u64, 3usize), (3, 2), (5, 2), (7, 1), (2, 4)] {
            let k = ResidueField::with_default_modulus(p, f).unwrap();
            let q = k.order();
            let all = k.enumerate().unwrap();
            for a in &all {
                assert_eq!(&k.pow(a, q), a);
                if !a.is_zero() {
                    assert_eq!(k.mul(a, &k.inv(a).unwrap()), k.one());
                }
            }
            // x^q - x vanishes on all of k
            let mut poly = vec![k.zero(); q as usize + 1];
            poly[1] = k.from_int(p - 1);
            poly[q as usize] = k.one();
            assert_eq!(k.roots_in_k(&poly).unwrap().len() as u128, q);
        }
    }

    #[test]
    fn radical_of_powers() {
        use fp_poly::*;
        let p = 3;
        let psi = vec![2, 2, 1];
        assert_eq!(radical(&pow(&psi, 6, p), p), psi);
        let lin = vec![1, 1];
        assert_eq!(radical(&pow(&lin, 9, p), p), lin);
        let both = mul(&pow(&lin, 2, p), &psi, p);
        assert_eq!(radical(&both, p), mul(&lin, &psi, p));
    }
}
