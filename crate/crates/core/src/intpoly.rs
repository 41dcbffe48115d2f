//! Small helpers for integer and rational polynomials (constant term first).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn trim(mut a: Vec<BigInt>) -> Vec<BigInt> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

pub fn from_i64s(cs: &[i64]) -> Vec<BigInt> {
    cs.iter().map(|&c| BigInt::from(c)).collect()
}

pub fn is_monic(a: &[BigInt]) -> bool {
    a.last().is_some_and(|c| c.is_one())
}

/// Reduction modulo `p` into `[0, p)`.
pub fn mod_p(a: &[BigInt], p: u64) -> Vec<u64> {
    let pb = BigInt::from(p);
    a.iter()
        .map(|c| c.mod_floor(&pb).to_u64().unwrap())
        .collect()
}

/// Division by a monic polynomial over `Z`.
pub fn div_rem_monic(a: &[BigInt], b: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    debug_assert!(is_monic(b));
    let db = b.len() - 1;
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![BigInt::zero(); r.len() - db];
    for k in (db..r.len()).rev() {
        let c = r[k].clone();
        if c.is_zero() {
            continue;
        }
        q[k - db] = c.clone();
        for i in 0..=db {
            r[k - db + i] -= &c * &b[i];
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

/// Coefficients `a_0, a_1, ...` with `a = sum a_k * b^k` and each
/// `deg a_k < deg b`.
pub fn adic_expansion(a: &[BigInt], b: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut out = Vec::new();
    let mut cur = trim(a.to_vec());
    while !cur.is_empty() {
        let (q, r) = div_rem_monic(&cur, b);
        out.push(r);
        cur = q;
    }
    out
}

pub fn to_rationals(a: &[BigInt]) -> Vec<BigRational> {
    a.iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect()
}

/// Integer coefficients if every rational is integral.
pub fn to_integers(a: &[BigRational]) -> Option<Vec<BigInt>> {
    a.iter()
        .map(|c| {
            if c.is_integer() {
                Some(c.to_integer())
            } else {
                None
            }
        })
        .collect()
}

fn trim_q(mut a: Vec<BigRational>) -> Vec<BigRational> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn div_rem_q(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let b = trim_q(b.to_vec());
    let db = b.len() - 1;
    let mut r = trim_q(a.to_vec());
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    for k in (db..r.len()).rev() {
        let c = &r[k] / &lead;
        if c.is_zero() {
            continue;
        }
        for i in 0..=db {
            let t = &c * &b[i];
            r[k - db + i] -= t;
        }
        q[k - db] = c;
    }
    r.truncate(db);
    (trim_q(q), trim_q(r))
}

/// Monic gcd over `Q`.
pub fn gcd_q(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut a = trim_q(a.to_vec());
    let mut b = trim_q(b.to_vec());
    while !b.is_empty() {
        let (_, r) = div_rem_q(&a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c /= &lead;
        }
    }
    a
}

/// `a / gcd(a, a')`: the product of the distinct irreducible factors.
pub fn squarefree_part_q(a: &[BigRational]) -> Vec<BigRational> {
    let a = trim_q(a.to_vec());
    let da: Vec<BigRational> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    let g = gcd_q(&a, &da);
    if g.len() <= 1 {
        return a;
    }
    div_rem_q(&a, &g).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_reassembles() {
        let g = from_i64s(&[18, 0, -3, 0, 1]);
        let psi = from_i64s(&[0, 1]);
        let a = adic_expansion(&g, &psi);
        assert_eq!(a.len(), 5);
        assert_eq!(a[0], vec![BigInt::from(18)]);
        assert!(a[1].is_empty());

        let psi = from_i64s(&[2, 2, 1]);
        let g = from_i64s(&[5, 1, 0, 7, 3, 1]);
        let parts = adic_expansion(&g, &psi);
        // rebuild by Horner in psi
        let mut acc: Vec<BigInt> = Vec::new();
        for part in parts.iter().rev() {
            let mut next = vec![BigInt::zero(); acc.len() + psi.len()];
            for (i, x) in acc.iter().enumerate() {
                for (j, y) in psi.iter().enumerate() {
                    next[i + j] += x * y;
                }
            }
            for (i, x) in part.iter().enumerate() {
                next[i] += x;
            }
            acc = trim(next);
        }
        assert_eq!(acc, g);
    }

    #[test]
    fn squarefree_part() {
        // x (x - 1)^2 (x^2 - x + 5)
        let a = to_rationals(&from_i64s(&[0, 5, -11, 8, -3, 1]));
        let s = squarefree_part_q(&a);
        assert_eq!(to_integers(&s).unwrap(), from_i64s(&[0, -5, 6, -2, 1]));
        let b = to_rationals(&from_i64s(&[-6, 0, 1]));
        assert_eq!(squarefree_part_q(&b), b);
    }
}
