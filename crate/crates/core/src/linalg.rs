//! Gaussian elimination over `Q_p` with minimal-valuation pivoting, which
//! keeps every multiplier integral and so loses no absolute precision.

use crate::error::{Error, Result};
use crate::padic::{pivot_order, PadicNumber};

fn pivot_row(m: &[Vec<PadicNumber>], col: usize, from: usize) -> Option<usize> {
    (from..m.len())
        .filter(|&r| !m[r][col].is_zero())
        .min_by(|&a, &b| pivot_order(&m[a][col], &m[b][col]).then(a.cmp(&b)))
}

/// Determinant of a square matrix. A singular-to-precision matrix yields a
/// zero whose absolute precision is a valid lower bound for the true
/// valuation.
pub fn determinant(mut m: Vec<Vec<PadicNumber>>, p: u64) -> PadicNumber {
    let n = m.len();
    let mut det = PadicNumber::one(p, i64::MAX / 4);
    let mut negate = false;
    for k in 0..n {
        let Some(r) = pivot_row(&m, k, k) else {
            // the remaining block has no usable pivot in this column; bound
            // its determinant by the product of column minima
            let bound: i64 = (k..n)
                .map(|j| (k..n).map(|i| m[i][j].lower_valuation()).min().unwrap())
                .sum();
            return det.mul_ref(&PadicNumber::zero(p, bound));
        };
        if r != k {
            m.swap(r, k);
            negate = !negate;
        }
        let pivot_inv = m[k][k].inv().expect("pivot is nonzero");
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let factor = m[i][k].mul_ref(&pivot_inv);
            for j in k + 1..n {
                let t = factor.mul_ref(&m[k][j]);
                m[i][j] = m[i][j].sub_ref(&t);
            }
        }
        det = det.mul_ref(&m[k][k]);
    }
    if negate {
        det.neg_ref()
    } else {
        det
    }
}

/// Solves `m * x = rhs`.
pub fn solve(mut m: Vec<Vec<PadicNumber>>, mut rhs: Vec<PadicNumber>) -> Result<Vec<PadicNumber>> {
    let n = m.len();
    for k in 0..n {
        let r = pivot_row(&m, k, k)
            .ok_or_else(|| Error::ZeroDivisorDetected("singular multiplication matrix".into()))?;
        m.swap(r, k);
        rhs.swap(r, k);
        let pivot_inv = m[k][k].inv()?;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let factor = m[i][k].mul_ref(&pivot_inv);
            for j in k + 1..n {
                let t = factor.mul_ref(&m[k][j]);
                m[i][j] = m[i][j].sub_ref(&t);
            }
            let t = factor.mul_ref(&rhs[k]);
            rhs[i] = rhs[i].sub_ref(&t);
        }
    }
    let mut x: Vec<Option<PadicNumber>> = vec![None; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for j in k + 1..n {
            let t = m[k][j].mul_ref(x[j].as_ref().unwrap());
            acc = acc.sub_ref(&t);
        }
        x[k] = Some(acc.div(&m[k][k])?);
    }
    Ok(x.into_iter().map(Option::unwrap).collect())
}
