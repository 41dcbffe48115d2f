//! Generic polynomials: templates in `x` whose coefficients are integer
//! polynomials in the parameters.
//!
//! Templates are written as nested lists, constant term first at every
//! level. The outer list runs over powers of `x`; each entry is a nested
//! list of depth `arity`, indexed by the exponents of the parameters in
//! order. Integers may be JSON numbers or decimal strings.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{FieldElement, LocalField};
use crate::poly::{BivariatePoly, PolyOverK};

/// `coefficient * prod_j params[j]^exponents[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coefficient: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericPolynomial {
    pub name: String,
    pub group: String,
    pub arity: usize,
    /// `terms[i]`: the coefficient of `x^i`.
    pub terms: Vec<Vec<Monomial>>,
}

fn parse_int(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().unwrap())),
        Value::Number(n) if n.is_u64() => Ok(BigInt::from(n.as_u64().unwrap())),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("not an integer: {s:?}"))),
        other => Err(Error::InvalidInput(format!("not an integer: {other}"))),
    }
}

fn collect_monomials(
    v: &Value,
    depth: usize,
    prefix: &mut Vec<u32>,
    out: &mut Vec<Monomial>,
) -> Result<()> {
    if depth == 0 {
        let c = parse_int(v)?;
        if !c.is_zero() {
            out.push(Monomial {
                exponents: prefix.clone(),
                coefficient: c,
            });
        }
        return Ok(());
    }
    let Value::Array(items) = v else {
        return Err(Error::InvalidInput(format!(
            "template entry nested too shallowly: {v}"
        )));
    };
    for (k, item) in items.iter().enumerate() {
        prefix.push(k as u32);
        collect_monomials(item, depth - 1, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}

impl GenericPolynomial {
    /// Builds a generic polynomial from a nested-list template.
    pub fn from_template(name: &str, group: &str, arity: usize, template: &Value) -> Result<Self> {
        let Value::Array(rows) = template else {
            return Err(Error::InvalidInput("template must be a list".into()));
        };
        if arity == 0 {
            return Err(Error::InvalidInput("arity must be positive".into()));
        }
        let mut terms = Vec::with_capacity(rows.len());
        for row in rows {
            let mut monomials = Vec::new();
            collect_monomials(row, arity, &mut Vec::new(), &mut monomials)?;
            terms.push(monomials);
        }
        while terms.last().is_some_and(Vec::is_empty) {
            terms.pop();
        }
        if terms.is_empty() {
            return Err(Error::InvalidInput("template is identically zero".into()));
        }
        Ok(GenericPolynomial {
            name: name.to_string(),
            group: group.to_string(),
            arity,
            terms,
        })
    }

    /// Parses `{"name", "group", "arity", "template"}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::InvalidInput(format!("catalog entry lacks {k:?}")))
        };
        let name = field("name")?
            .as_str()
            .ok_or_else(|| Error::InvalidInput("name must be a string".into()))?;
        let group = v.get("group").and_then(Value::as_str).unwrap_or("");
        let arity = field("arity")?
            .as_u64()
            .ok_or_else(|| Error::InvalidInput("arity must be a non-negative integer".into()))?;
        Self::from_template(name, group, arity as usize, field("template")?)
    }

    pub fn degree(&self) -> usize {
        self.terms.len() - 1
    }

    /// x^5 + (t-3)x^4 + (s-t+3)x^3 + (t^2-t-2s-1)x^2 + sx + t, parameters (s, t).
    pub fn d5() -> Self {
        let template = serde_json::json!([
            [[0, 1]],
            [[0], [1]],
            [[-1, -1, 1], [-2]],
            [[3, -1], [1]],
            [[-3, 1]],
            [[1]]
        ]);
        Self::from_template("D5", "D5", 2, &template).unwrap()
    }

    /// x^3 - tx^2 + (t-3)x + 1.
    pub fn c3() -> Self {
        let template = serde_json::json!([[1], [-3, 1], [0, -1], [1]]);
        Self::from_template("C3", "C3", 1, &template).unwrap()
    }

    fn check_arity(&self, n: usize) -> Result<()> {
        if n != self.arity {
            return Err(Error::InvalidInput(format!(
                "{} takes {} parameters, got {n}",
                self.name, self.arity
            )));
        }
        Ok(())
    }

    /// `P(params, x)` over `K`.
    pub fn specialize(&self, field: &LocalField, params: &[FieldElement]) -> Result<PolyOverK> {
        self.check_arity(params.len())?;
        let mut powers: Vec<Vec<FieldElement>> = params
            .iter()
            .map(|a| vec![field.one(), a.clone()])
            .collect();
        let mut coeffs = Vec::with_capacity(self.terms.len());
        for monomials in &self.terms {
            let mut c = field.zero();
            for m in monomials {
                let mut term = field.from_int(&m.coefficient);
                for (j, &e) in m.exponents.iter().enumerate() {
                    let e = e as usize;
                    while powers[j].len() <= e {
                        let next = field.mul(powers[j].last().unwrap(), &params[j]);
                        powers[j].push(next);
                    }
                    term = field.mul(&term, &powers[j][e]);
                }
                c = field.add(&c, &term);
            }
            coeffs.push(c);
        }
        if coeffs.last().unwrap().is_zero() {
            return Err(Error::DegenerateSpecialization);
        }
        Ok(PolyOverK { coeffs })
    }

    /// `P(params, x)` over `Q`, for rational parameters.
    pub fn specialize_rational(&self, params: &[BigRational]) -> Result<Vec<BigRational>> {
        self.check_arity(params.len())?;
        let coeffs: Vec<BigRational> = self
            .terms
            .iter()
            .map(|monomials| {
                monomials.iter().fold(BigRational::zero(), |acc, m| {
                    let mut term = BigRational::from_integer(m.coefficient.clone());
                    for (j, &e) in m.exponents.iter().enumerate() {
                        term *= num_traits::pow(params[j].clone(), e as usize);
                    }
                    acc + term
                })
            })
            .collect();
        if coeffs.last().unwrap().is_zero() {
            return Err(Error::DegenerateSpecialization);
        }
        Ok(coeffs)
    }

    /// `phi(x, t)` with every parameter but `free` fixed; `fixed` lists the
    /// other parameters in order.
    pub fn bivariate(
        &self,
        field: &LocalField,
        fixed: &[FieldElement],
        free: usize,
    ) -> Result<BivariatePoly> {
        self.check_arity(fixed.len() + 1)?;
        if free >= self.arity {
            return Err(Error::InvalidInput(format!(
                "free parameter index {free} out of range"
            )));
        }
        let mut params: Vec<Option<&FieldElement>> = fixed.iter().map(Some).collect();
        params.insert(free, None);
        let width = self
            .terms
            .iter()
            .flatten()
            .map(|m| m.exponents.get(free).copied().unwrap_or(0) as usize + 1)
            .max()
            .unwrap_or(1);
        let mut rows = Vec::with_capacity(self.terms.len());
        for monomials in &self.terms {
            let mut row = vec![field.zero(); width];
            for m in monomials {
                let mut term = field.from_int(&m.coefficient);
                let mut t_degree = 0;
                for (j, &e) in m.exponents.iter().enumerate() {
                    match params[j] {
                        Some(a) => term = field.mul(&term, &field.pow(a, e)),
                        None => t_degree = e as usize,
                    }
                }
                row[t_degree] = field.add(&row[t_degree], &term);
            }
            rows.push(row);
        }
        Ok(BivariatePoly::new(rows))
    }
}

/// Named generic polynomials: the built-in entries plus any loaded from a
/// catalog file.
#[derive(Clone, Debug)]
pub struct Catalog {
    entries: BTreeMap<String, GenericPolynomial>,
}

impl Default for Catalog {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for g in [GenericPolynomial::d5(), GenericPolynomial::c3()] {
            entries.insert(g.name.clone(), g);
        }
        Catalog { entries }
    }
}

impl Catalog {
    /// Adds the entries of a JSON list (or `{"entries": [...]}`), replacing
    /// built-ins of the same name.
    pub fn extend_from_json(&mut self, v: &Value) -> Result<()> {
        let list = match v {
            Value::Array(a) => a,
            Value::Object(o) => o
                .get("entries")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidInput("catalog object lacks \"entries\"".into()))?,
            _ => return Err(Error::InvalidInput("catalog must be a list".into())),
        };
        for entry in list {
            let g = GenericPolynomial::from_json(entry)?;
            self.entries.insert(g.name.clone(), g);
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let mut c = Catalog::default();
        c.extend_from_json(&v)?;
        Ok(c)
    }

    pub fn get(&self, name: &str) -> Result<&GenericPolynomial> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown generic polynomial {name:?}")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Convenience for tests and callers holding small integers.
pub fn rational_params(values: &[i64]) -> Vec<BigRational> {
    values
        .iter()
        .map(|&v| BigRational::from_integer(v.into()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(cs: &[BigRational]) -> Vec<i64> {
        use num_traits::ToPrimitive;
        cs.iter()
            .map(|c| c.to_integer().to_i64().unwrap())
            .collect()
    }

    #[test]
    fn d5_specializations() {
        let d5 = GenericPolynomial::d5();
        assert_eq!(d5.degree(), 5);
        let p = d5.specialize_rational(&rational_params(&[5, 3])).unwrap();
        assert_eq!(ints(&p), vec![3, 5, -5, 5, 0, 1]);
        let p = d5.specialize_rational(&rational_params(&[5, 13])).unwrap();
        assert_eq!(ints(&p), vec![13, 5, 145, -5, 10, 1]);
        let p = d5.specialize_rational(&rational_params(&[5, 18])).unwrap();
        assert_eq!(ints(&p), vec![18, 5, 295, -10, 15, 1]);
    }

    #[test]
    fn c3_at_zero() {
        let p = GenericPolynomial::c3()
            .specialize_rational(&rational_params(&[0]))
            .unwrap();
        assert_eq!(ints(&p), vec![1, -3, 0, 1]);
    }

    #[test]
    fn specialize_in_field_agrees() {
        let k = LocalField::rationals(5, 30).unwrap();
        let d5 = GenericPolynomial::d5();
        let p = d5.specialize(&k, &[k.from_i64(5), k.from_i64(13)]).unwrap();
        let expect = PolyOverK::from_ints(&k, &crate::intpoly::from_i64s(&[13, 5, 145, -5, 10, 1]));
        for (a, b) in p.coeffs.iter().zip(&expect.coeffs) {
            assert!(k.sub(a, b).is_zero());
        }
    }

    #[test]
    fn bivariate_rows() {
        let k = LocalField::rationals(5, 30).unwrap();
        let phi = GenericPolynomial::d5()
            .bivariate(&k, &[k.from_i64(5)], 1)
            .unwrap();
        // x^2 row: t^2 - t - 11
        let row: Vec<_> = phi.rows[2]
            .iter()
            .map(|c| c.as_rational().unwrap())
            .collect();
        assert_eq!(ints(&row), vec![-11, -1, 1]);
        assert_eq!(phi.rows.len(), 6);
    }

    #[test]
    fn degenerate_and_malformed() {
        let g = GenericPolynomial::from_template("L", "", 1, &serde_json::json!([[0, 1], [1, -1]]))
            .unwrap();
        assert!(matches!(
            g.specialize_rational(&rational_params(&[1])),
            Err(Error::DegenerateSpecialization)
        ));
        assert!(GenericPolynomial::from_template("bad", "", 2, &serde_json::json!([[1]])).is_err());
        assert!(
            GenericPolynomial::from_template("s", "", 1, &serde_json::json!([["-7"], ["1"]]))
                .is_ok()
        );
    }

    #[test]
    fn catalog_lookup() {
        let mut c = Catalog::default();
        assert!(c.get("D5").is_ok());
        assert!(c.get("S7").is_err());
        c.extend_from_json(&serde_json::json!([
            {"name": "Q2", "group": "C2", "arity": 1, "template": [[0, -1], [0], [1]]}
        ]))
        .unwrap();
        assert_eq!(c.get("Q2").unwrap().degree(), 2);
    }
}
