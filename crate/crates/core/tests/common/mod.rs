//! Shared helpers for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use panayi_core::field::{FieldElement, LocalField};
use panayi_core::intpoly::{from_i64s, squarefree_part_q, to_rationals};
use panayi_core::panayi::oracle_count;
use panayi_core::poly::{BivariatePoly, PolyOverK};
use panayi_core::Error;

/// Random squarefree integer polynomial of degree 1 to 3, coefficients in
/// `[-50, 50]`.
pub fn random_squarefree(rng: &mut impl rand::Rng) -> Vec<BigInt> {
    loop {
        let degree = rng.gen_range(1..=3);
        let mut cs: Vec<i64> = (0..=degree).map(|_| rng.gen_range(-50..=50)).collect();
        if cs[degree] == 0 {
            cs[degree] = 1;
        }
        let poly = from_i64s(&cs);
        if squarefree_part_q(&to_rationals(&poly)).len() == poly.len() {
            return poly;
        }
    }
}

/// Oracle count, deepening the class modulus until every class is settled.
pub fn oracle(phi: &PolyOverK, k: &LocalField) -> usize {
    for depth in [8, 16, 32, 48] {
        match oracle_count(phi, k, depth) {
            Ok(n) => return n,
            Err(Error::Inconclusive(_)) => continue,
            Err(e) => panic!("oracle failed: {e}"),
        }
    }
    panic!("oracle inconclusive at depth 48");
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn load_json(name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

pub fn ints(v: &serde_json::Value) -> Vec<BigInt> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().parse().unwrap())
        .collect()
}

/// Integer polynomial in `x`, `t` and `pi`, keyed by `(deg_x, deg_t, deg_pi)`.
pub type Expr = BTreeMap<(u32, u32, u32), BigInt>;

fn add_into(a: &mut Expr, b: &Expr, sign: i32) {
    for (k, c) in b {
        let e = a.entry(*k).or_insert_with(BigInt::zero);
        if sign < 0 {
            *e -= c;
        } else {
            *e += c;
        }
    }
    a.retain(|_, c| !c.is_zero());
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    let mut out = Expr::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let k = (ka.0 + kb.0, ka.1 + kb.1, ka.2 + kb.2);
            *out.entry(k).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn pow(a: &Expr, e: u32) -> Expr {
    let mut acc = constant(BigInt::one());
    for _ in 0..e {
        acc = mul(&acc, a);
    }
    acc
}

fn constant(c: BigInt) -> Expr {
    let mut m = Expr::new();
    if !c.is_zero() {
        m.insert((0, 0, 0), c);
    }
    m
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn number(&mut self) -> BigInt {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .unwrap()
    }

    fn exponent(&mut self) -> u32 {
        if self.peek() == Some('^') {
            self.pos += 1;
            self.number().try_into().unwrap()
        } else {
            1
        }
    }

    fn expr(&mut self) -> Expr {
        let mut acc = Expr::new();
        let mut sign = 1;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some('-') => {
                    self.pos += 1;
                    sign = -1;
                }
                _ => {}
            }
            let term = self.term();
            add_into(&mut acc, &term, sign);
            sign = 1;
            match self.peek() {
                Some('+') | Some('-') => continue,
                _ => return acc,
            }
        }
    }

    fn term(&mut self) -> Expr {
        let mut acc = constant(BigInt::one());
        let mut any = false;
        loop {
            let factor = match self.peek() {
                Some(c) if c.is_ascii_digit() => constant(self.number()),
                Some(v @ ('x' | 't' | 'p')) => {
                    self.pos += 1;
                    let e = self.exponent();
                    let key = match v {
                        'x' => (e, 0, 0),
                        't' => (0, e, 0),
                        _ => (0, 0, e),
                    };
                    Expr::from([(key, BigInt::one())])
                }
                Some('(') => {
                    self.pos += 1;
                    let inner = self.expr();
                    assert_eq!(self.peek(), Some(')'), "unbalanced parentheses");
                    self.pos += 1;
                    let e = self.exponent();
                    pow(&inner, e)
                }
                _ => break,
            };
            acc = mul(&acc, &factor);
            any = true;
        }
        assert!(any, "empty term at {}", self.pos);
        acc
    }
}

/// Parses sums of products in `x`, `t` and `\pi_K` (written as in LaTeX).
pub fn parse_expr(s: &str) -> Expr {
    let cleaned: String = s
        .replace("\\pi_K", "p")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    let mut parser = Parser {
        chars: cleaned.chars().collect(),
        pos: 0,
    };
    let e = parser.expr();
    assert_eq!(parser.pos, parser.chars.len(), "trailing input in {s:?}");
    e
}

/// The bivariate polynomial over `K` with `pi` read as the uniformizer.
pub fn expr_to_bivariate(k: &LocalField, e: &Expr) -> BivariatePoly {
    let dx = e.keys().map(|k| k.0).max().unwrap_or(0) as usize;
    let dt = e.keys().map(|k| k.1).max().unwrap_or(0) as usize;
    let mut rows = vec![vec![k.zero(); dt + 1]; dx + 1];
    for (&(i, j, m), c) in e {
        let term = k.mul(&k.from_int(c), &k.pow(k.uniformizer(), m));
        rows[i as usize][j as usize] = k.add(&rows[i as usize][j as usize], &term);
    }
    BivariatePoly::new(rows)
}

fn coefficient(phi: &BivariatePoly, i: usize, j: usize) -> Option<&FieldElement> {
    phi.rows.get(i).and_then(|r| r.get(j))
}

/// Coefficient-wise equality in `K` to working precision.
pub fn bivariate_eq(k: &LocalField, a: &BivariatePoly, b: &BivariatePoly) -> bool {
    let dx = a.rows.len().max(b.rows.len());
    let dt = a
        .rows
        .iter()
        .chain(&b.rows)
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    let zero = k.zero();
    (0..dx).all(|i| {
        (0..dt).all(|j| {
            let x = coefficient(a, i, j).unwrap_or(&zero);
            let y = coefficient(b, i, j).unwrap_or(&zero);
            k.sub(x, y).is_zero()
        })
    })
}

/// Replays the single-digit-pair search on `x^5 + 15x^2 + 5` and compares
/// each recorded step with the expected polynomials of the fixture.
pub fn check_worked_trace() -> Result<(), String> {
    use panayi_core::catalog::{rational_params, GenericPolynomial};
    use panayi_core::search::{search, BranchStatus, SearchJob, TraceStep};

    let spec = load_json("worked_trace.json");
    let k = LocalField::new(5, &ints(&spec["defining"]), 60).map_err(|e| e.to_string())?;
    let steps = spec["steps"].as_array().unwrap();
    let expected: Vec<BivariatePoly> = steps
        .iter()
        .map(|s| expr_to_bivariate(&k, &parse_expr(s["poly"].as_str().unwrap())))
        .collect();

    let d5 = GenericPolynomial::d5();
    let initial = d5
        .bivariate(&k, &[k.from_i64(5)], 1)
        .map_err(|e| e.to_string())?;
    if !bivariate_eq(&k, &initial, &expected[0]) {
        return Err("initial polynomial differs".into());
    }

    let mut job = SearchJob::new(d5, vec![rational_params(&[5])], 2);
    job.record_trace = true;
    let result = search(&k, &job).map_err(|e| e.to_string())?;
    let three = k.residue_field().from_int(3);
    let zero = k.residue_field().zero();
    let branch = result
        .branches
        .iter()
        .find(|b| b.digits == [three.clone(), zero.clone()] && b.status == BranchStatus::RootFound)
        .ok_or("no root-found branch with digits 3, 0")?;
    if branch.trace.len() != steps.len() - 1 {
        return Err(format!(
            "trace has {} steps, expected {}",
            branch.trace.len(),
            steps.len() - 1
        ));
    }
    for (n, (step, (want, spec))) in branch
        .trace
        .iter()
        .zip(expected.iter().zip(steps).skip(1))
        .enumerate()
    {
        let (kind, value) = match step {
            TraceStep::SubstituteT { digit, .. } => ("substitute-t", digit.to_string()),
            TraceStep::LiftX { root, .. } => ("lift-x", root.to_string()),
            TraceStep::Normalize { valuation, .. } => ("normalize", valuation.to_string()),
        };
        if kind != spec["step"] || value != spec["value"] {
            return Err(format!(
                "step {n}: got {kind} {value}, expected {} {}",
                spec["step"], spec["value"]
            ));
        }
        // a display may carry an extra constant factor, recorded as "scale"
        let got = match spec.get("scale").and_then(|v| v.as_str()) {
            Some(c) => {
                let c = k.from_int(&c.parse().unwrap());
                BivariatePoly::new(
                    step.poly()
                        .rows
                        .iter()
                        .map(|r| r.iter().map(|a| k.mul(a, &c)).collect())
                        .collect(),
                )
            }
            None => step.poly().clone(),
        };
        if !bivariate_eq(&k, &got, want) {
            return Err(format!("step {n} ({kind} {value}): polynomial differs"));
        }
    }
    let specialized = branch
        .specialized_rational
        .as_ref()
        .ok_or("no rational specialization")?;
    let want = parse_expr(spec["specialized"].as_str().unwrap());
    let want: Vec<BigInt> = (0..=5)
        .map(|i| want.get(&(i, 0, 0)).cloned().unwrap_or_default())
        .collect();
    let got: Vec<BigInt> = specialized.iter().map(|q| q.to_integer()).collect();
    if got != want || specialized.iter().any(|q| !q.is_integer()) {
        return Err(format!("specialized polynomial {got:?}, expected {want:?}"));
    }
    if branch.reconstruction != Some(BigInt::from(3)) {
        return Err(format!("reconstruction {:?}", branch.reconstruction));
    }
    Ok(())
}
