//! Command-line front end: a JSON job file in, a JSON result document out.
//!
//! Job schema (version 1). Integers and rationals are decimal strings
//! (`"-12"`, `"5/3"`); small integers may also be JSON numbers. Every
//! coefficient list is constant term first.
//!
//! ```json
//! {
//!   "version": 1,
//!   "command": "search",
//!   "p": "5",
//!   "precision": 120,
//!   "field": {"defining": ["5", "0", "15", "0", "0", "1"],
//!             "residue_modulus": null, "e_f_hint": null},
//!   "roots":  {"polynomial": [...], "max_depth": null},
//!   "search": {"generic": "D5", "fixed_params": [["5"]],
//!              "fixed_param_candidates": null, "free_param": null,
//!              "subfield": ["0", "1"], "digit_bound": 6,
//!              "frontier_cap": null, "iteration_cap": null, "trace": false},
//!   "check":  {"candidate": [...]}
//! }
//! ```
//!
//! Only the payload of the requested subcommand is read. `generic` is a
//! catalog name or an inline `{"name", "group", "arity", "template"}`.
//!
//! Exit codes: 0 success, 1 input error, 2 inconclusive or bound hit,
//! 3 precision failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::catalog::{Catalog, GenericPolynomial};
use crate::error::Error;
use crate::field::{FieldElement, FieldOptions, LocalField};
use crate::panayi::count_roots;
use crate::poly::{BivariatePoly, PolyOverK};
use crate::residue::ResidueElement;
use crate::search::{
    check_gsm_local, search, BranchOutcome, BranchStatus, SearchJob, SearchResult, TraceStep,
};

pub const SCHEMA_VERSION: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "gsm-panayi",
    version,
    about = "p-adic root finding and generic-polynomial parameter search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Job file (JSON).
    #[arg(long, global = true)]
    pub job: Option<PathBuf>,
    /// Result file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Working precision in base-p digits, overriding the job.
    #[arg(long, global = true)]
    pub precision: Option<i64>,
    /// Worker threads for the parallel search.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Catalog file of additional generic polynomials.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Count and approximate the roots of a polynomial in K.
    Roots,
    /// Search for a parameter giving a root in K.
    Search,
    /// Decide whether a candidate defines the same local field.
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Roots => "roots",
            Command::Search => "search",
            Command::Check => "check",
        }
    }
}

/// An integer or rational given as a JSON number or a decimal string.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn rational(&self) -> Result<BigRational, Error> {
        match self {
            Num::Int(n) => Ok(BigRational::from_integer((*n).into())),
            Num::Text(s) => s
                .trim()
                .parse::<BigRational>()
                .map_err(|_| Error::InvalidInput(format!("not a rational number: {s:?}"))),
        }
    }

    fn integer(&self) -> Result<BigInt, Error> {
        let q = self.rational()?;
        if !q.is_integer() {
            return Err(Error::InvalidInput(format!("not an integer: {q}")));
        }
        Ok(q.to_integer())
    }
}

fn integers(ns: &[Num]) -> Result<Vec<BigInt>, Error> {
    ns.iter().map(Num::integer).collect()
}

fn rationals(ns: &[Num]) -> Result<Vec<BigRational>, Error> {
    ns.iter().map(Num::rational).collect()
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub defining: Vec<Num>,
    #[serde(default)]
    pub residue_modulus: Option<Vec<u64>>,
    #[serde(default)]
    pub e_f_hint: Option<(usize, usize)>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RootsPayload {
    pub polynomial: Vec<Num>,
    #[serde(default)]
    pub max_depth: Option<usize>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct SearchPayload {
    pub generic: Value,
    #[serde(default)]
    pub fixed_params: Vec<Vec<Num>>,
    #[serde(default)]
    pub fixed_param_candidates: Option<Vec<Vec<Vec<Num>>>>,
    #[serde(default)]
    pub free_param: Option<usize>,
    #[serde(default)]
    pub subfield: Option<Vec<Num>>,
    pub digit_bound: usize,
    #[serde(default)]
    pub frontier_cap: Option<usize>,
    #[serde(default)]
    pub iteration_cap: Option<usize>,
    #[serde(default)]
    pub trace: bool,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct CheckPayload {
    pub candidate: Vec<Num>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub version: u64,
    #[serde(default)]
    pub command: Option<String>,
    pub p: Num,
    pub precision: i64,
    pub field: FieldSpec,
    #[serde(default)]
    pub roots: Option<RootsPayload>,
    #[serde(default)]
    pub search: Option<SearchPayload>,
    #[serde(default)]
    pub check: Option<CheckPayload>,
}

impl JobFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let job: JobFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("job file: {e}")))?;
        if job.version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                job.version
            )));
        }
        Ok(job)
    }

    fn prime(&self) -> Result<u64, Error> {
        let p = self.p.integer()?;
        p.to_u64()
            .ok_or_else(|| Error::InvalidInput(format!("p out of range: {p}")))
    }

    fn local_field(&self, precision: i64) -> Result<LocalField, Error> {
        let opts = FieldOptions {
            precision,
            residue_modulus: self.field.residue_modulus.clone(),
            e_f_hint: self.field.e_f_hint,
        };
        LocalField::with_options(self.prime()?, &integers(&self.field.defining)?, opts)
    }
}

/// Result document and exit code of a job.
#[derive(Debug)]
pub struct Outcome {
    pub document: Value,
    pub exit_code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionExhausted(_) => EXIT_PRECISION,
        Error::DepthExceeded(_) | Error::Inconclusive(_) | Error::FrontierExplosion { .. } => {
            EXIT_INCONCLUSIVE
        }
        _ => EXIT_INPUT,
    }
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn digits_json(ds: &[ResidueElement]) -> Vec<String> {
    strings(ds)
}

fn element_json(x: &FieldElement) -> Value {
    match x.as_rational() {
        Some(q) => json!(q.to_string()),
        None => json!(strings(&x.to_rationals())),
    }
}

fn poly_json(coeffs: &[FieldElement]) -> Value {
    Value::Array(coeffs.iter().map(element_json).collect())
}

fn bivariate_json(phi: &BivariatePoly) -> Value {
    Value::Array(phi.rows.iter().map(|r| poly_json(r)).collect())
}

fn header(
    job: &JobFile,
    command: Command,
    precision: i64,
) -> Result<serde_json::Map<String, Value>, Error> {
    let mut m = serde_json::Map::new();
    m.insert("version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command.name()));
    m.insert("p".into(), json!(job.prime()?.to_string()));
    m.insert("precision".into(), json!(precision));
    m.insert(
        "field".into(),
        json!({ "defining": strings(&integers(&job.field.defining)?) }),
    );
    Ok(m)
}

/// Runs a parsed job. Errors that carry no partial result are returned as
/// `Err`; the caller maps them with [`exit_code`].
pub fn run_job(
    job: &JobFile,
    command: Command,
    precision: Option<i64>,
    catalog: &Catalog,
) -> Result<Outcome, Error> {
    if let Some(c) = &job.command {
        if c != command.name() {
            return Err(Error::InvalidInput(format!(
                "job is for {c:?}, not {:?}",
                command.name()
            )));
        }
    }
    let precision = precision.unwrap_or(job.precision);
    if precision <= 0 {
        return Err(Error::InvalidInput(format!(
            "precision must be positive, got {precision}"
        )));
    }
    let mut doc = header(job, command, precision)?;
    let missing = |what: &str| Error::InvalidInput(format!("job lacks a {what:?} payload"));
    let exit_code = match command {
        Command::Roots => {
            let payload = job.roots.as_ref().ok_or_else(|| missing("roots"))?;
            let k = job.local_field(precision)?;
            let phi = PolyOverK::from_rationals(&k, &rationals(&payload.polynomial)?)?;
            let report = count_roots(&phi, &k, payload.max_depth)?;
            let roots: Vec<Value> = report
                .roots
                .iter()
                .map(|r| {
                    json!({
                        "digits": digits_json(&r.digits),
                        "residual_valuation": r.residual_valuation.to_string(),
                        "reciprocal": r.reciprocal,
                    })
                })
                .collect();
            doc.insert("count".into(), json!(report.count));
            doc.insert(
                "discriminant_valuation".into(),
                json!(report.discriminant_valuation),
            );
            doc.insert("roots".into(), Value::Array(roots));
            EXIT_OK
        }
        Command::Check => {
            let payload = job.check.as_ref().ok_or_else(|| missing("check"))?;
            let local = integers(&job.field.defining)?;
            let candidate = integers(&payload.candidate)?;
            let verdict = check_gsm_local(job.prime()?, &local, &candidate, precision)?;
            doc.insert("candidate".into(), json!(strings(&candidate)));
            doc.insert("local_gsm".into(), json!(verdict));
            EXIT_OK
        }
        Command::Search => {
            let payload = job.search.as_ref().ok_or_else(|| missing("search"))?;
            let (results, code) = run_search(job, payload, precision, catalog)?;
            doc.insert("results".into(), Value::Array(results));
            code
        }
    };
    Ok(Outcome {
        document: Value::Object(doc),
        exit_code,
    })
}

fn generic_of(v: &Value, catalog: &Catalog) -> Result<GenericPolynomial, Error> {
    match v {
        Value::String(name) => catalog.get(name).cloned(),
        Value::Object(_) => GenericPolynomial::from_json(v),
        other => Err(Error::InvalidInput(format!(
            "generic must be a catalog name or an inline entry, got {other}"
        ))),
    }
}

fn run_search(
    job: &JobFile,
    payload: &SearchPayload,
    precision: i64,
    catalog: &Catalog,
) -> Result<(Vec<Value>, i32), Error> {
    let k = job.local_field(precision)?;
    let generic = generic_of(&payload.generic, catalog)?;
    let candidates: Vec<&Vec<Vec<Num>>> = match &payload.fixed_param_candidates {
        Some(c) if !c.is_empty() => c.iter().collect(),
        Some(_) => {
            return Err(Error::InvalidInput(
                "fixed_param_candidates is empty".into(),
            ))
        }
        None => vec![&payload.fixed_params],
    };
    let mut results = Vec::with_capacity(candidates.len());
    let (mut any_found, mut any_open) = (false, false);
    for fixed in candidates {
        let fixed_params = fixed
            .iter()
            .map(|v| rationals(v))
            .collect::<Result<Vec<_>, _>>()?;
        let mut sj = SearchJob::new(generic.clone(), fixed_params, payload.digit_bound);
        sj.free_param = payload.free_param;
        if let Some(s) = &payload.subfield {
            sj.subfield = integers(s)?;
        }
        if let Some(cap) = payload.frontier_cap {
            sj.frontier_cap = cap;
        }
        sj.iteration_cap = payload.iteration_cap;
        sj.record_trace = payload.trace;
        let (result, status) = match search(&k, &sj) {
            Ok(r) => (r, "complete"),
            Err(Error::FrontierExplosion { partial, .. }) => (*partial, "frontier-explosion"),
            Err(e) => return Err(e),
        };
        any_found |= result.count(BranchStatus::RootFound) > 0;
        any_open |= status != "complete" || result.count(BranchStatus::BoundHit) > 0;
        results.push(search_json(fixed, status, &result, payload.trace)?);
    }
    let code = if any_found || !any_open {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    };
    Ok((results, code))
}

fn search_json(
    fixed: &[Vec<Num>],
    status: &str,
    result: &SearchResult,
    trace: bool,
) -> Result<Value, Error> {
    let fixed: Vec<Vec<String>> = fixed
        .iter()
        .map(|v| rationals(v).map(|q| strings(&q)))
        .collect::<Result<_, _>>()?;
    let branches: Vec<Value> = result
        .branches
        .iter()
        .map(|b| branch_json(b, trace))
        .collect();
    Ok(json!({
        "fixed_params": fixed,
        "status": status,
        "counts": {
            "root-found": result.count(BranchStatus::RootFound),
            "dead": result.count(BranchStatus::Dead),
            "bound-hit": result.count(BranchStatus::BoundHit),
        },
        "reconstructions": strings(&result.reconstructions()),
        "field_defining": strings(&result.field_defining().filter_map(|b| b.reconstruction.clone()).collect::<Vec<_>>()),
        "branches": branches,
    }))
}

fn branch_json(b: &BranchOutcome, trace: bool) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("status".into(), json!(b.status.label()));
    m.insert("digits".into(), json!(digits_json(&b.digits)));
    m.insert("x_digits".into(), json!(digits_json(&b.x_digits)));
    if let Some(r) = &b.reconstruction {
        m.insert("reconstruction".into(), json!(r.to_string()));
    }
    if let Some(q) = &b.specialized_rational {
        m.insert("specialized".into(), json!(strings(q)));
    } else if let Some(phi) = &b.specialized {
        m.insert("specialized_local".into(), poly_json(&phi.coeffs));
    }
    if let Some(d) = b.defines_field {
        m.insert("defines_field".into(), json!(d));
    }
    if trace {
        let steps: Vec<Value> = b
            .trace
            .iter()
            .map(|s| match s {
                TraceStep::SubstituteT { digit, poly } => {
                    json!({"step": "substitute-t", "digit": digit.to_string(), "poly": bivariate_json(poly)})
                }
                TraceStep::LiftX { root, poly } => {
                    json!({"step": "lift-x", "root": root.to_string(), "poly": bivariate_json(poly)})
                }
                TraceStep::Normalize { valuation, poly } => {
                    json!({"step": "normalize", "valuation": valuation, "poly": bivariate_json(poly)})
                }
            })
            .collect();
        m.insert("trace".into(), Value::Array(steps));
    }
    Value::Object(m)
}

/// Serialized result body: pretty JSON with a trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    s.push('\n');
    s
}

fn read_job(path: Option<&Path>) -> Result<JobFile, Error> {
    let path = path.ok_or_else(|| Error::InvalidInput("--job is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    JobFile::parse(&text)
}

fn execute(cli: &Cli) -> Result<Outcome, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("--threads: {e}")))?;
    }
    let catalog = match &cli.catalog {
        Some(path) => Catalog::load(path)?,
        None => Catalog::default(),
    };
    let job = read_job(cli.job.as_deref())?;
    run_job(&job, cli.command, cli.precision, &catalog)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("gsm-panayi: {e}");
            return exit_code(&e);
        }
    };
    let body = render(&outcome.document);
    let written = match &cli.out {
        Some(path) => fs::write(path, &body).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("gsm-panayi: {e}");
        return EXIT_INPUT;
    }
    outcome.exit_code
}
