//! Request model and dispatch behind the `linform` binary.
//!
//! Every report is a JSON object `{ "request": ..., "result": ... }`; the
//! embedded request parses back into an equal [`CommandRequest`].

use std::fmt::Write as _;
use std::path::PathBuf;

use linform_core::counting::{
    common_holds_exact, count_solutions_in_set, lambda_bruteforce, monochromatic_count,
    sidorenko_holds_exact, solution_density, solution_space_size,
};
use linform_core::forge::{
    default_c, forge_freevar_odd, forge_inhom, forge_nonsidorenko_odd, forge_uncommon_even,
    verify_certificate,
};
use linform_core::formats::{parse_coloring, parse_function, parse_set};
use linform_core::fourier::{inverse, lambda_spectral, transform};
use linform_core::hilbert::{find_cube_embedding, verify_cube_embedding};
use linform_core::linear::classify_any;
use linform_core::refuter::{exhaustive_common_search, exhaustive_sidorenko_search, random_search};
use linform_core::{
    parse_equation_spec, Budget, Certificate, Error, FunctionalKind, LinearEquation, SearchKind,
    SearchOptions, SearchReport, Space, Spectrum,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Significant digits of every float in a report.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const DEFAULT_TRIES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classify,
    Count,
    Lambda,
    Fourier,
    Forge,
    Refute,
    Hilbert,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaMode {
    #[default]
    Spectral,
    Brute,
    Both,
}

/// One invocation of the tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandRequest {
    pub command: Command,
    /// Equation spec, e.g. `L=1,-2,1; q=5`; unused by `fourier`.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub equation: String,
    /// Field spec appended to the equation when given separately.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Index of the right-hand side `b`; defaults to 0, or to the first unit
    /// vector for inhomogeneous equations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FunctionalKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tries: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_mode: Option<LambdaMode>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inverse: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl CommandRequest {
    pub fn new(command: Command, equation: impl Into<String>) -> Self {
        CommandRequest {
            command,
            equation: equation.into(),
            field: None,
            n: None,
            rhs: None,
            set: None,
            coloring: None,
            function: None,
            kind: None,
            seed: None,
            tries: None,
            c: None,
            lambda_mode: None,
            inverse: false,
            random: None,
            max_cells: None,
            t: None,
            format: OutputFormat::Json,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn parse_equation(&self) -> Result<LinearEquation, Error> {
        match &self.field {
            Some(field) => parse_equation_spec(&format!("{}; {}", self.equation, field)),
            None => parse_equation_spec(&self.equation),
        }
    }
}

/// Exit code plus the serialized report (stdout) or error (stderr).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn to_value(&self) -> Value {
        match self {
            Failure::Core(e) => {
                let debug = format!("{e:?}");
                let kind: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
                let mut v = json!({ "kind": kind, "message": e.to_string() });
                if let Error::Parse { pos, .. } = e {
                    v["position"] = json!(pos);
                }
                v
            }
            Failure::Io(path, e) => {
                json!({ "kind": "Io", "message": format!("{}: {e}", path.display()) })
            }
            Failure::Usage(msg) => json!({ "kind": "Usage", "message": msg }),
        }
    }
}

struct Report {
    code: i32,
    result: Value,
}

/// Runs a request with the budget taken from `LINFORM_BUDGET`.
pub fn run(req: &CommandRequest) -> Outcome {
    run_with_budget(req, Budget::from_env())
}

pub fn run_with_budget(req: &CommandRequest, budget: Budget) -> Outcome {
    let request = serde_json::to_value(req).expect("request serializes");
    match dispatch(req, budget) {
        Ok(report) => {
            let doc = json!({ "request": request, "result": round_floats(report.result) });
            let stdout = match req.format {
                OutputFormat::Json => {
                    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
                }
                OutputFormat::Table => render_table(&doc),
            };
            Outcome {
                code: report.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(failure) => {
            let doc = json!({ "request": request, "error": failure.to_value() });
            Outcome {
                code: EXIT_ERROR,
                stdout: String::new(),
                stderr: serde_json::to_string(&doc).expect("error serializes") + "\n",
            }
        }
    }
}

fn dispatch(req: &CommandRequest, budget: Budget) -> Result<Report, Failure> {
    if req.command == Command::Fourier {
        return fourier_cmd(req, budget);
    }
    let eq = req.parse_equation()?;
    match req.command {
        Command::Classify => classify_cmd(req, &eq),
        Command::Count => count_cmd(req, &eq, budget),
        Command::Lambda => lambda_cmd(req, &eq, budget),
        Command::Fourier => unreachable!(),
        Command::Forge => forge_cmd(req, &eq),
        Command::Refute => refute_cmd(req, &eq, budget),
        Command::Hilbert => hilbert_cmd(req, &eq, budget),
    }
}

fn read(path: &Option<PathBuf>, flag: &str) -> Result<String, Failure> {
    let path = path
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("missing {flag} FILE")))?;
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.clone(), e))
}

fn rhs_index(req: &CommandRequest, eq: &LinearEquation, space: &Space) -> usize {
    req.rhs
        .unwrap_or(if eq.is_homogeneous() { 0 } else { space.unit() })
}

fn check_space(eq: &LinearEquation, space: &Space) -> Result<(), Failure> {
    if space.field() != eq.field() {
        return Err(Failure::Core(Error::FieldMismatch));
    }
    Ok(())
}

fn kind_label(kind: FunctionalKind) -> &'static str {
    match kind {
        FunctionalKind::Sidorenko => "sidorenko",
        FunctionalKind::Common => "common",
    }
}

fn classify_cmd(req: &CommandRequest, eq: &LinearEquation) -> Result<Report, Failure> {
    let verdict = classify_any(eq)?;
    let holds = match req.kind {
        Some(FunctionalKind::Sidorenko) => verdict.sidorenko,
        Some(FunctionalKind::Common) => verdict.common,
        None => verdict.sidorenko && verdict.common,
    };
    Ok(Report {
        code: if holds { EXIT_HOLDS } else { EXIT_VIOLATED },
        result: json!({
            "equation": eq.to_spec(),
            "verdict": verdict,
        }),
    })
}

fn count_cmd(req: &CommandRequest, eq: &LinearEquation, budget: Budget) -> Result<Report, Failure> {
    match (&req.set, &req.coloring) {
        (Some(_), None) => {
            let set = parse_set(&read(&req.set, "--set")?)?;
            check_space(eq, set.space())?;
            let b = rhs_index(req, eq, set.space());
            let count = count_solutions_in_set(eq, b, &set, budget)?;
            let density = solution_density(eq, b, &set, budget)?;
            let holds = sidorenko_holds_exact(eq, b, &set, budget)?;
            Ok(Report {
                code: if holds { EXIT_HOLDS } else { EXIT_VIOLATED },
                result: json!({
                    "size": set.len(),
                    "count": count.to_string(),
                    "solutions": solution_space_size(eq, set.space()).to_string(),
                    "density": density.to_string(),
                    "sidorenko_inequality_holds": holds,
                }),
            })
        }
        (None, Some(_)) => {
            let coloring = parse_coloring(&read(&req.coloring, "--coloring")?)?;
            check_space(eq, coloring.space())?;
            let b = rhs_index(req, eq, coloring.space());
            let mono = monochromatic_count(eq, b, &coloring, budget)?;
            let holds = common_holds_exact(eq, b, &coloring, budget)?;
            Ok(Report {
                code: if holds { EXIT_HOLDS } else { EXIT_VIOLATED },
                result: json!({
                    "monochromatic": mono.to_string(),
                    "solutions": solution_space_size(eq, coloring.space()).to_string(),
                    "common_inequality_holds": holds,
                }),
            })
        }
        _ => Err(Failure::Usage(
            "count needs exactly one of --set FILE or --coloring FILE".into(),
        )),
    }
}

fn complex(re: f64, im: f64) -> Value {
    json!([re, im])
}

fn lambda_cmd(
    req: &CommandRequest,
    eq: &LinearEquation,
    budget: Budget,
) -> Result<Report, Failure> {
    let f = parse_function(&read(&req.function, "--fn")?)?;
    check_space(eq, f.space())?;
    let b = rhs_index(req, eq, f.space());
    let mode = req.lambda_mode.unwrap_or_default();
    let mut result = json!({ "rhs": b, "mean": f.mean().re });
    let spectral = match mode {
        LambdaMode::Spectral | LambdaMode::Both => Some(lambda_spectral(eq, b, &f, budget)?),
        LambdaMode::Brute => None,
    };
    let brute = match mode {
        LambdaMode::Brute | LambdaMode::Both => Some(lambda_bruteforce(eq, b, &f, budget)?),
        LambdaMode::Spectral => None,
    };
    if let Some(z) = spectral {
        result["spectral"] = complex(z.re, z.im);
    }
    if let Some(z) = brute {
        result["brute"] = complex(z.re, z.im);
    }
    if let (Some(s), Some(t)) = (spectral, brute) {
        result["deviation"] = json!((s - t).norm());
    }
    Ok(Report {
        code: EXIT_HOLDS,
        result,
    })
}

fn fourier_cmd(req: &CommandRequest, budget: Budget) -> Result<Report, Failure> {
    let input = parse_function(&read(&req.function, "--fn")?)?;
    let values: Vec<_> = if req.inverse {
        let spectrum = Spectrum::new(input.space().clone(), input.values().to_vec())?;
        inverse(&spectrum, budget)?.values().to_vec()
    } else {
        transform(&input, budget)?.values().to_vec()
    };
    let values: Vec<Value> = values.iter().map(|z| complex(z.re, z.im)).collect();
    Ok(Report {
        code: EXIT_HOLDS,
        result: json!({
            "direction": if req.inverse { "inverse" } else { "forward" },
            "n": input.space().dim(),
            "field": input.space().field().spec(),
            "values": values,
        }),
    })
}

fn forge_cmd(req: &CommandRequest, eq: &LinearEquation) -> Result<Report, Failure> {
    let kind = req
        .kind
        .ok_or_else(|| Failure::Usage("forge needs --kind common|sidorenko".into()))?;
    let verdict = classify_any(eq)?;
    let holds = match kind {
        FunctionalKind::Sidorenko => verdict.sidorenko,
        FunctionalKind::Common => verdict.common,
    };
    if holds {
        return Ok(Report {
            code: EXIT_HOLDS,
            result: json!({
                "kind": kind_label(kind),
                "holds": true,
                "verdict": verdict,
            }),
        });
    }
    let seed = req.seed.unwrap_or(0);
    let tries = req.tries.unwrap_or(DEFAULT_TRIES);
    let c = req.c.unwrap_or_else(|| default_c(eq));
    let odd = eq.k() % 2 == 1;
    let cert: Certificate = match kind {
        FunctionalKind::Sidorenko if eq.is_homogeneous() && eq.free_count() == 0 && odd => {
            forge_nonsidorenko_odd(eq)?
        }
        _ if !eq.is_homogeneous() => forge_inhom(eq, c)?,
        _ if odd => forge_freevar_odd(eq, c)?,
        _ => forge_uncommon_even(eq, seed, tries)?,
    };
    let check = verify_certificate(&cert);
    if !check.ok {
        return Err(Failure::Core(Error::NumericalInconsistency(
            check.diagnostics.join("; "),
        )));
    }
    let mut result = json!({
        "kind": kind_label(kind),
        "holds": false,
        "certificate": cert.to_value(),
        "verified": true,
    });
    if cert.kind != kind {
        result["note"] =
            json!("a witness against commonness also rules out the Sidorenko property");
    }
    Ok(Report {
        code: EXIT_VIOLATED,
        result,
    })
}

fn refute_cmd(
    req: &CommandRequest,
    eq: &LinearEquation,
    budget: Budget,
) -> Result<Report, Failure> {
    let kind = match req.kind {
        Some(FunctionalKind::Sidorenko) => SearchKind::Sidorenko,
        Some(FunctionalKind::Common) => SearchKind::Common,
        None => {
            return Err(Failure::Usage(
                "refute needs --kind common|sidorenko".into(),
            ))
        }
    };
    let n = req
        .n
        .ok_or_else(|| Failure::Usage("refute needs --n N".into()))?;
    let space = Space::new(eq.field().clone(), n)?;
    let b = rhs_index(req, eq, &space);
    let report: Option<SearchReport> = match req.random {
        Some(trials) => random_search(eq, b, n, trials, req.seed.unwrap_or(0), kind, budget)?,
        None => {
            let mut options = SearchOptions::default();
            if let Some(cells) = req.max_cells {
                options.max_cells = cells;
            }
            Some(match kind {
                SearchKind::Sidorenko => exhaustive_sidorenko_search(eq, b, n, options)?,
                SearchKind::Common => exhaustive_common_search(eq, b, n, options)?,
            })
        }
    };
    let found = report.as_ref().is_some_and(|r| r.found);
    let mut result = match &report {
        Some(r) => serde_json::to_value(r).expect("report serializes"),
        None => json!({ "found": false }),
    };
    result["rhs"] = json!(b);
    if !found {
        result["note"] = json!(format!(
            "no witness on GF({})^{n}; this is not a proof of the property",
            eq.field().q()
        ));
    }
    Ok(Report {
        code: if found { EXIT_VIOLATED } else { EXIT_HOLDS },
        result,
    })
}

fn hilbert_cmd(
    req: &CommandRequest,
    eq: &LinearEquation,
    budget: Budget,
) -> Result<Report, Failure> {
    let t = req
        .t
        .ok_or_else(|| Failure::Usage("hilbert needs --t T".into()))?;
    let embedding = find_cube_embedding(eq, t)?;
    let verified = match &embedding {
        Some(emb) => Some(verify_cube_embedding(eq, emb, budget)?),
        None => None,
    };
    Ok(Report {
        code: if embedding.is_some() {
            EXIT_HOLDS
        } else {
            EXIT_VIOLATED
        },
        result: json!({
            "t": t,
            "found": embedding.is_some(),
            "masks": embedding.map(|e| e.masks),
            "verified": verified,
        }),
    })
}

/// Rounds a float to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => json!(round_significant(num.as_f64().unwrap_or(0.0))),
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

/// Flattened `key  value` lines.
fn render_table(doc: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            Value::Array(items) if items.iter().any(|x| x.is_array() || x.is_object()) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), v, out);
                }
            }
            other => {
                let _ = writeln!(out, "{prefix:<40} {other}");
            }
        }
    }
    let mut out = String::new();
    walk("", &doc["result"], &mut out);
    out
}
