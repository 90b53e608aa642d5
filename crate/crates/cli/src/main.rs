use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use quasifold_core::affine::Letter;
use quasifold_core::bibundle::{self, Agreement, CheckConfig, Classification, IsoOutcome, LiftFamily};
use quasifold_core::json::{self as qjson, BibundleJson, MapJson, ScalarText};
use quasifold_core::nonexample::{FlatFlow, Report};
use quasifold_core::search::{ChartPath, PathStep};
use quasifold_core::torus::{self, ContinuedFraction, QuadraticIrrational, WitnessMatrix};
use quasifold_core::{Field, Scalar, Verdict};

#[derive(Parser)]
#[command(name = "quasifold", version, about = "Exact computations with affine quasifold groupoids")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct RunArgs {
    /// Word-length bound for group enumeration and orbit search.
    #[arg(long, global = true, default_value_t = 6)]
    bound: usize,
    /// Random samples per box for sampled checks.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Numeric tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two irrational tori are equivalent.
    Torus {
        alpha: String,
        beta: String,
        /// Also build and classify the scaling bibundle of the witness.
        #[arg(long)]
        lift: bool,
    },
    /// Compare the orbits of (i, x) and (j, y) in an atlas (chart indices
    /// 1-based, coordinates comma-separated).
    Orbit {
        /// Atlas JSON file, or - for stdin.
        atlas: String,
        i: usize,
        #[arg(allow_hyphen_values = true)]
        x: String,
        j: usize,
        #[arg(allow_hyphen_values = true)]
        y: String,
    },
    /// Operations on bibundles given as lift-family JSON.
    Bibundle {
        #[command(subcommand)]
        op: BibundleOp,
    },
    /// Numerical checks on the flat flow.
    Nonexample {
        /// Relative accuracy of the flow integrator.
        #[arg(long, global = true, default_value_t = 1e-13)]
        accuracy: f64,
        #[command(subcommand)]
        check: NonexampleCheck,
    },
}

#[derive(Subcommand)]
enum BibundleOp {
    /// Q ∘ P, with the functoriality check.
    Compose { first: String, second: String },
    /// P restricted to U and V (box-set JSON), with the restriction square.
    Restrict {
        bibundle: String,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Invertible, locally invertible or plain, by sampled conjugation and orbit saturation.
    Classify { bibundle: String },
    /// Sampled isomorphism test.
    Iso { first: String, second: String },
}

#[derive(Subcommand)]
enum NonexampleCheck {
    /// Finite-difference jets of ψ − id at 0.
    Jet {
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 0.1)]
        scale: f64,
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
    },
    /// Orbits of ψ and ψ̂ through the given points.
    Orbit {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        x: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        k: u32,
    },
    /// Try to match ψ̂ on (a, b) with a single power of ψ.
    Recovery {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, default_value_t = 3)]
        k: u32,
    },
    /// |ψ(x) − x| against the supremum of h along the trajectory.
    Envelope {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.2")]
        x: Vec<f64>,
    },
}

/// Defaults and inputs, echoed into every report.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    command: String,
    inputs: Vec<String>,
    bound: usize,
    samples: usize,
    seed: u64,
    tol: f64,
    out: Option<String>,
}

struct Outcome {
    verdict: &'static str,
    code: u8,
    result: Value,
}

const YES: u8 = 0;
const NO: u8 = 1;
const ERROR: u8 = 2;
const UNKNOWN: u8 = 3;

fn decided<T>(v: &Verdict<T>) -> (&'static str, u8) {
    match v {
        Verdict::Yes(_) => ("yes", YES),
        Verdict::No => ("no", NO),
        Verdict::Unknown => ("unknown", UNKNOWN),
    }
}

type Fallible<T> = Result<T, String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn read_input(path: &str) -> Fallible<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(fail)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
    }
}

fn parse_point(s: &str) -> Fallible<Vec<Scalar>> {
    s.split(',').map(|c| Scalar::parse_scalar(c.trim()).map_err(fail)).collect()
}

fn int_json(n: &impl ToString) -> Value {
    let s = n.to_string();
    match s.parse::<i64>() {
        Ok(v) => json!(v),
        Err(_) => json!(s),
    }
}

fn witness_json(w: &WitnessMatrix) -> Value {
    json!([[int_json(&w.a), int_json(&w.b)], [int_json(&w.c), int_json(&w.d)]])
}

fn cf_json(cf: &ContinuedFraction) -> Value {
    json!({
        "preperiod": cf.preperiod.iter().map(int_json).collect::<Vec<_>>(),
        "period": cf.period.iter().map(int_json).collect::<Vec<_>>(),
        "text": cf.to_string(),
    })
}

fn word_text(word: &[Letter]) -> String {
    if word.is_empty() {
        return "e".into();
    }
    word.iter()
        .map(|l| format!("g{}{}", l.generator + 1, if l.inverse { "^-1" } else { "" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn path_json(p: &ChartPath<Scalar>) -> Value {
    let steps: Vec<Value> = p
        .steps
        .iter()
        .map(|s| match s {
            PathStep::Group { chart, element } => json!({"group": {"chart": chart + 1, "word": word_text(&element.word)}}),
            PathStep::Transition { index, inverse } => json!({"transition": {"index": index + 1, "inverse": inverse}}),
        })
        .collect();
    json!({"from": p.from + 1, "to": p.to + 1, "map": MapJson::of(&p.map), "steps": steps})
}

fn agreement_json(a: &Agreement) -> Value {
    json!({
        "sampled": a.sampled,
        "decided": a.decided,
        "disagreed": a.disagreed,
        "verdict": a.verdict().label(),
    })
}

fn check_config(run: &RunArgs) -> CheckConfig {
    CheckConfig {
        bound: run.bound,
        samples: run.samples,
        seed: run.seed,
    }
}

fn load_bibundle(path: &str) -> Fallible<LiftFamily<Scalar>> {
    qjson::parse_bibundle::<Scalar>(&read_input(path)?).map_err(|e| format!("{path}: {e}"))
}

fn cmd_torus(run: &RunArgs, alpha: &str, beta: &str, lift: bool) -> Fallible<Outcome> {
    let a = QuadraticIrrational::parse(alpha).map_err(fail)?;
    let b = QuadraticIrrational::parse(beta).map_err(fail)?;
    let v = torus::morita_equivalent(&a, &b).map_err(fail)?;
    let (verdict, code) = decided(&v);
    let mut result = json!({
        "alpha": a.to_string(),
        "beta": b.to_string(),
        "equivalent": match &v { Verdict::Yes(_) => json!(true), Verdict::No => json!(false), Verdict::Unknown => Value::Null },
        "witness": match &v { Verdict::Yes(w) => witness_json(w), _ => Value::Null },
        "cf": {"alpha": cf_json(&torus::continued_fraction(&a)), "beta": cf_json(&torus::continued_fraction(&b))},
    });
    if let Verdict::Yes(w) = &v {
        result["det"] = int_json(&w.det());
        if lift {
            let fam = torus::lift_witness_to_bibundle(&a, &b, w).map_err(fail)?;
            let report = bibundle::classify(&fam, &check_config(run)).map_err(fail)?;
            result["lift"] = json!({
                "bibundle": BibundleJson::of(&fam),
                "class": report.class.name(),
            });
        }
    }
    Ok(Outcome { verdict, code, result })
}

fn cmd_orbit(run: &RunArgs, atlas: &str, i: usize, x: &str, j: usize, y: &str) -> Fallible<Outcome> {
    let atlas = qjson::parse_atlas::<Scalar>(&read_input(atlas)?).map_err(fail)?;
    let chart = |k: usize| k.checked_sub(1).ok_or_else(|| "chart indices are 1-based".to_string());
    let p = atlas.atlas_pi(chart(i)?, parse_point(x)?).map_err(fail)?;
    let q = atlas.atlas_pi(chart(j)?, parse_point(y)?).map_err(fail)?;
    let v = p.compare(&q, run.bound).map_err(fail)?;
    let (verdict, code) = decided(&v);
    let result = json!({
        "same_orbit": verdict,
        "path": match &v { Verdict::Yes(path) => path_json(path), _ => Value::Null },
    });
    Ok(Outcome { verdict, code, result })
}

fn cmd_bibundle(run: &RunArgs, op: &BibundleOp) -> Fallible<Outcome> {
    let cfg = check_config(run);
    match op {
        BibundleOp::Compose { first, second } => {
            let p = load_bibundle(first)?;
            let q = load_bibundle(second)?;
            let qp = bibundle::compose(&p, &q, run.bound).map_err(fail)?;
            let check = bibundle::functoriality_check(&p, &q, &qp, &cfg).map_err(fail)?;
            let (verdict, code) = decided(&check.verdict());
            Ok(Outcome {
                verdict,
                code,
                result: json!({"bibundle": BibundleJson::of(&qp), "functoriality": agreement_json(&check)}),
            })
        }
        BibundleOp::Restrict { bibundle: path, u, v } => {
            let p = load_bibundle(path)?;
            let n = p.source().dim();
            let u = qjson::parse_box_set::<Scalar>(n, u).map_err(|e| format!("--u: {e}"))?;
            let v = qjson::parse_box_set::<Scalar>(n, v).map_err(|e| format!("--v: {e}"))?;
            let r = bibundle::restrict(&p, &u, &v).map_err(fail)?;
            let square = bibundle::restriction_square(&p, &u, &v, &cfg).map_err(fail)?;
            let (verdict, code) = decided(&square.verdict());
            Ok(Outcome {
                verdict,
                code,
                result: json!({"bibundle": BibundleJson::of(&r), "restriction_square": agreement_json(&square)}),
            })
        }
        BibundleOp::Classify { bibundle: path } => {
            let p = load_bibundle(path)?;
            let r = bibundle::classify(&p, &cfg).map_err(fail)?;
            let (verdict, code) = match r.class {
                Classification::Unknown => ("unknown", UNKNOWN),
                _ => ("yes", YES),
            };
            Ok(Outcome {
                verdict,
                code,
                result: json!({
                    "class": r.class.name(),
                    "locally_invertible": r.local.label(),
                    "saturated": r.saturation.label(),
                    "note": r.note,
                }),
            })
        }
        BibundleOp::Iso { first, second } => {
            let p = load_bibundle(first)?;
            let q = load_bibundle(second)?;
            let out = bibundle::isomorphic(&p, &q, &cfg).map_err(fail)?;
            let witness = match &out {
                IsoOutcome::No(w) => {
                    let bp = |b: &(usize, Vec<Scalar>)| json!({"chart": b.0 + 1, "x": b.1.iter().map(ScalarText::of).collect::<Vec<_>>()});
                    json!({"point": bp(&w.point), "first": bp(&w.first), "second": bp(&w.second)})
                }
                _ => Value::Null,
            };
            let (verdict, code) = match out {
                IsoOutcome::Yes => ("yes", YES),
                IsoOutcome::No(_) => ("no", NO),
                IsoOutcome::Unknown => ("unknown", UNKNOWN),
            };
            Ok(Outcome {
                verdict,
                code,
                result: json!({"isomorphic": verdict, "witness": witness}),
            })
        }
    }
}

fn report_outcome(report: &Report, extra: Option<Value>) -> Fallible<Outcome> {
    let mut result = serde_json::to_value(report).map_err(fail)?;
    if let Some(x) = extra {
        result["details"] = x;
    }
    let (verdict, code) = if report.pass() { ("pass", YES) } else { ("fail", NO) };
    Ok(Outcome { verdict, code, result })
}

fn cmd_nonexample(run: &RunArgs, accuracy: f64, check: &NonexampleCheck) -> Fallible<Outcome> {
    let flow = FlatFlow::<f64>::standard().with_accuracy(accuracy).map_err(fail)?;
    match check {
        NonexampleCheck::Jet { order, scale, threshold } => {
            report_outcome(&flow.jet_flatness_check(*order, *scale, *threshold).map_err(fail)?, None)
        }
        NonexampleCheck::Orbit { x, k } => report_outcome(&flow.orbit_coincidence(x, *k, run.tol).map_err(fail)?, None),
        NonexampleCheck::Recovery { a, b, k } => {
            let demo = flow.recovery_failure_demo(*a, *b, *k, run.samples, run.tol).map_err(fail)?;
            let extra = json!({
                "outcome": if demo.outcome == "no_match" { "NoMatch (as expected)" } else { "Match" },
                "best": demo.best,
                "candidates": demo.candidates,
            });
            report_outcome(&demo.report, Some(extra))
        }
        NonexampleCheck::Envelope { x } => {
            let report = Report {
                title: "displacement envelope".into(),
                evidence: "|psi(x) - x| is bounded by the supremum of h along the trajectory".into(),
                checks: flow.envelope_checks(x).map_err(fail)?,
            };
            report_outcome(&report, None)
        }
    }
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(val, indent + 1, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(val, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar_text(val))),
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if let (Some(name), Some(pass)) = (item.get("name"), item.get("pass")) {
                    out.push_str(&format!(
                        "{pad}{:<40} {:>12} {:<2} {:<12} {}\n",
                        scalar_text(name),
                        scalar_text(&item["value"]),
                        item.get("relation").map(scalar_text).unwrap_or_else(|| "<=".into()),
                        scalar_text(&item["bound"]),
                        if pass.as_bool() == Some(true) { "PASS" } else { "FAIL" }
                    ));
                } else if item.is_object() {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(item, indent + 1, out);
                } else {
                    out.push_str(&format!("{pad}- {}\n", scalar_text(item)));
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.3e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn run(cli: &Cli) -> Fallible<(RunConfig, Outcome)> {
    let r = &cli.run;
    if r.bound == 0 || r.samples == 0 || !(r.tol > 0.0) {
        return Err("--bound, --samples and --tol must be positive".into());
    }
    let (command, inputs, outcome) = match &cli.command {
        Command::Torus { alpha, beta, lift } => ("torus", vec![alpha.clone(), beta.clone()], cmd_torus(r, alpha, beta, *lift)?),
        Command::Orbit { atlas, i, x, j, y } => (
            "orbit",
            vec![atlas.clone(), i.to_string(), x.clone(), j.to_string(), y.clone()],
            cmd_orbit(r, atlas, *i, x, *j, y)?,
        ),
        Command::Bibundle { op } => {
            let (name, inputs) = match op {
                BibundleOp::Compose { first, second } => ("bibundle compose", vec![first.clone(), second.clone()]),
                BibundleOp::Restrict { bibundle, u, v } => ("bibundle restrict", vec![bibundle.clone(), u.clone(), v.clone()]),
                BibundleOp::Classify { bibundle } => ("bibundle classify", vec![bibundle.clone()]),
                BibundleOp::Iso { first, second } => ("bibundle iso", vec![first.clone(), second.clone()]),
            };
            (name, inputs, cmd_bibundle(r, op)?)
        }
        Command::Nonexample { accuracy, check } => {
            let (name, inputs) = match check {
                NonexampleCheck::Jet { order, scale, threshold } => {
                    ("nonexample jet", vec![order.to_string(), scale.to_string(), threshold.to_string()])
                }
                NonexampleCheck::Orbit { x, k } => ("nonexample orbit", vec![format!("{x:?}"), k.to_string()]),
                NonexampleCheck::Recovery { a, b, k } => ("nonexample recovery", vec![a.to_string(), b.to_string(), k.to_string()]),
                NonexampleCheck::Envelope { x } => ("nonexample envelope", vec![format!("{x:?}")]),
            };
            let mut inputs = inputs;
            inputs.push(format!("accuracy={accuracy}"));
            (name, inputs, cmd_nonexample(r, *accuracy, check)?)
        }
    };
    let config = RunConfig {
        command: command.into(),
        inputs,
        bound: r.bound,
        samples: r.samples,
        seed: r.seed,
        tol: r.tol,
        out: r.out.as_ref().map(|p| p.display().to_string()),
    };
    Ok((config, outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, outcome) = match run(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ERROR);
        }
    };
    let report = json!({
        "command": config.command,
        "config": config,
        "verdict": outcome.verdict,
        "result": outcome.result,
    });
    let text = match cli.run.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Text => {
            let mut s = String::new();
            render_text(&report, 0, &mut s);
            s
        }
    };
    let written = match &cli.run.out {
        Some(path) => fs::write(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).map_err(fail),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(ERROR);
    }
    ExitCode::from(outcome.code)
}
