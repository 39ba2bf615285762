// Negated float comparisons reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use latconst::constants::{
    alpha, constant_battery, james, lambda_plus, lambda_schaffer, ConstantEstimate, SearchOptions,
};
use latconst::constructions::extract_linfty2_search;
use latconst::moduli::{characteristic, curve, eps_grid, Modulus};
use latconst::spec::{parse_space, space_to_json};
use latconst::suite::{builtin_suite, verify_space, SuiteConfig, SuiteReport, EMBED_MARGIN};
use latconst::{Error, LatticeSpace};

const VALIDATION_SAMPLES: usize = 1000;

#[derive(Parser)]
#[command(name = "latconst", version, about = "Certified lattice constants of finite-dimensional Banach lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// λ, λ⁺, β, α and J with certificates and witnesses.
    Constants(RunArgs),
    /// σ and δ_m on an ε grid, plus their characteristics.
    Moduli(RunArgs),
    /// Identity and inequality checks; exit 1 on any failure.
    Verify(RunArgs),
    /// An almost isometric copy of ℓ∞² from the λ⁺ witness; exit 4 if none.
    Embed(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Norm spec (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Coordinate grid step of the sphere nets, in (0, 1].
    #[arg(long)]
    h: Option<f64>,
    /// Final step of the local refinement.
    #[arg(long)]
    tol: Option<f64>,
    /// ε grid as start:end:step.
    #[arg(long, default_value = "0:1:0.05")]
    eps_grid: String,
    /// Seed of the randomized norm validation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the compiled-in verification suite (verify only).
    #[arg(long)]
    builtin_suite: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MalformedSpec(_) | Error::InvalidNorm(_) | Error::DegenerateBasis { .. } => 2,
            Error::BudgetExceeded { .. } | Error::SupportCapExceeded { .. } => 3,
            Error::DefectTooLarge { .. } | Error::DegeneratePair => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome = Result<(String, u8), Failure>;

impl RunArgs {
    fn load(&self) -> Result<LatticeSpace, Failure> {
        let path = self.spec.as_ref().ok_or_else(|| usage("--spec FILE is required"))?;
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(parse_space(&text)?)
    }

    fn tune(&self, mut o: SearchOptions) -> Result<SearchOptions, Failure> {
        if let Some(h) = self.h {
            o = o.with_h(h);
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(usage(format!("--tol {t} must be positive")));
            }
            o.refine_tol = t;
        }
        Ok(o)
    }

    fn grid(&self) -> Result<Vec<f64>, Failure> {
        let parts: Vec<&str> = self.eps_grid.split(':').collect();
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| usage(format!("--eps-grid {:?} is not start:end:step", self.eps_grid)))?;
        match nums[..] {
            [a, b, s] => Ok(eps_grid(a, b, s)?),
            _ => Err(usage(format!("--eps-grid {:?} is not start:end:step", self.eps_grid))),
        }
    }
}

fn report(space: Value, results: Value, certificates: Value) -> String {
    let doc = json!({
        "space": space,
        "results": results,
        "certificates": certificates,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializes")
}

fn result_entry(e: &ConstantEstimate) -> Value {
    json!({
        "lower": e.lower,
        "estimate": e.estimate,
        "upper": e.upper,
        "witnesses": e.witnesses,
    })
}

fn certificate_entry(e: &ConstantEstimate) -> Value {
    json!({
        "lower": e.lower,
        "upper": e.upper,
        "net_value": e.net_value,
        "mesh_norm": e.mesh_norm,
        "slack": e.slack,
        "resolution": e.resolution,
        "evaluations": e.evaluations,
    })
}

fn cmd_constants(args: &RunArgs) -> Outcome {
    let space = args.load()?;
    let opts = args.tune(SearchOptions::for_dim(space.dim()))?;
    let validation = space.validate(VALIDATION_SAMPLES, args.seed);
    if !validation.passed() {
        eprintln!("warning: norm validation failed: {:?}", validation.violation);
    }
    let mut results = Map::new();
    let mut certificates = Map::new();
    let estimates: Vec<ConstantEstimate> = if space.dim() >= 2 {
        let b = constant_battery(&space, &opts)?;
        results.insert("chain".into(), to_value(&b.chain));
        results.insert("chain_holds".into(), json!(b.chain_holds));
        results.insert("beta_gap".into(), json!(b.beta_gap));
        let mut list = vec![b.lambda, b.lambda_plus, b.beta, b.alpha, b.james];
        if let Some(c) = list[3].cross_check.take() {
            certificates.insert("alpha_difference".into(), certificate_entry(&c));
        }
        list
    } else {
        eprintln!("note: beta needs dimension 2; omitted");
        vec![
            lambda_schaffer(&space, &opts)?,
            lambda_plus(&space, &opts)?,
            alpha(&space, &opts)?,
            james(&space, &opts)?,
        ]
    };
    results.insert("validation".into(), to_value(&validation));
    for e in &estimates {
        results.insert(e.kind.name().into(), result_entry(e));
        certificates.insert(e.kind.name().into(), certificate_entry(e));
    }
    let text = match args.format {
        Format::Json => report(space_to_json(&space), Value::Object(results), Value::Object(certificates)),
        Format::Csv => {
            let mut s = String::from("constant,lower,estimate,upper,mesh_norm,slack,resolution\n");
            for e in &estimates {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    e.kind.name(),
                    e.lower,
                    e.estimate,
                    e.upper,
                    e.mesh_norm,
                    e.slack,
                    e.resolution
                ));
            }
            s
        }
    };
    Ok((text, 0))
}

fn cmd_moduli(args: &RunArgs) -> Outcome {
    let space = args.load()?;
    let opts = args.tune(SearchOptions::for_moduli(space.dim()))?;
    let grid = args.grid()?;
    let sig = curve(&space, Modulus::Sigma, &grid, &opts)?;
    let del = curve(&space, Modulus::Delta, &grid, &opts)?;
    let text = match args.format {
        Format::Csv => {
            let mut s = String::from(
                "eps,sigma_lower,sigma_estimate,sigma_upper,delta_lower,delta_estimate,delta_upper\n",
            );
            for ((e, a), b) in grid.iter().zip(&sig.values).zip(&del.values) {
                s.push_str(&format!(
                    "{e},{},{},{},{},{},{}\n",
                    a.lower, a.estimate, a.upper, b.lower, b.estimate, b.upper
                ));
            }
            s
        }
        Format::Json => {
            let e0 = characteristic(&space, Modulus::Delta, &opts, None)?;
            let te0 = characteristic(&space, Modulus::Sigma, &opts, None)?;
            let rows = |c: &latconst::moduli::ModulusCurve| -> (Vec<Value>, Vec<Value>) {
                c.values
                    .iter()
                    .map(|v| {
                        let mut r = result_entry(v);
                        r["eps"] = json!(v.parameter);
                        let mut cert = certificate_entry(v);
                        cert["eps"] = json!(v.parameter);
                        (r, cert)
                    })
                    .unzip()
            };
            let (sr, sc) = rows(&sig);
            let (dr, dc) = rows(&del);
            let results = json!({
                "eps_grid": grid,
                "sigma": {"values": sr, "monotone": sig.monotone, "lipschitz": sig.lipschitz},
                "delta": {"values": dr, "monotone": del.monotone},
                "epsilon_0m": e0,
                "tilde_epsilon_0m": te0,
            });
            report(space_to_json(&space), results, json!({"sigma": sc, "delta": dc}))
        }
    };
    Ok((text, 0))
}

fn cmd_verify(args: &RunArgs) -> Outcome {
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(usage(format!("--tol {t} must be positive")));
        }
    }
    let mut cfg = SuiteConfig {
        h: args.h,
        tol: args.tol,
        eps_step: None,
        seed: args.seed,
    };
    let (space, suite): (Value, SuiteReport) = if args.builtin_suite {
        (json!("builtin-suite"), builtin_suite(&cfg)?)
    } else {
        let space = args.load()?;
        let grid = args.grid()?;
        if grid.len() > 1 {
            cfg.eps_step = Some(grid[1] - grid[0]);
        }
        (space_to_json(&space), verify_space(&space, &cfg)?)
    };
    for c in suite.checks.iter().filter(|c| !c.passed) {
        let tag = if c.informational { "info" } else { "FAIL" };
        eprintln!("{tag}: [{}] {} (value {}, expected {})", c.group, c.name, c.value, c.expected);
    }
    eprintln!(
        "{} checks, {} failures",
        suite.checks.len(),
        suite.failures
    );
    let code = if suite.passed { 0 } else { 1 };
    let text = match args.format {
        Format::Json => {
            let certificates = json!({"failures": suite.failures, "passed": suite.passed});
            report(space, json!({ "checks": suite.checks }), certificates)
        }
        Format::Csv => {
            let mut s = String::from("group,name,value,expected,tolerance,passed,informational\n");
            for c in &suite.checks {
                s.push_str(&format!(
                    "{},\"{}\",{},{},{},{},{}\n",
                    c.group,
                    c.name.replace('"', "\"\""),
                    c.value,
                    c.expected,
                    c.tolerance,
                    c.passed,
                    c.informational
                ));
            }
            s
        }
    };
    Ok((text, code))
}

fn cmd_embed(args: &RunArgs) -> Outcome {
    let space = args.load()?;
    let opts = args.tune(SearchOptions::for_dim(space.dim()))?;
    let r = extract_linfty2_search(&space, &opts, EMBED_MARGIN)?;
    let text = match args.format {
        Format::Json => {
            let certificates = json!({
                "analytic_distortion": r.analytic_distortion,
                "worst_bound_violation": r.worst_bound_violation,
                "samples": r.samples,
            });
            report(space_to_json(&space), to_value(&r), certificates)
        }
        Format::Csv => {
            let mut s = String::from("epsilon,analytic_distortion,sampled_distortion,min_ratio,max_ratio\n");
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.epsilon, r.analytic_distortion, r.sampled_distortion, r.min_ratio, r.max_ratio
            ));
            s
        }
    };
    Ok((text, 0))
}

fn emit(args: &RunArgs, text: &str) -> Result<(), Failure> {
    match &args.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| usage(format!("cannot write stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, outcome) = match &cli.command {
        Command::Constants(a) => (a, cmd_constants(a)),
        Command::Moduli(a) => (a, cmd_moduli(a)),
        Command::Verify(a) => (a, cmd_verify(a)),
        Command::Embed(a) => (a, cmd_embed(a)),
    };
    let result = outcome.and_then(|(text, code)| emit(args, &text).map(|()| code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
