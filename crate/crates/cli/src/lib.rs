//! The `cff` command line.
//!
//! Every subcommand prints one JSON [`RunReport`] and exits with
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | the analysis ran |
//! | 1 | usage, parse or validation error |
//! | 2 | valid input the analysis does not apply to |
//! | 3 | numerical failure |
//!
//! Member indices on the command line and in reports are 1-based.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cff_core::approx::{approximation_analysis, trace_class_check};
use cff_core::config::{ConfigError, SystemConfig};
use cff_core::erasure::{erasure_analysis_with, reconstruction_error};
use cff_core::fusion_frames::{fusion_frame_bounds_sampled, synthesis_characterization};
use cff_core::generate::{generate_config, ControlMode, Field, GenerateSpec, WeightLaw};
use cff_core::vector_frames::eigensum_identity;
use cff_core::{ControlledFusionSystem, Error, Tolerances};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "cff-report/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INAPPLICABLE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cff", version, about = "Analyses of controlled fusion frames")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Check tolerance.
    #[arg(long, global = true, env = "CFF_DEFAULT_TOL", default_value_t = 1e-9)]
    pub tol: f64,

    /// Seed for Rayleigh sampling and `generate`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Rayleigh-quotient samples per bounds computation.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,

    /// Where to write: the report, or the system file for `generate`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame bounds, trace identity and the synthesis characterization.
    Analyze { config: PathBuf },
    /// Delete members and compare the remainder with the erasure theorem.
    Erase {
        config: PathBuf,
        /// Comma-separated 1-based member indices.
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<usize>,
    },
    /// 1-erasure reconstruction error and the optimality criterion.
    Error { config: PathBuf },
    /// Cross operator `T_W* T_Z` and its trace-class bound.
    Compose { w: PathBuf, z: PathBuf },
    /// Approximation operator and the predicted frame bounds.
    Approx { w: PathBuf, z: PathBuf },
    /// Write a random system file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub dim: usize,
    /// Comma-separated subspace dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::C2)]
    pub mode: ModeArg,
    /// `uniform:<v>` or `random`.
    #[arg(long, default_value = "uniform:1", value_parser = parse_weight_law)]
    pub weights: WeightLaw,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Identity,
    C2,
    Pair,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

fn parse_weight_law(s: &str) -> Result<WeightLaw, String> {
    if s == "random" {
        return Ok(WeightLaw::Random);
    }
    let v = s
        .strip_prefix("uniform:")
        .ok_or_else(|| format!("expected `uniform:<v>` or `random`, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad weight `{v}`: {e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(WeightLaw::Uniform(v))
    } else {
        Err("weight must be positive".into())
    }
}

/// Machine-readable outcome of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    /// SHA-256 of each input file, in argument order.
    pub input_digest: Vec<String>,
    pub tolerances: Value,
    pub status: &'static str,
    pub exit_code: i32,
    pub result: Value,
    pub verdicts: Map<String, Value>,
    pub error: Option<Value>,
    pub wall_time_ms: f64,
}

impl RunReport {
    /// Sorted-key JSON.
    pub fn to_json(&self, pretty: bool) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        if pretty {
            serde_json::to_string_pretty(&v).expect("report serializes")
        } else {
            serde_json::to_string(&v).expect("report serializes")
        }
    }
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    members: Vec<usize>,
    partial: Value,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            kind,
            message: message.into(),
            members: Vec::new(),
            partial: Value::Null,
        }
    }

    fn with_partial(mut self, partial: Value) -> Self {
        self.partial = partial;
        self
    }
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::PositivityViolated { indices } => {
                let members = one_based(&indices);
                let mut f = Failure::new(
                    EXIT_INAPPLICABLE,
                    "positivity_violated",
                    format!("C*πC′ is not a positive operator for members {members:?}"),
                );
                f.members = members;
                f
            }
            Error::WeightMismatch => {
                Failure::new(EXIT_INAPPLICABLE, "weight_mismatch", e.to_string())
            }
            Error::DimensionMismatch(_)
            | Error::InvalidIndices(_)
            | Error::InvalidWeight { .. }
            | Error::Empty
            | Error::EmptyRemainder
            | Error::ZeroSubspace => Failure::new(EXIT_USAGE, "validation", e.to_string()),
            Error::NotHermitian { .. }
            | Error::NotPositive { .. }
            | Error::DecompositionFailure(_)
            | Error::NotInvertible { .. }
            | Error::NonFinite(_)
            | Error::GenerationFailure(_) => {
                Failure::new(EXIT_NUMERICAL, "numerical", e.to_string())
            }
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let kind = match &e {
            ConfigError::Io { .. } => "io",
            ConfigError::Parse { .. } => "parse",
            ConfigError::Validation { .. } | ConfigError::System(_) => "validation",
        };
        Failure::new(EXIT_USAGE, kind, e.to_string())
    }
}

type Outcome = Result<(Value, Map<String, Value>), Failure>;

struct Context {
    tol: f64,
    seed: u64,
    samples: usize,
    tolerances: Tolerances,
    digests: Vec<String>,
}

impl Context {
    fn load(&mut self, path: &Path) -> Result<ControlledFusionSystem, Failure> {
        let bytes = std::fs::read(path).map_err(|e| {
            Failure::new(
                EXIT_USAGE,
                "io",
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        self.digests.push(hex::encode(Sha256::digest(&bytes)));
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| Failure::new(EXIT_USAGE, "parse", format!("{}: {e}", path.display())))?;
        let cfg = SystemConfig::from_json_str(text)?;
        Ok(cfg.build(self.tolerances.check, self.tolerances.rank)?)
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn verdicts(pairs: &[(&str, bool)]) -> Map<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), Value::Bool(*v)))
        .collect()
}

fn analyze(ctx: &mut Context, path: &Path) -> Outcome {
    let sys = ctx.load(path)?;
    let bounds = fusion_frame_bounds_sampled(&sys, ctx.tol, ctx.samples, ctx.seed)?;
    let trace = eigensum_identity(&sys.to_vector_frame()?, ctx.tol)?;
    let mut result = json!({
        "dimension": sys.dim(),
        "members": sys.len(),
        "positivity_ok": sys.positivity_ok(),
        "bounds": to_value(&bounds),
        "trace_identity": to_value(&trace),
    });
    if let Err(e) = sys.require_positive() {
        return Err(Failure::from(e).with_partial(result));
    }
    let ch = synthesis_characterization(&sys, ctx.tol)?;
    result["characterization"] = to_value(&ch);
    let rayleigh_ok = bounds.rayleigh.is_none_or(|r| r.escapes == 0);
    Ok((
        result,
        verdicts(&[
            ("is_frame", bounds.is_frame()),
            ("trace_identity", trace.holds),
            ("characterization_consistent", ch.consistent),
            ("rayleigh_within_bounds", rayleigh_ok),
        ]),
    ))
}

fn erase(ctx: &mut Context, path: &Path, indices: &[usize]) -> Outcome {
    let sys = ctx.load(path)?;
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > sys.len()) {
        return Err(Failure::new(
            EXIT_USAGE,
            "usage",
            format!("member index {bad} outside 1..={}", sys.len()),
        ));
    }
    let zero: Vec<usize> = indices.iter().map(|i| i - 1).collect();
    let report = erasure_analysis_with(&sys, &zero, ctx.tol, ctx.tolerances.fixed_point)?;
    let mut result = to_value(&report);
    let obj = result.as_object_mut().expect("object");
    obj.remove("erased_indices");
    obj.insert(
        "erased_members".into(),
        to_value(&one_based(&report.erased_indices)),
    );
    Ok((
        result,
        verdicts(&[
            ("theorem_holds", report.theorem_holds),
            ("kernel_check", report.kernel_check),
        ]),
    ))
}

fn error_cmd(ctx: &mut Context, path: &Path) -> Outcome {
    let sys = ctx.load(path)?;
    let report = reconstruction_error(&sys, ctx.tol)?;
    Ok((
        to_value(&report),
        verdicts(&[("optimal", report.optimal), ("parseval", report.parseval)]),
    ))
}

fn compose(ctx: &mut Context, w: &Path, z: &Path) -> Outcome {
    let (w, z) = (ctx.load(w)?, ctx.load(z)?);
    let report = trace_class_check(&w, &z)?;
    Ok((
        to_value(&report),
        verdicts(&[
            ("trace_class_bound", report.holds),
            ("trace_class_bound_max_mn", report.holds_max_mn),
        ]),
    ))
}

fn approx(ctx: &mut Context, w: &Path, z: &Path) -> Outcome {
    let (w, z) = (ctx.load(w)?, ctx.load(z)?);
    let report = approximation_analysis(&w, &z, ctx.tol)?;
    let result = to_value(&report);
    if !report.applicable {
        return Err(Failure::new(
            EXIT_INAPPLICABLE,
            "not_applicable",
            format!("gamma = {} is not below 1", report.gamma),
        )
        .with_partial(result));
    }
    Ok((
        result,
        verdicts(&[
            ("approximation_bound", report.holds),
            ("approximation_bound_block", report.holds_block),
            ("approximation_bound_corrected", report.holds_corrected),
            ("dual_consistent", report.dual_consistent),
        ]),
    ))
}

fn generate(ctx: &mut Context, args: &GenerateArgs, out: Option<&Path>) -> Outcome {
    let out =
        out.ok_or_else(|| Failure::new(EXIT_USAGE, "usage", "generate needs --out <path>"))?;
    let spec = GenerateSpec {
        dim: args.dim,
        subspace_dims: args.dims.clone(),
        mode: match args.mode {
            ModeArg::Identity => ControlMode::Identity,
            ModeArg::C2 => ControlMode::C2,
            ModeArg::Pair => ControlMode::Pair,
        },
        weights: args.weights,
        field: match args.field {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        },
        seed: ctx.seed,
    };
    let cfg = generate_config(&spec).map_err(|e| match e {
        Error::GenerationFailure(m) if m.contains("outside") || m.contains("need a positive") => {
            Failure::new(EXIT_USAGE, "usage", m)
        }
        other => other.into(),
    })?;
    let sys = cfg.build(ctx.tolerances.check, ctx.tolerances.rank)?;
    let text = cfg.to_json_string(true);
    std::fs::write(out, &text).map_err(|e| {
        Failure::new(
            EXIT_USAGE,
            "io",
            format!("cannot write {}: {e}", out.display()),
        )
    })?;
    let result = json!({
        "path": out.display().to_string(),
        "sha256": hex::encode(Sha256::digest(text.as_bytes())),
        "spec": to_value(&spec),
        "positivity_ok": sys.positivity_ok(),
    });
    Ok((result, verdicts(&[("all_positive", sys.all_positive())])))
}

/// Runs a parsed invocation and returns the report; nothing is printed.
pub fn execute(cli: &Cli, argv: Vec<String>) -> RunReport {
    let start = Instant::now();
    let g = &cli.global;
    let tolerances = Tolerances {
        check: g.tol,
        ..Tolerances::default()
    };
    let mut ctx = Context {
        tol: g.tol,
        seed: g.seed,
        samples: g.samples,
        tolerances,
        digests: Vec::new(),
    };
    let (name, outcome) = match &cli.command {
        Command::Analyze { config } => ("analyze", analyze(&mut ctx, config)),
        Command::Erase { config, indices } => ("erase", erase(&mut ctx, config, indices)),
        Command::Error { config } => ("error", error_cmd(&mut ctx, config)),
        Command::Compose { w, z } => ("compose", compose(&mut ctx, w, z)),
        Command::Approx { w, z } => ("approx", approx(&mut ctx, w, z)),
        Command::Generate(args) => ("generate", generate(&mut ctx, args, g.out.as_deref())),
    };
    let mut tol_value = to_value(&ctx.tolerances);
    tol_value["samples"] = json!(ctx.samples);
    tol_value["seed"] = json!(ctx.seed);
    let (status, exit_code, result, verdicts, error) = match outcome {
        Ok((result, verdicts)) => ("ok", EXIT_OK, result, verdicts, None),
        Err(f) => {
            let status = if f.code == EXIT_INAPPLICABLE {
                "inapplicable"
            } else {
                "error"
            };
            let mut err = json!({ "kind": f.kind, "message": f.message });
            if !f.members.is_empty() {
                err["members"] = to_value(&f.members);
            }
            (status, f.code, f.partial, Map::new(), Some(err))
        }
    };
    RunReport {
        schema: SCHEMA,
        command: name.to_string(),
        argv,
        input_digest: ctx.digests,
        tolerances: tol_value,
        status,
        exit_code,
        result,
        verdicts,
        error,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Parses `argv`, runs it, prints the report and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let shown: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let report = execute(&cli, shown);
    let text = report.to_json(cli.global.pretty);
    let report_path = match cli.command {
        Command::Generate(_) => None,
        _ => cli.global.out.as_deref(),
    };
    match report_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            use std::io::Write;
            // a closed pipe is not worth a panic
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    report.exit_code
}
