//! Command-line front end. Every subcommand takes a function as an
//! expression string, runs one library routine, and prints a fixed
//! envelope: `inputs`, `values`, `bound`, `observed`, `satisfied`,
//! `oracle_error`, `evals`. Keys that do not apply are null, never
//! absent. JSON floats carry 17 significant digits, enough to
//! round-trip f64 exactly.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 malformed
//! usage or inputs, 3 numeric failure at runtime.

// A Failure is built once on the way out; boxing it buys nothing.
#![allow(clippy::result_large_err)]

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Serialize as _;
use serde_json::{Map, Value};

use simpcube::bounds::{
    hadamard_check, simpson1d_bound, theorem3_bound, theorem4_bound, BoundKind, SupSource,
};
use simpcube::composite::{certify, empirical_sup_mixed, refine, tightness_scan, CellBound};
use simpcube::cubature::{defect, simpson1d, verify_lemma};
use simpcube::expr::{convexity_probe, Axis, ExprError, ExprFn};
use simpcube::oracle::integrate_1d;
use simpcube::{Error, Function2D, Rectangle, Tolerances};

#[derive(Parser)]
#[command(name = "simpcube", version, about = "Certified Simpson-type cubature on rectangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an a-priori defect bound and compare it to the defect.
    Bound(BoundArgs),
    /// Compute Q, A, I and the defect D = Q - A + I.
    Defect(DefectArgs),
    /// Check the kernel-form remainder identity for the defect.
    VerifyLemma(DefectArgs),
    /// Enclose the integral over a grid of cells, optionally adaptive.
    Integrate(IntegrateArgs),
    /// Check the midpoint / mean / corner-average chain.
    Hadamard(HadamardArgs),
    /// Scan worst |defect| / bound ratios over grid refinements.
    Tightness(TightnessArgs),
    /// One-dimensional Simpson check against a fourth-derivative bound.
    Simpson1d(Simpson1dArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Human,
}

#[derive(Args)]
struct CoreOpts {
    /// Rectangle bounds a b c d, meaning [a, b] x [c, d].
    #[arg(
        long,
        num_args = 4,
        value_names = ["A", "B", "C", "D"],
        allow_negative_numbers = true,
        default_values_t = [0.0, 1.0, 0.0, 1.0]
    )]
    rect: Vec<f64>,

    /// Absolute tolerance handed to the reference quadrature.
    #[arg(long, default_value_t = 1e-10)]
    oracle_tol: f64,

    /// Extra slack allowed when an identity is checked.
    #[arg(long, alias = "tol", default_value_t = 1e-8)]
    residual_tol: f64,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct BoundArgs {
    /// Expression in x and y, e.g. "exp(x+y)" or "x^2*y^2+x".
    #[arg(long = "fn", value_name = "EXPR")]
    function: String,

    /// 3 for the corner bound, 4 for the sup bound.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(3..=4))]
    theorem: u8,

    /// Known sup of |f_xy| over the rectangle (theorem 4 only).
    /// Without it the sup is sampled on a lattice.
    #[arg(long, allow_negative_numbers = true)]
    sup: Option<f64>,

    /// |f_xy| at the corners (a,c) (a,d) (b,c) (b,d) (theorem 3 only).
    /// Without them the mixed partial is differentiated exactly.
    #[arg(long, num_args = 4, value_names = ["AC", "AD", "BC", "BD"], allow_negative_numbers = true)]
    corners: Option<Vec<f64>>,

    #[command(flatten)]
    core: CoreOpts,
}

#[derive(Args)]
struct DefectArgs {
    /// Expression in x and y.
    #[arg(long = "fn", value_name = "EXPR")]
    function: String,

    #[command(flatten)]
    core: CoreOpts,
}

#[derive(Args)]
struct IntegrateArgs {
    /// Expression in x and y.
    #[arg(long = "fn", value_name = "EXPR")]
    function: String,

    /// Fixed tiling, N or NxM (default 1x1). Not used with --adaptive.
    #[arg(long, value_name = "N[xM]", value_parser = parse_grid)]
    grid: Option<(u32, u32)>,

    /// Per-cell bound: 3 for corners, 4 for sup.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(3..=4))]
    theorem: u8,

    /// Sup of |f_xy|, valid on every cell (theorem 4 only).
    #[arg(long, allow_negative_numbers = true)]
    sup: Option<f64>,

    /// Refine greedily until the half-width reaches --target.
    #[arg(long, requires = "target")]
    adaptive: bool,

    /// Half-width to reach in adaptive mode.
    #[arg(long, requires = "adaptive", allow_negative_numbers = true)]
    target: Option<f64>,

    /// Cell budget for adaptive refinement.
    #[arg(long, default_value_t = 4096)]
    max_cells: usize,

    #[command(flatten)]
    core: CoreOpts,
}

#[derive(Args)]
struct HadamardArgs {
    /// Expression in x and y.
    #[arg(long = "fn", value_name = "EXPR")]
    function: String,

    /// Lattice points per axis for the convexity probe.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u64).range(3..))]
    samples: u64,

    #[command(flatten)]
    core: CoreOpts,
}

#[derive(Args)]
struct TightnessArgs {
    /// Expression in x and y. Without it, a seeded family of
    /// c*exp(a*x+b*y) samples is scanned.
    #[arg(long = "fn", value_name = "EXPR")]
    function: Option<String>,

    /// Comma-separated grid sizes, each scanned as an n-by-n tiling.
    #[arg(long, default_value = "1,2,4,8")]
    grids: String,

    /// Seed for the random family (ignored with --fn).
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of random family members (ignored with --fn).
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,

    #[command(flatten)]
    core: CoreOpts,
}

#[derive(Args)]
struct Simpson1dArgs {
    /// Expression in x alone.
    #[arg(long = "fn-x", alias = "fn", value_name = "EXPR")]
    function: String,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,

    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,

    /// Bound on |g''''| over [a, b].
    #[arg(long, allow_negative_numbers = true)]
    m4: f64,

    #[arg(long, default_value_t = 1e-10)]
    oracle_tol: f64,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

fn parse_grid(s: &str) -> Result<(u32, u32), String> {
    let part = |t: &str| {
        t.trim()
            .parse::<u32>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| format!("invalid grid '{s}', expected N or NxM with N, M >= 1"))
    };
    match s.split_once(['x', 'X']) {
        Some((m, n)) => Ok((part(m)?, part(n)?)),
        None => part(s).map(|n| (n, n)),
    }
}

/// A structured failure on its way to stderr: the error itself, the
/// expression it came from when there is one, and the evaluator's
/// first structured error when the surface error is only a NaN report.
struct Failure {
    error: Error,
    source: Option<String>,
    detail: Option<ExprError>,
}

impl Failure {
    fn plain(error: Error) -> Self {
        Self { error, source: None, detail: None }
    }

    fn usage(name: &'static str, requirement: &'static str, value: f64) -> Self {
        Self::plain(Error::InvalidParameter { name, requirement, value })
    }

    fn parse(error: ExprError, source: &str) -> Self {
        Self {
            error: Error::Expr(error),
            source: Some(source.to_string()),
            detail: None,
        }
    }

    fn runtime(error: Error, f: &ExprFn) -> Self {
        Self {
            error,
            source: Some(f.source().to_string()),
            detail: f.last_error(),
        }
    }

    fn exit_code(&self) -> u8 {
        match &self.error {
            Error::Expr(ExprError::Syntax { .. }) | Error::Expr(ExprError::UnknownName { .. }) => 2,
            Error::Expr(ExprError::Domain { .. }) => 3,
            Error::InvalidRectangle { .. } | Error::InvalidParameter { .. } => 2,
            Error::OutOfRange { .. }
            | Error::NonFiniteSample { .. }
            | Error::NonFiniteValue { .. }
            | Error::QuadratureDepthExceeded { .. }
            | Error::MissingMixedPartial => 3,
            Error::HypothesisViolation { .. } => 1,
        }
    }

    fn report(&self) -> ExitCode {
        eprintln!("error: {}", self.error);
        if let (Error::Expr(e), Some(src)) = (&self.error, &self.source) {
            print_caret(src, e);
        } else if let (Some(detail), Some(src)) = (&self.detail, &self.source) {
            eprintln!("caused by: {detail}");
            print_caret(src, detail);
        }
        ExitCode::from(self.exit_code())
    }
}

fn print_caret(src: &str, e: &ExprError) {
    let (start, end) = match e {
        ExprError::Syntax { offset, .. } => (*offset, offset + 1),
        ExprError::UnknownName { offset, name } => (*offset, offset + name.chars().count()),
        ExprError::Domain { span, .. } => (span.start, span.end),
    };
    eprintln!("  {src}");
    let width = end.saturating_sub(start).max(1);
    eprintln!("  {}{}", " ".repeat(start), "^".repeat(width));
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn opt_num(v: Option<f64>) -> Value {
    v.map(num).unwrap_or(Value::Null)
}

struct Envelope {
    inputs: Map<String, Value>,
    values: Map<String, Value>,
    bound: Option<f64>,
    observed: Option<f64>,
    satisfied: Option<bool>,
    oracle_error: Option<f64>,
    evals: Option<u64>,
}

impl Envelope {
    fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("inputs".into(), Value::Object(self.inputs.clone()));
        m.insert("values".into(), Value::Object(self.values.clone()));
        m.insert("bound".into(), opt_num(self.bound));
        m.insert("observed".into(), opt_num(self.observed));
        m.insert(
            "satisfied".into(),
            self.satisfied.map(Value::Bool).unwrap_or(Value::Null),
        );
        m.insert("oracle_error".into(), opt_num(self.oracle_error));
        m.insert("evals".into(), self.evals.map(Value::from).unwrap_or(Value::Null));
        Value::Object(m)
    }

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => json_line(&self.to_value()),
            OutputFormat::Human => self.render_human(),
        }
    }

    fn render_human(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        let mut section = |map: &Map<String, Value>| {
            for (k, v) in map {
                lines.push(format!("{k:<18}{}", human_value(v)));
            }
        };
        section(&self.inputs);
        section(&self.values);
        for (k, v) in [
            ("bound", opt_num(self.bound)),
            ("observed", opt_num(self.observed)),
            ("oracle_error", opt_num(self.oracle_error)),
        ] {
            if !v.is_null() {
                lines.push(format!("{k:<18}{}", human_value(&v)));
            }
        }
        if let Some(s) = self.satisfied {
            lines.push(format!("{:<18}{s}", "satisfied"));
        }
        if let Some(e) = self.evals {
            lines.push(format!("{:<18}{e}", "evals"));
        }
        lines.join("\n")
    }

    fn exit(&self) -> ExitCode {
        if self.satisfied == Some(false) {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    }
}

fn human_value(v: &Value) -> String {
    match v {
        Value::Null => "-".to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Serializes compactly with every float at 17 significant digits.
struct SigFigs;

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn json_line(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    v.serialize(&mut ser).expect("envelope serializes");
    String::from_utf8(buf).expect("serializer emits utf-8")
}

fn setup(core: &CoreOpts, function: &str) -> Result<(ExprFn, Rectangle, Tolerances), Failure> {
    let f = ExprFn::parse(function).map_err(|e| Failure::parse(e, function))?;
    let rect = Rectangle::new(core.rect[0], core.rect[1], core.rect[2], core.rect[3])
        .map_err(Failure::plain)?;
    let tol = Tolerances::new(core.oracle_tol, core.residual_tol).map_err(Failure::plain)?;
    Ok((f, rect, tol))
}

fn base_inputs(command: &str, function: Option<&str>, core: &CoreOpts) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), Value::from(command));
    m.insert("fn".into(), function.map(Value::from).unwrap_or(Value::Null));
    m.insert(
        "rect".into(),
        Value::from(core.rect.iter().map(|&v| num(v)).collect::<Vec<_>>()),
    );
    m.insert("oracle_tol".into(), num(core.oracle_tol));
    m.insert("residual_tol".into(), num(core.residual_tol));
    m
}

fn functional_values(d: &simpcube::cubature::DefectReport, area: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("q".into(), num(d.q));
    m.insert("a".into(), num(d.a));
    m.insert("i".into(), num(d.i));
    m.insert("defect".into(), num(d.defect));
    m.insert("defect_total".into(), num(area * d.defect));
    m
}

fn cmd_bound(args: &BoundArgs) -> Result<Envelope, Failure> {
    let (f, rect, tol) = setup(&args.core, &args.function)?;
    if args.theorem == 3 {
        if let Some(sup) = args.sup {
            return Err(Failure::usage("sup", "used with --theorem 4 only", sup));
        }
    } else if args.corners.is_some() {
        return Err(Failure::usage("corners", "used with --theorem 3 only", 4.0));
    }

    let d = defect(&f, &rect, &tol).map_err(|e| Failure::runtime(e, &f))?;
    let (kind, bound, sup_source, extra_evals) = if args.theorem == 3 {
        let corners: [f64; 4] = match &args.corners {
            Some(v) => [v[0], v[1], v[2], v[3]],
            None => {
                let mut c = [0.0; 4];
                for (slot, (x, y)) in c.iter_mut().zip(rect.corners()) {
                    let m = f.mixed(x, y).ok_or(Error::MissingMixedPartial).map_err(Failure::plain)?;
                    if !m.is_finite() {
                        return Err(Failure::runtime(
                            Error::NonFiniteValue { x, y, value: m },
                            &f,
                        ));
                    }
                    *slot = m.abs();
                }
                c
            }
        };
        let b = theorem3_bound(corners, &rect).map_err(Failure::plain)?;
        let sampled = if args.corners.is_some() { 0 } else { 4 };
        (BoundKind::Theorem3, b, None, sampled)
    } else {
        match args.sup {
            Some(sup) => (
                BoundKind::Theorem4,
                theorem4_bound(sup, &rect).map_err(Failure::plain)?,
                Some(SupSource::User),
                0,
            ),
            None => {
                let (sup, evals) =
                    empirical_sup_mixed(&f, &rect).map_err(|e| Failure::runtime(e, &f))?;
                (
                    BoundKind::Theorem4,
                    theorem4_bound(sup, &rect).map_err(Failure::plain)?,
                    Some(SupSource::Empirical),
                    evals,
                )
            }
        }
    };

    let observed = d.defect.abs();
    let mut inputs = base_inputs("bound", Some(&args.function), &args.core);
    inputs.insert("theorem".into(), Value::from(args.theorem));
    inputs.insert("sup".into(), opt_num(args.sup));
    inputs.insert(
        "corners".into(),
        args.corners
            .as_ref()
            .map(|v| Value::from(v.iter().map(|&c| num(c)).collect::<Vec<_>>()))
            .unwrap_or(Value::Null),
    );

    let mut values = functional_values(&d, rect.area());
    values.insert("kind".into(), serde_json::to_value(kind).expect("kind"));
    values.insert(
        "sup_source".into(),
        serde_json::to_value(sup_source).expect("sup_source"),
    );
    values.insert("slack".into(), num(bound - observed));
    values.insert("bound_total".into(), num(rect.area() * bound));

    Ok(Envelope {
        inputs,
        values,
        bound: Some(bound),
        observed: Some(observed),
        satisfied: Some(observed <= bound + d.oracle_error),
        oracle_error: Some(d.oracle_error),
        evals: Some(d.evals + extra_evals),
    })
}

fn cmd_defect(args: &DefectArgs) -> Result<Envelope, Failure> {
    let (f, rect, tol) = setup(&args.core, &args.function)?;
    let d = defect(&f, &rect, &tol).map_err(|e| Failure::runtime(e, &f))?;
    Ok(Envelope {
        inputs: base_inputs("defect", Some(&args.function), &args.core),
        values: functional_values(&d, rect.area()),
        bound: None,
        observed: None,
        satisfied: None,
        oracle_error: Some(d.oracle_error),
        evals: Some(d.evals),
    })
}

fn cmd_verify_lemma(args: &DefectArgs) -> Result<Envelope, Failure> {
    let (f, rect, tol) = setup(&args.core, &args.function)?;
    let rep = verify_lemma(&f, &rect, &tol).map_err(|e| Failure::runtime(e, &f))?;
    let mut values = functional_values(&rep, rect.area());
    values.insert("remainder".into(), opt_num(rep.remainder));
    values.insert("residual".into(), opt_num(rep.residual));
    Ok(Envelope {
        inputs: base_inputs("verify-lemma", Some(&args.function), &args.core),
        values,
        bound: None,
        observed: rep.residual,
        satisfied: rep.passed,
        oracle_error: Some(rep.oracle_error),
        evals: Some(rep.evals),
    })
}

fn cmd_integrate(args: &IntegrateArgs) -> Result<Envelope, Failure> {
    let (f, rect, tol) = setup(&args.core, &args.function)?;
    if args.theorem == 3 {
        if let Some(sup) = args.sup {
            return Err(Failure::usage("sup", "used with --theorem 4 only", sup));
        }
    }
    if args.adaptive && args.grid.is_some() {
        return Err(Failure::usage("grid", "a fixed tiling, not used with --adaptive", 0.0));
    }
    let cell_bound = match (args.theorem, args.sup) {
        (3, _) => CellBound::Theorem3,
        (_, Some(sup)) => CellBound::Theorem4Constant(sup),
        (_, None) => CellBound::Theorem4Empirical,
    };

    let (cert, splits, satisfied) = if args.adaptive {
        let target = args
            .target
            .ok_or_else(|| Failure::usage("target", "required with --adaptive", 0.0))?;
        let rep = refine(&f, &rect, &cell_bound, &tol, target, args.max_cells)
            .map_err(|e| Failure::runtime(e, &f))?;
        (rep.certificate, Some(rep.splits), Some(rep.target_met))
    } else {
        let (nx, ny) = args.grid.unwrap_or((1, 1));
        let cert = certify(&f, &rect, nx, ny, &tol, &cell_bound)
            .map_err(|e| Failure::runtime(e, &f))?;
        (cert, None, None)
    };
    let oracle_error: f64 = cert.cells.iter().map(|c| c.oracle_error).sum();

    let mut inputs = base_inputs("integrate", Some(&args.function), &args.core);
    inputs.insert("theorem".into(), Value::from(args.theorem));
    inputs.insert("sup".into(), opt_num(args.sup));
    inputs.insert(
        "grid".into(),
        match (args.adaptive, args.grid.unwrap_or((1, 1))) {
            (true, _) => Value::Null,
            (false, (nx, ny)) => Value::from(vec![Value::from(nx), Value::from(ny)]),
        },
    );
    inputs.insert("adaptive".into(), Value::Bool(args.adaptive));
    inputs.insert("target".into(), opt_num(args.target));
    inputs.insert("max_cells".into(), Value::from(args.max_cells as u64));

    let area = rect.area();
    let mut values = Map::new();
    values.insert("estimate".into(), num(cert.estimate));
    values.insert("estimate_mean".into(), num(cert.estimate / area));
    values.insert("half_width".into(), num(cert.half_width));
    values.insert("half_width_mean".into(), num(cert.half_width / area));
    values.insert("lower".into(), num(cert.estimate - cert.half_width));
    values.insert("upper".into(), num(cert.estimate + cert.half_width));
    values.insert("cells".into(), Value::from(cert.cells.len() as u64));
    values.insert(
        "splits".into(),
        splits.map(Value::from).unwrap_or(Value::Null),
    );
    values.insert("kind".into(), serde_json::to_value(cert.kind).expect("kind"));
    values.insert(
        "sup_source".into(),
        serde_json::to_value(cert.sup_source).expect("sup_source"),
    );

    Ok(Envelope {
        inputs,
        values,
        bound: None,
        observed: None,
        satisfied,
        oracle_error: Some(oracle_error),
        evals: Some(cert.evals),
    })
}

fn cmd_hadamard(args: &HadamardArgs) -> Result<Envelope, Failure> {
    let (f, rect, tol) = setup(&args.core, &args.function)?;
    let probe = convexity_probe(f.ast(), &rect, args.samples as usize)
        .map_err(|e| Failure::runtime(e, &f))?;
    let rep = hadamard_check(&f, &rect, &tol).map_err(|e| Failure::runtime(e, &f))?;

    let mut inputs = base_inputs("hadamard", Some(&args.function), &args.core);
    inputs.insert("samples".into(), Value::from(args.samples));

    let mut values = Map::new();
    values.insert("midpoint".into(), num(rep.midpoint));
    values.insert("mean".into(), num(rep.mean));
    values.insert("integral".into(), num(rep.mean * rect.area()));
    values.insert("corner_average".into(), num(rep.corner_average));
    values.insert("lower_holds".into(), Value::Bool(rep.lower_holds));
    values.insert("upper_holds".into(), Value::Bool(rep.upper_holds));
    values.insert(
        "convexity_consistent".into(),
        Value::Bool(probe.consistent()),
    );
    values.insert(
        "convexity_violation".into(),
        serde_json::to_value(probe.violation).expect("violation"),
    );

    Ok(Envelope {
        inputs,
        values,
        bound: None,
        observed: None,
        satisfied: Some(rep.lower_holds && rep.upper_holds),
        oracle_error: Some(rep.oracle_error),
        evals: Some(rep.evals),
    })
}

fn cmd_tightness(args: &TightnessArgs) -> Result<Envelope, Failure> {
    let rect = Rectangle::new(
        args.core.rect[0],
        args.core.rect[1],
        args.core.rect[2],
        args.core.rect[3],
    )
    .map_err(Failure::plain)?;
    let tol = Tolerances::new(args.core.oracle_tol, args.core.residual_tol)
        .map_err(Failure::plain)?;

    let mut grids = Vec::new();
    for piece in args.grids.split(',') {
        match piece.trim().parse::<u32>() {
            Ok(n) if n >= 1 => grids.push(n),
            _ => {
                return Err(Failure::usage(
                    "grids",
                    "a comma-separated list of positive integers",
                    0.0,
                ))
            }
        }
    }

    let specs: Vec<String> = match &args.function {
        Some(s) => vec![s.clone()],
        None => {
            let mut rng = StdRng::seed_from_u64(args.seed);
            (0..args.samples)
                .map(|_| {
                    let a: f64 = rng.random_range(-2.0..2.0);
                    let b: f64 = rng.random_range(-2.0..2.0);
                    let c: f64 = rng.random_range(0.5..2.0);
                    format!("{c:.6}*exp({a:.6}*x+{b:.6}*y)")
                })
                .collect()
        }
    };

    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for spec in &specs {
        let f = ExprFn::parse(spec).map_err(|e| Failure::parse(e, spec))?;
        let scan = tightness_scan(&f, &rect, &grids, &tol).map_err(|e| Failure::runtime(e, &f))?;
        for row in scan {
            worst = worst.max(row.max_ratio);
            let mut obj = Map::new();
            obj.insert("fn".into(), Value::from(spec.as_str()));
            obj.insert("n".into(), Value::from(row.n));
            obj.insert("max_ratio".into(), num(row.max_ratio));
            rows.push(Value::Object(obj));
        }
    }

    let mut inputs = base_inputs("tightness", args.function.as_deref(), &args.core);
    inputs.insert(
        "grids".into(),
        Value::from(grids.iter().map(|&n| Value::from(n)).collect::<Vec<_>>()),
    );
    inputs.insert("seed".into(), Value::from(args.seed));
    inputs.insert("samples".into(), Value::from(args.samples));

    let mut values = Map::new();
    values.insert("rows".into(), Value::from(rows));

    Ok(Envelope {
        inputs,
        values,
        bound: Some(1.0),
        observed: Some(worst),
        satisfied: Some(worst <= 1.0 + 1e-9),
        oracle_error: None,
        evals: None,
    })
}

fn cmd_simpson1d(args: &Simpson1dArgs) -> Result<Envelope, Failure> {
    let f = ExprFn::parse(&args.function).map_err(|e| Failure::parse(e, &args.function))?;
    if f.uses(Axis::Y) {
        return Err(Failure::usage("fn", "a function of x alone here", 0.0));
    }
    let g = |x: f64| f.eval(x, 0.0);

    let bound = simpson1d_bound(args.m4, args.a, args.b).map_err(Failure::plain)?;
    let s = simpson1d(g, args.a, args.b).map_err(|e| Failure::runtime(e, &f))?;
    let width = args.b - args.a;
    let q = integrate_1d(g, args.a, args.b, args.oracle_tol * width)
        .map_err(|e| Failure::runtime(e, &f))?;
    let mean = q.value / width;
    let oracle_error = q.err / width;
    let observed = (s - mean).abs();

    let mut inputs = Map::new();
    inputs.insert("command".into(), Value::from("simpson1d"));
    inputs.insert("fn".into(), Value::from(args.function.as_str()));
    inputs.insert("a".into(), num(args.a));
    inputs.insert("b".into(), num(args.b));
    inputs.insert("m4".into(), num(args.m4));
    inputs.insert("oracle_tol".into(), num(args.oracle_tol));

    let mut values = Map::new();
    values.insert("simpson".into(), num(s));
    values.insert("mean".into(), num(mean));
    values.insert("simpson_total".into(), num(s * width));
    values.insert("integral".into(), num(q.value));

    Ok(Envelope {
        inputs,
        values,
        bound: Some(bound),
        observed: Some(observed),
        satisfied: Some(observed <= bound + oracle_error),
        oracle_error: Some(oracle_error),
        evals: Some(3 + q.evals),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = match &cli.command {
        Command::Bound(a) => (cmd_bound(a), a.core.format),
        Command::Defect(a) => (cmd_defect(a), a.core.format),
        Command::VerifyLemma(a) => (cmd_verify_lemma(a), a.core.format),
        Command::Integrate(a) => (cmd_integrate(a), a.core.format),
        Command::Hadamard(a) => (cmd_hadamard(a), a.core.format),
        Command::Tightness(a) => (cmd_tightness(a), a.core.format),
        Command::Simpson1d(a) => (cmd_simpson1d(a), a.format),
    };
    match result {
        Ok(envelope) => {
            println!("{}", envelope.render(format));
            envelope.exit()
        }
        Err(failure) => failure.report(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn grid_spec_forms() {
        assert_eq!(parse_grid("3").unwrap(), (3, 3));
        assert_eq!(parse_grid("2x5").unwrap(), (2, 5));
        assert_eq!(parse_grid("2X5").unwrap(), (2, 5));
        assert!(parse_grid("0").is_err());
        assert!(parse_grid("2x").is_err());
        assert!(parse_grid("axb").is_err());
    }

    #[test]
    fn json_floats_round_trip_exactly() {
        let line = json_line(&json!({ "v": 0.1, "n": 4 }));
        assert_eq!(line, "{\"n\":4,\"v\":1.0000000000000001e-1}");
        let back: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(back["v"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn envelope_keys_are_sorted_and_complete() {
        let env = Envelope {
            inputs: Map::new(),
            values: Map::new(),
            bound: None,
            observed: Some(2.0),
            satisfied: Some(true),
            oracle_error: None,
            evals: Some(7),
        };
        let line = json_line(&env.to_value());
        assert_eq!(
            line,
            "{\"bound\":null,\"evals\":7,\"inputs\":{},\"observed\":2.0000000000000000e0,\
             \"oracle_error\":null,\"satisfied\":true,\"values\":{}}"
        );
    }

    #[test]
    fn cli_structure_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
