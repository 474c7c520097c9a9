//! Argument parsing and command dispatch for the `qwalk` binary.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use qwalk_core::analysis::{
    confinement_interval, near_barrier_report, recurrence_series, spread_exponent, DEFAULT_NEAR_BARRIER_EPS,
    DEFAULT_THETA,
};
use qwalk_core::duality::verify_duality;
use qwalk_core::number_theory::{
    approximation_error, boundary_diagonal, boundary_diagonal_limit, quarter_approximants, DEFAULT_Q_MAX,
};
use qwalk_core::spectral::{butterfly, property_report, spectrum};
use qwalk_core::{evolve, CoinSchedule, InversePeriod, Order, QuarterFraction, Spinor};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Directory used for output files when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "QWALK_OUTPUT_DIR";

pub const DUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    /// `--help` / `--version` text; not a failure.
    #[error("{0}")]
    Info(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] qwalk_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qwalk_core::Error as E;
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Core(E::InvalidInput(_) | E::InvalidQuarterFraction { .. } | E::RationalInput) => 1,
            CliError::Core(E::Leakage { .. } | E::NonUnitaryCoin { .. }) => 3,
            CliError::Core(_) | CliError::Io { .. } => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Evolve,
    Spectrum,
    Butterfly,
    Approximate,
    DualityCheck,
    Properties,
    Recurrence,
    Spread,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Spectrum => "spectrum",
            Command::Butterfly => "butterfly",
            Command::Approximate => "approximate",
            Command::DualityCheck => "duality-check",
            Command::Properties => "properties",
            Command::Recurrence => "recurrence",
            Command::Spread => "spread",
        }
    }

    fn tabular(self) -> bool {
        matches!(self, Command::Evolve | Command::Butterfly | Command::Recurrence)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Wc,
    Cw,
}

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Order {
        match o {
            OrderArg::Wc => Order::WC,
            OrderArg::Cw => Order::CW,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Symmetric,
    Left,
    Right,
}

/// Parsed `--alpha`.
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaValue {
    Period(InversePeriod),
    /// Haar-random coins drawn from `--seed`.
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSpec {
    pub text: String,
    pub value: AlphaValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: Option<AlphaSpec>,
    pub steps: u64,
    pub q_max: u64,
    pub theta: f64,
    pub seed: u64,
    pub initial: Spinor,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub order: Order,
    pub count: usize,
    /// Spacing of spread checkpoints.
    pub interval: u64,
}

impl RunConfig {
    fn quarter(&self) -> Option<QuarterFraction> {
        match &self.alpha.as_ref()?.value {
            AlphaValue::Period(p) => p.as_quarter(),
            AlphaValue::Random => None,
        }
    }

    fn schedule(&self) -> Option<CoinSchedule> {
        Some(match &self.alpha.as_ref()?.value {
            AlphaValue::Period(p) => CoinSchedule::rotational(p.clone()),
            AlphaValue::Random => CoinSchedule::Random { seed: self.seed },
        })
    }

    fn alpha_text(&self) -> &str {
        self.alpha.as_ref().map(|a| a.text.as_str()).unwrap_or("")
    }
}

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Discrete-time quantum walks with coin angle 2*pi*alpha*n")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct AlphaArg {
    /// P/4Q, another fraction, a decimal (append "..." for a truncated
    /// irrational), pi/2, golden, golden-ratio, sqrt2-1 or random.
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
}

#[derive(Args, Debug)]
struct InitArgs {
    /// Named initial spinor.
    #[arg(long, value_enum, default_value = "symmetric", conflicts_with_all = ["left", "right"])]
    init: InitArg,
    /// Left amplitude, e.g. 0.6 or 0.6+0.8i; requires --right.
    #[arg(long, requires = "right", allow_hyphen_values = true)]
    left: Option<Complex64>,
    /// Right amplitude; requires --left.
    #[arg(long, requires = "left", allow_hyphen_values = true)]
    right: Option<Complex64>,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output file ("-" for stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Position distribution after --steps steps (CSV n,prob_L,prob_R,prob).
    Evolve {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value_t = 1000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "wc")]
        order: OrderArg,
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Eigenvalues of the finite one-step matrix for alpha = P/4Q.
    Spectrum {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, value_enum, default_value = "cw")]
        order: OrderArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Eigenvalue arguments for every admissible P/4Q with Q <= --qmax.
    Butterfly {
        #[arg(long, default_value_t = 20)]
        qmax: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Certified quarter-fraction approximants of an irrational alpha (mod 1).
    Approximate {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_Q_MAX)]
        qmax: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Residuals of the coin/shift role exchange on the ring Z_4Q.
    DualityCheck {
        #[command(flatten)]
        alpha: AlphaArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Spectral property report for alpha = P/4Q.
    Properties {
        #[command(flatten)]
        alpha: AlphaArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Origin probability for t = 0..=--steps (CSV t,prob_origin).
    Recurrence {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value_t = 1000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Standard deviation and scaled first moment at regular checkpoints.
    Spread {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value_t = 1000)]
        steps: u64,
        /// Checkpoint spacing; defaults to steps/20.
        #[arg(long)]
        interval: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_alpha(text: &str) -> Result<AlphaSpec, CliError> {
    let value = if text.trim() == "random" {
        AlphaValue::Random
    } else {
        InversePeriod::parse(text)
            .map(AlphaValue::Period)
            .map_err(|e| usage(format!("--alpha {text:?}: {e}")))?
    };
    Ok(AlphaSpec {
        text: text.trim().to_string(),
        value,
    })
}

fn parse_init(init: InitArgs) -> Result<Spinor, CliError> {
    match (init.left, init.right) {
        (Some(l), Some(r)) => Spinor::new(l, r).map_err(|e| usage(format!("--left/--right: {e}"))),
        _ => Ok(match init.init {
            InitArg::Symmetric => Spinor::symmetric(),
            InitArg::Left => Spinor::left(),
            InitArg::Right => Spinor::right(),
        }),
    }
}

fn require_quarter(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.quarter().is_none() {
        return Err(usage(format!(
            "{} needs --alpha of the form P/4Q (P odd, gcd(P, Q) = 1), got {:?}",
            cfg.command.name(),
            cfg.alpha_text()
        )));
    }
    Ok(())
}

/// Strict parse of `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                CliError::Info(e.render().to_string())
            }
            _ => {
                let text = e.render().to_string();
                let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                usage(line.trim_start_matches("error: ").trim())
            }
        }
    })?;

    let mut cfg = RunConfig {
        command: Command::Evolve,
        alpha: None,
        steps: 1000,
        q_max: 20,
        theta: DEFAULT_THETA,
        seed: 0,
        initial: Spinor::symmetric(),
        output: None,
        format: Format::Csv,
        order: Order::WC,
        count: 3,
        interval: 50,
    };
    let out = match cli.command {
        Cmd::Evolve { alpha, steps, seed, order, init, out } => {
            cfg.command = Command::Evolve;
            cfg.alpha = Some(parse_alpha(&alpha.alpha)?);
            cfg.steps = steps;
            cfg.seed = seed;
            cfg.order = order.into();
            cfg.initial = parse_init(init)?;
            out
        }
        Cmd::Spectrum { alpha, order, out } => {
            cfg.command = Command::Spectrum;
            cfg.alpha = Some(parse_alpha(&alpha.alpha)?);
            cfg.order = order.into();
            require_quarter(&cfg)?;
            out
        }
        Cmd::Butterfly { qmax, out } => {
            cfg.command = Command::Butterfly;
            if qmax == 0 {
                return Err(usage("--qmax must be at least 1"));
            }
            cfg.q_max = qmax;
            out
        }
        Cmd::Approximate { alpha, count, qmax, out } => {
            cfg.command = Command::Approximate;
            cfg.alpha = Some(parse_alpha(&alpha.alpha)?);
            match &cfg.alpha.as_ref().map(|a| &a.value) {
                Some(AlphaValue::Period(InversePeriod::Irrational(_))) => {}
                _ => {
                    return Err(usage(format!(
                        "approximate needs an irrational --alpha (a named constant or a decimal ending in \"...\"), got {:?}",
                        cfg.alpha_text()
                    )))
                }
            }
            if count == 0 {
                return Err(usage("--count must be at least 1"));
            }
            if qmax == 0 {
                return Err(usage("--qmax must be at least 1"));
            }
            cfg.count = count;
            cfg.q_max = qmax;
            out
        }
        Cmd::DualityCheck { alpha, out } => {
            cfg.command = Command::DualityCheck;
            cfg.alpha = Some(parse_alpha(&alpha.alpha)?);
            require_quarter(&cfg)?;
            out
        }
        Cmd::Properties { alpha, out } => {
            cfg.command = Command::Properties;
            cfg.alpha = Some(parse_alpha(&alpha.alpha)?);
            require_quarter(&cfg)?;
            out
        }
        Cmd::Recurrence { alpha, steps, seed, init, out } => {
            cfg.command = Command::Recurrence;
            cfg.alpha = Some(parse_alpha(&alpha.alpha)?);
            cfg.steps = steps;
            cfg.seed = seed;
            cfg.initial = parse_init(init)?;
            out
        }
        Cmd::Spread { alpha, steps, interval, theta, seed, init, out } => {
            cfg.command = Command::Spread;
            cfg.alpha = Some(parse_alpha(&alpha.alpha)?);
            if steps == 0 {
                return Err(usage("--steps must be at least 1 for spread"));
            }
            if !(theta.is_finite() && theta > 0.0) {
                return Err(usage(format!("--theta must be positive, got {theta}")));
            }
            let interval = interval.unwrap_or((steps / 20).max(1));
            if interval == 0 {
                return Err(usage("--interval must be at least 1"));
            }
            cfg.steps = steps;
            cfg.interval = interval;
            cfg.theta = theta;
            cfg.seed = seed;
            cfg.initial = parse_init(init)?;
            out
        }
    };
    cfg.output = out.output;
    cfg.format = match out.format {
        Some(Format::Csv) if !cfg.command.tabular() => {
            return Err(usage(format!("{} only writes JSON", cfg.command.name())));
        }
        Some(f) => f,
        None if cfg.command.tabular() => Format::Csv,
        None => Format::Json,
    };
    Ok(cfg)
}

/// Rendered output plus an optional property violation to report after
/// the output has been written.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub violation: Option<String>,
}

fn meta(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    let mut m = vec![
        ("tool", "qwalk".to_string()),
        ("version", VERSION.to_string()),
        ("command", cfg.command.name().to_string()),
        ("alpha_spec", cfg.alpha_text().to_string()),
        ("seed", cfg.seed.to_string()),
    ];
    match cfg.command {
        Command::Evolve | Command::Recurrence | Command::Spread => {
            m.push(("steps", cfg.steps.to_string()));
            m.push(("initial", format!("{},{}", cfg.initial.left, cfg.initial.right)));
        }
        Command::Butterfly | Command::Approximate => m.push(("qmax", cfg.q_max.to_string())),
        _ => {}
    }
    match cfg.command {
        Command::Evolve | Command::Spectrum => m.push(("order", cfg.order.to_string())),
        Command::Spread => {
            m.push(("interval", cfg.interval.to_string()));
            m.push(("theta", cfg.theta.to_string()));
        }
        Command::Approximate => m.push(("count", cfg.count.to_string())),
        _ => {}
    }
    m
}

fn meta_json(cfg: &RunConfig) -> Value {
    Value::Object(meta(cfg).into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect())
}

#[derive(Clone, Copy, Debug)]
enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn json(self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
        }
    }
}

struct Table {
    columns: &'static [&'static str],
    /// Extra `# key: value` lines after the metadata.
    notes: Vec<(&'static str, String)>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format {
            Format::Csv => {
                let mut s = String::new();
                for (k, v) in meta(cfg).iter().chain(&self.notes) {
                    let _ = writeln!(s, "# {k}: {v}");
                }
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for row in &self.rows {
                    for (i, c) in row.iter().enumerate() {
                        if i > 0 {
                            s.push(',');
                        }
                        let _ = match c {
                            Cell::Int(v) => write!(s, "{v}"),
                            Cell::Float(v) => write!(s, "{v}"),
                        };
                    }
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let mut doc = serde_json::Map::new();
                doc.insert("meta".into(), meta_json(cfg));
                for (k, v) in &self.notes {
                    doc.insert((*k).into(), Value::String(v.clone()));
                }
                doc.insert("columns".into(), json!(self.columns));
                doc.insert(
                    "rows".into(),
                    Value::Array(
                        self.rows
                            .iter()
                            .map(|r| Value::Array(r.iter().map(|c| c.json()).collect()))
                            .collect(),
                    ),
                );
                pretty(Value::Object(doc))
            }
        }
    }
}

fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn with_meta(cfg: &RunConfig, v: Value) -> Value {
    let mut doc = match v {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    doc.insert("meta".into(), meta_json(cfg));
    Value::Object(doc)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn run_evolve(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let schedule = cfg.schedule().expect("evolve has an alpha");
    let state = evolve(cfg.initial, &schedule, cfg.steps, cfg.order)?;
    let mut notes = Vec::new();
    if let Some((lo, hi)) = confinement_interval(&schedule, cfg.steps as i64 + 1) {
        notes.push(("confinement_interval", format!("[{lo}, {hi}]")));
    }
    if let Some(f) = cfg.quarter() {
        let q = f.q() as i64;
        let zero = Complex64::new(0.0, 0.0);
        if let Some((n, a)) = state.amplitudes().find(|(n, a)| (*n < -q || *n > q) && (a[0] != zero || a[1] != zero)) {
            return Err(qwalk_core::Error::Leakage {
                site: n,
                q: f.q(),
                probability: a[0].norm_sqr() + a[1].norm_sqr(),
            }
            .into());
        }
    }
    let rows = state
        .distribution()
        .into_iter()
        .map(|(n, p)| vec![Cell::Int(n), Cell::Float(p.left), Cell::Float(p.right), Cell::Float(p.total)])
        .collect();
    let table = Table {
        columns: &["n", "prob_L", "prob_R", "prob"],
        notes,
        rows,
    };
    Ok(Rendered {
        text: table.render(cfg),
        violation: None,
    })
}

fn run_spectrum(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let f = cfg.quarter().expect("checked at parse time");
    let s = spectrum(f, cfg.order)?;
    let eigenvalues: Vec<Value> = s
        .eigenvalues
        .iter()
        .zip(&s.args)
        .map(|(z, a)| json!({ "re": z.re, "im": z.im, "arg": a }))
        .collect();
    let doc = json!({
        "p": f.p(),
        "q": f.q(),
        "alpha": f.alpha(),
        "order": cfg.order.to_string(),
        "eigenvalues": eigenvalues,
        "max_residual": s.max_residual,
        "max_modulus_defect": s.max_modulus_defect,
    });
    Ok(Rendered {
        text: pretty(with_meta(cfg, doc)),
        violation: None,
    })
}

fn run_butterfly(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let rows = butterfly(cfg.q_max)?
        .into_iter()
        .flat_map(|r| {
            let (p, q, alpha) = (r.f.p() as i64, r.f.q() as i64, r.alpha);
            r.args
                .into_iter()
                .map(move |a| vec![Cell::Float(alpha), Cell::Int(p), Cell::Int(q), Cell::Float(a)])
        })
        .collect();
    let table = Table {
        columns: &["alpha", "p", "q", "arg"],
        notes: vec![("convention", "alpha = p/(4q); arg of CW eigenvalues in (-pi, pi]".into())],
        rows,
    };
    Ok(Rendered {
        text: table.render(cfg),
        violation: None,
    })
}

fn run_approximate(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let Some(AlphaValue::Period(InversePeriod::Irrational(x))) = cfg.alpha.as_ref().map(|a| &a.value) else {
        unreachable!("checked at parse time");
    };
    // the coin sequence depends on alpha mod 1 only
    let reduced = x.fract();
    let found = quarter_approximants(&reduced, cfg.count, cfg.q_max)?;
    let enc = reduced.enclosure();
    let list: Vec<Value> = found
        .iter()
        .map(|a| {
            let q = a.f.q() as f64;
            json!({
                "p": a.f.p(),
                "q": a.f.q(),
                "alpha": a.f.alpha(),
                "certified": a.certified,
                "source": to_value(&a.source),
                "error": approximation_error(&enc, a.f),
                "bound": 1.0 / (4.0 * q * q),
                "boundary_diagonal": boundary_diagonal(&reduced, a.f),
                "boundary_diagonal_limit": boundary_diagonal_limit(a.f),
            })
        })
        .collect();
    let doc = json!({
        "alpha_mod_1": reduced.to_f64(),
        "significant_digits": x.significant_digits(),
        "approximants": list,
    });
    Ok(Rendered {
        text: pretty(with_meta(cfg, doc)),
        violation: None,
    })
}

fn run_duality(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let f = cfg.quarter().expect("checked at parse time");
    let r = verify_duality(f);
    let worst = r.max_residual_w_as_coin.max(r.max_residual_c_as_shift);
    let pass = worst <= DUALITY_TOL;
    let mut doc = to_value(&r);
    doc["tolerance"] = json!(DUALITY_TOL);
    doc["pass"] = json!(pass);
    Ok(Rendered {
        text: pretty(with_meta(cfg, doc)),
        violation: (!pass).then(|| format!("duality residual {worst:e} exceeds {DUALITY_TOL:e} for alpha = {f}")),
    })
}

fn run_properties(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let f = cfg.quarter().expect("checked at parse time");
    let r = property_report(f)?;
    let all = r.all_pass();
    let mut doc = to_value(&r);
    doc["all_pass"] = json!(all);
    let violation = (!all).then(|| {
        let mut failing: Vec<String> = [("P1", r.p1), ("P2", r.p2), ("P3", r.p3), ("P4", r.p4), ("P5", r.p5)]
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(n, c)| format!("{n} (residual {:e})", c.residual))
            .collect();
        if !r.det_ok {
            failing.push(format!("determinant (|prod + 1| = {:e})", r.det_residual));
        }
        if !r.orders_agree.pass {
            failing.push(format!("CW/WC spectra (gap {:e})", r.orders_agree.residual));
        }
        format!(
            "alpha = {f}: {} failed; minimum eigenvalue gap {:e}",
            failing.join(", "),
            r.simple_gap
        )
    });
    Ok(Rendered {
        text: pretty(with_meta(cfg, doc)),
        violation,
    })
}

fn run_recurrence(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let schedule = cfg.schedule().expect("recurrence has an alpha");
    let rows = recurrence_series(&schedule, cfg.steps, cfg.initial)?
        .into_iter()
        .map(|(t, p)| vec![Cell::Int(t as i64), Cell::Float(p)])
        .collect();
    let table = Table {
        columns: &["t", "prob_origin"],
        notes: Vec::new(),
        rows,
    };
    Ok(Rendered {
        text: table.render(cfg),
        violation: None,
    })
}

fn run_spread(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let schedule = cfg.schedule().expect("spread has an alpha");
    let mut checkpoints: Vec<u64> = (0..=cfg.steps).step_by(cfg.interval as usize).collect();
    if checkpoints.last() != Some(&cfg.steps) {
        checkpoints.push(cfg.steps);
    }
    let est = spread_exponent(&schedule, &checkpoints, cfg.initial, cfg.theta)?;
    let mut doc = to_value(&est);
    if matches!(schedule, CoinSchedule::Random { .. }) {
        let reach = cfg.steps as i64 + 1;
        doc["near_barriers"] = to_value(&near_barrier_report(&schedule, (-reach, reach), DEFAULT_NEAR_BARRIER_EPS));
    }
    Ok(Rendered {
        text: pretty(with_meta(cfg, doc)),
        violation: None,
    })
}

/// Runs the command and returns its output text without writing it.
pub fn render(cfg: &RunConfig) -> Result<Rendered, CliError> {
    match cfg.command {
        Command::Evolve => run_evolve(cfg),
        Command::Spectrum => run_spectrum(cfg),
        Command::Butterfly => run_butterfly(cfg),
        Command::Approximate => run_approximate(cfg),
        Command::DualityCheck => run_duality(cfg),
        Command::Properties => run_properties(cfg),
        Command::Recurrence => run_recurrence(cfg),
        Command::Spread => run_spread(cfg),
    }
}

/// File name used under the output directory when `--output` is absent.
pub fn default_file_name(cfg: &RunConfig) -> String {
    let stem = match cfg.command {
        Command::Butterfly => format!("q{}", cfg.q_max),
        _ => cfg
            .alpha_text()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect(),
    };
    format!("{}-{stem}.{}", cfg.command.name(), cfg.format.extension())
}

/// Where output goes: `None` means stdout.
pub fn output_path(cfg: &RunConfig, output_dir: Option<&Path>) -> Option<PathBuf> {
    match (&cfg.output, output_dir) {
        (Some(p), _) if p.as_os_str() == "-" => None,
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(default_file_name(cfg))),
        (None, None) => None,
    }
}

/// Writes via a temporary file in the target directory and a rename.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Runs `cfg`, writes its output and returns the process exit code.
pub fn execute(cfg: &RunConfig) -> i32 {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let result = render(cfg).and_then(|r| {
        match output_path(cfg, dir.as_deref()) {
            Some(path) => write_atomic(&path, &r.text)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(r.text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Io {
                        path: PathBuf::from("<stdout>"),
                        source,
                    })?;
            }
        }
        Ok(r.violation)
    });
    match result {
        Ok(None) => 0,
        Ok(Some(v)) => {
            eprintln!("property violation: {v}");
            3
        }
        Err(e) => {
            eprintln!("qwalk: {e}");
            e.exit_code()
        }
    }
}
