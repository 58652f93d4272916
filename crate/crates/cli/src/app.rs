use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use infoq::pricing::info::{evaluate_info_fee, optimize_info_fee_refine_capped};
use infoq::{
    find_thresholds, join_equilibrium, optimal_access_fee, optimize_info_fee_heuristic,
    revenue_access, solve_equilibrium, utility_inspect, utility_no_inspect,
    validate_against_analytic, PricingResult, SimConfig, SystemParams,
};

use crate::config::ConfigFile;
use crate::output::{num, Report};

#[derive(Parser, Debug)]
#[command(
    name = "infoq",
    version,
    about = "Customer equilibria and revenue-optimal pricing for a queue that sells queue-length information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Market {
    /// File of `key = value` lines whose keys mirror the flag names; flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Arrival rate.
    #[arg(long)]
    lambda: Option<f64>,
    /// Service rate.
    #[arg(long)]
    mu: Option<f64>,
    /// Value of service to a customer.
    #[arg(long)]
    reward: Option<f64>,
    /// Cost per unit of time spent in the system.
    #[arg(long)]
    wait_cost: Option<f64>,
    /// Price of observing the queue length.
    #[arg(long)]
    inspect_cost: Option<f64>,
    /// Admission fee.
    #[arg(long)]
    access_fee: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mechanism {
    Access,
    Info,
}

impl Mechanism {
    fn as_str(self) -> &'static str {
        match self {
            Self::Access => "access",
            Self::Info => "info",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Symmetric inspection equilibrium and the two expected utilities.
    Equilibrium {
        #[command(flatten)]
        market: Market,
    },
    /// Revenue as a function of the fee, as CSV.
    RevenueCurve {
        #[command(flatten)]
        market: Market,
        #[arg(long, value_enum)]
        mechanism: Option<Mechanism>,
        /// Smallest fee [default: 0].
        #[arg(long)]
        fee_min: Option<f64>,
        /// Largest fee [default: reward].
        #[arg(long)]
        fee_max: Option<f64>,
        /// Number of evenly spaced fees [default: 201].
        #[arg(long)]
        points: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Revenue-maximizing fee for one mechanism.
    Optimize {
        #[command(flatten)]
        market: Market,
        #[arg(long, value_enum)]
        mechanism: Option<Mechanism>,
        /// Fee tolerance of the information-fee refinement [default: 1e-9].
        #[arg(long)]
        tol: Option<f64>,
        /// Run only the fixed-step ascent for the information fee, with this step.
        #[arg(long)]
        step: Option<f64>,
        /// Upper bound on the information fee [default: reward].
        #[arg(long)]
        c_i_max: Option<f64>,
    },
    /// Optimal revenue of both mechanisms over a waiting-cost sweep, as CSV.
    Policy {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        cw_min: Option<f64>,
        #[arg(long)]
        cw_max: Option<f64>,
        /// Number of waiting costs in the sweep [default: 50].
        #[arg(long)]
        grid: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Simulate the queue and score it against the closed forms.
    Validate {
        #[command(flatten)]
        market: Market,
        /// Inspection probability.
        #[arg(long)]
        p: Option<f64>,
        /// Arrival and departure events [default: 1000000].
        #[arg(long)]
        events: Option<u64>,
        /// [default: 42]
        #[arg(long)]
        seed: Option<u64>,
        /// Events discarded before measuring [default: events / 10].
        #[arg(long)]
        warmup: Option<u64>,
        /// Largest accepted total-variation distance [default: 0.02].
        #[arg(long)]
        tol_tv: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Equilibrium { .. } => "equilibrium",
            Self::RevenueCurve { .. } => "revenue-curve",
            Self::Optimize { .. } => "optimize",
            Self::Policy { .. } => "policy",
            Self::Validate { .. } => "validate",
        }
    }
}

enum Failure {
    /// Missing or malformed arguments; reported with the subcommand usage.
    Usage(String),
    Domain(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Domain(e)
    }
}

impl From<infoq::ModelError> for Failure {
    fn from(e: infoq::ModelError) -> Self {
        Self::Domain(e.into())
    }
}

const MARKET_KEYS: [&str; 6] = [
    "lambda",
    "mu",
    "reward",
    "wait-cost",
    "inspect-cost",
    "access-fee",
];

/// Flag values merged over the config file, with the order they are echoed in.
struct Inputs {
    file: ConfigFile,
    echo: Vec<(String, String)>,
}

impl Inputs {
    fn new(market: &Market, extra_keys: &[&str]) -> Result<Self> {
        let file = match &market.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut allowed: Vec<&str> = MARKET_KEYS.to_vec();
        allowed.extend_from_slice(extra_keys);
        file.check_keys(&allowed)?;
        Ok(Self {
            file,
            echo: Vec::new(),
        })
    }

    fn required(&mut self, key: &str, flag: Option<f64>) -> Result<f64, Failure> {
        match self.file.f64_or(key, flag)? {
            Some(v) => {
                self.echo.push((key.to_string(), num(v)));
                Ok(v)
            }
            None => Err(Failure::Usage(format!(
                "missing required parameter --{key}"
            ))),
        }
    }

    fn optional(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, Failure> {
        let v = self.file.f64_or(key, flag)?.unwrap_or(default);
        self.echo.push((key.to_string(), num(v)));
        Ok(v)
    }

    fn count(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64, Failure> {
        let v = self.file.u64_or(key, flag)?.unwrap_or(default);
        self.echo.push((key.to_string(), v.to_string()));
        Ok(v)
    }

    fn mechanism(&mut self, flag: Option<Mechanism>) -> Result<Mechanism, Failure> {
        let raw = self
            .file
            .str_or("mechanism", flag.map(|m| m.as_str().to_string()));
        let Some(raw) = raw else {
            return Err(Failure::Usage(
                "missing required parameter --mechanism".into(),
            ));
        };
        let m = Mechanism::from_str(&raw, true).map_err(|_| {
            Failure::Usage(format!("--mechanism must be access or info, got {raw:?}"))
        })?;
        self.echo.push(("mechanism".into(), m.as_str().into()));
        Ok(m)
    }

    fn output(&self, flag: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone()
            .or_else(|| self.file.str_or("output", None).map(PathBuf::from))
    }

    /// Market parameters; `with_wait_cost` false for sweeps over it.
    fn params(
        &mut self,
        m: &Market,
        require_inspect: bool,
        with_wait_cost: bool,
    ) -> Result<SystemParams, Failure> {
        let lambda = self.required("lambda", m.lambda)?;
        let mu = self.required("mu", m.mu)?;
        let reward = self.required("reward", m.reward)?;
        let wait_cost = if with_wait_cost {
            self.required("wait-cost", m.wait_cost)?
        } else {
            1.0
        };
        let inspect_cost = if require_inspect {
            self.required("inspect-cost", m.inspect_cost)?
        } else {
            self.optional("inspect-cost", m.inspect_cost, 0.0)?
        };
        let access_fee = self.optional("access-fee", m.access_fee, 0.0)?;
        let params = SystemParams::new(lambda, mu, reward, wait_cost)
            .with_inspect_cost(inspect_cost)
            .with_access_fee(access_fee);
        params.validate()?;
        Ok(params)
    }

    fn header(&self, command: &str) -> Report {
        let mut report = Report::default();
        report.comment(format!("infoq {command}"));
        for (k, v) in &self.echo {
            report.comment(format!("{k}={v}"));
        }
        report
    }
}

fn emit(out: &mut String, report: Report, output: Option<PathBuf>) -> Result<()> {
    let text = report.into_string();
    match output {
        Some(path) => {
            std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            out.push_str(&text);
            Ok(())
        }
    }
}

fn cmd_equilibrium(out: &mut String, market: &Market) -> Result<u8, Failure> {
    let mut inputs = Inputs::new(market, &[])?;
    let params = inputs.params(market, true, true)?;
    let eq = solve_equilibrium(&params)?;
    let mut report = inputs.header("equilibrium");
    report.line(format!("p_star={}", num(eq.p_star)));
    report.line(format!("branch={}", eq.branch));
    report.line(format!(
        "residual={}",
        eq.residual.map_or("none".into(), num)
    ));
    report.line(format!(
        "u_inspect={}",
        num(utility_inspect(&params, eq.p_star)?)
    ));
    report.line(format!(
        "u_no_inspect={}",
        num(utility_no_inspect(&params, eq.p_star)?)
    ));
    emit(out, report, None)?;
    Ok(0)
}

fn cmd_revenue_curve(
    out: &mut String,
    market: &Market,
    mechanism: Option<Mechanism>,
    fee_min: Option<f64>,
    fee_max: Option<f64>,
    points: Option<u64>,
    output: &Option<PathBuf>,
) -> Result<u8, Failure> {
    let mut inputs = Inputs::new(
        market,
        &["mechanism", "fee-min", "fee-max", "points", "output"],
    )?;
    let params = inputs.params(market, false, true)?;
    let mechanism = inputs.mechanism(mechanism)?;
    let lo = inputs.optional("fee-min", fee_min, 0.0)?;
    let hi = inputs.optional("fee-max", fee_max, params.reward)?;
    let n = inputs.count("points", points, 201)?;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Failure::Domain(anyhow::anyhow!(
            "fee range must satisfy 0 <= fee-min < fee-max, got [{lo}, {hi}]"
        )));
    }
    if n < 2 {
        return Err(Failure::Domain(anyhow::anyhow!(
            "points must be >= 2, got {n}"
        )));
    }

    let mut report = inputs.header("revenue-curve");
    report.line("fee,equilibrium,revenue");
    let last = (n - 1) as f64;
    for k in 0..n {
        let fee = if k + 1 == n {
            hi
        } else {
            lo + (hi - lo) * (k as f64 / last)
        };
        let (eq, revenue) = match mechanism {
            Mechanism::Access => (
                join_equilibrium(&params, fee)?.q_star,
                revenue_access(&params, fee)?,
            ),
            Mechanism::Info => {
                let e = evaluate_info_fee(&params, fee)?;
                (e.p_star, e.revenue)
            }
        };
        report.row(&[num(fee), num(eq), num(revenue)]);
    }
    emit(out, report, inputs.output(output))?;
    Ok(0)
}

fn print_pricing(report: &mut Report, result: &PricingResult, equilibrium: f64) {
    report.line(format!("optimal_fee={}", num(result.optimal_fee)));
    report.line(format!("optimal_revenue={}", num(result.optimal_revenue)));
    report.line(format!("equilibrium={}", num(equilibrium)));
    report.line(format!("degenerate={}", result.degenerate));
    report.comment("candidate=label,fee,revenue,valid");
    for c in &result.candidates {
        report.line(format!(
            "candidate={},{},{},{}",
            c.label,
            num(c.fee),
            num(c.revenue),
            c.valid
        ));
    }
}

fn cmd_optimize(
    out: &mut String,
    market: &Market,
    mechanism: Option<Mechanism>,
    tol: Option<f64>,
    step: Option<f64>,
    c_i_max: Option<f64>,
) -> Result<u8, Failure> {
    let mut inputs = Inputs::new(market, &["mechanism", "tol", "step", "c-i-max"])?;
    let params = inputs.params(market, false, true)?;
    let mechanism = inputs.mechanism(mechanism)?;
    match mechanism {
        Mechanism::Access => {
            let result = optimal_access_fee(&params)?;
            let q = join_equilibrium(&params, result.optimal_fee)?;
            let mut report = inputs.header("optimize");
            report.line(format!("regime={}", q.regime));
            print_pricing(&mut report, &result, q.q_star);
            emit(out, report, None)?;
        }
        Mechanism::Info => {
            let cap = inputs.optional("c-i-max", c_i_max, params.reward)?;
            match inputs.file.f64_or("step", step)? {
                Some(step) => {
                    inputs.echo.push(("step".into(), num(step)));
                    let trace = optimize_info_fee_heuristic(&params, step, cap)?;
                    let mut report = inputs.header("optimize");
                    report.line(format!("stop_reason={}", trace.stop_reason));
                    report.line(format!("evaluations={}", trace.evaluations.len()));
                    report.line(format!("best_fee={}", num(trace.best_fee)));
                    report.line(format!("best_revenue={}", num(trace.best_revenue)));
                    emit(out, report, None)?;
                }
                None => {
                    let tol = inputs.optional("tol", tol, 1e-9)?;
                    let result = optimize_info_fee_refine_capped(&params, tol, cap)?;
                    let p = evaluate_info_fee(&params, result.optimal_fee)?.p_star;
                    let mut report = inputs.header("optimize");
                    print_pricing(&mut report, &result, p);
                    emit(out, report, None)?;
                }
            }
        }
    }
    Ok(0)
}

fn cmd_policy(
    out: &mut String,
    market: &Market,
    cw_min: Option<f64>,
    cw_max: Option<f64>,
    grid: Option<u64>,
    output: &Option<PathBuf>,
) -> Result<u8, Failure> {
    let mut inputs = Inputs::new(market, &["cw-min", "cw-max", "grid", "output"])?;
    let params = inputs.params(market, false, false)?;
    let lo = inputs.required("cw-min", cw_min)?;
    let hi = inputs.required("cw-max", cw_max)?;
    let n = inputs.count("grid", grid, 50)?;
    let report_data = find_thresholds(&params, lo, hi, n as usize)?;

    let mut report = inputs.header("policy");
    report.line("cw,ra_star,ri_star,winner");
    for row in &report_data.rows {
        report.row(&[
            num(row.wait_cost),
            num(row.access_revenue),
            num(row.info_revenue),
            row.winner.to_string(),
        ]);
    }
    let summary = if report_data.thresholds.is_empty() {
        "none".to_string()
    } else {
        report_data
            .thresholds
            .iter()
            .map(|&t| num(t))
            .collect::<Vec<_>>()
            .join(";")
    };
    report.comment(format!("thresholds={summary}"));
    report.comment(format!("threshold_count={}", report_data.thresholds.len()));
    report.comment(format!("excess_crossings={}", report_data.excess_crossings));
    let output = inputs.output(output);
    if output.is_some() {
        out.push_str(&format!("thresholds={summary}\n"));
    }
    emit(out, report, output)?;
    Ok(0)
}

fn cmd_validate(
    out: &mut String,
    market: &Market,
    p: Option<f64>,
    events: Option<u64>,
    seed: Option<u64>,
    warmup: Option<u64>,
    tol_tv: Option<f64>,
) -> Result<u8, Failure> {
    let mut inputs = Inputs::new(market, &["p", "events", "seed", "warmup", "tol-tv"])?;
    let params = inputs.params(market, false, true)?;
    let p = inputs.required("p", p)?;
    let events = inputs.count("events", events, 1_000_000)?;
    let seed = inputs.count("seed", seed, 42)?;
    let warmup = inputs.count("warmup", warmup, events / 10)?;
    let tol_tv = inputs.optional("tol-tv", tol_tv, 0.02)?;

    let config = SimConfig {
        warmup_events: warmup,
        ..SimConfig::new(params, p, events, seed)
    };
    let v = validate_against_analytic(&config, tol_tv)?;
    let mut report = inputs.header("validate");
    report.line(format!("tv_distance={}", num(v.tv_distance)));
    for (name, check) in [("u_inspect", v.u_inspect), ("u_no_inspect", v.u_no_inspect)] {
        report.line(format!("{name}_analytic={}", num(check.analytic)));
        report.line(format!("{name}_estimate={}", num(check.estimate.mean)));
        report.line(format!(
            "{name}_std_error={}",
            num(check.estimate.std_error)
        ));
        report.line(format!("{name}_z={}", num(check.z_score)));
    }
    report.line(format!("pi0_estimate={}", num(v.stats.pi0.mean)));
    report.line(format!("joined_fraction={}", num(v.stats.joined_fraction)));
    report.line(format!("max_state_seen={}", v.stats.max_state_seen));
    report.line(format!("result={}", if v.pass { "PASS" } else { "FAIL" }));
    emit(out, report, None)?;
    Ok(if v.pass { 0 } else { 1 })
}

fn run(command: &Command, out: &mut String) -> Result<u8, Failure> {
    match command {
        Command::Equilibrium { market } => cmd_equilibrium(out, market),
        Command::RevenueCurve {
            market,
            mechanism,
            fee_min,
            fee_max,
            points,
            output,
        } => cmd_revenue_curve(out, market, *mechanism, *fee_min, *fee_max, *points, output),
        Command::Optimize {
            market,
            mechanism,
            tol,
            step,
            c_i_max,
        } => cmd_optimize(out, market, *mechanism, *tol, *step, *c_i_max),
        Command::Policy {
            market,
            cw_min,
            cw_max,
            grid,
            output,
        } => cmd_policy(out, market, *cw_min, *cw_max, *grid, output),
        Command::Validate {
            market,
            p,
            events,
            seed,
            warmup,
            tol_tv,
        } => cmd_validate(out, market, *p, *events, *seed, *warmup, *tol_tv),
    }
}

/// What one invocation printed and its exit status.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command without touching
/// the process's own streams.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stderr: text,
                    ..Outcome::default()
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    ..Outcome::default()
                }
            };
        }
    };
    let mut stdout = String::new();
    match run(&cli.command, &mut stdout) {
        Ok(code) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let sub = cmd
                .find_subcommand_mut(cli.command.name())
                .expect("subcommand is registered");
            Outcome {
                code: 2,
                stdout,
                stderr: sub
                    .error(ErrorKind::MissingRequiredArgument, msg)
                    .render()
                    .to_string(),
            }
        }
        Err(Failure::Domain(e)) => Outcome {
            code: 2,
            stdout,
            stderr: format!("error: {e:#}\n"),
        },
    }
}
