use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use structural::harness::{
    self, EnergyNorm, HarnessError, RunConfig, Sampling, Scheme, SweepRow,
};
use structural::numerics::Precision;
use structural::problems::InvariantKind;
use structural::secoeff::Formulation;

#[derive(Parser)]
#[command(name = "structural", version, about = "Structural ZD/ZDS integrators for Hamiltonian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate once and report errors as a one-row CSV.
    Run(RunArgs),
    /// Integrate at several N and report errors with convergence orders.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated step counts, ascending.
        #[arg(long = "Ns", value_delimiter = ',', required = true)]
        ns: Vec<usize>,
    },
    /// Invariant deviation over time as `t,deviation`.
    Drift {
        #[command(flatten)]
        run: RunArgs,
        /// H, L or A.
        #[arg(long, default_value = "H")]
        quantity: InvariantKind,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Dump structural-equation coefficients on the unit grid.
    Coeffs {
        /// Block sizes; comma-separated.
        #[arg(long = "R", value_delimiter = ',', default_value = "1,2")]
        r: Vec<usize>,
        /// zd, zds or both.
        #[arg(long, default_value = "both")]
        formulation: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    /// zd, zds, sv2, sv4, sv6 or sv8.
    #[arg(long)]
    scheme: Scheme,
    #[arg(long = "R", default_value_t = 1)]
    r: usize,
    #[arg(long = "N", default_value_t = 960)]
    n: usize,
    #[arg(long = "T", default_value_t = 100.0)]
    t: f64,
    /// Fixed-point tolerance; backend default when omitted.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// double or ddouble.
    #[arg(long, default_value = "double")]
    precision: Precision,
    #[arg(long)]
    project_lrl: bool,
    /// Keep blocks that hit --max-iter instead of failing.
    #[arg(long)]
    accept_unconverged: bool,
    /// Store every k-th node.
    #[arg(long)]
    decimation: Option<usize>,
    /// all or block-ends.
    #[arg(long, default_value = "all")]
    sampling: Sampling,
    /// absolute or relative.
    #[arg(long, default_value = "absolute")]
    energy_norm: EnergyNorm,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full configuration as JSON.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            precision: self.precision,
            project_lrl: self.project_lrl,
            accept_unconverged: self.accept_unconverged,
            decimation: self.decimation,
            sampling: self.sampling,
            energy_norm: self.energy_norm,
            out: self.out.clone(),
            ..RunConfig::new(&self.problem, self.scheme, self.r, self.n, self.t)
        }
    }

    fn write_manifest(&self, config: &RunConfig, extra: serde_json::Value) -> anyhow::Result<()> {
        if let Some(path) = &self.manifest {
            let mut v = serde_json::to_value(config)?;
            if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
                obj.extend(more);
            }
            std::fs::write(path, serde_json::to_string_pretty(&v)? + "\n")
                .with_context(|| format!("writing manifest {}", path.display()))?;
        }
        Ok(())
    }
}

enum Failure {
    Config(String),
    Solver(String),
    Other(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else if matches!(e, HarnessError::Io(_) | HarnessError::Csv(_)) {
            Failure::Other(e.into())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn stdout_or_nothing(out: &Option<PathBuf>) -> Option<std::io::StdoutLock<'static>> {
    out.is_none().then(|| std::io::stdout().lock())
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run(args) => {
            let config = args.config();
            args.write_manifest(&config, serde_json::json!({}))?;
            let report = harness::run(&config)?;
            if let Some(w) = stdout_or_nothing(&config.out) {
                let row = SweepRow { n: config.n, dt: config.dt(), outcome: Ok(report.clone()), orders: [None; 4] };
                harness::write_sweep_csv(&config, &[row], w)?;
            }
            log::info!("{}: {} sweeps, {} PE1 calls", config.label(), report.total_iter, report.pe1_calls);
        }
        Command::Sweep { run, ns } => {
            let config = run.config();
            run.write_manifest(&config, serde_json::json!({ "Ns": ns }))?;
            let rows = harness::sweep(&config, &ns)?;
            if let Some(w) = stdout_or_nothing(&config.out) {
                harness::write_sweep_csv(&config, &rows, w)?;
            }
            if let Some(msg) = rows.iter().find_map(|r| r.outcome.as_ref().err()) {
                return Err(Failure::Solver(msg.clone()));
            }
        }
        Command::Drift { run, quantity, samples } => {
            let config = RunConfig { out: None, ..run.config() };
            run.write_manifest(&config, serde_json::json!({ "quantity": quantity.to_string(), "samples": samples }))?;
            let series = harness::drift_series(&config, quantity, samples)?;
            match &run.out {
                Some(path) => harness::write_drift_csv(&series, std::fs::File::create(path).map_err(HarnessError::from)?)?,
                None => harness::write_drift_csv(&series, std::io::stdout().lock())?,
            }
        }
        Command::Coeffs { r, formulation, out } => {
            let forms = match formulation.as_str() {
                "zd" => vec![Formulation::Zd],
                "zds" => vec![Formulation::Zds],
                "both" => vec![Formulation::Zd, Formulation::Zds],
                other => return Err(Failure::Config(format!("unknown formulation `{other}`"))),
            };
            let entries: Vec<_> = forms.iter().flat_map(|&f| r.iter().map(move |&r| (f, r))).collect();
            match &out {
                Some(path) => harness::write_coeffs_csv(&entries, std::fs::File::create(path).map_err(HarnessError::from)?)?,
                None => harness::write_coeffs_csv(&entries, std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Config(m) => (2, m),
                Failure::Solver(m) => (3, m),
                Failure::Other(e) => (1, format!("{e:#}")),
            };
            let _ = writeln!(std::io::stderr(), "error: {msg}");
            ExitCode::from(code)
        }
    }
}
