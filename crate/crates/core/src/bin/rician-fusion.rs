//! Command-line front end: scenario generation, sweeps, ROC data and the verification suite.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rician_fusion::config::ScenarioFile;
use rician_fusion::montecarlo::{
    evaluator_at, parse_rules, roc_curve, sweep, with_threads, write_sweep_csv, FrozenScenario, SweepRow,
    SweepSpec,
};
use rician_fusion::scenario::{db_to_linear, linear_to_db, DeploymentConfig, JammerPreset, WsnPreset};
use rician_fusion::verify::{run_suite, SuiteOptions};
use rician_fusion::FusionError;

#[derive(Parser, Debug)]
#[command(name = "rician-fusion", version, about = "Decision fusion over Rician MAC channels: simulation and checks")]
struct Cli {
    /// Worker threads for Monte Carlo loops (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a deployment and write it as a frozen scenario file.
    Generate(GenerateArgs),
    /// Sweep rules over noise-power and antenna grids and write the result table.
    Run(RunArgs),
    /// Run the equivalence and oracle checks.
    Verify(VerifyArgs),
    /// Emit ROC points for a set of rules at one operating point.
    Roc(RocArgs),
}

#[derive(Args, Debug, Clone)]
struct DeploymentArgs {
    /// Number of sensors.
    #[arg(long, default_value_t = 14)]
    k: usize,
    /// Jammer rank (number of emitters).
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Local detection probability of every sensor.
    #[arg(long, default_value_t = 0.5)]
    pd: f64,
    /// Local false-alarm probability of every sensor.
    #[arg(long, default_value_t = 0.05)]
    pf: f64,
    /// Seed for deployment and Monte Carlo streams.
    #[arg(long, env = "RICIAN_FUSION_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// WSN Rician preset: los, intermediate or nlos.
    #[arg(long, default_value = "los")]
    preset: String,
    /// Jammer preset: none, los-jam or weak-los-jam.
    #[arg(long, default_value = "none")]
    jammer: String,
    /// Antennas at the fusion center.
    #[arg(long, default_value_t = 6)]
    n: usize,
    /// Receiver noise power in dBm.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    sigma_w2_dbm: f64,
    #[command(flatten)]
    deployment: DeploymentArgs,
    /// Output file; the scenario goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario file; overrides the preset options.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Comma-separated WSN presets.
    #[arg(long, default_value = "los")]
    preset: String,
    /// Comma-separated jammer presets.
    #[arg(long, default_value = "none")]
    jammer: String,
    /// Comma-separated rule ids.
    #[arg(long)]
    rules: String,
    /// Noise-power grid in dBm: `start:step:stop` or a comma list.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    sigma_grid: String,
    /// Comma-separated antenna counts.
    #[arg(long, default_value = "6")]
    n: String,
    /// Target system false-alarm probability.
    #[arg(long, default_value_t = 0.01)]
    pf0: f64,
    /// Monte Carlo trials per calibration, validation and detection stream.
    #[arg(long, default_value_t = 20_000)]
    trials: usize,
    #[command(flatten)]
    deployment: DeploymentArgs,
    /// Result CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-rule Pd0 series files.
    #[arg(long)]
    series_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "nlos")]
    preset: String,
    #[arg(long, default_value = "none")]
    jammer: String,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    sigma_w2_dbm: f64,
    /// Trials per hypothesis for each equivalence check.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Perfect sensors: P_D = 1, P_F = 0.
    #[arg(long)]
    is_assumption: bool,
    #[command(flatten)]
    deployment: DeploymentArgs,
}

#[derive(Args, Debug)]
struct RocArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "los")]
    preset: String,
    #[arg(long, default_value = "none")]
    jammer: String,
    #[arg(long)]
    rules: String,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    sigma_w2_dbm: f64,
    /// Comma-separated target false-alarm levels.
    #[arg(long, default_value = "0.001,0.002,0.005,0.01,0.02,0.05,0.1,0.2,0.5")]
    pf0_grid: String,
    #[arg(long, default_value_t = 20_000)]
    trials: usize,
    #[command(flatten)]
    deployment: DeploymentArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Check,
    Usage(String),
    Io(String),
    Runtime(String),
}

impl From<FusionError> for Failure {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::Io(e) => Failure::Io(e.to_string()),
            FusionError::Numerical(m) => Failure::Runtime(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn parse_wsn_preset(s: &str) -> CliResult<WsnPreset> {
    WsnPreset::parse(s).map_or_else(|| usage(format!("unknown preset '{s}'; valid: los, intermediate, nlos")), Ok)
}

fn parse_jammer_preset(s: &str) -> CliResult<JammerPreset> {
    JammerPreset::parse(s)
        .map_or_else(|| usage(format!("unknown jammer preset '{s}'; valid: none, los-jam, weak-los-jam")), Ok)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    let out: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().or_else(|_| usage(format!("invalid {what} value '{t}'"))))
        .collect::<CliResult<_>>()?;
    if out.is_empty() {
        return usage(format!("{what} list is empty"));
    }
    Ok(out)
}

/// `start:step:stop` (inclusive) or a comma list, in dBm.
fn parse_sigma_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return parse_list(s, "sigma grid");
    }
    if parts.len() != 3 {
        return usage(format!("sigma grid '{s}' must be start:step:stop"));
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().or_else(|_| usage(format!("invalid sigma grid value '{p}'"))))
        .collect::<CliResult<_>>()?;
    let (start, step, stop) = (v[0], v[1], v[2]);
    if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
        return usage(format!("sigma grid '{s}' needs step > 0 and start <= stop"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

fn deployment(args: &DeploymentArgs, wsn: WsnPreset, jammer: JammerPreset, n: usize, sigma_dbm: f64) -> DeploymentConfig {
    let mut cfg = DeploymentConfig::preset(wsn, jammer, args.k, n, args.seed);
    cfg.pd = args.pd;
    cfg.pf = args.pf;
    cfg.noise_power = db_to_linear(sigma_dbm);
    if let Some(j) = cfg.jammer.as_mut() {
        j.rank = args.r;
    }
    cfg
}

/// Frozen scenarios for every (preset, jammer) pair, or the one stored in a file.
fn frozen_scenarios(
    file: Option<&Path>,
    presets: &str,
    jammers: &str,
    args: &DeploymentArgs,
    n: usize,
) -> CliResult<Vec<FrozenScenario>> {
    if let Some(path) = file {
        return Ok(vec![ScenarioFile::load(path)?.frozen_scenario()?]);
    }
    let mut out = Vec::new();
    for p in parse_list::<String>(presets, "preset")? {
        let wp = parse_wsn_preset(&p)?;
        for j in parse_list::<String>(jammers, "jammer preset")? {
            let jp = parse_jammer_preset(&j)?;
            let file = ScenarioFile::from_preset(wp, jp, deployment(args, wp, jp, n, 0.0)).frozen()?;
            out.push(file.frozen_scenario()?);
        }
    }
    Ok(out)
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_generate(a: &GenerateArgs) -> CliResult<()> {
    let wp = parse_wsn_preset(&a.preset)?;
    let jp = parse_jammer_preset(&a.jammer)?;
    let file = ScenarioFile::from_preset(wp, jp, deployment(&a.deployment, wp, jp, a.n, a.sigma_w2_dbm)).frozen()?;
    let text = file.to_toml()?;
    let (wsn, jammer) = file.scenarios()?;
    let mut table = String::from("sensor  theta_deg  beta_dbm  los_power_dbm  kappa_db\n");
    for (k, s) in wsn.sensors().iter().enumerate() {
        table.push_str(&format!(
            "{:>6}  {:>9.2}  {:>8.2}  {:>13.2}  {:>8.2}\n",
            k + 1,
            s.theta.to_degrees(),
            linear_to_db(s.beta),
            linear_to_db(s.los_power()),
            linear_to_db(s.kappa)
        ));
    }
    if let Some(j) = &jammer {
        table.push_str("jammer  phi_deg    beta_dbm  los_power_dbm  kappa_db\n");
        for (l, e) in j.emitters().iter().enumerate() {
            table.push_str(&format!(
                "{:>6}  {:>9.2}  {:>8.2}  {:>13.2}  {:>8.2}\n",
                l + 1,
                e.phi.map_or(f64::NAN, f64::to_degrees),
                linear_to_db(e.beta),
                linear_to_db(e.los_gain().powi(2) * e.beta),
                linear_to_db(e.kappa)
            ));
        }
    }
    match &a.out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            print!("{table}");
        }
        None => {
            print!("{text}");
            eprint!("{table}");
        }
    }
    Ok(())
}

fn write_series(dir: &Path, rows: &[SweepRow]) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut groups: std::collections::BTreeMap<String, Vec<String>> = Default::default();
    for r in rows {
        let base = format!("{}_{}_{}", r.preset, r.jammer, r.rule);
        groups
            .entry(format!("{base}_n{}.csv", r.n_antennas))
            .or_insert_with(|| vec!["sigma_w2_dbm,pd0,pd0_stderr".into()])
            .push(format!("{},{},{}", r.sigma_w2_dbm, r.pd0, r.pd0_stderr));
        groups
            .entry(format!("{base}_sigma{}.csv", r.sigma_w2_dbm))
            .or_insert_with(|| vec!["n_antennas,pd0,pd0_stderr".into()])
            .push(format!("{},{},{}", r.n_antennas, r.pd0, r.pd0_stderr));
    }
    for (name, lines) in groups {
        let path = dir.join(name);
        std::fs::write(&path, lines.join("\n") + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_run(a: &RunArgs, threads: usize) -> CliResult<()> {
    let rules = parse_rules(&a.rules)?;
    let sigma = parse_sigma_grid(&a.sigma_grid)?;
    let ns: Vec<usize> = parse_list(&a.n, "antenna")?;
    let n_max = *ns.iter().max().expect("non-empty list");
    let scenarios = frozen_scenarios(a.scenario.as_deref(), &a.preset, &a.jammer, &a.deployment, n_max)?;
    for s in &scenarios {
        for &rule in &rules {
            if rule.requires_jammer() && s.jammer.is_none() {
                return usage(format!("rule '{rule}' needs a jammer preset other than 'none'"));
            }
        }
        for &n in &ns {
            evaluator_at(s, n, sigma[0])?;
        }
    }
    let spec = SweepSpec {
        scenarios,
        rules,
        sigma_w2_dbm: sigma,
        n_antennas: ns,
        target_pf0: a.pf0,
        trials: a.trials,
        seed: a.deployment.seed,
    };
    let rows = with_threads(threads, || sweep(&spec))??;
    let mut out = open_output(a.out.as_deref())?;
    write_sweep_csv(&mut out, &rows)?;
    out.flush()?;
    if let Some(dir) = &a.series_dir {
        write_series(dir, &rows)?;
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, threads: usize) -> CliResult<()> {
    let (wsn, jammer) = match &a.scenario {
        Some(p) => ScenarioFile::load(p)?.scenarios()?,
        None => {
            let wp = parse_wsn_preset(&a.preset)?;
            let jp = parse_jammer_preset(&a.jammer)?;
            ScenarioFile::from_preset(wp, jp, deployment(&a.deployment, wp, jp, a.n, a.sigma_w2_dbm)).scenarios()?
        }
    };
    let opts = SuiteOptions {
        trials: a.trials,
        seed: a.deployment.seed,
        is_assumption: a.is_assumption,
    };
    let checks = with_threads(threads, || run_suite(&wsn, jammer.as_ref(), &opts))??;
    let mut out = io::stdout().lock();
    for c in &checks {
        writeln!(out, "{c}")?;
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cmd_roc(a: &RocArgs, threads: usize) -> CliResult<()> {
    let rules = parse_rules(&a.rules)?;
    let grid: Vec<f64> = parse_list(&a.pf0_grid, "pf0 grid")?;
    let scenarios = frozen_scenarios(a.scenario.as_deref(), &a.preset, &a.jammer, &a.deployment, a.n)?;
    let mut out = open_output(a.out.as_deref())?;
    writeln!(out, "preset,jammer,rule,sigma_w2_dbm,n_antennas,target_pf0,pf0,pd0,trials,seed")?;
    for s in &scenarios {
        if let Some(rule) = rules.iter().find(|r| r.requires_jammer() && s.jammer.is_none()) {
            return usage(format!("rule '{rule}' needs a jammer preset other than 'none'"));
        }
        let eval = evaluator_at(s, a.n, a.sigma_w2_dbm)?;
        let points = with_threads(threads, || roc_curve(&eval, &rules, &grid, a.trials, a.deployment.seed))??;
        for p in points {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                s.preset, s.jammer_preset, p.rule, a.sigma_w2_dbm, a.n, p.target_pf0, p.pf0, p.pd0, a.trials, a.deployment.seed
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a, cli.threads),
        Command::Verify(a) => cmd_verify(a, cli.threads),
        Command::Roc(a) => cmd_roc(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
