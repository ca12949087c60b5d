//! Command-line front end.
//!
//! Every subcommand accepts an optional flat `key = value` config file whose
//! keys are the long flag names; flags given on the command line win. The
//! process exits with 0 on success, 1 on a usage or input error and 2 when a
//! verification fails.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::distributions::TypeDistribution;
use crate::equilibrium::closed_form_probability;
use crate::error::{Error, Result};
use crate::oracle::{
    build_discrete_game_with_types, format_violations, verify_all, ViolationKind, DEFAULT_TYPE_NODES,
};
use crate::output::{human, machine};
use crate::simulator::{
    write_trajectories_csv, GameConfig, InitialStatusQuo, ProposerMode, SimulationReport, Simulator,
    VoterMode,
};
use crate::thresholds::{solve_thresholds, two_round_condition};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VERIFY_FAILED: u8 = 2;

/// Violation lines shown in a text report before truncating.
const TEXT_VIOLATION_LIMIT: usize = 40;

#[derive(Debug, Parser)]
#[command(name = "vrp", version, about = "Voting with random proposers: thresholds, simulation and verification")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for the flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for simulation and the oracle.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Machine-readable output; a human summary is printed when absent.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Median, thresholds, admissibility and the two-round condition.
    Thresholds(DistArgs),
    /// Monte Carlo estimate of the probability of ending at the median.
    Simulate(SimulateArgs),
    /// Closed-form (and optionally simulated) probability for T = 2..Tmax.
    Sweep(SweepArgs),
    /// Discretised backward-induction check of the analytic equilibrium.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// uniform | beta:A,B | tnormal:MU,SIGMA | tlogistic:MU,S | empirical:PATH[,EPS]
    #[arg(value_name = "DIST")]
    pub dist_pos: Option<String>,
    /// Same as DIST.
    #[arg(long = "dist", value_name = "SPEC")]
    pub dist: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Number of voting rounds [default: 2].
    #[arg(long = "T", value_name = "ROUNDS")]
    pub rounds: Option<u32>,
    /// Initial status quo: a number, or `LO:HI` to draw it uniformly per
    /// replication. Defaults to the end of [0, 1] opposite the long tail.
    #[arg(long, value_name = "Q")]
    pub q1: Option<String>,
    /// Replications [default: 10000].
    #[arg(long, value_name = "N")]
    pub reps: Option<u64>,
    /// Base seed; replication r uses stream r of this seed [default: 0].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Voting rule in intermediate rounds [default: sophisticated].
    #[arg(long, value_enum)]
    pub voters: Option<VoterArg>,
    /// Equilibrium proposals, or every proposer offering its own peak
    /// [default: equilibrium].
    #[arg(long, value_enum)]
    pub proposers: Option<ProposerArg>,
    /// Also write every trajectory as CSV.
    #[arg(long = "dump-trajectories", value_name = "PATH")]
    pub dump_trajectories: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Largest number of rounds [default: 5].
    #[arg(long = "Tmax", value_name = "ROUNDS")]
    pub t_max: Option<u32>,
    /// Add a Monte Carlo column with this many replications per T.
    #[arg(long, value_name = "N")]
    pub reps: Option<u64>,
    /// Base seed for the Monte Carlo column [default: 0].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Grid points for alternatives on [0, 1] [default: 201].
    #[arg(long = "N", value_name = "GRID")]
    pub n: Option<usize>,
    /// Voters in the quantile panel; must be odd [default: 1001].
    #[arg(long = "M", value_name = "PANEL")]
    pub m: Option<usize>,
    /// Proposer type nodes for expectations [default: 401].
    #[arg(long = "K", value_name = "TYPES")]
    pub k: Option<usize>,
    /// Number of voting rounds [default: 2].
    #[arg(long = "T", value_name = "ROUNDS")]
    pub rounds: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VoterArg {
    Sophisticated,
    Myopic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProposerArg {
    Equilibrium,
    Naive,
}

/// Parsed config file.
#[derive(Debug, Default)]
struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("{}:{}: expected `key = value`", path.display(), lineno + 1))
            })?;
            let key = k.trim().trim_start_matches("--").to_string();
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::InvalidArgument(format!("{}: key `{key}` given twice", path.display())));
            }
        }
        Ok(ConfigFile { entries })
    }

    /// Rejects any key outside `allowed`.
    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidArgument(format!(
                "unknown config key `{k}` (expected one of: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidArgument(format!("config key `{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    fn get_raw(&self, key: &str) -> Option<String> {
        self.entries.get(key).cloned()
    }
}

const COMMON_KEYS: [&str; 5] = ["dist", "threads", "format", "out", "config"];

fn keys(extra: &[&'static str]) -> Vec<&'static str> {
    COMMON_KEYS.iter().copied().chain(extra.iter().copied()).collect()
}

/// Global settings after merging the config file.
struct Common {
    format: Option<Format>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn resolve_dist(args: &DistArgs, cfg: &ConfigFile) -> Result<TypeDistribution> {
    let spec = match (&args.dist_pos, &args.dist) {
        (Some(a), Some(b)) if a != b => return Err(usage(format!("distribution given twice: `{a}` and `{b}`"))),
        (Some(a), _) => a.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => cfg.get_raw("dist").ok_or_else(|| usage("no distribution given (use DIST or --dist)"))?,
    };
    TypeDistribution::parse(&spec)
}

fn parse_q1(s: &str) -> Result<InitialStatusQuo> {
    let bad = || usage(format!("cannot parse q1 `{s}`; expected a number or LO:HI"));
    match s.split_once(':') {
        Some((a, b)) => Ok(InitialStatusQuo::Uniform {
            lo: a.trim().parse().map_err(|_| bad())?,
            hi: b.trim().parse().map_err(|_| bad())?,
        }),
        None => Ok(InitialStatusQuo::Fixed(s.trim().parse().map_err(|_| bad())?)),
    }
}

fn parse_format(s: &str) -> Result<Format> {
    Format::from_str(s, true).map_err(|_| usage(format!("unknown format `{s}` (csv or json)")))
}

fn parse_enum<T: ValueEnum>(key: &str, s: &str) -> Result<T> {
    T::from_str(s, true).map_err(|_| usage(format!("config key `{key}`: unknown value `{s}`")))
}

/// Outcome of a subcommand: the rendered report and whether it passed.
struct Rendered {
    body: String,
    passed: bool,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Reports go to `stdout` unless `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match dispatch(cli) {
        Ok((rendered, out)) => {
            let written = match out {
                Some(path) => fs::write(&path, &rendered.body).map_err(|source| Error::Io { path, source }),
                None => stdout.write_all(rendered.body.as_bytes()).map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                }),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
            if rendered.passed {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(Rendered, Option<PathBuf>)> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let common = Common {
        format: match cli.format {
            Some(f) => Some(f),
            None => cfg.get_raw("format").map(|s| parse_format(&s)).transpose()?,
        },
        out: cli.out.clone().or(cfg.get::<PathBuf>("out")?),
        threads: cli.threads.or(cfg.get("threads")?),
    };
    if common.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("cannot build thread pool: {e}")))?;

    let rendered = pool.install(|| match &cli.command {
        Command::Thresholds(a) => {
            cfg.check_keys(&keys(&[]))?;
            cmd_thresholds(&resolve_dist(a, &cfg)?, common.format)
        }
        Command::Simulate(a) => {
            cfg.check_keys(&keys(&["T", "q1", "reps", "seed", "voters", "proposers", "dump-trajectories"]))?;
            cmd_simulate(a, &cfg, common.format)
        }
        Command::Sweep(a) => {
            cfg.check_keys(&keys(&["Tmax", "reps", "seed"]))?;
            cmd_sweep(a, &cfg, common.format)
        }
        Command::Verify(a) => {
            cfg.check_keys(&keys(&["N", "M", "K", "T"]))?;
            cmd_verify(a, &cfg, common.format)
        }
    })?;
    Ok((rendered, common.out))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::InvalidArgument(format!("cannot serialise report: {e}")))
}

#[derive(Serialize)]
struct ThresholdsOutput {
    distribution: String,
    thresholds: crate::thresholds::EquilibriumThresholds,
    admissibility: crate::distributions::AdmissibilityReport,
    two_round: crate::thresholds::TwoRoundCertificate,
    /// `F(θ̲)` or `1 - F(θ̄)`, the per-round chance of an own-type proposal.
    own_type_mass: f64,
}

fn cmd_thresholds(d: &TypeDistribution, format: Option<Format>) -> Result<Rendered> {
    let admissibility = d.check_admissibility();
    let thresholds = solve_thresholds(d)?;
    let two_round = two_round_condition(d);
    let o = ThresholdsOutput {
        distribution: d.to_string(),
        thresholds,
        admissibility,
        two_round,
        own_type_mass: thresholds.own_type_mass(d),
    };
    let body = match format {
        Some(Format::Json) => json(&o)?,
        Some(Format::Csv) => {
            let t = &o.thresholds;
            format!(
                "distribution,theta_mu,theta_lower,theta_upper,lower_root_found,upper_root_found,\
                 mean,variance,admissibility_integral,admissible,two_round_lhs,two_round_rhs,\
                 two_round_holds,own_type_mass\n{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                csv_field(&o.distribution),
                machine(t.theta_mu),
                machine(t.theta_lower),
                machine(t.theta_upper),
                t.lower_root_found,
                t.upper_root_found,
                machine(o.admissibility.mean),
                machine(o.admissibility.variance),
                machine(o.admissibility.integral_value),
                o.admissibility.admissible,
                machine(o.two_round.lhs_variance),
                machine(o.two_round.rhs),
                o.two_round.holds,
                machine(o.own_type_mass),
            )
        }
        None => {
            let t = &o.thresholds;
            let flag = |found: bool| if found { "" } else { " (no interior root)" };
            let mass_label = if t.theta_mu >= 0.5 { "F(lower)" } else { "1 - F(upper)" };
            format!(
                "distribution    {}\nmedian          {}\nlower threshold {}{}\nupper threshold {}{}\n\
                 mean            {}\nvariance        {}\nadmissible      {} (integral {})\n\
                 two rounds      {} (variance {} vs {})\n{mass_label:<15} {}\n",
                o.distribution,
                human(t.theta_mu),
                human(t.theta_lower),
                flag(t.lower_root_found),
                human(t.theta_upper),
                flag(t.upper_root_found),
                human(o.admissibility.mean),
                human(o.admissibility.variance),
                o.admissibility.admissible,
                human(o.admissibility.integral_value),
                if o.two_round.holds { "suffice" } else { "do not suffice" },
                human(o.two_round.lhs_variance),
                human(o.two_round.rhs),
                human(o.own_type_mass),
            )
        }
    };
    Ok(Rendered { body, passed: true })
}

fn build_game_config(a: &SimulateArgs, cfg: &ConfigFile) -> Result<GameConfig> {
    let d = resolve_dist(&a.dist, cfg)?;
    let rounds = a.rounds.or(cfg.get("T")?).unwrap_or(2);
    let reps = a.reps.or(cfg.get("reps")?).unwrap_or(10_000);
    let seed = a.seed.or(cfg.get("seed")?).unwrap_or(0);
    let mut gc = GameConfig::new(d, rounds, seed, reps);
    if let Some(q) = a.q1.clone().or(cfg.get_raw("q1")) {
        gc.initial_status_quo = parse_q1(&q)?;
    }
    let voters = match (a.voters, cfg.get_raw("voters")) {
        (Some(v), _) => Some(v),
        (None, Some(s)) => Some(parse_enum::<VoterArg>("voters", &s)?),
        _ => None,
    };
    if let Some(v) = voters {
        gc.voter_mode = match v {
            VoterArg::Sophisticated => VoterMode::Sophisticated,
            VoterArg::Myopic => VoterMode::Myopic,
        };
    }
    let proposers = match (a.proposers, cfg.get_raw("proposers")) {
        (Some(p), _) => Some(p),
        (None, Some(s)) => Some(parse_enum::<ProposerArg>("proposers", &s)?),
        _ => None,
    };
    if let Some(p) = proposers {
        gc.proposer_mode = match p {
            ProposerArg::Equilibrium => ProposerMode::Equilibrium,
            ProposerArg::Naive => ProposerMode::OwnPeakNaive,
        };
    }
    gc.validate()?;
    Ok(gc)
}

fn q1_label(q: &InitialStatusQuo) -> String {
    match *q {
        InitialStatusQuo::Fixed(x) => machine(x),
        InitialStatusQuo::Uniform { lo, hi } => format!("{}:{}", machine(lo), machine(hi)),
    }
}

/// Quotes a CSV field that would otherwise split, e.g. `beta:4,2`.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_machine(x: Option<f64>) -> String {
    x.map(machine).unwrap_or_default()
}

fn simulation_csv(r: &SimulationReport) -> String {
    let c = &r.config;
    format!(
        "distribution,rounds,q1,voter_mode,proposer_mode,seed,replications,theta_mu,p_hat,standard_error,\
         closed_form,z_score,mean_final_distance_to_median,successes\n\
         {},{},{},{:?},{:?},{},{},{},{},{},{},{},{},{}\n",
        csv_field(&c.distribution),
        c.rounds,
        q1_label(&c.initial_status_quo),
        c.voter_mode,
        c.proposer_mode,
        c.seed,
        c.replications,
        machine(r.theta_mu),
        machine(r.p_hat),
        machine(r.standard_error),
        opt_machine(r.closed_form),
        opt_machine(r.z_score),
        machine(r.mean_final_distance_to_median),
        r.successes
    )
}

fn cmd_simulate(a: &SimulateArgs, cfg: &ConfigFile, format: Option<Format>) -> Result<Rendered> {
    let gc = build_game_config(a, cfg)?;
    let sim = Simulator::new(gc)?;
    let report = sim.monte_carlo();

    if let Some(path) = a.dump_trajectories.clone().or(cfg.get::<PathBuf>("dump-trajectories")?) {
        let file = fs::File::create(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
        let mut w = std::io::BufWriter::new(file);
        let n = sim.config().replications;
        let mut start = 0;
        while start < n {
            let end = (start + 4096).min(n);
            let batch: Vec<_> = (start..end).map(|r| sim.trajectory(r)).collect();
            // the header goes out once, with the first batch
            if start == 0 {
                write_trajectories_csv(&mut w, &batch)
            } else {
                let mut buf = Vec::new();
                write_trajectories_csv(&mut buf, &batch).and_then(|_| {
                    let text = String::from_utf8_lossy(&buf);
                    let rows = text.split_once('\n').map(|x| x.1).unwrap_or("");
                    w.write_all(rows.as_bytes())
                })
            }
            .map_err(|source| Error::Io { path: path.clone(), source })?;
            start = end;
        }
        w.flush().map_err(|source| Error::Io { path: path.clone(), source })?;
    }

    let body = match format {
        Some(Format::Json) => json(&report)?,
        Some(Format::Csv) => simulation_csv(&report),
        None => {
            let c = &report.config;
            let mut s = format!(
                "distribution    {}\nrounds          {}\nq1              {}\nreplications    {} (seed {})\n\
                 median          {}\nestimate        {} ± {}\n",
                c.distribution,
                c.rounds,
                q1_label(&c.initial_status_quo),
                c.replications,
                c.seed,
                human(report.theta_mu),
                human(report.p_hat),
                human(report.standard_error),
            );
            match report.closed_form {
                Some(p) => s += &format!("closed form     {}\n", human(p)),
                None => s += "closed form     n/a (single round)\n",
            }
            if let Some(z) = report.z_score {
                s += &format!("z score         {}\n", human(z));
            }
            s += &format!("mean |w - med|  {}\n", human(report.mean_final_distance_to_median));
            s
        }
    };
    Ok(Rendered { body, passed: true })
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "T")]
    t: u32,
    closed_form: f64,
    monte_carlo: Option<f64>,
    stderr: Option<f64>,
}

fn cmd_sweep(a: &SweepArgs, cfg: &ConfigFile, format: Option<Format>) -> Result<Rendered> {
    let d = resolve_dist(&a.dist, cfg)?;
    let t_max = a.t_max.or(cfg.get("Tmax")?).unwrap_or(5);
    if t_max < 2 {
        return Err(usage(format!("--Tmax must be at least 2, got {t_max}")));
    }
    let reps = a.reps.or(cfg.get("reps")?);
    let seed = a.seed.or(cfg.get("seed")?).unwrap_or(0);
    let th = solve_thresholds(&d)?;
    let mut rows = Vec::new();
    for t in 2..=t_max {
        let closed_form = closed_form_probability(&d, &th, t)?;
        let (monte_carlo, stderr) = match reps {
            Some(n) => {
                let rep = Simulator::new(GameConfig::new(d.clone(), t, seed, n))?.monte_carlo();
                (Some(rep.p_hat), Some(rep.standard_error))
            }
            None => (None, None),
        };
        rows.push(SweepRow { t, closed_form, monte_carlo, stderr });
    }
    let body = match format {
        Some(Format::Json) => json(&rows)?,
        Some(Format::Csv) => {
            let mut s = String::from("T,closed_form,monte_carlo,stderr\n");
            for r in &rows {
                s += &format!("{},{},{},{}\n", r.t, machine(r.closed_form), opt_machine(r.monte_carlo), opt_machine(r.stderr));
            }
            s
        }
        None => {
            let mut s = format!("{d}\n{:>4}  {:>12}  {:>12}  {:>12}\n", "T", "closed form", "simulated", "std err");
            for r in &rows {
                let opt = |x: Option<f64>| x.map(human).unwrap_or_else(|| "-".into());
                s += &format!(
                    "{:>4}  {:>12}  {:>12}  {:>12}\n",
                    r.t,
                    human(r.closed_form),
                    opt(r.monte_carlo),
                    opt(r.stderr)
                );
            }
            s
        }
    };
    Ok(Rendered { body, passed: true })
}

fn cmd_verify(a: &VerifyArgs, cfg: &ConfigFile, format: Option<Format>) -> Result<Rendered> {
    let d = resolve_dist(&a.dist, cfg)?;
    let n = a.n.or(cfg.get("N")?).unwrap_or(201);
    let m = a.m.or(cfg.get("M")?).unwrap_or(1001);
    let k = a.k.or(cfg.get("K")?).unwrap_or(DEFAULT_TYPE_NODES);
    let rounds = a.rounds.or(cfg.get("T")?).unwrap_or(2);
    let th = solve_thresholds(&d)?;
    let g = build_discrete_game_with_types(&d, n, m, rounds, k)?;
    let s = verify_all(&g, &th)?;
    let passed = s.passed();

    let mut violations = s.winners.violations.clone();
    violations.extend(s.final_round.mismatches.iter().copied());
    let body = match format {
        Some(Format::Json) => json(&s)?,
        Some(Format::Csv) => format_violations(&violations),
        None => {
            let sp = &s.strategy_proofness;
            let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
            let mut out = format!(
                "distribution        {d}\ngame                N={n} M={m} K={k} T={rounds}\n\
                 intermediate rounds {} ({} cells checked, {} in indifference band, {} violations, \
                 max deviation {})\n\
                 by kind             proposer-side outcome {}, median snapping {}, other {}\n\
                 final round         {} ({} mismatches)\n\
                 strategy-proofness  {} (max proposer gain {}, max voter gain {})\n\
                 sign scan           {}\nin-bound scan       {}\n",
                verdict(s.winners.passed()),
                s.winners.checked,
                s.winners.excluded,
                s.winners.violations.len(),
                human(s.winners.max_deviation),
                s.winners.count(ViolationKind::ProposerSideOutcome),
                s.winners.count(ViolationKind::MedianSnapping),
                s.winners.count(ViolationKind::Other),
                verdict(s.final_round.passed()),
                s.final_round.mismatches.len(),
                verdict(sp.passed()),
                human(sp.max_proposer_gain),
                human(sp.max_voter_gain),
                verdict(s.sign_scan),
                verdict(s.in_bound_scan),
            );
            if !violations.is_empty() {
                let shown = &violations[..violations.len().min(TEXT_VIOLATION_LIMIT)];
                out += &format_violations(shown);
                if violations.len() > shown.len() {
                    out += &format!("... {} more (use --format csv for all)\n", violations.len() - shown.len());
                }
            }
            out += if passed { "result              pass\n" } else { "result              FAIL\n" };
            out
        }
    };
    Ok(Rendered { body, passed })
}
