//! Command-line front end: tables of exact stopping-time statistics,
//! simulated comparisons and two-phase decisions.

pub mod output;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use stoprule::analytics::{cost_ratio, mean_consecutive, mean_total, pmf_for_rule, stats_for_rule};
use stoprule::decision::{
    phase1_decide, phase2_cost_ratio, phase2_within_threshold, plan_for_profile, Verdict,
};
use stoprule::model::MAX_M;
use stoprule::montecarlo::{convergence_trace, run_experiment, ExperimentConfig, DEFAULT_EPISODES};
use stoprule::{CriticalityProfile, DecisionThresholds, Environment, RuleKind, RuleSpec};

pub use output::{Cell, Format, Style, Table};

/// Master seed used when neither `--seed` nor `STOPRULE_SEED` is given.
pub const DEFAULT_SEED: u64 = 1729;

/// `(m, p)` cells of the published comparison table.
pub const TABLE3_CELLS: [(u32, f64); 12] = [
    (3, 0.6),
    (3, 0.75),
    (3, 0.9),
    (5, 0.6),
    (5, 0.75),
    (5, 0.9),
    (7, 0.6),
    (7, 0.75),
    (7, 0.9),
    (10, 0.6),
    (10, 0.75),
    (10, 0.9),
];

#[derive(Debug, Parser)]
#[command(
    name = "stoprule",
    version,
    about = "Stopping-rule statistics, simulation and decisions"
)]
pub struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,

    /// Worker threads for simulations (defaults to all cores). Results do
    /// not depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub threads: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact mean, variance, std and cost ratio of a rule's stopping time.
    Stats(RuleArgs),
    /// Exact stopping-time distribution.
    Pmf(PmfArgs),
    /// Theory versus simulation for every cell of the comparison table.
    Table3(SimArgs),
    /// Running mean of simulated stop times.
    Trace(TraceArgs),
    /// Expected trials of the consecutive and total reward rules against m.
    Fig1(Fig1Args),
    /// Phase plan, cost ratios and the adoption verdict for a profile.
    Decide(DecideArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    ConsecutiveRewards,
    TotalRewards,
    ConsecutivePunishments,
    TotalPunishments,
}

impl From<RuleArg> for RuleKind {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::ConsecutiveRewards => RuleKind::ConsecutiveRewards,
            RuleArg::TotalRewards => RuleKind::TotalRewards,
            RuleArg::ConsecutivePunishments => RuleKind::ConsecutivePunishments,
            RuleArg::TotalPunishments => RuleKind::TotalPunishments,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    MissionCritical,
    #[value(name = "intermediate-level-2")]
    IntermediateLevel2,
    #[value(name = "intermediate-level-1")]
    IntermediateLevel1,
    NonMissionCritical,
}

impl From<ProfileArg> for CriticalityProfile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::MissionCritical => CriticalityProfile::MissionCritical,
            ProfileArg::IntermediateLevel2 => CriticalityProfile::IntermediateLevel2,
            ProfileArg::IntermediateLevel1 => CriticalityProfile::IntermediateLevel1,
            ProfileArg::NonMissionCritical => CriticalityProfile::NonMissionCritical,
        }
    }
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Environment::new(p)
        .map(|e| e.p())
        .map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn parse_tolerance(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= stoprule::analytics::MAX_TOLERANCE {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1e-3], got {v}"))
    }
}

fn count_parser() -> clap::builder::RangedI64ValueParser<u32> {
    clap::value_parser!(u32).range(1..=MAX_M as i64)
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    #[arg(long, value_enum)]
    pub rule: RuleArg,
    /// Required count of matching outcomes.
    #[arg(long, value_parser = count_parser())]
    pub m: u32,
    /// Reward probability per trial, in (0, 1).
    #[arg(long, value_parser = parse_probability)]
    pub p: f64,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Largest probability mass left beyond the last row.
    #[arg(long, default_value_t = 1e-9, value_parser = parse_tolerance)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long, default_value_t = DEFAULT_EPISODES, value_parser = clap::value_parser!(u64).range(1..))]
    pub episodes: u64,
    /// Master seed; overrides `STOPRULE_SEED`.
    #[arg(long, env = "STOPRULE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub seed: SeedArgs,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, value_enum, default_value_t = RuleArg::ConsecutiveRewards)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 5, value_parser = count_parser())]
    pub m: u32,
    #[arg(long, default_value_t = 0.6, value_parser = parse_probability)]
    pub p: f64,
    /// Emit one row every this many episodes (and at the last episode).
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    #[command(flatten)]
    pub seed: SeedArgs,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[arg(long, default_value_t = 0.6, value_parser = parse_probability)]
    pub p: f64,
    #[arg(long = "m-max", default_value_t = 10, value_parser = count_parser())]
    pub m_max: u32,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[arg(long, value_enum)]
    pub profile: ProfileArg,
    /// Phase I count.
    #[arg(long, value_parser = count_parser())]
    pub m: u32,
    /// Phase II count (defaults to `--m`).
    #[arg(long = "m-prime", value_parser = count_parser())]
    pub m_prime: Option<u32>,
    #[arg(long, value_parser = parse_probability)]
    pub p: f64,
    /// Phase I threshold: adopt iff the cost ratio is below it.
    #[arg(long, value_parser = parse_positive)]
    pub h1: f64,
    /// Optional Phase II threshold, reported as a pre-screen only.
    #[arg(long, value_parser = parse_positive)]
    pub h2: Option<f64>,
}

/// Run the parsed command and return its table.
pub fn execute(cli: &Cli) -> Result<Table> {
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build()?;
            pool.install(|| dispatch(&cli.command))
        }
        None => dispatch(&cli.command),
    }
}

fn dispatch(command: &Command) -> Result<Table> {
    match command {
        Command::Stats(a) => cmd_stats(a),
        Command::Pmf(a) => cmd_pmf(a),
        Command::Table3(a) => cmd_table3(&a.seed),
        Command::Trace(a) => cmd_trace(a),
        Command::Fig1(a) => cmd_fig1(a),
        Command::Decide(a) => cmd_decide(a),
    }
}

fn rule_spec(rule: RuleArg, m: u32) -> Result<RuleSpec> {
    Ok(RuleSpec::new(rule.into(), m)?)
}

pub fn cmd_stats(a: &RuleArgs) -> Result<Table> {
    let spec = rule_spec(a.rule, a.m)?;
    let env = Environment::new(a.p)?;
    let stats = stats_for_rule(&spec, &env)?;
    let ratio = cost_ratio(&spec, &env)?;
    let mut t = Table::new(
        "stats",
        vec![
            ("rule", Style::Text),
            ("m", Style::Count),
            ("p", Style::Plain),
            ("mean", Style::Trials),
            ("variance", Style::Trials),
            ("std", Style::Trials),
            ("cost_ratio", Style::Fine),
        ],
    );
    t.push(vec![
        spec.kind().name().into(),
        spec.m().into(),
        env.p().into(),
        stats.mean.into(),
        stats.variance.into(),
        stats.std.into(),
        ratio.value.into(),
    ]);
    Ok(t)
}

pub fn cmd_pmf(a: &PmfArgs) -> Result<Table> {
    let spec = rule_spec(a.rule.rule, a.rule.m)?;
    let env = Environment::new(a.rule.p)?;
    let pmf = pmf_for_rule(&spec, &env, a.tolerance)?;
    let mut t = Table::new(
        "pmf",
        vec![
            ("n", Style::Count),
            ("probability", Style::Sci),
            ("tail", Style::Sci),
        ],
    );
    let mut cumulative = 0.0;
    for (n, prob) in pmf.iter() {
        cumulative += prob;
        t.push(vec![
            n.into(),
            prob.into(),
            (1.0 - cumulative).max(0.0).into(),
        ]);
    }
    t.meta.push(("rule", spec.kind().name().into()));
    t.meta.push(("m", spec.m().into()));
    t.meta.push(("p", env.p().into()));
    t.meta
        .push(("truncation_mass", pmf.truncation_mass().into()));
    Ok(t)
}

fn simulation_columns() -> Vec<(&'static str, Style)> {
    vec![
        ("rule", Style::Text),
        ("m", Style::Count),
        ("p", Style::Plain),
        ("mean_th", Style::Trials),
        ("mean_expt", Style::Trials),
        ("mean_err_pct", Style::Fine),
        ("std_th", Style::Trials),
        ("std_expt", Style::Trials),
        ("std_err_pct", Style::Fine),
        ("seed", Style::Count),
        ("episodes", Style::Count),
    ]
}

/// Both reward rules on every `(m, p)` cell, Rule I before Rule II.
pub fn cmd_table3(a: &SeedArgs) -> Result<Table> {
    let mut t = Table::new("table3", simulation_columns());
    for (m, p) in TABLE3_CELLS {
        let env = Environment::new(p)?;
        for kind in [RuleKind::ConsecutiveRewards, RuleKind::TotalRewards] {
            let spec = RuleSpec::new(kind, m)?;
            let config = ExperimentConfig::new(spec, env, a.episodes, a.seed)?;
            let s = run_experiment(&config)?;
            t.push(vec![
                kind.name().into(),
                m.into(),
                p.into(),
                s.theoretical_mean.into(),
                s.empirical_mean.into(),
                s.err_mean_pct.into(),
                s.theoretical_std.into(),
                s.empirical_std.into(),
                s.err_std_pct.into(),
                s.master_seed.into(),
                s.episodes.into(),
            ]);
        }
    }
    Ok(t)
}

pub fn cmd_trace(a: &TraceArgs) -> Result<Table> {
    let spec = rule_spec(a.rule, a.m)?;
    let env = Environment::new(a.p)?;
    let config = ExperimentConfig::new(spec, env, a.seed.episodes, a.seed.seed)?;
    let trace = convergence_trace(&config, a.stride)?;
    let mut t = Table::new(
        "trace",
        vec![("episode", Style::Count), ("running_mean", Style::Trials)],
    );
    for (n, mean) in trace.points {
        t.push(vec![n.into(), mean.into()]);
    }
    t.meta.push(("rule", spec.kind().name().into()));
    t.meta.push(("m", spec.m().into()));
    t.meta.push(("p", env.p().into()));
    t.meta.push(("seed", a.seed.seed.into()));
    Ok(t)
}

pub fn cmd_fig1(a: &Fig1Args) -> Result<Table> {
    let env = Environment::new(a.p)?;
    let mut t = Table::new(
        "fig1",
        vec![
            ("m", Style::Count),
            ("p", Style::Plain),
            ("mean_consecutive", Style::Trials),
            ("mean_total", Style::Trials),
        ],
    );
    for m in 1..=a.m_max {
        t.push(vec![
            m.into(),
            env.p().into(),
            mean_consecutive(&env, m)?.into(),
            mean_total(&env, m)?.into(),
        ]);
    }
    Ok(t)
}

pub fn cmd_decide(a: &DecideArgs) -> Result<Table> {
    let profile: CriticalityProfile = a.profile.into();
    let m_prime = a.m_prime.unwrap_or(a.m);
    let plan = plan_for_profile(profile, a.m, m_prime)?;
    let env = Environment::new(a.p)?;
    let thresholds = DecisionThresholds::new(a.h1, a.h2.unwrap_or(f64::MAX))?;
    let decision = phase1_decide(&plan, &env, &thresholds)?;
    let phase2 = phase2_cost_ratio(&plan, &env)?;
    let screen = match a.h2 {
        Some(_) => Some(phase2_within_threshold(&plan, &env, &thresholds)?),
        None => None,
    };
    let mut t = Table::new(
        "decide",
        vec![
            ("profile", Style::Text),
            ("phase1_rule", Style::Text),
            ("m", Style::Count),
            ("phase2_rule", Style::Text),
            ("m_prime", Style::Count),
            ("p", Style::Plain),
            ("phase1_cost_ratio", Style::Fine),
            ("h1", Style::Plain),
            ("verdict", Style::Text),
            ("phase2_cost_ratio", Style::Fine),
            ("h2", Style::Plain),
            ("phase2_within_h2", Style::Text),
        ],
    );
    t.push(vec![
        profile.name().into(),
        plan.phase1().kind().name().into(),
        plan.phase1().m().into(),
        plan.phase2().kind().name().into(),
        plan.phase2().m().into(),
        env.p().into(),
        decision.cost_ratio.value.into(),
        a.h1.into(),
        match decision.verdict {
            Verdict::Adopt => "adopt",
            Verdict::Reject => "reject",
        }
        .into(),
        phase2.value.into(),
        a.h2.into(),
        screen.into(),
    ]);
    Ok(t)
}
