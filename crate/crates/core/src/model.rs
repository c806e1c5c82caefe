//! Domain types shared by every other module.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Largest supported rule count. Keeps `p^m` a normal double for every
/// `p >= 0.05`.
pub const MAX_M: u32 = 200;

/// Result of a single Bernoulli trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialOutcome {
    Reward,
    Punishment,
}

impl TrialOutcome {
    pub fn flipped(self) -> Self {
        match self {
            TrialOutcome::Reward => TrialOutcome::Punishment,
            TrialOutcome::Punishment => TrialOutcome::Reward,
        }
    }
}

/// The trial environment: reward probability `p` and punishment
/// probability `q = 1 - p`.
///
/// Both are stored so that [`Environment::reflected`] is an exact swap and
/// reflecting twice gives back the original bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    p: f64,
    q: f64,
}

impl Environment {
    /// `p` must lie strictly inside `(0, 1)`; at either endpoint one family of
    /// rules never fires.
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(
                "p",
                format!("reward probability must lie in (0, 1), got {p}"),
            ));
        }
        Ok(Environment { p, q: 1.0 - p })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Swap the roles of reward and punishment.
    pub fn reflected(&self) -> Self {
        Environment {
            p: self.q,
            q: self.p,
        }
    }

    /// Probability that a single trial produces `outcome`.
    pub fn prob_of(&self, outcome: TrialOutcome) -> f64 {
        match outcome {
            TrialOutcome::Reward => self.p,
            TrialOutcome::Punishment => self.q,
        }
    }
}

/// Which of the four stopping rules applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// Rule I: stop after `m` consecutive rewards.
    ConsecutiveRewards,
    /// Rule II: stop after `m` total rewards.
    TotalRewards,
    /// Rule IR: stop after `m` consecutive punishments.
    ConsecutivePunishments,
    /// Rule IIR: stop after `m` total punishments.
    TotalPunishments,
}

impl RuleKind {
    pub const ALL: [RuleKind; 4] = [
        RuleKind::ConsecutiveRewards,
        RuleKind::TotalRewards,
        RuleKind::ConsecutivePunishments,
        RuleKind::TotalPunishments,
    ];

    /// The outcome this rule counts.
    pub fn target(self) -> TrialOutcome {
        match self {
            RuleKind::ConsecutiveRewards | RuleKind::TotalRewards => TrialOutcome::Reward,
            RuleKind::ConsecutivePunishments | RuleKind::TotalPunishments => {
                TrialOutcome::Punishment
            }
        }
    }

    pub fn is_consecutive(self) -> bool {
        matches!(
            self,
            RuleKind::ConsecutiveRewards | RuleKind::ConsecutivePunishments
        )
    }

    pub fn is_reward_based(self) -> bool {
        self.target() == TrialOutcome::Reward
    }

    pub fn reflected(self) -> Self {
        match self {
            RuleKind::ConsecutiveRewards => RuleKind::ConsecutivePunishments,
            RuleKind::ConsecutivePunishments => RuleKind::ConsecutiveRewards,
            RuleKind::TotalRewards => RuleKind::TotalPunishments,
            RuleKind::TotalPunishments => RuleKind::TotalRewards,
        }
    }

    /// Kebab-case name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::ConsecutiveRewards => "consecutive-rewards",
            RuleKind::TotalRewards => "total-rewards",
            RuleKind::ConsecutivePunishments => "consecutive-punishments",
            RuleKind::TotalPunishments => "total-punishments",
        }
    }

    /// Conventional short label (`I`, `II`, `IR`, `IIR`).
    pub fn label(self) -> &'static str {
        match self {
            RuleKind::ConsecutiveRewards => "I",
            RuleKind::TotalRewards => "II",
            RuleKind::ConsecutivePunishments => "IR",
            RuleKind::TotalPunishments => "IIR",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("rule", format!("unknown rule `{s}`")))
    }
}

/// A stopping rule together with its count parameter.
///
/// Phase II rules are conventionally parameterised by `m'`; the same field
/// is used for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleSpec {
    kind: RuleKind,
    m: u32,
}

impl RuleSpec {
    pub fn new(kind: RuleKind, m: u32) -> Result<Self> {
        if m == 0 || m > MAX_M {
            return Err(Error::invalid(
                "m",
                format!("count must lie in 1..={MAX_M}, got {m}"),
            ));
        }
        Ok(RuleSpec { kind, m })
    }

    #[inline]
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn reflected(&self) -> Self {
        RuleSpec {
            kind: self.kind.reflected(),
            m: self.m,
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (m={})", self.kind, self.m)
    }
}

/// Map a problem to its mirror image: swap `p` and `q` and swap reward
/// rules with punishment rules. `m` is unchanged.
pub fn reflect(spec: RuleSpec, env: Environment) -> (RuleSpec, Environment) {
    (spec.reflected(), env.reflected())
}

/// Mean, variance and standard deviation of a stopping time, in trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingTimeStats {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
}

impl StoppingTimeStats {
    pub fn from_moments(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite moments (mean {mean}, variance {variance})"
            )));
        }
        if variance < 0.0 {
            return Err(Error::Domain(format!("negative variance {variance}")));
        }
        Ok(StoppingTimeStats {
            mean,
            variance,
            std: variance.sqrt(),
        })
    }
}

/// Expected trials per required matching outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostRatio {
    pub value: f64,
    pub rule_kind: RuleKind,
}

/// System class that selects the rule used in each phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriticalityProfile {
    MissionCritical,
    IntermediateLevel2,
    IntermediateLevel1,
    NonMissionCritical,
}

impl CriticalityProfile {
    pub const ALL: [CriticalityProfile; 4] = [
        CriticalityProfile::MissionCritical,
        CriticalityProfile::IntermediateLevel2,
        CriticalityProfile::IntermediateLevel1,
        CriticalityProfile::NonMissionCritical,
    ];

    /// `(learning rule, validation rule)` for this class.
    pub fn rule_kinds(self) -> (RuleKind, RuleKind) {
        use RuleKind::*;
        match self {
            CriticalityProfile::MissionCritical => (ConsecutiveRewards, TotalPunishments),
            CriticalityProfile::IntermediateLevel2 => (ConsecutiveRewards, ConsecutivePunishments),
            CriticalityProfile::IntermediateLevel1 => (TotalRewards, TotalPunishments),
            CriticalityProfile::NonMissionCritical => (TotalRewards, ConsecutivePunishments),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CriticalityProfile::MissionCritical => "mission-critical",
            CriticalityProfile::IntermediateLevel2 => "intermediate-level-2",
            CriticalityProfile::IntermediateLevel1 => "intermediate-level-1",
            CriticalityProfile::NonMissionCritical => "non-mission-critical",
        }
    }
}

impl fmt::Display for CriticalityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriticalityProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CriticalityProfile::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid("profile", format!("unknown profile `{s}`")))
    }
}

/// Cost-ratio thresholds for the two phases.
///
/// `h1` and `h2` are in cost units per required outcome; `trial_cost_unit`
/// is the cost of one trial (1 unless stated otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionThresholds {
    h1: f64,
    h2: f64,
    trial_cost_unit: f64,
}

impl DecisionThresholds {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        Self::with_trial_cost_unit(h1, h2, 1.0)
    }

    pub fn with_trial_cost_unit(h1: f64, h2: f64, trial_cost_unit: f64) -> Result<Self> {
        for (name, v) in [("h1", h1), ("h2", h2), ("trial_cost_unit", trial_cost_unit)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(DecisionThresholds {
            h1,
            h2,
            trial_cost_unit,
        })
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn trial_cost_unit(&self) -> f64 {
        self.trial_cost_unit
    }
}
