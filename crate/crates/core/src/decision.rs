//! Two-phase adoption and validation.
//!
//! Phase I trials a policy under a reward rule and adopts it when the
//! expected cost per required reward is below `h1`. Phase II keeps
//! observing the adopted policy under a punishment rule; the rule firing is
//! the alert that the policy should be discontinued.

use crate::analytics::cost_ratio;
use crate::automata::RuleAutomaton;
use crate::model::{
    CostRatio, CriticalityProfile, DecisionThresholds, Environment, RuleSpec, TrialOutcome,
};
use crate::{Error, Result};

/// The rule used in each phase for one criticality profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasePlan {
    profile: CriticalityProfile,
    phase1: RuleSpec,
    phase2: RuleSpec,
}

impl PhasePlan {
    pub fn profile(&self) -> CriticalityProfile {
        self.profile
    }

    pub fn phase1(&self) -> RuleSpec {
        self.phase1
    }

    pub fn phase2(&self) -> RuleSpec {
        self.phase2
    }
}

/// Build the plan for `profile` with Phase I count `m` and Phase II count
/// `m_prime`.
pub fn plan_for_profile(profile: CriticalityProfile, m: u32, m_prime: u32) -> Result<PhasePlan> {
    let (learn, validate) = profile.rule_kinds();
    let phase1 = RuleSpec::new(learn, m)?;
    let phase2 = RuleSpec::new(validate, m_prime).map_err(|e| match e {
        Error::InvalidParameter { reason, .. } => Error::InvalidParameter {
            name: "m_prime",
            reason,
        },
        other => other,
    })?;
    Ok(PhasePlan {
        profile,
        phase1,
        phase2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Adopt,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdoptionDecision {
    pub verdict: Verdict,
    pub cost_ratio: CostRatio,
    /// Threshold in trials per required reward (`h1 / trial_cost_unit`).
    pub threshold: f64,
}

/// Phase I verdict: adopt iff the cost ratio is strictly below the
/// threshold.
pub fn phase1_decide(
    plan: &PhasePlan,
    env: &Environment,
    thresholds: &DecisionThresholds,
) -> Result<AdoptionDecision> {
    let ratio = cost_ratio(&plan.phase1, env)?;
    let threshold = thresholds.h1() / thresholds.trial_cost_unit();
    let verdict = if ratio.value < threshold {
        Verdict::Adopt
    } else {
        Verdict::Reject
    };
    Ok(AdoptionDecision {
        verdict,
        cost_ratio: ratio,
        threshold,
    })
}

/// Phase II cost ratio: `1/q` for total punishments,
/// `(1 - q^m') / (m' p q^m')` for consecutive punishments.
pub fn phase2_cost_ratio(plan: &PhasePlan, env: &Environment) -> Result<CostRatio> {
    cost_ratio(&plan.phase2, env)
}

/// Optional pre-screen of the Phase II configuration against `h2`: true iff
/// the expected trials per punishment needed to raise an alert is strictly
/// below `h2 / trial_cost_unit`.
pub fn phase2_within_threshold(
    plan: &PhasePlan,
    env: &Environment,
    thresholds: &DecisionThresholds,
) -> Result<bool> {
    Ok(phase2_cost_ratio(plan, env)?.value < thresholds.h2() / thresholds.trial_cost_unit())
}

/// Ongoing Phase II watch over an adopted policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitorState {
    automaton: RuleAutomaton,
    alert: bool,
}

impl MonitorState {
    pub fn new(plan: &PhasePlan) -> Self {
        MonitorState {
            automaton: RuleAutomaton::new(plan.phase2),
            alert: false,
        }
    }

    pub fn alert(&self) -> bool {
        self.alert
    }

    /// Trial at which the alert was raised.
    pub fn alert_at(&self) -> Option<u64> {
        self.automaton.stopped_at()
    }

    pub fn trials_seen(&self) -> u64 {
        self.automaton.trials_seen()
    }

    pub fn automaton(&self) -> &RuleAutomaton {
        &self.automaton
    }
}

pub fn monitor_step(state: MonitorState, outcome: TrialOutcome) -> Result<MonitorState> {
    let automaton = state.automaton.step(outcome)?;
    Ok(MonitorState {
        alert: automaton.is_stopped(),
        automaton,
    })
}
