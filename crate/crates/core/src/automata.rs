//! Streaming detectors for the stopping event of a rule.

use crate::model::{RuleSpec, TrialOutcome};
use crate::{Error, Result};

/// Consumes outcomes one at a time and records the trial at which the
/// rule's condition is first met.
///
/// `progress` is the current run length for consecutive rules and the
/// running count of matching outcomes for total rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleAutomaton {
    spec: RuleSpec,
    trials_seen: u64,
    progress: u32,
    stopped_at: Option<u64>,
}

impl RuleAutomaton {
    pub fn new(spec: RuleSpec) -> Self {
        RuleAutomaton {
            spec,
            trials_seen: 0,
            progress: 0,
            stopped_at: None,
        }
    }

    pub fn spec(&self) -> RuleSpec {
        self.spec
    }

    pub fn trials_seen(&self) -> u64 {
        self.trials_seen
    }

    pub fn progress(&self) -> u32 {
        self.progress
    }

    pub fn stopped_at(&self) -> Option<u64> {
        self.stopped_at
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped_at.is_some()
    }

    /// Returns the automaton after observing `outcome`.
    ///
    /// Stepping an automaton that has already stopped is an error.
    pub fn step(mut self, outcome: TrialOutcome) -> Result<Self> {
        self.advance(outcome)?;
        Ok(self)
    }

    /// In-place form of [`RuleAutomaton::step`]; returns whether the rule
    /// has now stopped.
    pub fn advance(&mut self, outcome: TrialOutcome) -> Result<bool> {
        if let Some(stopped_at) = self.stopped_at {
            return Err(Error::AlreadyStopped { stopped_at });
        }
        self.trials_seen += 1;
        if outcome == self.spec.kind().target() {
            self.progress += 1;
        } else if self.spec.kind().is_consecutive() {
            self.progress = 0;
        }
        if self.progress == self.spec.m() {
            self.stopped_at = Some(self.trials_seen);
        }
        Ok(self.stopped_at.is_some())
    }

    /// Feed outcomes until the rule stops or the stream ends. Returns the
    /// stop trial if it was reached.
    pub fn run<I>(&mut self, outcomes: I) -> Result<Option<u64>>
    where
        I: IntoIterator<Item = TrialOutcome>,
    {
        for outcome in outcomes {
            if self.advance(outcome)? {
                break;
            }
        }
        Ok(self.stopped_at)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RuleKind;
    use TrialOutcome::{Punishment as P, Reward as R};

    fn automaton(kind: RuleKind, m: u32) -> RuleAutomaton {
        RuleAutomaton::new(RuleSpec::new(kind, m).unwrap())
    }

    fn stop(kind: RuleKind, m: u32, stream: &[TrialOutcome]) -> Option<u64> {
        automaton(kind, m).run(stream.iter().copied()).unwrap()
    }

    #[test]
    fn fresh_automaton() {
        for kind in RuleKind::ALL {
            let a = automaton(kind, 3);
            assert_eq!(a.progress(), 0);
            assert_eq!(a.trials_seen(), 0);
            assert!(!a.is_stopped());
        }
    }

    #[test]
    fn hand_traces() {
        assert_eq!(
            stop(RuleKind::ConsecutiveRewards, 2, &[R, P, R, R]),
            Some(4)
        );
        assert_eq!(stop(RuleKind::TotalRewards, 2, &[R, P, R]), Some(3));
        assert_eq!(
            stop(RuleKind::ConsecutivePunishments, 2, &[P, R, P, P]),
            Some(4)
        );
        assert_eq!(stop(RuleKind::TotalPunishments, 2, &[R, P, R, P]), Some(4));
        assert_eq!(stop(RuleKind::TotalPunishments, 2, &[R, R, R]), None);
    }

    #[test]
    fn consecutive_run_resets() {
        let a = automaton(RuleKind::ConsecutiveRewards, 3);
        let a = a.step(R).unwrap().step(R).unwrap();
        assert_eq!(a.progress(), 2);
        let a = a.step(P).unwrap();
        assert_eq!(a.progress(), 0);
        assert_eq!(a.trials_seen(), 3);
    }

    #[test]
    fn step_is_value_semantics() {
        let a = automaton(RuleKind::TotalRewards, 2);
        let b = a.step(R).unwrap();
        assert_eq!(a.progress(), 0);
        assert_eq!(b.progress(), 1);
    }

    #[test]
    fn stepping_after_stop_is_rejected() {
        let a = automaton(RuleKind::TotalRewards, 1).step(R).unwrap();
        assert_eq!(a.stopped_at(), Some(1));
        assert_eq!(a.step(P), Err(Error::AlreadyStopped { stopped_at: 1 }));
    }
}
