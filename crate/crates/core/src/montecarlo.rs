//! Seeded, reproducible episode simulation.
//!
//! # Random streams
//!
//! Episode `i` of an experiment with master seed `s` draws its trials from
//! a ChaCha8 generator (`rand_chacha::ChaCha8Rng`) initialised with
//! `SeedableRng::seed_from_u64(episode_seed(s, i))`, where `episode_seed` is
//! the `i`-th output of a SplitMix64 sequence started at `s`. Each trial
//! takes one `u64` from the generator, forms `u = (x >> 11) * 2^-53` and
//! counts as the rule's *matching* outcome (reward for reward rules,
//! punishment for punishment rules) iff `u < Pr[matching]`.
//!
//! Because the draw is phrased in terms of the matching outcome, a
//! punishment-rule episode and the reflected reward-rule episode with the
//! same seed consume identical numbers and see outcome-flipped streams.
//!
//! Stream version: 1. Changing any of the above changes published numbers.
//!
//! Episodes are independent and run on the rayon pool; stop times are
//! integers and are reduced by exact integer sums, so results do not depend
//! on the number of threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::analytics::stats_for_rule;
use crate::automata::RuleAutomaton;
use crate::model::{Environment, RuleSpec, TrialOutcome};
use crate::{Error, Result};

/// Episodes per experiment used for the published comparisons.
pub const DEFAULT_EPISODES: u64 = 100_000;

/// Per-episode trial cap; exceeding it is reported as a runaway episode.
pub const EPISODE_TRIAL_CAP: u64 = 1_000_000_000;

pub const STREAM_VERSION: u32 = 1;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of episode `index` under `master_seed`.
pub fn episode_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64_mix(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Infinite i.i.d. outcome stream for one episode.
pub struct OutcomeStream {
    rng: ChaCha8Rng,
    target: TrialOutcome,
    target_prob: f64,
}

impl OutcomeStream {
    pub fn new(spec: &RuleSpec, env: &Environment, stream_seed: u64) -> Self {
        let target = spec.kind().target();
        OutcomeStream {
            rng: ChaCha8Rng::seed_from_u64(stream_seed),
            target,
            target_prob: env.prob_of(target),
        }
    }
}

impl Iterator for OutcomeStream {
    type Item = TrialOutcome;

    #[inline]
    fn next(&mut self) -> Option<TrialOutcome> {
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        Some(if u < self.target_prob {
            self.target
        } else {
            self.target.flipped()
        })
    }
}

/// Simulate one episode and return the trial at which the rule stopped.
pub fn run_episode(spec: &RuleSpec, env: &Environment, stream_seed: u64) -> Result<u64> {
    run_episode_capped(spec, env, stream_seed, EPISODE_TRIAL_CAP)
}

/// [`run_episode`] with an explicit trial cap.
pub fn run_episode_capped(
    spec: &RuleSpec,
    env: &Environment,
    stream_seed: u64,
    cap: u64,
) -> Result<u64> {
    episode(spec, env, stream_seed, cap).ok_or(Error::RunawayEpisode { episode: None, cap })
}

fn episode(spec: &RuleSpec, env: &Environment, stream_seed: u64, cap: u64) -> Option<u64> {
    let mut automaton = RuleAutomaton::new(*spec);
    let stream = OutcomeStream::new(spec, env, stream_seed).take(cap as usize);
    automaton
        .run(stream)
        .expect("fresh automaton cannot already be stopped")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub spec: RuleSpec,
    pub env: Environment,
    pub episodes: u64,
    pub master_seed: u64,
    pub trial_cap: u64,
}

impl ExperimentConfig {
    pub fn new(spec: RuleSpec, env: Environment, episodes: u64, master_seed: u64) -> Result<Self> {
        if episodes == 0 {
            return Err(Error::invalid("episodes", "must be at least 1"));
        }
        Ok(ExperimentConfig {
            spec,
            env,
            episodes,
            master_seed,
            trial_cap: EPISODE_TRIAL_CAP,
        })
    }

    pub fn with_trial_cap(mut self, cap: u64) -> Self {
        self.trial_cap = cap;
        self
    }

    fn stop_time(&self, index: u64) -> Result<u64> {
        episode(
            &self.spec,
            &self.env,
            episode_seed(self.master_seed, index),
            self.trial_cap,
        )
        .ok_or(Error::RunawayEpisode {
            episode: Some(index),
            cap: self.trial_cap,
        })
    }

    /// All stop times in episode order.
    pub fn stop_times(&self) -> Result<Vec<u64>> {
        let results: Vec<Result<u64>> = (0..self.episodes)
            .into_par_iter()
            .map(|i| self.stop_time(i))
            .collect();
        results.into_iter().collect()
    }
}

/// Empirical versus theoretical moments of one experiment.
///
/// `empirical_std` uses the population (divide-by-N) estimator.
/// `err_std_pct` is `None` when the empirical std is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub empirical_mean: f64,
    pub empirical_std: f64,
    pub theoretical_mean: f64,
    pub theoretical_std: f64,
    pub err_mean_pct: f64,
    pub err_std_pct: Option<f64>,
    pub episodes: u64,
    pub master_seed: u64,
}

/// Exact integer moment accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u128,
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn push(mut self, x: u64) -> Self {
        let x = x as u128;
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
        self
    }

    fn merge(self, other: Self) -> Self {
        Moments {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    fn population_variance(&self) -> f64 {
        let n = self.count;
        let exact = n
            .checked_mul(self.sum_sq)
            .zip(self.sum.checked_mul(self.sum))
            .map(|(a, b)| a - b);
        match exact {
            Some(numer) => numer as f64 / (n as f64 * n as f64),
            None => {
                let mean = self.mean();
                (self.sum_sq as f64 / n as f64 - mean * mean).max(0.0)
            }
        }
    }
}

/// Relative error of a prediction, in percent of the measurement.
pub fn err_percent(theoretical: f64, empirical: f64) -> Result<f64> {
    if empirical == 0.0 || !empirical.is_finite() {
        return Err(Error::Domain(format!(
            "error percentage undefined for empirical value {empirical}"
        )));
    }
    Ok((theoretical - empirical).abs() / empirical.abs() * 100.0)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<SimulationSummary> {
    let theory = stats_for_rule(&config.spec, &config.env)?;
    let moments = (0..config.episodes)
        .into_par_iter()
        .map(|i| config.stop_time(i))
        .try_fold(Moments::default, |acc, r| r.map(|t| acc.push(t)))
        .try_reduce(Moments::default, |a, b| Ok(a.merge(b)));
    let moments = match moments {
        Ok(m) => m,
        // Another worker may have failed first; report the lowest index.
        Err(_) => return Err(first_failure(config)),
    };
    let empirical_mean = moments.mean();
    let empirical_std = moments.population_variance().sqrt();
    Ok(SimulationSummary {
        empirical_mean,
        empirical_std,
        theoretical_mean: theory.mean,
        theoretical_std: theory.std,
        err_mean_pct: err_percent(theory.mean, empirical_mean)?,
        err_std_pct: err_percent(theory.std, empirical_std).ok(),
        episodes: config.episodes,
        master_seed: config.master_seed,
    })
}

fn first_failure(config: &ExperimentConfig) -> Error {
    (0..config.episodes)
        .into_par_iter()
        .filter_map(|i| config.stop_time(i).err().map(|e| (i, e)))
        .min_by_key(|(i, _)| *i)
        .map(|(_, e)| e)
        .expect("a failing episode exists")
}

/// Running mean of the stop times, sampled every `stride` episodes and at
/// the final episode.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    /// `(episodes completed, mean stop time over them)`.
    pub points: Vec<(u64, f64)>,
}

impl ConvergenceTrace {
    pub fn running_means(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, m)| m)
    }

    pub fn last(&self) -> Option<(u64, f64)> {
        self.points.last().copied()
    }
}

pub fn convergence_trace(config: &ExperimentConfig, stride: u64) -> Result<ConvergenceTrace> {
    if stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    let times = config.stop_times()?;
    let mut points = Vec::with_capacity((times.len() as u64 / stride + 1) as usize);
    let mut sum: u128 = 0;
    for (i, &t) in times.iter().enumerate() {
        sum += t as u128;
        let n = i as u64 + 1;
        if n.is_multiple_of(stride) || n == config.episodes {
            points.push((n, sum as f64 / n as f64));
        }
    }
    Ok(ConvergenceTrace { points })
}
