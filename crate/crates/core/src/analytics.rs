//! Closed-form moments, cost ratios and exact stopping-time distributions.
//!
//! For the consecutive-reward rule the recurrent-event generating function
//!
//! ```text
//!         1 - z + q p^m z^(m+1)
//! B(z) = -----------------------
//!        (1 - z) (1 - p^m z^m)
//! ```
//!
//! counts trials at which a run of `m` rewards ends (not necessarily for the
//! first time). The first-passage generating function follows from
//! `A = (B - 1) / B`, which simplifies to
//!
//! ```text
//!         p^m z^m (1 - p z)
//! A(z) = --------------------
//!        1 - z + q p^m z^(m+1)
//! ```
//!
//! and its coefficients `a_n = Pr[X = n]` satisfy the linear recurrence
//! read off the denominator:
//!
//! ```text
//! a_n = a_(n-1) - q p^m a_(n-m-1) + c_n,   c_m = p^m, c_(m+1) = -p^(m+1)
//! ```
//!
//! The total-reward rule is negative binomial with generating function
//! `F(z) = (p z / (1 - q z))^m`.
//!
//! Punishment rules are evaluated on the reflected problem.

use statrs::function::factorial::ln_binomial;

use crate::model::{reflect, CostRatio, Environment, RuleKind, RuleSpec, StoppingTimeStats, MAX_M};
use crate::{Error, Result};

/// Hard cap on the number of PMF terms produced by series expansion.
pub const MAX_PMF_TERMS: usize = 1_000_000;

/// Largest tolerance accepted for the PMF tail mass.
pub const MAX_TOLERANCE: f64 = 1e-3;

/// Above this trial index negative-binomial coefficients are evaluated in
/// log space.
const LOG_SPACE_CUTOFF: u64 = 60;

/// A truncated stopping-time distribution.
///
/// `probabilities[k]` is `Pr[X = support_start + k]`; the mass beyond the
/// last stored term is `truncation_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    support_start: u64,
    probabilities: Vec<f64>,
    truncation_mass: f64,
}

impl Pmf {
    pub fn support_start(&self) -> u64 {
        self.support_start
    }

    /// Last trial index with a stored probability.
    pub fn support_end(&self) -> u64 {
        self.support_start + self.probabilities.len() as u64 - 1
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// `Pr[X = n]`, zero outside the stored range.
    pub fn prob(&self, n: u64) -> f64 {
        n.checked_sub(self.support_start)
            .and_then(|k| self.probabilities.get(k as usize))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(n, Pr[X = n])` pairs over the stored range.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let start = self.support_start;
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(k, &a)| (start + k as u64, a))
    }

    /// Sum of the stored probabilities.
    pub fn stored_mass(&self) -> f64 {
        neumaier_sum(self.probabilities.iter().copied())
    }

    /// Mean of the stored terms (the tail is ignored).
    pub fn mean(&self) -> f64 {
        neumaier_sum(self.iter().map(|(n, a)| n as f64 * a))
    }

    /// Variance of the stored terms about [`Pmf::mean`].
    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        neumaier_sum(self.iter().map(|(n, a)| {
            let d = n as f64 - mu;
            d * d * a
        }))
    }

    /// Evaluate the truncated series `sum a_n z^n`.
    pub fn eval(&self, z: f64) -> f64 {
        let poly = self
            .probabilities
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * z + a);
        poly * powu(z, self.support_start)
    }
}

fn powu(x: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(n as f64),
    }
}

/// Compensated summation, so that long PMF tails do not drift.
fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 || m > MAX_M {
        return Err(Error::invalid(
            "m",
            format!("count must lie in 1..={MAX_M}, got {m}"),
        ));
    }
    Ok(())
}

/// `p^m`, rejected once it leaves the normal double range.
fn run_probability(p: f64, m: u32) -> Result<f64> {
    check_m(m)?;
    let pm = p.powi(m as i32);
    if pm < f64::MIN_POSITIVE {
        return Err(Error::Domain(format!("p^m underflows for p={p}, m={m}")));
    }
    Ok(pm)
}

fn finite(value: f64, what: &str, env: &Environment, m: u32) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!(
            "{what} is not representable for p={}, m={m}",
            env.p()
        )))
    }
}

/// Expected trials until `m` consecutive rewards: `(1 - p^m) / (q p^m)`.
pub fn mean_consecutive(env: &Environment, m: u32) -> Result<f64> {
    let pm = run_probability(env.p(), m)?;
    finite((1.0 - pm) / (env.q() * pm), "mean", env, m)
}

/// Variance of the trials until `m` consecutive rewards:
/// `1/(q^2 p^(2m)) - (2m+1)/(q p^m) - p/q^2`.
pub fn variance_consecutive(env: &Environment, m: u32) -> Result<f64> {
    let pm = run_probability(env.p(), m)?;
    let (p, q) = (env.p(), env.q());
    let inv = 1.0 / (q * pm);
    let var = inv * inv - (2.0 * m as f64 + 1.0) * inv - p / (q * q);
    finite(var, "variance", env, m)
}

/// Expected trials until `m` total rewards: `m / p`.
pub fn mean_total(env: &Environment, m: u32) -> Result<f64> {
    check_m(m)?;
    Ok(m as f64 / env.p())
}

/// Variance of the trials until `m` total rewards: `m q / p^2`.
pub fn variance_total(env: &Environment, m: u32) -> Result<f64> {
    check_m(m)?;
    Ok(m as f64 * env.q() / (env.p() * env.p()))
}

/// Moments of the stopping time of any rule.
pub fn stats_for_rule(spec: &RuleSpec, env: &Environment) -> Result<StoppingTimeStats> {
    let (spec, env) = to_reward_form(*spec, *env);
    let m = spec.m();
    let (mean, var) = match spec.kind() {
        RuleKind::ConsecutiveRewards => {
            (mean_consecutive(&env, m)?, variance_consecutive(&env, m)?)
        }
        RuleKind::TotalRewards => (mean_total(&env, m)?, variance_total(&env, m)?),
        _ => unreachable!("reward form"),
    };
    StoppingTimeStats::from_moments(mean, var)
}

/// Expected trials per required matching outcome.
///
/// Consecutive rules give `(1 - p^m) / (m q p^m)`, total rules give `1 / p`;
/// punishment rules use the same expressions with `p` and `q` swapped.
pub fn cost_ratio(spec: &RuleSpec, env: &Environment) -> Result<CostRatio> {
    let rule_kind = spec.kind();
    let (spec, env) = to_reward_form(*spec, *env);
    let value = match spec.kind() {
        RuleKind::ConsecutiveRewards => {
            let pm = run_probability(env.p(), spec.m())?;
            finite(
                (1.0 - pm) / (spec.m() as f64 * env.q() * pm),
                "cost ratio",
                &env,
                spec.m(),
            )?
        }
        RuleKind::TotalRewards => 1.0 / env.p(),
        _ => unreachable!("reward form"),
    };
    Ok(CostRatio { value, rule_kind })
}

fn to_reward_form(spec: RuleSpec, env: Environment) -> (RuleSpec, Environment) {
    if spec.kind().is_reward_based() {
        (spec, env)
    } else {
        reflect(spec, env)
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance > 0.0 && tolerance <= MAX_TOLERANCE) {
        return Err(Error::invalid(
            "tolerance",
            format!("must lie in (0, {MAX_TOLERANCE:e}], got {tolerance}"),
        ));
    }
    Ok(())
}

/// Accumulates terms until the unexplained tail drops below `tolerance`.
struct PmfBuilder {
    support_start: u64,
    probabilities: Vec<f64>,
    sum: f64,
    comp: f64,
    tolerance: f64,
}

impl PmfBuilder {
    fn new(support_start: u64, tolerance: f64) -> Self {
        PmfBuilder {
            support_start,
            probabilities: Vec::new(),
            sum: 0.0,
            comp: 0.0,
            tolerance,
        }
    }

    fn tail(&self) -> f64 {
        (1.0 - (self.sum + self.comp)).max(0.0)
    }

    /// Push one term; returns true once the tail is below tolerance.
    fn push(&mut self, a: f64) -> bool {
        let a = a.clamp(0.0, 1.0);
        self.probabilities.push(a);
        let t = self.sum + a;
        if self.sum.abs() >= a {
            self.comp += (self.sum - t) + a;
        } else {
            self.comp += (a - t) + self.sum;
        }
        self.sum = t;
        self.tail() < self.tolerance
    }

    fn finish(self, converged: bool) -> Result<Pmf> {
        let pmf = Pmf {
            support_start: self.support_start,
            truncation_mass: self.tail(),
            probabilities: self.probabilities,
        };
        if converged {
            Ok(pmf)
        } else {
            Err(Error::Truncated {
                partial: Box::new(pmf),
                tolerance: self.tolerance,
            })
        }
    }
}

/// Distribution of the trial at which the first run of `m` consecutive
/// rewards is completed.
///
/// Terms are generated until the tail mass is below `tolerance`; if that
/// needs more than [`MAX_PMF_TERMS`] terms an [`Error::Truncated`] carrying
/// the partial distribution is returned.
pub fn pmf_consecutive(env: &Environment, m: u32, tolerance: f64) -> Result<Pmf> {
    pmf_consecutive_capped(env, m, tolerance, MAX_PMF_TERMS)
}

fn pmf_consecutive_capped(
    env: &Environment,
    m: u32,
    tolerance: f64,
    max_terms: usize,
) -> Result<Pmf> {
    check_tolerance(tolerance)?;
    let pm = run_probability(env.p(), m)?;
    let feedback = env.q() * pm;
    let mut b = PmfBuilder::new(m as u64, tolerance);
    let lag = m as usize + 1;
    // k = n - m; numerator contributes at k = 0 and k = 1 only.
    for k in 0..max_terms {
        let prev = if k >= 1 { b.probabilities[k - 1] } else { 0.0 };
        let lagged = if k >= lag {
            b.probabilities[k - lag]
        } else {
            0.0
        };
        let numer = match k {
            0 => pm,
            1 => -pm * env.p(),
            _ => 0.0,
        };
        if b.push(numer + prev - feedback * lagged) {
            return b.finish(true);
        }
    }
    b.finish(false)
}

/// Negative-binomial distribution of the trial at which the `m`-th reward
/// arrives: `a_n = C(n-1, m-1) p^m q^(n-m)` for `n >= m`.
pub fn pmf_total(env: &Environment, m: u32, tolerance: f64) -> Result<Pmf> {
    pmf_total_capped(env, m, tolerance, MAX_PMF_TERMS)
}

fn pmf_total_capped(env: &Environment, m: u32, tolerance: f64, max_terms: usize) -> Result<Pmf> {
    check_tolerance(tolerance)?;
    check_m(m)?;
    let (p, q) = (env.p(), env.q());
    let m64 = m as u64;
    let (ln_p, ln_q) = (p.ln(), q.ln());
    let mut b = PmfBuilder::new(m64, tolerance);
    for n in m64..m64 + max_terms as u64 {
        let a = if n <= LOG_SPACE_CUTOFF {
            binomial_exact(n - 1, m64 - 1) * p.powi(m as i32) * q.powi((n - m64) as i32)
        } else {
            (ln_binomial(n - 1, m64 - 1) + m as f64 * ln_p + (n - m64) as f64 * ln_q).exp()
        };
        if b.push(a) {
            return b.finish(true);
        }
    }
    b.finish(false)
}

/// `C(n, k)` for `n <= 60`, exact in integers then rounded once.
fn binomial_exact(n: u64, k: u64) -> f64 {
    debug_assert!(n <= LOG_SPACE_CUTOFF && k <= n);
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as f64
}

/// Stopping-time distribution for any rule.
pub fn pmf_for_rule(spec: &RuleSpec, env: &Environment, tolerance: f64) -> Result<Pmf> {
    let (spec, env) = to_reward_form(*spec, *env);
    match spec.kind() {
        RuleKind::ConsecutiveRewards => pmf_consecutive(&env, spec.m(), tolerance),
        RuleKind::TotalRewards => pmf_total(&env, spec.m(), tolerance),
        _ => unreachable!("reward form"),
    }
}

const POLE_GUARD: f64 = 1e-12;

/// Recurrent-event generating function `B(z)` for runs of `m` rewards,
/// evaluated at real `|z| < 1`.
pub fn eval_recurrent_gf(env: &Environment, m: u32, z: f64) -> Result<f64> {
    let pm = run_probability(env.p(), m)?;
    if z.is_nan() || z.abs() >= 1.0 {
        return Err(Error::Domain(format!("B(z) requires |z| < 1, got z={z}")));
    }
    let zm = z.powi(m as i32);
    let denom = (1.0 - z) * (1.0 - pm * zm);
    if denom.abs() < POLE_GUARD {
        return Err(Error::Domain(format!("z={z} is too close to a pole of B")));
    }
    Ok((1.0 - z + env.q() * pm * zm * z) / denom)
}

/// First-passage generating function `A(z)` for runs of `m` rewards, in
/// its simplified closed form. Valid inside the radius of convergence,
/// which exceeds 1.
pub fn eval_first_passage_gf(env: &Environment, m: u32, z: f64) -> Result<f64> {
    let pm = run_probability(env.p(), m)?;
    if !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {z}")));
    }
    let zm = z.powi(m as i32);
    let denom = 1.0 - z + env.q() * pm * zm * z;
    if denom.abs() < POLE_GUARD {
        return Err(Error::Domain(format!("z={z} is too close to a pole of A")));
    }
    Ok(pm * zm * (1.0 - env.p() * z) / denom)
}

/// Generating function `F(z) = (p z / (1 - q z))^m` of the total-reward
/// stopping time, for `|z| < 1/q`.
pub fn eval_total_gf(env: &Environment, m: u32, z: f64) -> Result<f64> {
    check_m(m)?;
    let denom = 1.0 - env.q() * z;
    if !z.is_finite() || denom.abs() < POLE_GUARD {
        return Err(Error::Domain(format!(
            "z={z} is too close to the pole of F"
        )));
    }
    Ok((env.p() * z / denom).powi(m as i32))
}
