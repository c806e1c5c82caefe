//! Cross-checks of the analytic results and the automata against
//! independent brute-force oracles.

use proptest::prelude::*;
use stoprule::analytics::{
    cost_ratio, eval_first_passage_gf, eval_recurrent_gf, mean_consecutive, mean_total,
    pmf_consecutive, pmf_total, stats_for_rule, variance_consecutive, variance_total,
};
use stoprule::automata::RuleAutomaton;
use stoprule::{Environment, RuleKind, RuleSpec, TrialOutcome};

const TABLE_GRID: [(u32, f64); 12] = [
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

fn env(p: f64) -> Environment {
    Environment::new(p).unwrap()
}

fn spec(kind: RuleKind, m: u32) -> RuleSpec {
    RuleSpec::new(kind, m).unwrap()
}

/// Bit `i` of `mask` set means trial `i + 1` is a reward.
fn outcomes(mask: u32, n: u32) -> impl Iterator<Item = TrialOutcome> {
    (0..n).map(move |i| {
        if mask >> i & 1 == 1 {
            TrialOutcome::Reward
        } else {
            TrialOutcome::Punishment
        }
    })
}

/// First index (1-based) at which a run of `m` rewards ends, by scanning
/// every window.
fn naive_first_run_end(seq: &[TrialOutcome], target: TrialOutcome, m: usize) -> Option<u64> {
    (m..=seq.len())
        .find(|&end| seq[end - m..end].iter().all(|&o| o == target))
        .map(|end| end as u64)
}

/// Position (1-based) of the `m`-th occurrence of `target`.
fn naive_mth_occurrence(seq: &[TrialOutcome], target: TrialOutcome, m: usize) -> Option<u64> {
    seq.iter()
        .enumerate()
        .filter(|(_, &o)| o == target)
        .nth(m - 1)
        .map(|(i, _)| i as u64 + 1)
}

/// Number of length-`n` sequences, by reward count, for which `accept`
/// holds. The probability of any such sequence depends only on that count.
fn count_by_rewards(n: u32, accept: impl Fn(&[TrialOutcome]) -> bool) -> Vec<u64> {
    let mut counts = vec![0u64; n as usize + 1];
    let mut seq = Vec::with_capacity(n as usize);
    for mask in 0..1u32 << n {
        seq.clear();
        seq.extend(outcomes(mask, n));
        if accept(&seq) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

fn weigh(counts: &[u64], p: f64) -> f64 {
    let n = counts.len() as i32 - 1;
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * p.powi(k as i32) * (1.0 - p).powi(n - k as i32))
        .sum()
}

/// For every `n` in `1..=horizon`, reward-count histogram of the `2^n`
/// sequences whose first `m`-run ends exactly at `n`.
fn enumerate_first_run(m: usize, horizon: u32) -> Vec<Vec<u64>> {
    (1..=horizon)
        .map(|n| {
            count_by_rewards(n, |seq| {
                naive_first_run_end(seq, TrialOutcome::Reward, m) == Some(n as u64)
            })
        })
        .collect()
}

fn enumerate_mth_reward(m: usize, horizon: u32) -> Vec<Vec<u64>> {
    (1..=horizon)
        .map(|n| {
            count_by_rewards(n, |seq| {
                naive_mth_occurrence(seq, TrialOutcome::Reward, m) == Some(n as u64)
            })
        })
        .collect()
}

/// Forward dynamic program over run-length states `0..m`; returns
/// `Pr[X = n]` for `n = 1..=horizon`.
fn run_length_dp(p: f64, m: usize, horizon: usize) -> Vec<f64> {
    let q = 1.0 - p;
    let mut state = vec![0.0; m];
    state[0] = 1.0;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut next = vec![0.0; m];
        next[0] = q * state.iter().sum::<f64>();
        for r in 1..m {
            next[r] = p * state[r - 1];
        }
        out.push(p * state[m - 1]);
        state = next;
    }
    out
}

#[test]
fn first_run_pmf_matches_exhaustive_enumeration() {
    for m in 1..=4u32 {
        let counts = enumerate_first_run(m as usize, 20);
        for p in [0.3, 0.5, 0.6, 0.7] {
            let pmf = pmf_consecutive(&env(p), m, 1e-13).unwrap();
            for n in 1..=20u32 {
                let oracle = weigh(&counts[n as usize - 1], p);
                let got = pmf.prob(n as u64);
                assert!(
                    (got - oracle).abs() < 1e-12,
                    "p={p} m={m} n={n}: {got} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn first_run_pmf_matches_dp() {
    let mut cases: Vec<(u32, f64)> = TABLE_GRID.to_vec();
    cases.extend([
        (1, 0.05),
        (2, 0.2),
        (4, 0.5),
        (15, 0.8),
        (20, 0.95),
        (6, 0.35),
    ]);
    for (m, p) in cases {
        let pmf = pmf_consecutive(&env(p), m, 1e-12).unwrap();
        let horizon = pmf.support_end() as usize;
        let dp = run_length_dp(p, m as usize, horizon);
        for (n, &oracle) in dp.iter().enumerate() {
            let n = n as u64 + 1;
            assert!(
                (pmf.prob(n) - oracle).abs() < 1e-12,
                "p={p} m={m} n={n}: {} vs {oracle}",
                pmf.prob(n)
            );
        }
    }
}

#[test]
fn corrected_simplified_form_matches_series() {
    // A(z) = p^m z^m / (1 - q z sum_{k<m} p^k z^k) has non-negative
    // coefficients and must agree with the recurrence output.
    for (m, p) in TABLE_GRID {
        let pmf = pmf_consecutive(&env(p), m, 1e-14).unwrap();
        for z in [0.1, 0.3, 0.5, 0.7, 0.95] {
            let s: f64 = (0..m as i32).map(|k| (p * z).powi(k)).sum();
            let closed = (p * z).powi(m as i32) / (1.0 - (1.0 - p) * z * s);
            assert!((closed - pmf.eval(z)).abs() < 1e-12);
        }
    }
}

#[test]
fn negative_binomial_matches_enumeration_and_closed_form() {
    for m in 1..=4u32 {
        let counts = enumerate_mth_reward(m as usize, 16);
        for p in [0.3, 0.6, 0.9] {
            let pmf = pmf_total(&env(p), m, 1e-13).unwrap();
            for n in 1..=16u32 {
                let oracle = weigh(&counts[n as usize - 1], p);
                assert!((pmf.prob(n as u64) - oracle).abs() < 1e-12);
            }
        }
    }
    // Two-term check straddling the log-space switch.
    let (p, m) = (0.2f64, 12u32);
    let pmf = pmf_total(&env(p), m, 1e-12).unwrap();
    for n in [58u64, 61, 80, 120] {
        let mut c = 1.0f64;
        for i in 0..(m as u64 - 1) {
            c *= (n - 1 - i) as f64 / (i + 1) as f64;
        }
        let closed = c * p.powi(m as i32) * (1.0 - p).powi((n - m as u64) as i32);
        assert!((pmf.prob(n) - closed).abs() <= 1e-12 * closed.max(1e-300) + 1e-15);
    }
}

#[test]
fn pmf_moments_agree_with_closed_forms() {
    let tol = 1e-12;
    for (m, p) in TABLE_GRID {
        let e = env(p);
        let a = pmf_consecutive(&e, m, tol).unwrap();
        let z = pmf_total(&e, m, tol).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
        assert!(rel(a.mean(), mean_consecutive(&e, m).unwrap()) < 1e-6);
        assert!(rel(a.variance(), variance_consecutive(&e, m).unwrap()) < 1e-6);
        assert!(rel(z.mean(), mean_total(&e, m).unwrap()) < 1e-6);
        assert!(rel(z.variance(), variance_total(&e, m).unwrap()) < 1e-6);
    }
}

#[test]
fn recurrent_and_first_passage_generating_functions_agree() {
    for (m, p) in TABLE_GRID {
        let e = env(p);
        let pmf = pmf_consecutive(&e, m, 1e-14).unwrap();
        for z in [0.1, 0.3, 0.5, 0.7] {
            let b = eval_recurrent_gf(&e, m, z).unwrap();
            let via_b = (b - 1.0) / b;
            assert!((via_b - pmf.eval(z)).abs() < 1e-9, "m={m} p={p} z={z}");
            assert!((eval_first_passage_gf(&e, m, z).unwrap() - via_b).abs() < 1e-12);
        }
    }
}

#[test]
fn consecutive_mean_never_below_total_mean() {
    for step in 1..=19 {
        let p = step as f64 * 0.05;
        let e = env(p);
        for m in 1..=20 {
            let x = mean_consecutive(&e, m).unwrap();
            let z = mean_total(&e, m).unwrap();
            if m == 1 {
                assert!((x - z).abs() <= 1e-12 * z, "p={p}");
            } else {
                assert!(x > z, "p={p} m={m}: {x} <= {z}");
            }
        }
    }
}

#[test]
fn cost_ratio_growth() {
    for step in 1..=19 {
        let e = env(step as f64 * 0.05);
        let r2: Vec<f64> = (1..=20)
            .map(|m| {
                cost_ratio(&spec(RuleKind::TotalRewards, m), &e)
                    .unwrap()
                    .value
            })
            .collect();
        assert!(r2.windows(2).all(|w| w[0] == w[1]));
        for m in 1..20 {
            let r = |m| {
                cost_ratio(&spec(RuleKind::ConsecutiveRewards, m), &e)
                    .unwrap()
                    .value
            };
            assert!(r(m + 1) > r(m));
            assert!(r(m) >= 1.0);
        }
    }
}

#[test]
fn automaton_matches_naive_scan_on_every_short_stream() {
    for n in 1..=16u32 {
        for mask in 0..1u32 << n {
            let seq: Vec<_> = outcomes(mask, n).collect();
            for m in 1..=4u32 {
                for kind in RuleKind::ALL {
                    let mut a = RuleAutomaton::new(spec(kind, m));
                    let got = a.run(seq.iter().copied()).unwrap();
                    let oracle = if kind.is_consecutive() {
                        naive_first_run_end(&seq, kind.target(), m as usize)
                    } else {
                        naive_mth_occurrence(&seq, kind.target(), m as usize)
                    };
                    assert_eq!(got, oracle, "{kind} m={m} mask={mask:b} n={n}");
                }
            }
        }
    }
}

#[test]
fn reflection_on_closed_forms_is_exact() {
    for kind in [RuleKind::ConsecutivePunishments, RuleKind::TotalPunishments] {
        for step in 1..=19 {
            let p = step as f64 * 0.05;
            for m in 1..=12 {
                let s = spec(kind, m);
                let direct = stats_for_rule(&s, &env(p)).unwrap();
                let mirrored = stats_for_rule(&s.reflected(), &env(p).reflected()).unwrap();
                assert_eq!(direct, mirrored);
            }
        }
    }
}

fn outcome() -> impl Strategy<Value = TrialOutcome> {
    prop_oneof![Just(TrialOutcome::Reward), Just(TrialOutcome::Punishment)]
}

fn kind() -> impl Strategy<Value = RuleKind> {
    prop_oneof![
        Just(RuleKind::ConsecutiveRewards),
        Just(RuleKind::TotalRewards),
        Just(RuleKind::ConsecutivePunishments),
        Just(RuleKind::TotalPunishments),
    ]
}

proptest! {
    #[test]
    fn automaton_invariants(kind in kind(), m in 1u32..8, stream in prop::collection::vec(outcome(), 0..80)) {
        let mut a = RuleAutomaton::new(spec(kind, m));
        let mut last_progress = 0;
        for &o in &stream {
            if a.is_stopped() {
                prop_assert!(a.step(o).is_err());
                break;
            }
            a = a.step(o).unwrap();
            prop_assert!(a.progress() <= m);
            if !kind.is_consecutive() {
                prop_assert!(a.progress() >= last_progress);
            }
            last_progress = a.progress();
            prop_assert_eq!(a.is_stopped(), a.progress() == m);
            if let Some(t) = a.stopped_at() {
                prop_assert_eq!(t, a.trials_seen());
            }
        }
    }

    #[test]
    fn automaton_reflection(kind in kind(), m in 1u32..6, stream in prop::collection::vec(outcome(), 0..60)) {
        let s = spec(kind, m);
        let direct = RuleAutomaton::new(s).run(stream.iter().copied()).unwrap();
        let mirrored = RuleAutomaton::new(s.reflected())
            .run(stream.iter().map(|o| o.flipped()))
            .unwrap();
        prop_assert_eq!(direct, mirrored);
    }

    #[test]
    fn stop_time_at_least_m(kind in kind(), m in 1u32..30, p in 0.05f64..0.95) {
        let st = stats_for_rule(&spec(kind, m), &env(p)).unwrap();
        prop_assert!(st.mean >= m as f64 * (1.0 - 1e-12));
        prop_assert!(st.variance >= 0.0);
        prop_assert!((st.std * st.std - st.variance).abs() <= 1e-9 * st.variance.max(1.0));
    }

    #[test]
    fn pmf_mass_identity(m in 1u32..8, p in 0.3f64..0.95, tol_exp in 4i32..13) {
        let tol = 10f64.powi(-tol_exp);
        for pmf in [pmf_consecutive(&env(p), m, tol).unwrap(), pmf_total(&env(p), m, tol).unwrap()] {
            prop_assert!(pmf.truncation_mass() < tol);
            prop_assert!((pmf.stored_mass() + pmf.truncation_mass() - 1.0).abs() < 1e-12);
        }
    }
}
