//! Monte Carlo studies on the binary symmetric channel: error-rate
//! estimation, finite-size threshold bisection, the excess-margin
//! experiment, cover-versus-chain monotonicity, and boosted-certificate
//! round trips.
//!
//! Every trial is reproducible from (master seed, trial index) alone:
//! per-trial seeds come from hashing the pair, so results are identical
//! under any execution order or parallelism degree. Each decoded trial
//! also cross-checks the decoder against the certificate search; a
//! disagreement is a hard error, never a statistic.

use std::path::Path;

use num::Signed;
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bounds::sc_bound;
use crate::decoder::{lp_decode, ErrorPattern, LlrVector};
use crate::forest::extract_gmax;
use crate::graphs::{
    build_graph_cover, build_regular, build_spatially_coupled, derive_sc_from_cover,
    rng_from_seed, CodeParams, TannerGraph,
};
use crate::lp::{fmt_rat, rat_from_f64, rat_i, Rat};
use crate::witness::{
    extend_witness_with_boost, find_dual_witness, remove_cycles_and_normalize, restrict_witness,
    to_wdag, verify_dual_witness, BudgetVector,
};
use crate::{Error, Result};

/// Code family a trial draws from. `Fixed` reuses one explicit graph for
/// every trial (degenerate studies, CLI-supplied codes).
#[derive(Debug, Clone)]
pub enum Ensemble {
    Regular { d_v: usize, d_c: usize, n: usize },
    Sc(CodeParams),
    Gc(CodeParams),
    DerivedSc { params: CodeParams, cut: i64 },
    Fixed(TannerGraph),
}

impl Ensemble {
    pub fn build(&self, seed: u64) -> Result<TannerGraph> {
        match self {
            Ensemble::Regular { d_v, d_c, n } => build_regular(*d_v, *d_c, *n, seed),
            Ensemble::Sc(p) => build_spatially_coupled(p, seed),
            Ensemble::Gc(p) => build_graph_cover(p, seed),
            Ensemble::DerivedSc { params, cut } => {
                let cover = build_graph_cover(params, seed)?;
                Ok(derive_sc_from_cover(&cover, *cut)?.graph)
            }
            Ensemble::Fixed(g) => Ok(g.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub ensemble: Ensemble,
    /// Crossover probability; 0 is allowed for degenerate sanity runs.
    pub epsilon: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// Excess parameter for margin experiments.
    pub delta: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::invalid("crossover probability must lie in [0, 1/2)"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        if let Some(d) = self.delta {
            if !(0.0 < d && d < 1.0) {
                return Err(Error::invalid("excess parameter must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Per-trial seed: SHA-256 over (master, index, stream), truncated.
/// Streams separate independent random uses inside one trial.
pub fn trial_seed(master_seed: u64, trial_index: u64, stream: u8) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(trial_index.to_le_bytes());
    h.update([stream]);
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// i.i.d. Bernoulli(epsilon) bits from a counter-seeded generator.
pub fn sample_bsc(n: usize, epsilon: f64, seed: u64) -> Result<ErrorPattern> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("flip probability must lie in [0, 1]"));
    }
    let mut rng = rng_from_seed(seed);
    Ok(ErrorPattern::new((0..n).map(|_| rng.gen_bool(epsilon)).collect()))
}

fn digest_bits(bits: &[bool]) -> String {
    let mut h = Sha256::new();
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            byte |= (b as u8) << i;
        }
        h.update([byte]);
    }
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub code_seed: u64,
    pub error_digest: String,
    pub lp_success: bool,
    pub witness_margin: Rat,
    /// Largest weight of the flow view of the found certificate; zero
    /// when none exists.
    pub alpha_max: Rat,
    /// Outcomes per cut position when the trial also ran derivations.
    pub derived_outcomes: Vec<(i64, bool)>,
}

/// Decode and search for a certificate, insisting the two agree.
fn decode_and_witness(graph: &TannerGraph, llr: &LlrVector) -> Result<(bool, Rat, Rat)> {
    let decoded = lp_decode(graph, llr)?;
    let budgets = BudgetVector::from_llr(llr);
    let found = find_dual_witness(graph, &budgets, None)?;
    let has_witness = found.margin.is_positive();
    if decoded.success != has_witness {
        return Err(Error::Experiment(format!(
            "decoder and certificate search disagree: success = {}, margin = {}",
            decoded.success,
            fmt_rat(&found.margin)
        )));
    }
    let alpha = match &found.weighting {
        Some(w) => {
            let wdag = to_wdag(graph, w, &llr.gamma)?;
            let flow = remove_cycles_and_normalize(&wdag)?;
            extract_gmax(&flow)?.alpha_max
        }
        None => rat_i(0),
    };
    Ok((decoded.success, found.margin, alpha))
}

fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    let code_seed = trial_seed(config.master_seed, trial_index as u64, 0);
    let err_seed = trial_seed(config.master_seed, trial_index as u64, 1);
    let graph = config.ensemble.build(code_seed)?;
    let error = sample_bsc(graph.n_vars, config.epsilon, err_seed)?;
    let llr = error.llr();
    let (success, margin, alpha) = decode_and_witness(&graph, &llr)?;
    Ok(TrialRecord {
        trial_index,
        code_seed,
        error_digest: digest_bits(&error.bits),
        lp_success: success,
        witness_margin: margin,
        alpha_max: alpha,
        derived_outcomes: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub error_rate: f64,
    pub wilson_ci_95: (f64, f64),
    pub trials: usize,
}

/// Wilson score interval at 95%; valid near the endpoints where the
/// normal approximation on the raw proportion is not.
fn wilson_estimate(failures: usize, trials: usize) -> RateEstimate {
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    RateEstimate {
        error_rate: p,
        wilson_ci_95: ((center - half).max(0.0), (center + half).min(1.0)),
        trials,
    }
}

#[derive(Debug, Clone)]
pub struct RateReport {
    pub estimate: RateEstimate,
    pub records: Vec<TrialRecord>,
}

/// Decoding error rate over fresh code and error samples.
pub fn estimate_error_rate(config: &ExperimentConfig) -> Result<RateReport> {
    config.validate()?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<Result<Vec<_>>>()?;
    let failures = records.iter().filter(|r| !r.lp_success).count();
    Ok(RateReport { estimate: wilson_estimate(failures, config.trials), records })
}

#[derive(Debug, Clone)]
pub struct ThresholdEstimate {
    pub threshold: f64,
    pub target_rate: f64,
    /// Largest probed crossover with rate below target.
    pub below: (f64, RateEstimate),
    /// Smallest probed crossover with rate at or above target.
    pub above: (f64, RateEstimate),
    /// What this number is; the asymptotic threshold needs a size limit
    /// this experiment does not take.
    pub note: &'static str,
}

pub const THRESHOLD_NOTE: &str =
    "finite-size empirical estimate at fixed n, not the asymptotic threshold";

/// Bisect the crossover probability until the empirical error rate
/// crosses `target_rate`, shrinking the bracket to `tol`.
pub fn estimate_threshold(
    ensemble: &Ensemble,
    trials_per_point: usize,
    target_rate: f64,
    tol: f64,
    master_seed: u64,
) -> Result<ThresholdEstimate> {
    if !(0.0 < target_rate && target_rate < 1.0) {
        return Err(Error::invalid("target rate must lie in (0, 1)"));
    }
    if tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut point = 0u64;
    let mut eval = |eps: f64| -> Result<RateEstimate> {
        let config = ExperimentConfig {
            ensemble: ensemble.clone(),
            epsilon: eps,
            trials: trials_per_point,
            master_seed: trial_seed(master_seed, point, 2),
            delta: None,
        };
        point += 1;
        Ok(estimate_error_rate(&config)?.estimate)
    };
    let mut lo = 0.005;
    let mut hi = 0.49;
    let mut r_lo = eval(lo)?;
    let mut r_hi = eval(hi)?;
    if r_lo.error_rate >= target_rate {
        // Already failing at the smallest probe: the threshold sits at
        // or below resolution.
        return Ok(ThresholdEstimate {
            threshold: lo,
            target_rate,
            below: (0.0, wilson_estimate(0, trials_per_point.max(1))),
            above: (lo, r_lo),
            note: THRESHOLD_NOTE,
        });
    }
    if r_hi.error_rate < target_rate {
        return Err(Error::Experiment(format!(
            "no bracket: error rate {} at crossover {hi} stays below target {target_rate}",
            r_hi.error_rate
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let r = eval(mid)?;
        if r.error_rate >= target_rate {
            hi = mid;
            r_hi = r;
        } else {
            lo = mid;
            r_lo = r;
        }
    }
    Ok(ThresholdEstimate {
        threshold: 0.5 * (lo + hi),
        target_rate,
        below: (lo, r_lo),
        above: (hi, r_hi),
        note: THRESHOLD_NOTE,
    })
}

#[derive(Debug, Clone)]
pub struct ExcessReport {
    /// Fraction of trials admitting a certificate under budgets reduced
    /// by half the excess.
    pub observed_prob: f64,
    /// Predicted floor 1 - 2 q / delta from the error rate at the
    /// inflated crossover.
    pub bound: f64,
    pub q_hat: f64,
    pub eps_prime: f64,
    /// The floor is nonpositive, so the comparison says nothing.
    pub vacuous: bool,
    /// observed >= bound - 3 combined standard errors.
    pub holds: bool,
    pub slack: f64,
}

/// Compare the frequency of excess-margin certificates at crossover
/// epsilon against the floor implied by the error rate at the inflated
/// crossover eps + (1 - eps) delta, on one fixed code.
pub fn lp_excess_experiment(
    graph: &TannerGraph,
    epsilon: f64,
    delta: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ExcessReport> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::invalid("crossover probability must lie in [0, 1/2)"));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::invalid("excess parameter must lie in (0, 1)"));
    }
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let eps_prime = epsilon + (1.0 - epsilon) * delta;
    if eps_prime >= 1.0 {
        return Err(Error::invalid("inflated crossover leaves (0, 1)"));
    }
    let delta_rat =
        rat_from_f64(delta).ok_or_else(|| Error::invalid("excess parameter is not finite"))?;

    let with_margin: usize = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let e = sample_bsc(graph.n_vars, epsilon, trial_seed(master_seed, i as u64, 3))?;
            let llr = e.llr();
            let budgets = BudgetVector::with_excess(&llr, &delta_rat);
            let found = find_dual_witness(graph, &budgets, None)?;
            Ok(usize::from(found.margin.is_positive()))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let failures: usize = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<usize> {
            let e = sample_bsc(graph.n_vars, eps_prime, trial_seed(master_seed, i as u64, 4))?;
            let llr = e.llr();
            let (success, _, _) = decode_and_witness(graph, &llr)?;
            Ok(usize::from(!success))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let t = trials as f64;
    let observed = with_margin as f64 / t;
    let q_hat = failures as f64 / t;
    let bound = 1.0 - 2.0 * q_hat / delta;
    let se_obs = (observed * (1.0 - observed) / t).sqrt();
    let se_q = (q_hat * (1.0 - q_hat) / t).sqrt();
    let slack = 3.0 * (se_obs * se_obs + (2.0 / delta * se_q).powi(2)).sqrt();
    Ok(ExcessReport {
        observed_prob: observed,
        bound,
        q_hat,
        eps_prime,
        vacuous: bound <= 0.0,
        holds: observed >= bound - slack,
        slack,
    })
}

#[derive(Debug, Clone)]
pub struct MonoReport {
    pub trials: usize,
    pub cuts: Vec<i64>,
    /// Trials where the cover decoded but some derived chain did not.
    /// Any entry is a bug, not a statistic.
    pub implication_violations: Vec<String>,
    pub gc_rate: RateEstimate,
    pub sc_rate: RateEstimate,
    /// Chain rate at most cover rate plus three combined sigma.
    pub aggregate_ok: bool,
    pub records: Vec<TrialRecord>,
}

/// Per trial: decode on a fresh cover, then on every derived chain with
/// the restricted error. Cover success must imply chain success cut by
/// cut; aggregate rates are compared with slack.
pub fn gc_sc_monotonicity(
    params: &CodeParams,
    epsilon: f64,
    trials: usize,
    master_seed: u64,
) -> Result<MonoReport> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::invalid("crossover probability must lie in [0, 1/2)"));
    }
    let cuts: Vec<i64> = (-params.l..=params.l).collect();
    let results: Vec<(TrialRecord, Vec<bool>)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(TrialRecord, Vec<bool>)> {
            let code_seed = trial_seed(master_seed, i as u64, 5);
            let err_seed = trial_seed(master_seed, i as u64, 6);
            let cover = build_graph_cover(params, code_seed)?;
            let error = sample_bsc(cover.n_vars, epsilon, err_seed)?;
            let llr = error.llr();
            let (cover_success, margin, alpha) = decode_and_witness(&cover, &llr)?;
            let mut outcomes = Vec::with_capacity(cuts.len());
            let mut flags = Vec::with_capacity(cuts.len());
            for &cut in &cuts {
                let derived = derive_sc_from_cover(&cover, cut)?;
                let restricted =
                    ErrorPattern::new(derived.var_map.iter().map(|&cv| error.bits[cv]).collect());
                let (s, _, _) = decode_and_witness(&derived.graph, &restricted.llr())?;
                outcomes.push((cut, s));
                flags.push(s);
            }
            let record = TrialRecord {
                trial_index: i,
                code_seed,
                error_digest: digest_bits(&error.bits),
                lp_success: cover_success,
                witness_margin: margin,
                alpha_max: alpha,
                derived_outcomes: outcomes,
            };
            Ok((record, flags))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut violations = Vec::new();
    let mut gc_failures = 0usize;
    let mut sc_failures = 0usize;
    for (record, flags) in &results {
        if !record.lp_success {
            gc_failures += 1;
        }
        for (slot, &ok) in flags.iter().enumerate() {
            if !ok {
                sc_failures += 1;
                if record.lp_success {
                    violations.push(format!(
                        "trial {}: cover decoded but cut {} did not",
                        record.trial_index, cuts[slot]
                    ));
                }
            }
        }
    }
    let gc_rate = wilson_estimate(gc_failures, trials);
    let sc_rate = wilson_estimate(sc_failures, trials * cuts.len());
    let se_gc = (gc_rate.error_rate * (1.0 - gc_rate.error_rate) / trials as f64).sqrt();
    let se_sc = (sc_rate.error_rate * (1.0 - sc_rate.error_rate)
        / (trials * cuts.len()) as f64)
        .sqrt();
    let aggregate_ok = sc_rate.error_rate
        <= gc_rate.error_rate + 3.0 * (se_gc * se_gc + se_sc * se_sc).sqrt();
    Ok(MonoReport {
        trials,
        cuts,
        implication_violations: violations,
        gc_rate,
        sc_rate,
        aggregate_ok,
        records: results.into_iter().map(|(r, _)| r).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct RoundtripReport {
    /// Trials whose derived chain admitted a certificate.
    pub attempted: usize,
    /// Attempts that survived cap, boost, cover verification, and
    /// restriction back.
    pub verified: usize,
    pub skipped_no_witness: usize,
}

/// For each decodable chain trial: re-solve under the closed-form edge
/// cap, lift the certificate to the cover with a boosted budget on the
/// removed variables, verify it there, restrict it back, and verify
/// again. Every step must succeed.
pub fn boost_roundtrip(
    params: &CodeParams,
    cut: i64,
    epsilon: f64,
    trials: usize,
    master_seed: u64,
) -> Result<RoundtripReport> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::invalid("crossover probability must lie in [0, 1/2)"));
    }
    let mut attempted = 0usize;
    let mut verified = 0usize;
    let mut skipped = 0usize;
    for i in 0..trials {
        let cover = build_graph_cover(params, trial_seed(master_seed, i as u64, 7))?;
        let derived = derive_sc_from_cover(&cover, cut)?;
        let error = sample_bsc(
            derived.graph.n_vars,
            epsilon,
            trial_seed(master_seed, i as u64, 8),
        )?;
        let llr = error.llr();
        let budgets = BudgetVector::from_llr(&llr);
        let uncapped = find_dual_witness(&derived.graph, &budgets, None)?;
        if !uncapped.margin.is_positive() {
            skipped += 1;
            continue;
        }
        attempted += 1;
        let cap = rat_from_f64(sc_bound(params.d_v, params.d_c, derived.graph.n_vars)?)
            .ok_or_else(|| Error::Experiment("edge cap is not finite".into()))?;
        let capped = find_dual_witness(&derived.graph, &budgets, Some(&cap))?;
        if !capped.margin.is_positive() {
            return Err(Error::Experiment(format!(
                "trial {i}: certificate vanished under the closed-form cap {}",
                fmt_rat(&cap)
            )));
        }
        let w = capped.weighting.as_ref().expect("positive margin carries a weighting");
        let boost = rat_i(params.d_v as i64) * &cap + rat_i(1);
        let extended = extend_witness_with_boost(&derived, &cover, w, &boost)?;
        // Lift the error: surviving variables keep their bits, removed
        // ones are unflipped.
        let mut cover_gamma = vec![rat_i(1); cover.n_vars];
        for (dv, &cv) in derived.var_map.iter().enumerate() {
            cover_gamma[cv] = llr.gamma[dv].clone();
        }
        let cover_llr = LlrVector::new(cover_gamma);
        let boosted = BudgetVector::with_boost(&cover_llr, &derived.special_vars, &boost);
        let report = verify_dual_witness(&cover, &boosted, &extended)?;
        if !report.is_valid() {
            return Err(Error::Experiment(format!(
                "trial {i}: lifted certificate fails on the cover: {:?}",
                report.violations
            )));
        }
        let back = restrict_witness(&derived, &cover, &extended)?;
        let report = verify_dual_witness(&derived.graph, &budgets, &back)?;
        if !report.is_valid() {
            return Err(Error::Experiment(format!(
                "trial {i}: restricted certificate fails on the chain: {:?}",
                report.violations
            )));
        }
        verified += 1;
    }
    Ok(RoundtripReport { attempted, verified, skipped_no_witness: skipped })
}

/// CSV with one row per trial: trial, seed, eps, success, margin,
/// alpha_max. Rationals are written exactly, integers without a slash.
pub fn write_trials_csv(path: &Path, epsilon: f64, records: &[TrialRecord]) -> Result<()> {
    let mut out = String::from("trial,seed,eps,success,margin,alpha_max\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.trial_index, r.code_seed, epsilon, r.lp_success, r.witness_margin, r.alpha_max
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::GraphKind;
    use crate::lp::rat;

    fn toy_graph() -> TannerGraph {
        // H = [1 1 0; 0 1 1]
        TannerGraph::from_edges(
            GraphKind::Custom,
            3,
            2,
            &[(0, 0), (1, 0), (1, 1), (2, 1)],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn bsc_sampler_basics() {
        assert_eq!(sample_bsc(50, 0.0, 7).unwrap().weight(), 0);
        assert_eq!(sample_bsc(50, 1.0, 7).unwrap().weight(), 50);
        let e = sample_bsc(10_000, 0.1, 42).unwrap();
        let mean = e.weight() as f64 / 10_000.0;
        assert!((mean - 0.1).abs() < 0.009, "mean {mean} outside 3 sigma");
        assert_eq!(e, sample_bsc(10_000, 0.1, 42).unwrap());
        assert_ne!(e, sample_bsc(10_000, 0.1, 43).unwrap());
        assert!(sample_bsc(5, 1.5, 0).is_err());
    }

    #[test]
    fn seeds_are_stream_separated() {
        let a = trial_seed(1, 2, 0);
        let b = trial_seed(1, 2, 1);
        let c = trial_seed(1, 3, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, trial_seed(1, 2, 0));
    }

    #[test]
    fn error_free_channel_decodes_everything() {
        let config = ExperimentConfig {
            ensemble: Ensemble::Regular { d_v: 3, d_c: 6, n: 12 },
            epsilon: 0.0,
            trials: 10,
            master_seed: 9,
            delta: None,
        };
        let report = estimate_error_rate(&config).unwrap();
        assert_eq!(report.estimate.error_rate, 0.0);
        assert!(report.records.iter().all(|r| r.lp_success));
        assert!(report.records.iter().all(|r| r.witness_margin.is_positive()));
        let (lo, hi) = report.estimate.wilson_ci_95;
        assert!(lo <= 0.0 && hi > 0.0 && hi < 0.3);
    }

    #[test]
    fn noisy_channel_mostly_fails_small_codes() {
        let config = ExperimentConfig {
            ensemble: Ensemble::Regular { d_v: 3, d_c: 6, n: 30 },
            epsilon: 0.45,
            trials: 60,
            master_seed: 11,
            delta: None,
        };
        let report = estimate_error_rate(&config).unwrap();
        assert!(
            report.estimate.error_rate > 0.9,
            "rate {} not near 1",
            report.estimate.error_rate
        );
    }

    #[test]
    fn identical_configs_reproduce_records() {
        let config = ExperimentConfig {
            ensemble: Ensemble::Regular { d_v: 3, d_c: 6, n: 18 },
            epsilon: 0.08,
            trials: 12,
            master_seed: 1234,
            delta: None,
        };
        let a = estimate_error_rate(&config).unwrap();
        let b = estimate_error_rate(&config).unwrap();
        assert_eq!(a.records, b.records);
        // Records are tied to (seed, index), not execution order.
        let direct = run_trial(&config, 5).unwrap();
        assert_eq!(direct, a.records[5]);
    }

    #[test]
    fn rate_is_monotone_in_crossover() {
        let base = ExperimentConfig {
            ensemble: Ensemble::Regular { d_v: 3, d_c: 6, n: 12 },
            epsilon: 0.01,
            trials: 50,
            master_seed: 77,
            delta: None,
        };
        let low = estimate_error_rate(&base).unwrap().estimate;
        let high = estimate_error_rate(&ExperimentConfig { epsilon: 0.2, ..base }).unwrap().estimate;
        let se = |r: &RateEstimate| {
            (r.error_rate * (1.0 - r.error_rate) / r.trials as f64).sqrt()
        };
        let slack = 3.0 * (se(&low).powi(2) + se(&high).powi(2)).sqrt();
        assert!(low.error_rate <= high.error_rate + slack);
    }

    #[test]
    fn wilson_interval_contains_rate() {
        for (k, n) in [(0usize, 20usize), (20, 20), (3, 20), (10, 40)] {
            let r = wilson_estimate(k, n);
            assert!(r.wilson_ci_95.0 <= r.error_rate && r.error_rate <= r.wilson_ci_95.1);
            assert!(r.wilson_ci_95.0 >= 0.0 && r.wilson_ci_95.1 <= 1.0);
        }
        assert_eq!(wilson_estimate(0, 20).error_rate, 0.0);
        assert_eq!(wilson_estimate(20, 20).error_rate, 1.0);
    }

    #[test]
    fn degenerate_code_threshold_collapses() {
        // One unchecked variable: any flip defeats decoding, so the
        // finite-size threshold estimate sits at the bottom of the grid.
        let lonely =
            TannerGraph::from_edges(GraphKind::Custom, 1, 0, &[], None, None).unwrap();
        let est = estimate_threshold(&Ensemble::Fixed(lonely), 120, 0.02, 0.05, 5).unwrap();
        assert!(est.threshold < 0.1, "threshold {} should be near zero", est.threshold);
        assert_eq!(est.note, THRESHOLD_NOTE);
    }

    #[test]
    fn threshold_is_reproducible() {
        let ens = Ensemble::Regular { d_v: 3, d_c: 6, n: 12 };
        let a = estimate_threshold(&ens, 24, 0.5, 0.13, 21).unwrap();
        let b = estimate_threshold(&ens, 24, 0.5, 0.13, 21).unwrap();
        assert_eq!(a.threshold, b.threshold);
        assert!(a.threshold > 0.0 && a.threshold < 0.5);
        assert!(a.below.0 <= a.threshold && a.threshold <= a.above.0);
    }

    #[test]
    fn excess_inequality_holds_on_toy_code() {
        let g = toy_graph();
        let report = lp_excess_experiment(&g, 0.05, 0.2, 400, 31).unwrap();
        assert!(report.holds, "observed {} < bound {} - slack {}",
            report.observed_prob, report.bound, report.slack);
        assert!((report.eps_prime - 0.24).abs() < 1e-12);
        assert!(lp_excess_experiment(&g, 0.05, 0.0, 10, 0).is_err());
    }

    #[test]
    fn excess_bound_saturates_in_clean_regime() {
        let g = toy_graph();
        let report = lp_excess_experiment(&g, 0.0, 0.005, 200, 8).unwrap();
        // At this seed no trial produces a multi-bit flip, so the error
        // side is empty and the floor is exactly 1.
        assert_eq!(report.q_hat, 0.0);
        assert_eq!(report.bound, 1.0);
        assert_eq!(report.observed_prob, 1.0);
        assert!(!report.vacuous && report.holds);
    }

    #[test]
    fn excess_flags_vacuous_bounds() {
        // Tiny delta against a noisy channel: the floor goes negative.
        let g = toy_graph();
        let report = lp_excess_experiment(&g, 0.4, 0.05, 120, 3).unwrap();
        assert!(report.bound <= 0.0);
        assert!(report.vacuous && report.holds);
    }

    #[test]
    fn cover_success_implies_chain_success() {
        let params = CodeParams::new(3, 2, 2, 2).unwrap();
        let report = gc_sc_monotonicity(&params, 0.05, 40, 17).unwrap();
        assert_eq!(report.cuts, vec![-2, -1, 0, 1, 2]);
        assert!(
            report.implication_violations.is_empty(),
            "{:?}",
            report.implication_violations
        );
        assert!(report.aggregate_ok);
        assert_eq!(report.records.len(), 40);
        assert!(report.records.iter().all(|r| r.derived_outcomes.len() == 5));
    }

    #[test]
    fn boost_roundtrip_verifies_every_attempt() {
        let params = CodeParams::new(3, 2, 2, 2).unwrap();
        let report = boost_roundtrip(&params, 0, 0.05, 30, 23).unwrap();
        assert!(report.attempted > 0, "no decodable trials sampled");
        assert_eq!(report.verified, report.attempted);
        assert_eq!(report.attempted + report.skipped_no_witness, 30);

        // A boost below the required margin is rejected up front; even
        // the zero weighting needs a strictly positive boost.
        let cover = build_graph_cover(&params, 1).unwrap();
        let derived = derive_sc_from_cover(&cover, 0).unwrap();
        let llr = ErrorPattern::zeros(derived.graph.n_vars).llr();
        let found =
            find_dual_witness(&derived.graph, &BudgetVector::from_llr(&llr), None).unwrap();
        let w = found.weighting.unwrap();
        let err = extend_witness_with_boost(&derived, &cover, &w, &rat_i(0));
        assert!(err.is_err());
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.csv");
        let records = vec![TrialRecord {
            trial_index: 0,
            code_seed: 99,
            error_digest: "ab".into(),
            lp_success: true,
            witness_margin: rat(1, 3),
            alpha_max: rat_i(2),
            derived_outcomes: Vec::new(),
        }];
        write_trials_csv(&path, 0.05, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("trial,seed,eps,success,margin,alpha_max"));
        assert_eq!(lines.next(), Some("0,99,0.05,true,1/3,2"));
        assert_eq!(lines.next(), None);
    }
}
