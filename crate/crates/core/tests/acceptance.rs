//! Release gate: ten numbered checks, each a single test whose pass or
//! fail line is the verdict for that check. Tolerances are pinned in
//! the assertions; exact checks carry zero tolerance. Sampling is
//! deterministic throughout, so every verdict is reproducible.

use lpdec::bounds::{check_bound_on_instance, unified_opt, unified_opt_reference};
use lpdec::decoder::{lp_decode, parity_cone_extreme_rays, ErrorPattern, LlrVector};
use lpdec::experiments::{
    estimate_threshold, gc_sc_monotonicity, lp_excess_experiment, sample_bsc, trial_seed,
    Ensemble, ExperimentConfig,
};
use lpdec::forest::{expand_to_forest, extract_gmax, verify_forest_properties, SingleSinkWdag};
use lpdec::graphs::{build_regular, build_spatially_coupled, CodeParams, GraphKind, TannerGraph};
use lpdec::lp::{fmt_rat, rat, rat_i, rat_to_f64, Rat};
use lpdec::tightness::{build_tight_instance_for_y, certify_lower_bound, explicit_hyperflow};
use lpdec::witness::{
    find_dual_witness, remove_cycles_and_normalize_instrumented, to_wdag, verify_dual_witness,
    verify_hyperflow, BudgetVector, EdgeWeighting,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random small code: regular for even draws, custom bipartite
/// otherwise. Sizes stay at or below 15 variables.
fn sample_small_code(rng: &mut ChaCha8Rng) -> TannerGraph {
    match rng.gen_range(0..3u8) {
        0 => build_regular(3, 6, 12, rng.gen()).expect("regular sample"),
        1 => {
            let n = *[8usize, 12].iter().nth(rng.gen_range(0..2)).unwrap();
            build_regular(3, 4, n, rng.gen()).expect("regular sample")
        }
        _ => loop {
            let n = rng.gen_range(3..=15usize);
            let n_checks = rng.gen_range(1..=(n / 2).max(1));
            let mut edges = Vec::new();
            for c in 0..n_checks {
                let deg = rng.gen_range(2..=n.min(5));
                let mut vars: Vec<usize> = (0..n).collect();
                for i in 0..deg {
                    let j = rng.gen_range(i..n);
                    vars.swap(i, j);
                }
                for &v in &vars[..deg] {
                    edges.push((v, c));
                }
            }
            if let Ok(g) = TannerGraph::from_edges(GraphKind::Custom, n, n_checks, &edges, None, None)
            {
                return g;
            }
        },
    }
}

fn random_error(rng: &mut ChaCha8Rng, n: usize, eps: f64) -> ErrorPattern {
    ErrorPattern::new((0..n).map(|_| rng.gen_bool(eps)).collect())
}

/// Check 1: the primal decoder and the certificate search must agree on
/// every instance, with exact arithmetic and zero tolerance.
#[test]
fn c01_decoder_agrees_with_certificate_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0_0001);
    let eps_grid = [0.0, 0.1, 0.2, 0.35];
    let mut successes = 0usize;
    let mut failures = 0usize;
    const INSTANCES: usize = 210;
    for i in 0..INSTANCES {
        let graph = sample_small_code(&mut rng);
        let error = random_error(&mut rng, graph.n_vars, eps_grid[i % eps_grid.len()]);
        let llr = error.llr();
        let decoded = lp_decode(&graph, &llr).expect("decode");
        let found = find_dual_witness(&graph, &BudgetVector::from_llr(&llr), None).expect("search");
        let has_witness = found.margin > rat_i(0);
        assert_eq!(
            decoded.success, has_witness,
            "instance {i}: decoder said {}, certificate margin {}",
            decoded.success,
            fmt_rat(&found.margin)
        );
        if decoded.success {
            successes += 1;
        } else {
            failures += 1;
        }
    }
    assert_eq!(successes + failures, INSTANCES);
    // Both outcomes must actually appear or the check is toothless.
    assert!(successes >= 20 && failures >= 20, "{successes} successes, {failures} failures");
    println!("check 1: {INSTANCES}/{INSTANCES} instances agree ({successes} decodable)");
}

/// Two-regular ring code whose natural certificate orients into one big
/// directed cycle, forcing cancellation work.
fn ring_instance(m: usize, rng: &mut ChaCha8Rng) -> (TannerGraph, EdgeWeighting) {
    let edges: Vec<(usize, usize)> =
        (0..m).flat_map(|i| [(i, i), ((i + 1) % m, i)]).collect();
    let graph = TannerGraph::from_edges(GraphKind::Custom, m, m, &edges, None, None).expect("ring");
    let mut w = EdgeWeighting { w: Default::default() };
    for i in 0..m {
        let b = rat(rng.gen_range(1..=4), 8);
        let a = &b + rat(rng.gen_range(0..=2), 8);
        w.w.insert((i, i), a);
        w.w.insert(((i + 1) % m, i), -b);
    }
    (graph, w)
}

/// Check 2: cycle cancellation plus per-check normalization must keep
/// the certificate valid after every iteration and end in an acyclic
/// flow that passes pattern verification. Exact, every instance.
#[test]
fn c02_normalization_keeps_certificates_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0_0002);
    let mut with_witness = 0usize;
    let mut total_iterations = 0usize;

    // Searched certificates from the same ensembles as check 1.
    for i in 0..140 {
        let graph = sample_small_code(&mut rng);
        let error = random_error(&mut rng, graph.n_vars, [0.0, 0.1, 0.2][i % 3]);
        let llr = error.llr();
        let budgets = BudgetVector::from_llr(&llr);
        let found = find_dual_witness(&graph, &budgets, None).expect("search");
        let Some(w) = found.weighting else { continue };
        with_witness += 1;
        let wdag = to_wdag(&graph, &w, &llr.gamma).expect("orient");
        let (flow, iters) =
            remove_cycles_and_normalize_instrumented(&wdag, &graph, &budgets).expect("normalize");
        total_iterations += iters;
        assert!(flow.is_acyclic(), "instance {i}: output has a directed cycle");
        let report =
            verify_hyperflow(&graph, &budgets, &flow.to_weighting(&graph)).expect("verify");
        assert!(report.is_valid(), "instance {i}: {:?}", report.violations);
    }

    // Hand-built cyclic certificates on ring codes.
    for i in 0..40 {
        let (graph, w) = ring_instance(3 + i % 6, &mut rng);
        let llr = ErrorPattern::zeros(graph.n_vars).llr();
        let budgets = BudgetVector::from_llr(&llr);
        let check = verify_dual_witness(&graph, &budgets, &w).expect("precheck");
        assert!(check.is_valid(), "ring {i} is not a certificate: {:?}", check.violations);
        with_witness += 1;
        let wdag = to_wdag(&graph, &w, &llr.gamma).expect("orient");
        let (flow, iters) =
            remove_cycles_and_normalize_instrumented(&wdag, &graph, &budgets).expect("normalize");
        assert!(iters >= 1, "ring {i} should need at least one cancellation");
        total_iterations += iters;
        assert!(flow.is_acyclic());
        let report =
            verify_hyperflow(&graph, &budgets, &flow.to_weighting(&graph)).expect("verify");
        assert!(report.is_valid(), "ring {i}: {:?}", report.violations);
    }

    assert!(with_witness >= 100, "only {with_witness} certified instances sampled");
    assert!(total_iterations >= 40, "cancellation loop barely exercised: {total_iterations}");
    println!("check 2: {with_witness} instances normalized, {total_iterations} cancellations");
}

/// Check 3: forest expansion must satisfy all replication guarantees on
/// at least 100 single-sink views of at most 12 nodes, including the
/// exhaustive directed-path comparison.
#[test]
fn c03_forest_expansion_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0_0003);
    let mut verified = 0usize;
    let mut attempts = 0usize;
    while verified < 100 && attempts < 3000 {
        attempts += 1;
        let n = rng.gen_range(4..=8usize);
        let n_checks = rng.gen_range(1..=3usize);
        let mut edges = Vec::new();
        for c in 0..n_checks {
            let deg = rng.gen_range(2..=n.min(4));
            let mut vars: Vec<usize> = (0..n).collect();
            for i in 0..deg {
                let j = rng.gen_range(i..n);
                vars.swap(i, j);
            }
            for &v in &vars[..deg] {
                edges.push((v, c));
            }
        }
        let Ok(graph) = TannerGraph::from_edges(GraphKind::Custom, n, n_checks, &edges, None, None)
        else {
            continue;
        };
        let error = random_error(&mut rng, n, 0.25);
        if error.weight() == 0 {
            continue;
        }
        let llr = error.llr();
        let budgets = BudgetVector::from_llr(&llr);
        let found = find_dual_witness(&graph, &budgets, None).expect("search");
        let Some(w) = found.weighting else { continue };
        let wdag = to_wdag(&graph, &w, &llr.gamma).expect("orient");
        let (flow, _) =
            remove_cycles_and_normalize_instrumented(&wdag, &graph, &budgets).expect("normalize");
        let gmax: SingleSinkWdag = extract_gmax(&flow).expect("extract");
        if gmax.sink.is_none() || gmax.n_nodes() > 12 {
            continue;
        }
        let forest = expand_to_forest(&gmax, 100_000).expect("expand");
        let report = verify_forest_properties(&gmax, &forest).expect("verify");
        assert!(report.is_valid(), "attempt {attempts}: {:?}", report.violations);
        assert!(report.paths_checked, "attempt {attempts}: path comparison skipped");
        verified += 1;
    }
    assert!(verified >= 100, "only {verified} views verified in {attempts} attempts");
    println!("check 3: {verified} single-sink views expanded and verified");
}

/// Check 4: the closed-form profile optimizer must match exhaustive
/// search on the full grid, with the maximizer unique and the value
/// within its analytic ceiling. Runtime target: under ten minutes.
#[test]
fn c04_profile_optimizer_matches_exhaustive_search() {
    let mut cells = 0usize;
    for lambda in 1..=4u64 {
        for beta in [6u64, 10] {
            for m in lambda..=200 {
                let u = unified_opt(lambda, beta, 6, m).expect("closed form");
                let (best, arg, count) =
                    unified_opt_reference(lambda, beta, 6, m, true).expect("search");
                assert_eq!(
                    u.f_value, best,
                    "(lambda={lambda}, beta={beta}, m={m}): closed form {} vs search {}",
                    fmt_rat(&u.f_value),
                    fmt_rat(&best)
                );
                let mut trimmed = u.t_prime.clone();
                while trimmed.last() == Some(&0) {
                    trimmed.pop();
                }
                assert_eq!(trimmed, arg, "(lambda={lambda}, beta={beta}, m={m}): maximizer");
                assert_eq!(count, 1, "(lambda={lambda}, beta={beta}, m={m}): not unique");
                assert!(
                    rat_to_f64(&u.f_value) <= u.closed_form_bound + 1e-9,
                    "(lambda={lambda}, beta={beta}, m={m}): {} above ceiling {}",
                    fmt_rat(&u.f_value),
                    u.closed_form_bound
                );
                cells += 1;
            }
        }
    }
    assert_eq!(cells, 4 * 2 * 200 - (1 + 2 + 3) * 2);
    println!("check 4: {cells} grid cells agree with exhaustive search");
}

/// Collect a decodable instance: sample until the certificate search
/// succeeds, then return the normalized flow weighting.
fn decodable_flow(
    graph: &TannerGraph,
    eps: f64,
    master: u64,
) -> Option<(LlrVector, EdgeWeighting)> {
    for attempt in 0..20u64 {
        let error = sample_bsc(graph.n_vars, eps, trial_seed(master, attempt, 11)).expect("bsc");
        if error.weight() == 0 {
            continue;
        }
        let llr = error.llr();
        let budgets = BudgetVector::from_llr(&llr);
        let found = find_dual_witness(graph, &budgets, None).expect("search");
        let Some(w) = found.weighting else { continue };
        let wdag = to_wdag(graph, &w, &llr.gamma).expect("orient");
        let (flow, _) =
            remove_cycles_and_normalize_instrumented(&wdag, graph, &budgets).expect("normalize");
        return Some((llr, flow.to_weighting(graph)));
    }
    None
}

/// Check 5: certificate edge weights stay under the proved growth laws,
/// 4 n^0.30103 for regular codes and 88.2 n^0.6542 for coupled chains.
/// Comparison in the log domain at tolerance 1e-9 with certified
/// escalation near ties; zero violations allowed.
#[test]
fn c05_edge_weight_bounds_hold() {
    // Regular side: 500 decodable instances across a size ladder.
    let ladder: &[(usize, usize, f64)] = &[
        (12, 120, 0.08),
        (18, 100, 0.08),
        (24, 80, 0.07),
        (30, 60, 0.07),
        (48, 50, 0.05),
        (60, 40, 0.05),
        (96, 30, 0.03),
        (120, 16, 0.03),
        (180, 3, 0.02),
        (240, 1, 0.02),
    ];
    let mut checked = 0usize;
    let mut max_ratio = 0.0f64;
    let mut escalations = 0usize;
    for (slot, &(n, quota, eps)) in ladder.iter().enumerate() {
        let mut collected = 0usize;
        let mut seed_idx = 0u64;
        while collected < quota {
            let master = trial_seed(0xACC0_0005 + slot as u64, seed_idx, 0);
            seed_idx += 1;
            assert!(seed_idx < 40 * quota as u64 + 200, "sampling stalled at n={n}");
            let graph = build_regular(3, 6, n, master).expect("code");
            let Some((llr, flow)) = decodable_flow(&graph, eps, master) else { continue };
            let check = check_bound_on_instance(&graph, &llr, &flow).expect("bound");
            assert!(
                check.ok,
                "n={n}: flow weight {} breaks the bound {}",
                fmt_rat(&check.alpha),
                check.bound_value
            );
            if check.escalated {
                escalations += 1;
            }
            if check.bound_value > 0.0 {
                max_ratio = max_ratio.max(rat_to_f64(&check.alpha) / check.bound_value);
            }
            collected += 1;
            checked += 1;
        }
    }
    assert!(checked >= 500, "only {checked} regular instances checked");

    // Coupled side: 200 decodable chain instances.
    let mut sc_checked = 0usize;
    let mut combo = 0u64;
    'outer: for round in 0..40u64 {
        for l in 1..=6i64 {
            for m in [2usize, 4] {
                if sc_checked >= 200 {
                    break 'outer;
                }
                let params = CodeParams::new(3, 2, l, m).expect("params");
                let master = trial_seed(0xACC0_5005, combo, 0);
                combo += 1;
                let _ = round;
                let graph = build_spatially_coupled(&params, master).expect("chain");
                let Some((llr, flow)) = decodable_flow(&graph, 0.05, master) else { continue };
                let check = check_bound_on_instance(&graph, &llr, &flow).expect("bound");
                assert!(
                    check.ok,
                    "chain L={l} M={m}: flow weight {} breaks the bound {}",
                    fmt_rat(&check.alpha),
                    check.bound_value
                );
                if check.escalated {
                    escalations += 1;
                }
                if check.bound_value > 0.0 {
                    max_ratio = max_ratio.max(rat_to_f64(&check.alpha) / check.bound_value);
                }
                sc_checked += 1;
            }
        }
    }
    assert!(sc_checked >= 200, "only {sc_checked} chain instances checked");
    println!(
        "check 5: {checked} regular + {sc_checked} coupled instances under their bounds \
         (max ratio {max_ratio:.4}, {escalations} escalations)"
    );
}

/// Check 6: the explicit family admits a verified certificate at slack
/// 1/4 and an LP-certified minimum max-weight of at least 2^y for
/// y in {1, 2}.
#[test]
fn c06_tight_family_certified() {
    for (y, floor) in [(1usize, 2i64), (2, 4)] {
        let inst = build_tight_instance_for_y(3, 4, y).expect("build");
        let eps = rat(1, 4);
        let w = explicit_hyperflow(&inst, &eps).expect("explicit weights");
        let llr = inst.gamma_n.clone();
        let budgets = BudgetVector::from_llr(&llr);
        let report = verify_dual_witness(&inst.graph, &budgets, &w).expect("verify");
        assert!(report.is_valid(), "y={y}: {:?}", report.violations);
        assert_eq!(report.min_slack, eps, "y={y}: slack is not uniform at 1/4");
        let wdag = to_wdag(&inst.graph, &w, &llr.gamma).expect("orient");
        let (flow, _) =
            remove_cycles_and_normalize_instrumented(&wdag, &inst.graph, &budgets).expect("flow");
        let hf = verify_hyperflow(&inst.graph, &budgets, &flow.to_weighting(&inst.graph))
            .expect("pattern");
        assert!(hf.is_valid(), "y={y}: {:?}", hf.violations);

        let cert = certify_lower_bound(&inst).expect("certify");
        assert!(
            cert.min_max_weight >= rat_i(floor),
            "y={y}: certified {} below floor {floor}",
            fmt_rat(&cert.min_max_weight)
        );
        println!(
            "check 6 (y={y}): certified min-max weight {} >= {floor}",
            fmt_rat(&cert.min_max_weight)
        );
    }
}

/// Check 7: the frequency of certificates with uniform excess delta/2
/// must sit above 1 - 2q/delta within three combined standard errors,
/// at the pinned configuration (eps 0.05, delta 0.2, 2000 trials) and
/// at a companion configuration where the floor is substantive.
#[test]
fn c07_excess_margin_floor() {
    let toy = TannerGraph::from_edges(
        GraphKind::Custom,
        3,
        2,
        &[(0, 0), (1, 0), (1, 1), (2, 1)],
        None,
        None,
    )
    .expect("toy code");

    let pinned = lp_excess_experiment(&toy, 0.05, 0.2, 2000, 0xACC0_0007).expect("pinned run");
    assert!(
        pinned.holds,
        "pinned: observed {} < floor {} - slack {}",
        pinned.observed_prob, pinned.bound, pinned.slack
    );

    let companion = lp_excess_experiment(&toy, 0.001, 0.1, 2000, 0xACC0_0017).expect("companion");
    assert!(!companion.vacuous, "companion floor {} is vacuous", companion.bound);
    assert!(companion.bound > 0.3, "companion floor {} too weak to test", companion.bound);
    assert!(
        companion.holds,
        "companion: observed {} < floor {} - slack {}",
        companion.observed_prob, companion.bound, companion.slack
    );
    println!(
        "check 7: pinned observed {:.3} vs floor {:.3} (vacuous: {}); \
         companion observed {:.3} vs floor {:.3}",
        pinned.observed_prob, pinned.bound, pinned.vacuous, companion.observed_prob,
        companion.bound
    );
}

/// Check 8: whenever the cover decodes, every derived chain must decode
/// the restricted error, across 200 trials and all cuts; zero
/// exceptions. Aggregate chain rate at most cover rate plus 3 sigma.
#[test]
fn c08_cover_success_carries_to_chains() {
    let mut trials_total = 0usize;
    for (slot, (l, m)) in [(2i64, 2usize), (2, 4), (3, 2), (3, 4)].into_iter().enumerate() {
        let params = CodeParams::new(3, 2, l, m).expect("params");
        let report =
            gc_sc_monotonicity(&params, 0.05, 50, 0xACC0_0008 + slot as u64).expect("run");
        assert!(
            report.implication_violations.is_empty(),
            "L={l} M={m}: {:?}",
            report.implication_violations
        );
        assert!(report.aggregate_ok, "L={l} M={m}: chain rate above cover rate plus 3 sigma");
        assert_eq!(report.cuts.len(), (2 * l + 1) as usize);
        trials_total += report.trials;
    }
    assert!(trials_total >= 200);
    println!("check 8: {trials_total} cover trials, zero implication exceptions");
}

/// Check 9: the nonnegative cone cut out by the leave-one-out
/// inequalities has exactly the weight-two 0/1 vectors as extreme rays,
/// for dimensions 2 through 7.
#[test]
fn c09_parity_cone_rays_are_weight_two() {
    for m in 2..=7usize {
        let rays = parity_cone_extreme_rays(m).expect("rays");
        let mut expected: Vec<Vec<Rat>> = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                let mut v = vec![rat_i(0); m];
                v[i] = rat_i(1);
                v[j] = rat_i(1);
                expected.push(v);
            }
        }
        let mut got = rays.clone();
        got.sort();
        expected.sort();
        assert_eq!(got, expected, "dimension {m}");
    }
    println!("check 9: dimensions 2..=7 all match the weight-two set");
}

/// Check 10: finite-size threshold estimates for a cover ensemble and
/// its derived chain must be statistically compatible: same-grid
/// bisection brackets intersect, or each ensemble's error rate at the
/// other's threshold has a Wilson interval containing the target.
#[test]
fn c10_cover_and_chain_thresholds_agree() {
    let params = CodeParams::new(3, 2, 3, 4).expect("params");
    let gc = Ensemble::Gc(params.clone());
    let sc = Ensemble::DerivedSc { params, cut: 0 };
    let est_gc = estimate_threshold(&gc, 60, 0.5, 0.04, 424242).expect("cover threshold");
    let est_sc = estimate_threshold(&sc, 60, 0.5, 0.04, 424242).expect("chain threshold");

    let brackets_touch = est_gc.below.0 <= est_sc.above.0 && est_sc.below.0 <= est_gc.above.0;
    let agree = brackets_touch || {
        let cross = |ens: &Ensemble, at: f64, seed: u64| {
            let config = ExperimentConfig {
                ensemble: ens.clone(),
                epsilon: at,
                trials: 80,
                master_seed: seed,
                delta: None,
            };
            lpdec::experiments::estimate_error_rate(&config).expect("cross rate").estimate
        };
        let gc_at_sc = cross(&gc, est_sc.threshold, 0xACC0_0010);
        let sc_at_gc = cross(&sc, est_gc.threshold, 0xACC0_0020);
        let contains = |ci: (f64, f64)| ci.0 <= 0.5 && 0.5 <= ci.1;
        contains(gc_at_sc.wilson_ci_95) && contains(sc_at_gc.wilson_ci_95)
    };
    assert!(
        agree,
        "cover {:.4} [{:.4}, {:.4}] vs chain {:.4} [{:.4}, {:.4}] are incompatible",
        est_gc.threshold,
        est_gc.below.0,
        est_gc.above.0,
        est_sc.threshold,
        est_sc.below.0,
        est_sc.above.0
    );
    println!(
        "check 10: cover threshold {:.4} and chain threshold {:.4} agree",
        est_gc.threshold, est_sc.threshold
    );
}
