//! Command-line workbench over the library: build and validate codes,
//! decode single instances, search and verify certificates, expand
//! forests, evaluate weight bounds, build the tight family, and drive
//! seeded simulations. All artifacts are JSON on stdout or at --out;
//! any exact-invariant failure exits nonzero through the error path.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lpdec::bounds::{
    check_bound_on_instance, depth_profile, profile_weight_bound, reduce_wdag,
    regular_check_depth_profile, unified_opt,
};
use lpdec::decoder::{lp_decode, ErrorPattern, LlrVector};
use lpdec::forest::{expand_to_forest, extract_gmax, verify_forest_properties, SingleSinkWdag};
use lpdec::graphs::{
    build_graph_cover, build_regular, build_spatially_coupled, derive_sc_from_cover, validate,
    CodeParams, TannerGraph,
};
use lpdec::lp::{fmt_rat, parse_rat, rat_to_f64, Rat};
use lpdec::tightness::{build_tight_instance_for_y, certify_lower_bound, explicit_hyperflow};
use lpdec::witness::{
    find_dual_witness, remove_cycles_and_normalize, to_wdag, verify_dual_witness,
    verify_hyperflow, witness_from_json, witness_to_json, BudgetVector, EdgeWeighting,
};
use lpdec::experiments::{
    boost_roundtrip, estimate_error_rate, estimate_threshold, gc_sc_monotonicity,
    lp_excess_experiment, write_trials_csv, Ensemble, ExperimentConfig,
};
use lpdec::{Error, Result};

#[derive(Parser)]
#[command(name = "lpdec", about = "Exact LP decoding workbench for LDPC codes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or validate Tanner graphs.
    Code {
        #[command(subcommand)]
        cmd: CodeCmd,
    },
    /// Decode one error pattern over the fundamental polytope.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        error: PathBuf,
        /// Include the fractional optimum when decoding fails.
        #[arg(long)]
        emit_witness_point: bool,
    },
    /// Search, verify, and transform dual certificates.
    Witness {
        #[command(subcommand)]
        cmd: WitnessCmd,
    },
    /// Expand the heaviest-edge subgraph into a replicated forest.
    Forest {
        #[command(subcommand)]
        cmd: ForestCmd,
    },
    /// Edge-weight bound machinery.
    Bounds {
        #[command(subcommand)]
        cmd: BoundsCmd,
    },
    /// The explicit family with certified large certificates.
    Tight {
        #[command(subcommand)]
        cmd: TightCmd,
    },
    /// Seeded Monte Carlo studies on the binary symmetric channel.
    Sim {
        #[command(subcommand)]
        cmd: SimCmd,
    },
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Sample a code and write its JSON.
    Build {
        /// Ensemble spec: regular:DV,DC,N | sc:DV,K,L,M | gc:DV,K,L,M |
        /// derived:DV,K,L,M,CUT | fixed:PATH
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run structural validation on a code file.
    Validate {
        #[arg(long)]
        code: PathBuf,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    error: PathBuf,
}

#[derive(Subcommand)]
enum WitnessCmd {
    /// Solve for the best uniform-slack certificate.
    Find {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Optional bound on every |w(v,c)|, as p/q.
        #[arg(long)]
        cap: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the two defining conditions of a stored certificate.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Check the one-source flow pattern of a stored certificate.
    Hyperflow {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Cancel cycles and normalize per-check weights.
    Transform {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ForestCmd {
    Expand {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Stored certificate; found fresh when absent.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Replicate budget.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Depth profile of the heaviest-edge subgraph and its weight bound.
    Profile {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Boundary reduction for coupled chains, with the stricter profile.
    Reduce {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Closed-form optimizer of the depth-profile relaxation.
    Unified {
        #[arg(long)]
        lambda: u64,
        #[arg(long)]
        beta: u64,
        #[arg(long)]
        dc: u64,
        #[arg(long)]
        m: u64,
    },
    /// Compare an instance's largest certificate weight to its bound.
    Check {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Append a CSV row n,alpha_max,bound,ratio.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TightCmd {
    Build {
        #[arg(long)]
        dv: usize,
        #[arg(long)]
        dc: usize,
        #[arg(long)]
        yn: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Certify {
        #[arg(long)]
        dv: usize,
        #[arg(long)]
        dc: usize,
        #[arg(long)]
        yn: usize,
        /// Also verify the explicit construction at this slack, as p/q.
        #[arg(long)]
        eps: Option<String>,
    },
}

#[derive(Args)]
struct SimCommon {
    /// Ensemble spec: regular:DV,DC,N | sc:DV,K,L,M | gc:DV,K,L,M |
    /// derived:DV,K,L,M,CUT | fixed:PATH
    #[arg(long)]
    params: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum SimCmd {
    /// Decoding error rate with a 95% Wilson interval.
    Rate {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long)]
        eps: f64,
        /// Per-trial CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bisect the crossover probability for a target error rate.
    Threshold {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long, default_value_t = 0.5)]
        target: f64,
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
    },
    /// Excess-margin frequency against the inflated-crossover floor.
    Excess {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Cover success must imply derived-chain success, every cut.
    Mono {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certificate lift/restrict round trip through the cover.
    Roundtrip {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long)]
        cut: i64,
        #[arg(long)]
        eps: f64,
    },
}

fn parse_numbers(s: &str, want: usize, what: &str) -> Result<Vec<i64>> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::invalid(format!("{what}: {e}")))?;
    if parts.len() != want {
        return Err(Error::invalid(format!("{what}: expected {want} comma-separated integers")));
    }
    Ok(parts)
}

fn parse_ensemble(spec: &str) -> Result<Ensemble> {
    let (head, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::invalid("ensemble spec needs the form kind:args"))?;
    match head {
        "regular" => {
            let v = parse_numbers(rest, 3, "regular spec")?;
            Ok(Ensemble::Regular { d_v: v[0] as usize, d_c: v[1] as usize, n: v[2] as usize })
        }
        "sc" => {
            let v = parse_numbers(rest, 4, "sc spec")?;
            Ok(Ensemble::Sc(CodeParams::new(v[0] as usize, v[1] as usize, v[2], v[3] as usize)?))
        }
        "gc" => {
            let v = parse_numbers(rest, 4, "gc spec")?;
            Ok(Ensemble::Gc(CodeParams::new(v[0] as usize, v[1] as usize, v[2], v[3] as usize)?))
        }
        "derived" => {
            let v = parse_numbers(rest, 5, "derived spec")?;
            Ok(Ensemble::DerivedSc {
                params: CodeParams::new(v[0] as usize, v[1] as usize, v[2], v[3] as usize)?,
                cut: v[4],
            })
        }
        "fixed" => Ok(Ensemble::Fixed(read_graph(Path::new(rest))?)),
        other => Err(Error::invalid(format!("unknown ensemble kind {other}"))),
    }
}

fn coupled_params(spec: &str) -> Result<CodeParams> {
    match parse_ensemble(spec)? {
        Ensemble::Sc(p) | Ensemble::Gc(p) | Ensemble::DerivedSc { params: p, .. } => Ok(p),
        _ => Err(Error::invalid("this experiment needs sc/gc/derived parameters")),
    }
}

fn read_graph(path: &Path) -> Result<TannerGraph> {
    TannerGraph::from_json(&std::fs::read_to_string(path)?)
}

/// Error file: JSON array of 0/1 (or booleans), one entry per variable.
fn read_error(path: &Path, n_vars: usize) -> Result<ErrorPattern> {
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| Error::Serialization(format!("error pattern: {e}")))?;
    let arr = doc
        .as_array()
        .ok_or_else(|| Error::Serialization("error pattern must be a JSON array".into()))?;
    let bits = arr
        .iter()
        .map(|v| match v {
            serde_json::Value::Bool(b) => Ok(*b),
            serde_json::Value::Number(x) if x.as_u64() == Some(0) => Ok(false),
            serde_json::Value::Number(x) if x.as_u64() == Some(1) => Ok(true),
            other => Err(Error::Serialization(format!("error pattern entry {other} is not a bit"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    if bits.len() != n_vars {
        return Err(Error::invalid(format!(
            "error pattern has {} bits but the code has {} variables",
            bits.len(),
            n_vars
        )));
    }
    Ok(ErrorPattern::new(bits))
}

fn read_witness(path: &Path) -> Result<(EdgeWeighting, Rat)> {
    witness_from_json(&std::fs::read_to_string(path)?)
}

/// Load a stored certificate or search for one; error when none exists.
fn obtain_witness(
    graph: &TannerGraph,
    budgets: &BudgetVector,
    stored: Option<&PathBuf>,
) -> Result<(EdgeWeighting, Rat)> {
    match stored {
        Some(p) => read_witness(p),
        None => {
            let found = find_dual_witness(graph, budgets, None)?;
            match found.weighting {
                Some(w) => Ok((w, found.margin)),
                None => Err(Error::Witness(format!(
                    "no certificate exists for this instance (margin {})",
                    fmt_rat(&found.margin)
                ))),
            }
        }
    }
}

/// Certificate to heaviest-edge subgraph: orient, cancel cycles,
/// normalize, extract.
fn gmax_of(graph: &TannerGraph, llr: &LlrVector, w: &EdgeWeighting) -> Result<SingleSinkWdag> {
    let wdag = to_wdag(graph, w, &llr.gamma)?;
    let flow = remove_cycles_and_normalize(&wdag)?;
    extract_gmax(&flow)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            println!("{}", json!({ "written": path.display().to_string() }));
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Code { cmd } => run_code(cmd),
        Command::Decode { code, error, emit_witness_point } => {
            let graph = read_graph(&code)?;
            let pattern = read_error(&error, graph.n_vars)?;
            let result = lp_decode(&graph, &pattern.llr())?;
            let mut doc = json!({
                "success": result.success,
                "value": fmt_rat(&result.optimal_value),
            });
            if emit_witness_point {
                if let Some(point) = &result.witness_point {
                    doc["point"] =
                        json!(point.iter().map(fmt_rat).collect::<Vec<_>>());
                }
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            Ok(())
        }
        Command::Witness { cmd } => run_witness(cmd),
        Command::Forest { cmd } => run_forest(cmd),
        Command::Bounds { cmd } => run_bounds(cmd),
        Command::Tight { cmd } => run_tight(cmd),
        Command::Sim { cmd } => run_sim(cmd),
    }
}

fn run_code(cmd: CodeCmd) -> Result<()> {
    match cmd {
        CodeCmd::Build { params, seed, out } => {
            let graph = match parse_ensemble(&params)? {
                Ensemble::Regular { d_v, d_c, n } => build_regular(d_v, d_c, n, seed)?,
                Ensemble::Sc(p) => build_spatially_coupled(&p, seed)?,
                Ensemble::Gc(p) => build_graph_cover(&p, seed)?,
                Ensemble::DerivedSc { params, cut } => {
                    let cover = build_graph_cover(&params, seed)?;
                    derive_sc_from_cover(&cover, cut)?.graph
                }
                Ensemble::Fixed(g) => g,
            };
            emit(out.as_ref(), &graph.to_json())
        }
        CodeCmd::Validate { code } => {
            let graph = read_graph(&code)?;
            let report = validate(&graph);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "valid": report.is_valid(),
                    "n_vars": graph.n_vars,
                    "n_checks": graph.n_checks,
                    "violations": report.violations,
                }))
                .expect("json")
            );
            if report.is_valid() {
                Ok(())
            } else {
                Err(Error::Validation("structural validation failed".into()))
            }
        }
    }
}

fn run_witness(cmd: WitnessCmd) -> Result<()> {
    let load = |instance: &InstanceArgs| -> Result<(TannerGraph, LlrVector, BudgetVector)> {
        let graph = read_graph(&instance.code)?;
        let llr = read_error(&instance.error, graph.n_vars)?.llr();
        let budgets = BudgetVector::from_llr(&llr);
        Ok((graph, llr, budgets))
    };
    match cmd {
        WitnessCmd::Find { instance, cap, out } => {
            let (graph, _, budgets) = load(&instance)?;
            let cap = cap.map(|s| parse_rat(&s)).transpose()?;
            let found = find_dual_witness(&graph, &budgets, cap.as_ref())?;
            match &found.weighting {
                Some(w) => emit(out.as_ref(), &witness_to_json(w, &found.margin)),
                None => {
                    println!(
                        "{}",
                        json!({ "found": false, "margin": fmt_rat(&found.margin) })
                    );
                    Ok(())
                }
            }
        }
        WitnessCmd::Verify { instance, witness } => {
            let (graph, _, budgets) = load(&instance)?;
            let (w, _) = read_witness(&witness)?;
            let report = verify_dual_witness(&graph, &budgets, &w)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "valid": report.is_valid(),
                    "min_slack": fmt_rat(&report.min_slack),
                    "violations": report.violations,
                }))
                .expect("json")
            );
            if report.is_valid() {
                Ok(())
            } else {
                Err(Error::Witness("certificate verification failed".into()))
            }
        }
        WitnessCmd::Hyperflow { instance, witness } => {
            let (graph, _, budgets) = load(&instance)?;
            let (w, _) = read_witness(&witness)?;
            let report = verify_hyperflow(&graph, &budgets, &w)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "valid": report.is_valid(),
                    "min_slack": fmt_rat(&report.min_slack),
                    "violations": report.violations,
                }))
                .expect("json")
            );
            if report.is_valid() {
                Ok(())
            } else {
                Err(Error::Witness("flow pattern verification failed".into()))
            }
        }
        WitnessCmd::Transform { instance, witness, out } => {
            let (graph, llr, budgets) = load(&instance)?;
            let (w, margin) = read_witness(&witness)?;
            let wdag = to_wdag(&graph, &w, &llr.gamma)?;
            let flow = remove_cycles_and_normalize(&wdag)?;
            let normalized = flow.to_weighting(&graph);
            let report = verify_hyperflow(&graph, &budgets, &normalized)?;
            if !report.is_valid() {
                return Err(Error::Witness(format!(
                    "transformed weighting fails flow verification: {:?}",
                    report.violations
                )));
            }
            emit(out.as_ref(), &witness_to_json(&normalized, &margin))
        }
    }
}

fn run_forest(cmd: ForestCmd) -> Result<()> {
    let ForestCmd::Expand { instance, witness, cap, out } = cmd;
    let graph = read_graph(&instance.code)?;
    let llr = read_error(&instance.error, graph.n_vars)?.llr();
    let budgets = BudgetVector::from_llr(&llr);
    let (w, _) = obtain_witness(&graph, &budgets, witness.as_ref())?;
    let gmax = gmax_of(&graph, &llr, &w)?;
    let forest = expand_to_forest(&gmax, cap)?;
    let report = verify_forest_properties(&gmax, &forest)?;
    if !report.is_valid() {
        return Err(Error::Forest(format!("forest properties violated: {:?}", report.violations)));
    }
    emit(out.as_ref(), &forest.to_json())
}

fn run_bounds(cmd: BoundsCmd) -> Result<()> {
    let load = |instance: &InstanceArgs,
                witness: Option<&PathBuf>|
     -> Result<(TannerGraph, LlrVector, EdgeWeighting)> {
        let graph = read_graph(&instance.code)?;
        let llr = read_error(&instance.error, graph.n_vars)?.llr();
        let budgets = BudgetVector::from_llr(&llr);
        let (w, _) = obtain_witness(&graph, &budgets, witness)?;
        Ok((graph, llr, w))
    };
    match cmd {
        BoundsCmd::Profile { instance, witness } => {
            let (graph, llr, w) = load(&instance, witness.as_ref())?;
            let gmax = gmax_of(&graph, &llr, &w)?;
            let profile = depth_profile(&gmax)?;
            let d_c = graph.check_adj.iter().map(Vec::len).max().unwrap_or(2);
            let bound = profile_weight_bound(&profile, d_c);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "counts": profile.counts,
                    "alpha_max": fmt_rat(&gmax.alpha_max),
                    "weight_bound": fmt_rat(&bound),
                }))
                .expect("json")
            );
            Ok(())
        }
        BoundsCmd::Reduce { instance, witness } => {
            let (graph, llr, w) = load(&instance, witness.as_ref())?;
            let gmax = gmax_of(&graph, &llr, &w)?;
            let reduced = reduce_wdag(&gmax, &graph)?;
            let d_c = graph.check_adj.iter().map(Vec::len).max().unwrap_or(2);
            let profile = regular_check_depth_profile(&reduced, d_c)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "removed_edges": reduced.removed.len(),
                    "counts": profile.counts,
                    "alpha_max": fmt_rat(&reduced.g.alpha_max),
                }))
                .expect("json")
            );
            Ok(())
        }
        BoundsCmd::Unified { lambda, beta, dc, m } => {
            let opt = unified_opt(lambda, beta, dc, m)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "l": opt.l,
                    "t_prime": opt.t_prime,
                    "f_value": fmt_rat(&opt.f_value),
                    "closed_form_bound": opt.closed_form_bound,
                }))
                .expect("json")
            );
            Ok(())
        }
        BoundsCmd::Check { instance, witness, out } => {
            let (graph, llr, w) = load(&instance, witness.as_ref())?;
            let check = check_bound_on_instance(&graph, &llr, &w)?;
            let alpha = rat_to_f64(&check.alpha);
            let ratio = if check.bound_value > 0.0 { alpha / check.bound_value } else { f64::NAN };
            if let Some(path) = &out {
                let mut text = if path.exists() {
                    std::fs::read_to_string(path)?
                } else {
                    String::from("n,alpha_max,bound,ratio\n")
                };
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    graph.n_vars,
                    fmt_rat(&check.alpha),
                    check.bound_value,
                    ratio
                ));
                std::fs::write(path, text)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "n": graph.n_vars,
                    "alpha_max": fmt_rat(&check.alpha),
                    "bound": check.bound_value,
                    "ratio": ratio,
                    "ok": check.ok,
                    "escalated": check.escalated,
                }))
                .expect("json")
            );
            if check.ok {
                Ok(())
            } else {
                Err(Error::Bounds("certificate weight exceeds the proved bound".into()))
            }
        }
    }
}

fn run_tight(cmd: TightCmd) -> Result<()> {
    match cmd {
        TightCmd::Build { dv, dc, yn, out } => {
            let inst = build_tight_instance_for_y(dv, dc, yn)?;
            emit(out.as_ref(), &inst.to_json()?)
        }
        TightCmd::Certify { dv, dc, yn, eps } => {
            let inst = build_tight_instance_for_y(dv, dc, yn)?;
            let mut doc = json!({
                "n_vars": inst.graph.n_vars,
                "b_n": inst.b_n,
            });
            if let Some(e) = eps {
                let e = parse_rat(&e)?;
                let w = explicit_hyperflow(&inst, &e)?;
                doc["explicit_max_weight"] = json!(fmt_rat(&w.max_abs()));
            }
            let cert = certify_lower_bound(&inst)?;
            doc["certified_min_max_weight"] = json!(fmt_rat(&cert.min_max_weight));
            doc["margin"] = json!(fmt_rat(&cert.margin));
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            Ok(())
        }
    }
}

fn run_sim(cmd: SimCmd) -> Result<()> {
    match cmd {
        SimCmd::Rate { common, eps, out } => {
            let config = ExperimentConfig {
                ensemble: parse_ensemble(&common.params)?,
                epsilon: eps,
                trials: common.trials,
                master_seed: common.seed,
                delta: None,
            };
            let report = estimate_error_rate(&config)?;
            if let Some(path) = &out {
                write_trials_csv(path, eps, &report.records)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "error_rate": report.estimate.error_rate,
                    "wilson_ci_95": report.estimate.wilson_ci_95,
                    "trials": report.estimate.trials,
                }))
                .expect("json")
            );
            Ok(())
        }
        SimCmd::Threshold { common, target, tol } => {
            let ens = parse_ensemble(&common.params)?;
            let est = estimate_threshold(&ens, common.trials, target, tol, common.seed)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "threshold": est.threshold,
                    "target_rate": est.target_rate,
                    "bracket": [est.below.0, est.above.0],
                    "rate_below": est.below.1.error_rate,
                    "rate_above": est.above.1.error_rate,
                    "note": est.note,
                }))
                .expect("json")
            );
            Ok(())
        }
        SimCmd::Excess { common, eps, delta } => {
            let graph = parse_ensemble(&common.params)?.build(common.seed)?;
            let report = lp_excess_experiment(&graph, eps, delta, common.trials, common.seed)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "observed_prob": report.observed_prob,
                    "bound": report.bound,
                    "q_hat": report.q_hat,
                    "eps_prime": report.eps_prime,
                    "vacuous": report.vacuous,
                    "holds": report.holds,
                    "slack": report.slack,
                }))
                .expect("json")
            );
            if report.holds {
                Ok(())
            } else {
                Err(Error::Experiment("observed probability fell below the floor".into()))
            }
        }
        SimCmd::Mono { common, eps, out } => {
            let params = coupled_params(&common.params)?;
            let report = gc_sc_monotonicity(&params, eps, common.trials, common.seed)?;
            if let Some(path) = &out {
                write_trials_csv(path, eps, &report.records)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "trials": report.trials,
                    "cuts": report.cuts,
                    "implication_violations": report.implication_violations,
                    "cover_error_rate": report.gc_rate.error_rate,
                    "chain_error_rate": report.sc_rate.error_rate,
                    "aggregate_ok": report.aggregate_ok,
                }))
                .expect("json")
            );
            if report.implication_violations.is_empty() {
                Ok(())
            } else {
                Err(Error::Experiment("cover success failed to carry to a derived chain".into()))
            }
        }
        SimCmd::Roundtrip { common, cut, eps } => {
            let params = coupled_params(&common.params)?;
            let report = boost_roundtrip(&params, cut, eps, common.trials, common.seed)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "attempted": report.attempted,
                    "verified": report.verified,
                    "skipped_no_witness": report.skipped_no_witness,
                }))
                .expect("json")
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
