//! Dual certificates for LP decoding.
//!
//! A certificate assigns a rational weight to every Tanner edge so that
//! each variable's outgoing total stays strictly under its budget while
//! every pair of weights at a check sums to at least zero. This module
//! searches for certificates by LP, verifies them (including the stricter
//! one-source-per-check flow pattern), converts them to a directed view,
//! cancels directed cycles, and performs the surgery used when moving
//! certificates between a cover code and the chain derived from it.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};

use crate::decoder::LlrVector;
use crate::graphs::{DerivedCode, TannerGraph};
use crate::lp::{fmt_rat, parse_rat, rat_i, LinearProgram, LpOutcome, Rat};
use crate::{Error, Result};

/// Signed weight per Tanner edge; the domain is exactly the edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeWeighting {
    pub w: BTreeMap<(usize, usize), Rat>,
}

impl EdgeWeighting {
    pub fn zero(graph: &TannerGraph) -> Self {
        EdgeWeighting { w: graph.edges().into_iter().map(|e| (e, rat_i(0))).collect() }
    }

    pub fn get(&self, v: usize, c: usize) -> &Rat {
        &self.w[&(v, c)]
    }

    /// Largest absolute weight; zero for an empty weighting.
    pub fn max_abs(&self) -> Rat {
        self.w.values().map(Signed::abs).max().unwrap_or_else(|| rat_i(0))
    }

    fn require_domain(&self, graph: &TannerGraph) -> Result<()> {
        let domain: BTreeSet<(usize, usize)> = self.w.keys().copied().collect();
        let edges: BTreeSet<(usize, usize)> = graph.edges().into_iter().collect();
        if domain != edges {
            return Err(Error::Witness(format!(
                "weighting domain has {} edges, graph has {}",
                domain.len(),
                edges.len()
            )));
        }
        Ok(())
    }
}

/// Per-variable budgets: the right-hand side of the strict outflow
/// inequality. Plain decoding uses the channel costs themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetVector {
    pub b: Vec<Rat>,
}

impl BudgetVector {
    pub fn from_llr(llr: &LlrVector) -> Self {
        BudgetVector { b: llr.gamma.clone() }
    }

    /// Budgets gamma_i - delta/2: demands a uniform excess margin.
    pub fn with_excess(llr: &LlrVector, delta: &Rat) -> Self {
        let half = delta / rat_i(2);
        BudgetVector { b: llr.gamma.iter().map(|g| g - &half).collect() }
    }

    /// Budgets gamma_i + boost on the listed variables, gamma_i elsewhere.
    pub fn with_boost(llr: &LlrVector, special: &[usize], boost: &Rat) -> Self {
        let special: BTreeSet<usize> = special.iter().copied().collect();
        BudgetVector {
            b: llr
                .gamma
                .iter()
                .enumerate()
                .map(|(v, g)| if special.contains(&v) { g + boost } else { g.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WitnessSearchResult {
    /// Best achievable uniform slack; a certificate exists iff positive.
    pub margin: Rat,
    /// Present exactly when the margin is positive.
    pub weighting: Option<EdgeWeighting>,
}

/// Search for a certificate by maximizing the uniform budget slack.
///
/// Internally the pairwise cone at each check is replaced by its
/// generator form (one nonnegative coefficient per cone generator), so
/// the LP has one row per variable instead of one per check pair. The
/// returned weighting is re-verified against the pairwise definition.
/// With `edge_cap` set, |w(e)| <= cap rows are added for every edge.
pub fn find_dual_witness(
    graph: &TannerGraph,
    budgets: &BudgetVector,
    edge_cap: Option<&Rat>,
) -> Result<WitnessSearchResult> {
    if budgets.b.len() != graph.n_vars {
        return Err(Error::invalid(format!(
            "budget length {} does not match {} variables",
            budgets.b.len(),
            graph.n_vars
        )));
    }
    if graph.n_vars == 0 {
        return Err(Error::invalid("graph has no variables"));
    }
    if let Some(cap) = edge_cap {
        if cap.is_negative() {
            return Err(Error::invalid("edge cap must be nonnegative"));
        }
    }
    let edges = graph.edges();
    let ne = edges.len();
    let eidx: BTreeMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();

    // Columns: one axis generator a_e per edge, one flip generator b_e per
    // edge of a check with degree >= 2, then the shifted slack u.
    let col_a: Vec<usize> = (0..ne).collect();
    let mut col_b = vec![usize::MAX; ne];
    let mut ncols = ne;
    for (i, &(_, c)) in edges.iter().enumerate() {
        if graph.check_degree(c) >= 2 {
            col_b[i] = ncols;
            ncols += 1;
        }
    }
    let u_col = ncols;
    ncols += 1;

    // w(v,c) = a_e - 2 b_e + sum of b over all edges of c.
    let edge_expr = |e: usize| -> Vec<(usize, Rat)> {
        let (_, c) = edges[e];
        let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
        *acc.entry(col_a[e]).or_insert_with(|| rat_i(0)) += rat_i(1);
        if col_b[e] != usize::MAX {
            *acc.entry(col_b[e]).or_insert_with(|| rat_i(0)) += rat_i(-2);
        }
        for &v2 in &graph.check_adj[c] {
            let e2 = eidx[&(v2, c)];
            if col_b[e2] != usize::MAX {
                *acc.entry(col_b[e2]).or_insert_with(|| rat_i(0)) += rat_i(1);
            }
        }
        acc.into_iter().filter(|(_, q)| !q.is_zero()).collect()
    };

    let t_shift = budgets.b.iter().min().unwrap().clone();
    let mut objective = vec![rat_i(0); ncols];
    objective[u_col] = rat_i(1);
    let mut lp = LinearProgram::maximize(ncols, objective);
    for col in 0..ncols {
        lp.set_lower(col, rat_i(0));
    }
    for v in 0..graph.n_vars {
        let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
        for &c in &graph.var_adj[v] {
            for (col, q) in edge_expr(eidx[&(v, c)]) {
                *acc.entry(col).or_insert_with(|| rat_i(0)) += q;
            }
        }
        *acc.entry(u_col).or_insert_with(|| rat_i(0)) += rat_i(1);
        let coeffs: Vec<(usize, Rat)> = acc.into_iter().filter(|(_, q)| !q.is_zero()).collect();
        lp.add_le(coeffs, &budgets.b[v] - &t_shift);
    }
    if let Some(cap) = edge_cap {
        for e in 0..ne {
            let expr = edge_expr(e);
            lp.add_le(expr.clone(), cap.clone());
            lp.add_ge(expr, -cap.clone());
        }
    }

    let outcome = lp.solve()?;
    let LpOutcome::Optimal { point, .. } = outcome else {
        return Err(Error::Witness(format!(
            "slack program must be feasible and bounded, got {outcome:?}"
        )));
    };
    let margin = &t_shift + &point[u_col];

    let mut w = BTreeMap::new();
    for (e, &(v, c)) in edges.iter().enumerate() {
        let mut val = rat_i(0);
        for (col, q) in edge_expr(e) {
            val += &q * &point[col];
        }
        w.insert((v, c), val);
    }
    let weighting = EdgeWeighting { w };

    // The generator substitution is an implementation detail; check the
    // returned point against the definitional constraints.
    for v in 0..graph.n_vars {
        let total: Rat = graph.var_adj[v].iter().map(|&c| weighting.get(v, c)).sum();
        if &total + &margin > budgets.b[v] {
            return Err(Error::Witness(format!("internal: slack violated at variable {v}")));
        }
    }
    for c in 0..graph.n_checks {
        let adj = &graph.check_adj[c];
        for (i, &v1) in adj.iter().enumerate() {
            for &v2 in &adj[i..] {
                if (weighting.get(v1, c) + weighting.get(v2, c)).is_negative() && v1 != v2 {
                    return Err(Error::Witness(format!("internal: pair constraint violated at check {c}")));
                }
            }
        }
        if adj.len() == 1 && weighting.get(adj[0], c).is_negative() {
            return Err(Error::Witness(format!("internal: lone edge negative at check {c}")));
        }
    }
    if let Some(cap) = edge_cap {
        if &weighting.max_abs() > cap {
            return Err(Error::Witness("internal: edge cap violated".into()));
        }
    }

    let weighting = if margin.is_positive() { Some(weighting) } else { None };
    Ok(WitnessSearchResult { margin, weighting })
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    /// Smallest budget slack over all variables; strict feasibility means
    /// this is positive.
    pub min_slack: Rat,
    pub violations: Vec<String>,
}

impl WitnessReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the two defining conditions: strict budget slack per variable
/// and nonnegative pairwise sums per check (a degree-1 check forces its
/// single weight to be nonnegative).
pub fn verify_dual_witness(
    graph: &TannerGraph,
    budgets: &BudgetVector,
    w: &EdgeWeighting,
) -> Result<WitnessReport> {
    w.require_domain(graph)?;
    if budgets.b.len() != graph.n_vars {
        return Err(Error::invalid("budget length mismatch"));
    }
    let mut violations = Vec::new();
    let mut min_slack: Option<Rat> = None;
    for v in 0..graph.n_vars {
        let total: Rat = graph.var_adj[v].iter().map(|&c| w.get(v, c)).sum();
        let slack = &budgets.b[v] - &total;
        if !slack.is_positive() {
            violations.push(format!(
                "variable {v}: outflow {} does not stay under budget {}",
                fmt_rat(&total),
                fmt_rat(&budgets.b[v])
            ));
        }
        min_slack = Some(match min_slack {
            None => slack,
            Some(m) => m.min(slack),
        });
    }
    for c in 0..graph.n_checks {
        let adj = &graph.check_adj[c];
        if adj.len() == 1 && w.get(adj[0], c).is_negative() {
            violations.push(format!("check {c}: lone edge weight is negative"));
        }
        for (i, &v1) in adj.iter().enumerate() {
            for &v2 in &adj[i + 1..] {
                if (w.get(v1, c) + w.get(v2, c)).is_negative() {
                    violations.push(format!(
                        "check {c}: weights of variables {v1} and {v2} sum below zero"
                    ));
                }
            }
        }
    }
    Ok(WitnessReport { min_slack: min_slack.unwrap_or_else(|| rat_i(0)), violations })
}

/// Check budget slack plus the one-source flow pattern: at every check,
/// either all weights are zero or exactly one equals -P and the rest
/// equal +P for some P > 0.
pub fn verify_hyperflow(
    graph: &TannerGraph,
    budgets: &BudgetVector,
    w: &EdgeWeighting,
) -> Result<WitnessReport> {
    w.require_domain(graph)?;
    if budgets.b.len() != graph.n_vars {
        return Err(Error::invalid("budget length mismatch"));
    }
    let mut violations = Vec::new();
    let mut min_slack: Option<Rat> = None;
    for v in 0..graph.n_vars {
        let total: Rat = graph.var_adj[v].iter().map(|&c| w.get(v, c)).sum();
        let slack = &budgets.b[v] - &total;
        if !slack.is_positive() {
            violations.push(format!("variable {v}: outflow does not stay under budget"));
        }
        min_slack = Some(match min_slack {
            None => slack,
            Some(m) => m.min(slack),
        });
    }
    for c in 0..graph.n_checks {
        let weights: Vec<&Rat> = graph.check_adj[c].iter().map(|&v| w.get(v, c)).collect();
        if weights.iter().all(|x| x.is_zero()) {
            continue;
        }
        let negatives: Vec<&&Rat> = weights.iter().filter(|x| x.is_negative()).collect();
        if negatives.len() != 1 {
            violations.push(format!(
                "check {c}: {} negative weights, pattern needs exactly one",
                negatives.len()
            ));
            continue;
        }
        let p = negatives[0].abs();
        for (t, x) in weights.iter().enumerate() {
            if !x.is_negative() && **x != p {
                violations.push(format!(
                    "check {c}: edge {t} has weight {}, pattern needs {}",
                    fmt_rat(x),
                    fmt_rat(&p)
                ));
            }
        }
    }
    Ok(WitnessReport { min_slack: min_slack.unwrap_or_else(|| rat_i(0)), violations })
}

/// Node of the directed certificate view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Var(usize),
    Check(usize),
}

/// Directed view of a weighting: positive weights point variable to
/// check, negative weights check to variable, zeros are absent; stored
/// magnitudes are positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wdag {
    pub n_vars: usize,
    pub n_checks: usize,
    pub gamma: Vec<Rat>,
    pub edges: BTreeMap<(Node, Node), Rat>,
}

impl Wdag {
    /// Outgoing adjacency, ascending by target.
    pub fn out_adj(&self) -> BTreeMap<Node, Vec<Node>> {
        let mut adj: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
        for &(from, to) in self.edges.keys() {
            adj.entry(from).or_default().push(to);
        }
        adj
    }

    pub fn nodes(&self) -> BTreeSet<Node> {
        self.edges.keys().flat_map(|&(a, b)| [a, b]).collect()
    }

    /// Deterministic Kahn ordering; None when a directed cycle exists.
    pub fn topological_sort(&self) -> Option<Vec<Node>> {
        let nodes = self.nodes();
        let mut indegree: BTreeMap<Node, usize> = nodes.iter().map(|&n| (n, 0)).collect();
        for &(_, to) in self.edges.keys() {
            *indegree.get_mut(&to).unwrap() += 1;
        }
        let adj = self.out_adj();
        let mut ready: BTreeSet<Node> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&n, _)| n)
            .collect();
        let mut order = Vec::with_capacity(nodes.len());
        while let Some(&n) = ready.iter().next() {
            ready.remove(&n);
            order.push(n);
            if let Some(succs) = adj.get(&n) {
                for &s in succs {
                    let d = indegree.get_mut(&s).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(s);
                    }
                }
            }
        }
        (order.len() == nodes.len()).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_sort().is_some()
    }

    /// Signed weighting over the full edge set of `graph`; edges absent
    /// from the directed view get weight zero.
    pub fn to_weighting(&self, graph: &TannerGraph) -> EdgeWeighting {
        let mut w = EdgeWeighting::zero(graph);
        for (&(from, to), wt) in &self.edges {
            match (from, to) {
                (Node::Var(v), Node::Check(c)) => {
                    w.w.insert((v, c), wt.clone());
                }
                (Node::Check(c), Node::Var(v)) => {
                    w.w.insert((v, c), -wt.clone());
                }
                _ => unreachable!("directed view edges join a variable and a check"),
            }
        }
        w
    }
}

/// Orient a weighting into its directed view.
pub fn to_wdag(graph: &TannerGraph, w: &EdgeWeighting, gamma: &[Rat]) -> Result<Wdag> {
    w.require_domain(graph)?;
    if gamma.len() != graph.n_vars {
        return Err(Error::invalid("gamma length mismatch"));
    }
    let mut edges = BTreeMap::new();
    for (&(v, c), wt) in &w.w {
        if wt.is_positive() {
            edges.insert((Node::Var(v), Node::Check(c)), wt.clone());
        } else if wt.is_negative() {
            edges.insert((Node::Check(c), Node::Var(v)), wt.abs());
        }
    }
    Ok(Wdag { n_vars: graph.n_vars, n_checks: graph.n_checks, gamma: gamma.to_vec(), edges })
}

/// Least-id depth-first search for a directed cycle; returns the cycle's
/// node sequence.
fn find_cycle(wdag: &Wdag) -> Option<Vec<Node>> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let adj = wdag.out_adj();
    let nodes = wdag.nodes();
    let mut color: BTreeMap<Node, u8> = nodes.iter().map(|&n| (n, WHITE)).collect();
    let empty: Vec<Node> = Vec::new();
    for &start in &nodes {
        if color[&start] != WHITE {
            continue;
        }
        let mut stack: Vec<(Node, usize)> = vec![(start, 0)];
        let mut path = vec![start];
        *color.get_mut(&start).unwrap() = GRAY;
        while let Some(&mut (node, ref mut idx)) = stack.last_mut() {
            let succs = adj.get(&node).unwrap_or(&empty);
            if *idx < succs.len() {
                let next = succs[*idx];
                *idx += 1;
                match color[&next] {
                    WHITE => {
                        *color.get_mut(&next).unwrap() = GRAY;
                        stack.push((next, 0));
                        path.push(next);
                    }
                    GRAY => {
                        let pos = path.iter().position(|&n| n == next).unwrap();
                        return Some(path[pos..].to_vec());
                    }
                    _ => {}
                }
            } else {
                *color.get_mut(&node).unwrap() = BLACK;
                stack.pop();
                path.pop();
            }
        }
    }
    None
}

fn cancel_cycle(wdag: &mut Wdag, cycle: &[Node]) {
    let mut keys = Vec::with_capacity(cycle.len());
    for i in 0..cycle.len() {
        keys.push((cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    let delta = keys.iter().map(|k| wdag.edges[k].clone()).min().unwrap();
    for k in keys {
        let wt = wdag.edges.get_mut(&k).unwrap();
        *wt -= &delta;
        if wt.is_zero() {
            wdag.edges.remove(&k);
        }
    }
}

fn normalize_checks(wdag: &mut Wdag) -> Result<()> {
    for c in 0..wdag.n_checks {
        let check = Node::Check(c);
        let incoming: Vec<(Node, Node)> = wdag
            .edges
            .keys()
            .filter(|&&(_, to)| to == check)
            .copied()
            .collect();
        let outgoing: Vec<(Node, Node)> = wdag
            .edges
            .keys()
            .filter(|&&(from, _)| from == check)
            .copied()
            .collect();
        match outgoing.len() {
            0 => {
                for k in incoming {
                    wdag.edges.remove(&k);
                }
            }
            1 => {
                let p = wdag.edges[&outgoing[0]].clone();
                for k in incoming {
                    wdag.edges.insert(k, p.clone());
                }
            }
            n => {
                return Err(Error::Witness(format!(
                    "check {c} has {n} outgoing edges; pairwise condition violated"
                )))
            }
        }
    }
    Ok(())
}

fn remove_cycles_impl(
    wdag: &Wdag,
    instrument: Option<(&TannerGraph, &BudgetVector)>,
) -> Result<(Wdag, usize)> {
    let mut out = wdag.clone();
    let mut iterations = 0usize;
    while let Some(cycle) = find_cycle(&out) {
        cancel_cycle(&mut out, &cycle);
        iterations += 1;
        if let Some((graph, budgets)) = instrument {
            let report = verify_dual_witness(graph, budgets, &out.to_weighting(graph))?;
            if !report.is_valid() {
                return Err(Error::Witness(format!(
                    "cycle cancellation broke the certificate at iteration {iterations}: {}",
                    report.violations.join("; ")
                )));
            }
        }
    }
    normalize_checks(&mut out)?;
    Ok((out, iterations))
}

/// Cancel directed cycles, then rewrite every check into the one-source
/// pattern. The output is acyclic and, when the input was a certificate,
/// satisfies the flow-pattern verification; no edge's magnitude grows.
pub fn remove_cycles_and_normalize(wdag: &Wdag) -> Result<Wdag> {
    remove_cycles_impl(wdag, None).map(|(w, _)| w)
}

/// Same transformation, asserting after every cycle cancellation that the
/// weighting still verifies against `budgets`; returns the iteration
/// count alongside the result.
pub fn remove_cycles_and_normalize_instrumented(
    wdag: &Wdag,
    graph: &TannerGraph,
    budgets: &BudgetVector,
) -> Result<(Wdag, usize)> {
    remove_cycles_impl(wdag, Some((graph, budgets)))
}

/// Pointwise convex combination of weightings on one graph.
pub fn average_witnesses(weightings: &[EdgeWeighting], coefficients: &[Rat]) -> Result<EdgeWeighting> {
    if weightings.is_empty() || weightings.len() != coefficients.len() {
        return Err(Error::invalid("need matching nonempty weighting and coefficient lists"));
    }
    if coefficients.iter().any(Signed::is_negative) {
        return Err(Error::invalid("coefficients must be nonnegative"));
    }
    let total: Rat = coefficients.iter().sum();
    if total != rat_i(1) {
        return Err(Error::invalid("coefficients must sum to one"));
    }
    let domain: Vec<(usize, usize)> = weightings[0].w.keys().copied().collect();
    for other in &weightings[1..] {
        if other.w.len() != domain.len() || !domain.iter().all(|k| other.w.contains_key(k)) {
            return Err(Error::invalid("weightings live on different edge sets"));
        }
    }
    let mut w = BTreeMap::new();
    for k in domain {
        let val: Rat = weightings
            .iter()
            .zip(coefficients)
            .map(|(wt, lambda)| lambda * &wt.w[&k])
            .sum();
        w.insert(k, val);
    }
    Ok(EdgeWeighting { w })
}

/// Restrict a cover weighting to the derived chain: drop every edge
/// touching a removed variable and relabel the survivors with derived
/// ids. Pairwise sums survive because every derived check kept degree
/// at least 2.
pub fn restrict_witness(
    derived: &DerivedCode,
    cover: &TannerGraph,
    w: &EdgeWeighting,
) -> Result<EdgeWeighting> {
    w.require_domain(cover)?;
    for c in 0..derived.graph.n_checks {
        if derived.graph.check_degree(c) < 2 {
            return Err(Error::Witness(format!("derived check {c} has degree below 2")));
        }
    }
    let mut out = BTreeMap::new();
    for (v_new, c_new) in derived.graph.edges() {
        let key = (derived.var_map[v_new], derived.check_map[c_new]);
        out.insert((v_new, c_new), w.w[&key].clone());
    }
    Ok(EdgeWeighting { w: out })
}

/// Budgets for the derived chain: the cover budgets at surviving ids.
pub fn restrict_budgets(derived: &DerivedCode, cover_budgets: &BudgetVector) -> BudgetVector {
    BudgetVector { b: derived.var_map.iter().map(|&v| cover_budgets.b[v].clone()).collect() }
}

/// Embed a derived-chain weighting back into the cover and make every
/// removed variable a source: each of its edges gets the maximum weight
/// among the check's surviving edges. Valid for boosted budgets provided
/// `boost >= d_v * alpha + 1` with alpha the largest derived magnitude.
pub fn extend_witness_with_boost(
    derived: &DerivedCode,
    cover: &TannerGraph,
    derived_w: &EdgeWeighting,
    boost: &Rat,
) -> Result<EdgeWeighting> {
    derived_w.require_domain(&derived.graph)?;
    let d_v = (0..cover.n_vars).map(|v| cover.var_degree(v)).max().unwrap_or(0);
    let alpha = derived_w.max_abs();
    let needed = rat_i(d_v as i64) * &alpha + rat_i(1);
    if boost < &needed {
        return Err(Error::Witness(format!(
            "boost {} too small: largest derived magnitude {} needs at least {}",
            fmt_rat(boost),
            fmt_rat(&alpha),
            fmt_rat(&needed)
        )));
    }
    let special: BTreeSet<usize> = derived.special_vars.iter().copied().collect();
    let mut w = EdgeWeighting::zero(cover);
    for (v_new, c_new) in derived.graph.edges() {
        w.w.insert(
            (derived.var_map[v_new], derived.check_map[c_new]),
            derived_w.w[&(v_new, c_new)].clone(),
        );
    }
    for c in 0..cover.n_checks {
        let surviving: Vec<&Rat> = cover.check_adj[c]
            .iter()
            .filter(|v| !special.contains(v))
            .map(|&v| w.get(v, c))
            .collect();
        let special_here: Vec<usize> = cover.check_adj[c]
            .iter()
            .copied()
            .filter(|v| special.contains(v))
            .collect();
        if special_here.is_empty() {
            continue;
        }
        if surviving.len() < 2 {
            return Err(Error::Witness(format!(
                "check {c} keeps only {} surviving edges; extension needs 2",
                surviving.len()
            )));
        }
        let m = surviving.into_iter().cloned().max().unwrap();
        for v in special_here {
            w.w.insert((v, c), m.clone());
        }
    }
    Ok(w)
}

pub fn witness_to_json(w: &EdgeWeighting, margin: &Rat) -> String {
    let edges: Vec<serde_json::Value> = w
        .w
        .iter()
        .map(|(&(v, c), wt)| serde_json::json!([v, c, fmt_rat(wt)]))
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "edges": edges,
        "margin": fmt_rat(margin),
    }))
    .unwrap()
}

pub fn witness_from_json(text: &str) -> Result<(EdgeWeighting, Rat)> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Serialization(format!("witness json: {e}")))?;
    let margin = parse_rat(
        doc.get("margin")
            .and_then(|m| m.as_str())
            .ok_or_else(|| Error::Serialization("witness json lacks a margin string".into()))?,
    )?;
    let mut w = BTreeMap::new();
    let edges = doc
        .get("edges")
        .and_then(|e| e.as_array())
        .ok_or_else(|| Error::Serialization("witness json lacks an edge array".into()))?;
    for entry in edges {
        let triple = entry
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::Serialization("witness edge must be [v, c, weight]".into()))?;
        let v = triple[0]
            .as_u64()
            .ok_or_else(|| Error::Serialization("edge variable id must be an integer".into()))?;
        let c = triple[1]
            .as_u64()
            .ok_or_else(|| Error::Serialization("edge check id must be an integer".into()))?;
        let wt = parse_rat(
            triple[2]
                .as_str()
                .ok_or_else(|| Error::Serialization("edge weight must be a string".into()))?,
        )?;
        w.insert((v as usize, c as usize), wt);
    }
    Ok((EdgeWeighting { w }, margin))
}
