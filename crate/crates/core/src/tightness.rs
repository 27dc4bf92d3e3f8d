//! A family of regular instances whose best decoding certificates need
//! edge weights growing polynomially with the code length.
//!
//! Two tree blocks are assembled around a hub check: branching trees
//! that collect budget toward their roots, and a layered tree whose
//! variables all carry cost -1 and therefore demand inflow that doubles
//! per layer. A completion pass pads every leaf up to full degree. The
//! module also writes down the feasible weighting witnessing the upper
//! end of that demand and certifies the matching lower bound by LP.

use std::collections::BTreeSet;

use num::Signed;
use serde::{Deserialize, Serialize};

use crate::decoder::LlrVector;
use crate::graphs::{GraphKind, TannerGraph};
use crate::lp::{fmt_rat, rat_i, LinearProgram, LpOutcome, Rat};
use crate::witness::{find_dual_witness, BudgetVector, EdgeWeighting};
use crate::{Error, Result};

/// Where a node sits in the assembled instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Inside a branching block built with depth parameter x.
    ABlock(usize),
    /// Inside the layered block; the payload is the layer index.
    BBlock(usize),
    /// The hub check joining the top-level blocks.
    Root,
    /// Completion checks added to reach full degree.
    Connecting,
}

/// A standalone tree block, with local ids starting at 0.
#[derive(Debug, Clone)]
pub struct TreeFragment {
    pub n_vars: usize,
    pub n_checks: usize,
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
    /// Variables of degree 1 inside the fragment (the root when the
    /// fragment is a single node).
    pub leaves: Vec<usize>,
    /// For layered blocks: checks between layer i and i-1, indexed by i.
    pub layer_checks: Vec<Vec<usize>>,
}

struct Builder {
    edges: Vec<(usize, usize)>,
    var_roles: Vec<Role>,
    check_roles: Vec<Role>,
    /// Parent check toward the enclosing block root, then the hub.
    up_check: Vec<usize>,
    /// Height above the leaves for branching-block variables; the layer
    /// index for layered-block variables.
    height: Vec<usize>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            edges: Vec::new(),
            var_roles: Vec::new(),
            check_roles: Vec::new(),
            up_check: Vec::new(),
            height: Vec::new(),
        }
    }

    fn new_var(&mut self, role: Role, height: usize) -> usize {
        self.var_roles.push(role);
        self.up_check.push(usize::MAX);
        self.height.push(height);
        self.var_roles.len() - 1
    }

    fn new_check(&mut self, role: Role) -> usize {
        self.check_roles.push(role);
        self.check_roles.len() - 1
    }

    fn edge(&mut self, v: usize, c: usize) {
        self.edges.push((v, c));
    }

    /// Complete branching tree of variable depth x: the root spawns
    /// d_v - 1 checks, every check d_c - 1 variables, down to depth x.
    /// Returns (root, leaves).
    fn a_block(&mut self, d_v: usize, d_c: usize, x: usize) -> (usize, Vec<usize>) {
        let role = Role::ABlock(x);
        let root = self.new_var(role, x);
        let mut frontier = vec![root];
        for depth in 1..=x {
            let mut next = Vec::new();
            for &v in &frontier {
                for _ in 0..d_v - 1 {
                    let c = self.new_check(role);
                    self.edge(v, c);
                    for _ in 0..d_c - 1 {
                        let u = self.new_var(role, x - depth);
                        self.up_check[u] = c;
                        self.edge(u, c);
                        next.push(u);
                    }
                }
            }
            frontier = next;
        }
        (root, frontier)
    }

    /// Layered tree of y + 1 layers: each variable of layer i >= 1 hangs
    /// d_v - 1 checks, each leading to one layer-(i-1) variable.
    /// Returns (root, leaves, layer_checks).
    fn b_block(&mut self, d_v: usize, y: usize) -> (usize, Vec<usize>, Vec<Vec<usize>>) {
        let root = self.new_var(Role::BBlock(y), y);
        let mut layer_checks = vec![Vec::new(); y + 1];
        let mut frontier = vec![root];
        for i in (1..=y).rev() {
            let mut next = Vec::new();
            for &v in &frontier {
                for _ in 0..d_v - 1 {
                    let c = self.new_check(Role::BBlock(i));
                    layer_checks[i].push(c);
                    self.edge(v, c);
                    let u = self.new_var(Role::BBlock(i - 1), i - 1);
                    self.up_check[u] = c;
                    self.edge(u, c);
                    next.push(u);
                }
            }
            frontier = next;
        }
        (root, frontier, layer_checks)
    }
}

fn fragment(build: impl FnOnce(&mut Builder) -> (usize, Vec<usize>, Vec<Vec<usize>>)) -> TreeFragment {
    let mut b = Builder::new();
    let (root, leaves, layer_checks) = build(&mut b);
    TreeFragment {
        n_vars: b.var_roles.len(),
        n_checks: b.check_roles.len(),
        edges: b.edges,
        root,
        leaves,
        layer_checks,
    }
}

/// Standalone branching block; the root has degree d_v - 1, leaves sit
/// at depth x, and the leaf count is ((d_v - 1)(d_c - 1))^x.
pub fn build_a_block(d_v: usize, d_c: usize, x: usize) -> TreeFragment {
    fragment(|b| {
        let (root, leaves) = b.a_block(d_v, d_c, x);
        (root, leaves, Vec::new())
    })
}

/// Standalone layered block with (d_v - 1)^y leaves on layer 0.
pub fn build_b_block(d_v: usize, y: usize) -> TreeFragment {
    fragment(|b| b.b_block(d_v, y))
}

/// Assembled hard instance.
#[derive(Debug, Clone)]
pub struct TightInstance {
    pub graph: TannerGraph,
    /// -1 exactly on layered-block variables, +1 elsewhere.
    pub gamma_n: LlrVector,
    pub var_roles: Vec<Role>,
    pub check_roles: Vec<Role>,
    pub y_n: usize,
    /// (d_v - 1)^y_n, the certified weight scale.
    pub b_n: u64,
    /// Leaf count of one assembled tree before completion.
    pub l_n: usize,
    /// Disjoint copies instantiated to make completion divisible.
    pub copies: usize,
    /// Per variable: the check toward its block root (the hub for block
    /// roots).
    pub up_check: Vec<usize>,
    /// Height above the leaves (branching blocks) or layer index
    /// (layered block).
    pub height: Vec<usize>,
}

impl TightInstance {
    pub fn d_v(&self) -> usize {
        match self.graph.kind {
            GraphKind::Regular { d_v, .. } => d_v,
            _ => unreachable!("tight instances are built regular"),
        }
    }

    pub fn d_c(&self) -> usize {
        match self.graph.kind {
            GraphKind::Regular { d_c, .. } => d_c,
            _ => unreachable!("tight instances are built regular"),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let graph: serde_json::Value = serde_json::from_str(&self.graph.to_json())
            .map_err(|e| Error::Serialization(e.to_string()))?;
        let v = serde_json::json!({
            "graph": graph,
            "gamma": self.gamma_n.gamma.iter().map(fmt_rat).collect::<Vec<_>>(),
            "var_roles": self.var_roles,
            "check_roles": self.check_roles,
            "y_n": self.y_n,
            "b_n": self.b_n,
            "l_n": self.l_n,
            "copies": self.copies,
        });
        serde_json::to_string_pretty(&v).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Build the instance for a target size: y_n is the largest y with
/// ((d_v - 1)(d_c - 1))^y <= n.
pub fn build_tight_instance(d_v: usize, d_c: usize, n: usize) -> Result<TightInstance> {
    if d_v <= 2 || d_c <= 2 {
        return Err(Error::invalid("both degrees must exceed 2"));
    }
    let beta = (d_v - 1) * (d_c - 1);
    let mut y_n = 0usize;
    let mut power = 1usize;
    while power.saturating_mul(beta) <= n {
        power *= beta;
        y_n += 1;
    }
    if y_n == 0 {
        return Err(Error::Construction(format!(
            "target size {n} is below one branching step ({beta}); no scale fits"
        )));
    }
    build_tight_instance_for_y(d_v, d_c, y_n)
}

/// Build the instance at an explicit scale parameter y_n >= 1.
pub fn build_tight_instance_for_y(d_v: usize, d_c: usize, y_n: usize) -> Result<TightInstance> {
    if d_v <= 2 || d_c <= 2 {
        return Err(Error::invalid("both degrees must exceed 2"));
    }
    if y_n == 0 {
        return Err(Error::invalid("scale parameter must be at least 1"));
    }

    // One tree: a hub check joins d_c - 1 big branching blocks and the
    // layered block; every layer-i check picks up d_c - 2 depth-i
    // branching blocks.
    fn build_tree(
        b: &mut Builder,
        d_v: usize,
        d_c: usize,
        y_n: usize,
        a_leaves: &mut Vec<usize>,
        b_leaves: &mut Vec<usize>,
    ) {
        let hub = b.new_check(Role::Root);
        for _ in 0..d_c - 1 {
            let (root, leaves) = b.a_block(d_v, d_c, y_n + 1);
            b.up_check[root] = hub;
            b.edge(root, hub);
            a_leaves.extend(leaves);
        }
        let (broot, bl, layer_checks) = b.b_block(d_v, y_n);
        b.up_check[broot] = hub;
        b.edge(broot, hub);
        b_leaves.extend(bl);
        for (i, checks) in layer_checks.iter().enumerate() {
            if i == 0 {
                continue;
            }
            for &c in checks {
                for _ in 0..d_c - 2 {
                    let (root, leaves) = b.a_block(d_v, d_c, i);
                    b.up_check[root] = c;
                    b.edge(root, c);
                    a_leaves.extend(leaves);
                }
            }
        }
    }
    let mut b = Builder::new();
    let mut a_leaves: Vec<usize> = Vec::new();
    let mut b_leaves: Vec<usize> = Vec::new();
    build_tree(&mut b, d_v, d_c, y_n, &mut a_leaves, &mut b_leaves);
    let l_n = a_leaves.len() + b_leaves.len();
    let single_vars = b.var_roles.len();

    // Completion hands every leaf d_v - 1 extra sockets, d_c per new
    // check; clone the whole tree d_c times when the counts do not
    // divide.
    let copies = if ((d_v - 1) * l_n) % d_c == 0 { 1 } else { d_c };
    for copy in 1..copies {
        debug_assert_eq!(b.var_roles.len(), single_vars * copy);
        build_tree(&mut b, d_v, d_c, y_n, &mut a_leaves, &mut b_leaves);
    }

    // Pair layered-block leaves first so every completion check that
    // touches them touches at least two; then fill with branching-block
    // leaves round-robin.
    let mut a_queue: VecQueue = VecQueue::new(&a_leaves, d_v - 1);
    let mut b_remaining: Vec<(usize, usize)> =
        b_leaves.iter().map(|&v| (v, d_v - 1)).collect();
    loop {
        b_remaining.sort_by_key(|&(v, r)| (usize::MAX - r, v));
        if b_remaining.iter().filter(|&&(_, r)| r > 0).count() < 2 {
            break;
        }
        let c = b.new_check(Role::Connecting);
        for slot in 0..2 {
            let (v, r) = b_remaining[slot];
            b.edge(v, c);
            b_remaining[slot] = (v, r - 1);
        }
        let mut used: BTreeSet<usize> = b_remaining[..2].iter().map(|&(v, _)| v).collect();
        for _ in 0..d_c - 2 {
            let v = a_queue.pop().ok_or_else(|| {
                Error::Construction("ran out of branching-block sockets during completion".into())
            })?;
            if !used.insert(v) {
                return Err(Error::Construction(
                    "completion would wire a leaf twice into one check".into(),
                ));
            }
            b.edge(v, c);
        }
    }
    if b_remaining.iter().any(|&(_, r)| r > 0) {
        return Err(Error::Construction(
            "a lone layered-block leaf cannot be paired; socket counts do not balance".into(),
        ));
    }
    while !a_queue.is_empty() {
        let c = b.new_check(Role::Connecting);
        let mut used = BTreeSet::new();
        for _ in 0..d_c {
            let v = a_queue.pop().ok_or_else(|| {
                Error::Construction("completion socket count is not divisible by d_c".into())
            })?;
            if !used.insert(v) {
                return Err(Error::Construction(
                    "completion would wire a leaf twice into one check".into(),
                ));
            }
            b.edge(v, c);
        }
    }

    let n_vars = b.var_roles.len();
    let n_checks = b.check_roles.len();
    let graph = TannerGraph::from_edges(
        GraphKind::Regular { d_v, d_c },
        n_vars,
        n_checks,
        &b.edges,
        None,
        None,
    )?;
    for v in 0..n_vars {
        if graph.var_degree(v) != d_v {
            return Err(Error::Construction(format!(
                "variable {v} finished with degree {}, expected {d_v}",
                graph.var_degree(v)
            )));
        }
    }
    for c in 0..n_checks {
        if graph.check_degree(c) != d_c {
            return Err(Error::Construction(format!(
                "check {c} finished with degree {}, expected {d_c}",
                graph.check_degree(c)
            )));
        }
    }
    let gamma: Vec<Rat> = b
        .var_roles
        .iter()
        .map(|r| if matches!(r, Role::BBlock(_)) { rat_i(-1) } else { rat_i(1) })
        .collect();
    let b_n = ((d_v - 1) as u64).pow(y_n as u32);
    Ok(TightInstance {
        graph,
        gamma_n: LlrVector::new(gamma),
        var_roles: b.var_roles,
        check_roles: b.check_roles,
        y_n,
        b_n,
        l_n,
        copies,
        up_check: b.up_check,
        height: b.height,
    })
}

/// Round-robin socket queue: each leaf appears once per round.
struct VecQueue {
    order: Vec<usize>,
    next: usize,
}

impl VecQueue {
    fn new(leaves: &[usize], rounds: usize) -> Self {
        let mut order = Vec::with_capacity(leaves.len() * rounds);
        for _ in 0..rounds {
            order.extend_from_slice(leaves);
        }
        VecQueue { order, next: 0 }
    }

    fn pop(&mut self) -> Option<usize> {
        let v = self.order.get(self.next).copied();
        self.next += 1;
        v
    }

    fn is_empty(&self) -> bool {
        self.next >= self.order.len()
    }
}

fn dv_geom(d_v: usize, upto: usize) -> Rat {
    // 1 + (d_v-1) + ... + (d_v-1)^upto = ((d_v-1)^(upto+1) - 1) / (d_v - 2)
    let base = rat_i(d_v as i64 - 1);
    let mut power = rat_i(1);
    let mut total = rat_i(0);
    for _ in 0..=upto {
        total += &power;
        power *= &base;
    }
    total
}

fn r_value(d_v: usize, eps: &Rat, x: usize) -> Rat {
    (rat_i(1) - eps) * dv_geom(d_v, x)
}

fn w_value(d_v: usize, eps: &Rat, i: usize) -> Rat {
    (rat_i(1) + eps) * dv_geom(d_v, i)
}

/// The explicit weight family: r_x flows up the branching blocks, w_i
/// flows down the layered block.
#[derive(Debug, Clone)]
pub struct TightnessWeights {
    pub epsilon: Rat,
    /// r_x for x = 0 ..= y_n + 1.
    pub r: Vec<Rat>,
    /// w_i for i = 0 ..= y_n.
    pub w_layers: Vec<Rat>,
}

impl TightnessWeights {
    pub fn new(d_v: usize, y_n: usize, epsilon: &Rat) -> Result<Self> {
        if d_v <= 2 {
            return Err(Error::invalid("variable degree must exceed 2"));
        }
        let cap = rat_i(1) - rat_i(2) / rat_i(d_v as i64);
        if !epsilon.is_positive() || *epsilon >= cap {
            return Err(Error::invalid(format!(
                "epsilon must lie strictly between 0 and {}",
                fmt_rat(&cap)
            )));
        }
        let r: Vec<Rat> = (0..=y_n + 1).map(|x| r_value(d_v, epsilon, x)).collect();
        let w_layers: Vec<Rat> = (0..=y_n).map(|i| w_value(d_v, epsilon, i)).collect();
        for i in 0..=y_n {
            if r[i + 1] < w_layers[i] {
                return Err(Error::invalid(format!(
                    "infeasible: r_{} = {} falls below w_{} = {}",
                    i + 1,
                    fmt_rat(&r[i + 1]),
                    i,
                    fmt_rat(&w_layers[i])
                )));
            }
        }
        Ok(TightnessWeights { epsilon: epsilon.clone(), r, w_layers })
    }
}

/// The explicit feasible weighting: branching blocks send r_h toward
/// their roots, the hub forwards w_{y_n} into the layered root, and each
/// layer splits its inflow minus 1 + eps across its children. Completion
/// edges stay zero. The result satisfies the budget and pairwise
/// conditions outright and becomes an exact flow pattern after per-check
/// normalization.
pub fn explicit_hyperflow(inst: &TightInstance, epsilon: &Rat) -> Result<EdgeWeighting> {
    let d_v = inst.d_v();
    let tw = TightnessWeights::new(d_v, inst.y_n, epsilon)?;
    let mut w = EdgeWeighting::zero(&inst.graph);
    for c in 0..inst.graph.n_checks {
        match inst.check_roles[c] {
            Role::Connecting => {}
            Role::Root => {
                for &v in &inst.graph.check_adj[c] {
                    match inst.var_roles[v] {
                        Role::ABlock(_) => {
                            w.w.insert((v, c), tw.r[inst.y_n + 1].clone());
                        }
                        Role::BBlock(_) => {
                            w.w.insert((v, c), -tw.w_layers[inst.y_n].clone());
                        }
                        _ => unreachable!("hub joins block roots only"),
                    }
                }
            }
            Role::ABlock(_) => {
                // One parent above, d_c - 1 children of equal height
                // below; the children push their accumulated weight up.
                let children: Vec<usize> = inst.graph.check_adj[c]
                    .iter()
                    .copied()
                    .filter(|&v| inst.up_check[v] == c)
                    .collect();
                let h = inst.height[children[0]];
                debug_assert!(children.iter().all(|&v| inst.height[v] == h));
                for &v in &inst.graph.check_adj[c] {
                    if inst.up_check[v] == c {
                        w.w.insert((v, c), tw.r[h].clone());
                    } else {
                        w.w.insert((v, c), -tw.r[h].clone());
                    }
                }
            }
            Role::BBlock(i) => {
                // The layer-i variable feeds w_{i-1} down to its
                // layer-(i-1) child; attached branching roots offer r_i.
                for &v in &inst.graph.check_adj[c] {
                    let value = match inst.var_roles[v] {
                        Role::ABlock(_) => tw.r[i].clone(),
                        Role::BBlock(_) if inst.up_check[v] == c => -tw.w_layers[i - 1].clone(),
                        Role::BBlock(_) => tw.w_layers[i - 1].clone(),
                        _ => unreachable!("layer checks join block variables only"),
                    };
                    w.w.insert((v, c), value);
                }
            }
        }
    }
    Ok(w)
}

#[derive(Debug, Clone)]
pub struct CertifiedBound {
    /// Certified minimum over feasible weightings of the largest cap.
    pub min_max_weight: Rat,
    pub b_n: u64,
    /// Slack margin the certificate LP fixed.
    pub margin: Rat,
}

/// Variables over ~this size skip the full-graph margin search and fall
/// back to the margin of the explicit weight family.
const FULL_MARGIN_SEARCH_LIMIT: usize = 400;

/// Certify that every feasible weighting for this instance needs some
/// edge of weight at least b_n. The LP relaxes to the closure of the
/// layered block (every edge of every check touching one of its
/// variables), keeps the budget rows of those variables, all pairwise
/// rows and caps inside the closure, and minimizes the cap; a relaxation
/// minimum is a valid lower bound on the true one.
pub fn certify_lower_bound(inst: &TightInstance) -> Result<CertifiedBound> {
    let graph = &inst.graph;
    let budgets = BudgetVector::from_llr(&inst.gamma_n);
    let margin = if graph.n_vars <= FULL_MARGIN_SEARCH_LIMIT {
        let found = find_dual_witness(graph, &budgets, None)?;
        if !found.margin.is_positive() {
            return Err(Error::Bounds(
                "no feasible weighting exists; the construction is broken".into(),
            ));
        }
        found.margin / rat_i(2)
    } else {
        let cap = rat_i(1) - rat_i(2) / rat_i(inst.d_v() as i64);
        cap / rat_i(4)
    };

    let b_vars: BTreeSet<usize> = (0..graph.n_vars)
        .filter(|&v| matches!(inst.var_roles[v], Role::BBlock(_)))
        .collect();
    let closure_checks: BTreeSet<usize> = b_vars
        .iter()
        .flat_map(|&v| graph.var_adj[v].iter().copied())
        .collect();
    let mut edge_col = std::collections::BTreeMap::new();
    for &c in &closure_checks {
        for &v in &graph.check_adj[c] {
            let next = edge_col.len();
            edge_col.entry((v, c)).or_insert(next);
        }
    }
    let n_edges = edge_col.len();
    let alpha = n_edges;

    let mut objective = vec![rat_i(0); n_edges + 1];
    objective[alpha] = rat_i(1);
    let mut lp = LinearProgram::minimize(n_edges + 1, objective);
    lp.set_lower(alpha, rat_i(0));
    for &v in &b_vars {
        let coeffs: Vec<(usize, Rat)> =
            graph.var_adj[v].iter().map(|&c| (edge_col[&(v, c)], rat_i(1))).collect();
        lp.add_le(coeffs, &budgets.b[v] - &margin);
    }
    for &c in &closure_checks {
        let adj = &graph.check_adj[c];
        for (s, &v) in adj.iter().enumerate() {
            for &u in &adj[s + 1..] {
                lp.add_ge(
                    vec![(edge_col[&(v, c)], rat_i(1)), (edge_col[&(u, c)], rat_i(1))],
                    rat_i(0),
                );
            }
        }
    }
    for (_, &col) in &edge_col {
        lp.add_le(vec![(col, rat_i(1)), (alpha, rat_i(-1))], rat_i(0));
        lp.add_ge(vec![(col, rat_i(1)), (alpha, rat_i(1))], rat_i(0));
    }
    let outcome = lp.solve()?;
    let LpOutcome::Optimal { value, .. } = outcome else {
        return Err(Error::Bounds("certificate LP failed to reach an optimum".into()));
    };
    let b_n_rat = rat_i(inst.b_n as i64);
    if value < b_n_rat {
        return Err(Error::Bounds(format!(
            "certified cap {} fell below the target {}; the bound argument fails here",
            fmt_rat(&value),
            inst.b_n
        )));
    }
    Ok(CertifiedBound { min_max_weight: value, b_n: inst.b_n, margin })
}
