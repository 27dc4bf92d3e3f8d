//! Tree expansion of acyclic certificate views.
//!
//! A single-sink acyclic view is unrolled into a root-oriented tree by
//! replicating, for every variable with several outgoing edges, its whole
//! ancestor subtree once per edge and scaling each copy by that edge's
//! share of the outgoing total. The expansion preserves per-node cost
//! totals, signs, flow patterns, the multiset of directed paths, and the
//! sink edge weight; `verify_forest_properties` re-checks all of that
//! exactly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{Signed, Zero};

use crate::lp::{fmt_rat, rat_i, Rat};
use crate::witness::{Node, Wdag};
use crate::{Error, Result};

/// Acyclic directed view with a unique sink variable. Node ids are those
/// of the source graph.
#[derive(Debug, Clone)]
pub struct SingleSinkWdag {
    pub wdag: Wdag,
    /// None exactly when the view has no edges.
    pub sink: Option<Node>,
    /// Weight of the distinguished sink edge; 0 for the empty view.
    pub alpha_max: Rat,
}

impl SingleSinkWdag {
    /// Wrap an acyclic view, locating its unique sink among non-isolated
    /// nodes. The recorded weight is the largest entering the sink.
    pub fn new(wdag: Wdag) -> Result<Self> {
        if !wdag.is_acyclic() {
            return Err(Error::Forest("view contains a directed cycle".into()));
        }
        if wdag.edges.is_empty() {
            return Ok(SingleSinkWdag { wdag, sink: None, alpha_max: rat_i(0) });
        }
        let adj = wdag.out_adj();
        let sinks: Vec<Node> = wdag
            .nodes()
            .into_iter()
            .filter(|n| adj.get(n).map_or(true, Vec::is_empty))
            .collect();
        let [sink] = sinks[..] else {
            return Err(Error::Forest(format!("expected one sink, found {}", sinks.len())));
        };
        let alpha_max = wdag
            .edges
            .iter()
            .filter(|(&(_, to), _)| to == sink)
            .map(|(_, w)| w.clone())
            .max()
            .unwrap();
        Ok(SingleSinkWdag { wdag, sink: Some(sink), alpha_max })
    }

    pub fn n_nodes(&self) -> usize {
        self.wdag.nodes().len()
    }
}

/// Ancestor subgraph of the heaviest check-to-variable edge: that edge's
/// variable endpoint becomes the sink, and every node with a directed
/// path to the check endpoint is kept. Requires a flow-pattern view
/// (each check has at most one outgoing edge); ties on weight break
/// toward the least (variable, check) pair.
pub fn extract_gmax(wdag: &Wdag) -> Result<SingleSinkWdag> {
    if !wdag.is_acyclic() {
        return Err(Error::Forest("view contains a directed cycle".into()));
    }
    for (&(from, _), _) in &wdag.edges {
        if let Node::Check(c) = from {
            let outs = wdag.edges.keys().filter(|&&(f, _)| f == Node::Check(c)).count();
            if outs > 1 {
                return Err(Error::Forest(format!(
                    "check {c} has {outs} outgoing edges; expected a flow pattern"
                )));
            }
        }
    }
    let mut candidates: Vec<(usize, usize, Rat)> = wdag
        .edges
        .iter()
        .filter_map(|(&(from, to), w)| match (from, to) {
            (Node::Check(c), Node::Var(v)) => Some((v, c, w.clone())),
            _ => None,
        })
        .collect();
    if candidates.is_empty() {
        let empty = Wdag {
            n_vars: wdag.n_vars,
            n_checks: wdag.n_checks,
            gamma: wdag.gamma.clone(),
            edges: BTreeMap::new(),
        };
        return Ok(SingleSinkWdag { wdag: empty, sink: None, alpha_max: rat_i(0) });
    }
    candidates.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let (v_max, c_max, alpha_max) = candidates.swap_remove(0);

    // Reverse reachability from the chosen check.
    let mut rev: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
    for &(from, to) in wdag.edges.keys() {
        rev.entry(to).or_default().push(from);
    }
    let mut kept: BTreeSet<Node> = BTreeSet::new();
    let mut queue = VecDeque::from([Node::Check(c_max)]);
    kept.insert(Node::Check(c_max));
    while let Some(n) = queue.pop_front() {
        if let Some(parents) = rev.get(&n) {
            for &p in parents {
                if kept.insert(p) {
                    queue.push_back(p);
                }
            }
        }
    }
    kept.insert(Node::Var(v_max));

    let edges: BTreeMap<(Node, Node), Rat> = wdag
        .edges
        .iter()
        .filter(|(&(from, to), _)| kept.contains(&from) && kept.contains(&to))
        .map(|(&k, w)| (k, w.clone()))
        .collect();
    let sub = Wdag {
        n_vars: wdag.n_vars,
        n_checks: wdag.n_checks,
        gamma: wdag.gamma.clone(),
        edges,
    };
    let incoming_at_sink = sub
        .edges
        .keys()
        .filter(|&&(_, to)| to == Node::Var(v_max))
        .count();
    if incoming_at_sink != 1 {
        return Err(Error::Forest(format!(
            "sink variable {v_max} has {incoming_at_sink} incoming edges; expected 1"
        )));
    }
    Ok(SingleSinkWdag { wdag: sub, sink: Some(Node::Var(v_max)), alpha_max })
}

/// Root-oriented tree of replicates. Every non-root replicate stores its
/// unique parent edge; costs live on variable replicates.
#[derive(Debug, Clone)]
pub struct WeightedForest {
    /// Replicate id to original node.
    pub origin: Vec<Node>,
    /// Parent edge (parent replicate, weight); None only at the root.
    pub out_edge: Vec<Option<(usize, Rat)>>,
    /// Scaled per-replicate cost; zero for check replicates.
    pub gamma_prime: Vec<Rat>,
    pub root: Option<usize>,
}

impl WeightedForest {
    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (rep, out) in self.out_edge.iter().enumerate() {
            if let Some((parent, _)) = out {
                ch[*parent].push(rep);
            }
        }
        ch
    }

    pub fn leaves(&self) -> Vec<usize> {
        let ch = self.children();
        (0..self.len()).filter(|&r| ch[r].is_empty()).collect()
    }

    pub fn replicates_of(&self, node: Node) -> Vec<usize> {
        (0..self.len()).filter(|&r| self.origin[r] == node).collect()
    }

    /// Original-id sequence of the path from `rep` to the root.
    pub fn path_origins(&self, mut rep: usize) -> Vec<Node> {
        let mut path = vec![self.origin[rep]];
        while let Some((parent, _)) = &self.out_edge[rep] {
            rep = *parent;
            path.push(self.origin[rep]);
        }
        path
    }

    pub fn to_json(&self) -> String {
        let nodes: Vec<serde_json::Value> = (0..self.len())
            .map(|r| {
                let origin = match self.origin[r] {
                    Node::Var(v) => format!("v{v}"),
                    Node::Check(c) => format!("c{c}"),
                };
                serde_json::json!({
                    "id": r,
                    "origin": origin,
                    "gamma": fmt_rat(&self.gamma_prime[r]),
                    "parent": self.out_edge[r].as_ref().map(|(p, _)| *p),
                    "weight": self.out_edge[r].as_ref().map(|(_, w)| fmt_rat(w)),
                })
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "root": self.root,
            "nodes": nodes,
        }))
        .unwrap()
    }
}

struct Builder {
    origin: Vec<Node>,
    scale: Vec<Rat>,
    out: Vec<Vec<(usize, Rat)>>,
    incoming: Vec<BTreeSet<usize>>,
    alive: Vec<bool>,
    alive_count: usize,
}

impl Builder {
    fn add_node(&mut self, origin: Node, scale: Rat) -> usize {
        self.origin.push(origin);
        self.scale.push(scale);
        self.out.push(Vec::new());
        self.incoming.push(BTreeSet::new());
        self.alive.push(true);
        self.alive_count += 1;
        self.origin.len() - 1
    }

    fn add_edge(&mut self, from: usize, to: usize, weight: Rat) {
        self.out[from].push((to, weight));
        self.incoming[to].insert(from);
    }

    /// All live replicates with a directed path to `rep`, plus `rep`.
    fn ancestors_inclusive(&self, rep: usize) -> Vec<usize> {
        let mut seen = BTreeSet::from([rep]);
        let mut queue = VecDeque::from([rep]);
        while let Some(x) = queue.pop_front() {
            for &src in &self.incoming[x] {
                if self.alive[src] && seen.insert(src) {
                    queue.push_back(src);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn kill(&mut self, reps: &[usize]) {
        for &x in reps {
            let outs = std::mem::take(&mut self.out[x]);
            for (y, _) in outs {
                self.incoming[y].remove(&x);
            }
            if self.alive[x] {
                self.alive[x] = false;
                self.alive_count -= 1;
            }
        }
    }
}

/// Unroll a single-sink acyclic view into a root-oriented tree.
///
/// Variables are processed in topological order (least id first among
/// ready nodes). A variable replicate with p >= 2 outgoing edges of
/// weights e_1..e_p is replaced by p copies of its inclusive ancestor
/// subtree; copy l scales every internal weight and cost by e_l over the
/// outgoing total and hangs onto target l with weight e_l. Aborts when
/// the live replicate count exceeds `size_cap`.
pub fn expand_to_forest(g: &SingleSinkWdag, size_cap: usize) -> Result<WeightedForest> {
    let Some(sink) = g.sink else {
        return Ok(WeightedForest {
            origin: Vec::new(),
            out_edge: Vec::new(),
            gamma_prime: Vec::new(),
            root: None,
        });
    };
    let nodes: Vec<Node> = g.wdag.nodes().into_iter().collect();
    let index: BTreeMap<Node, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();

    let mut b = Builder {
        origin: Vec::new(),
        scale: Vec::new(),
        out: Vec::new(),
        incoming: Vec::new(),
        alive: Vec::new(),
        alive_count: 0,
    };
    for &n in &nodes {
        b.add_node(n, rat_i(1));
    }
    for (&(from, to), w) in &g.wdag.edges {
        b.add_edge(index[&from], index[&to], w.clone());
    }

    // Topological order over the original view, variables only.
    let order = g
        .wdag
        .topological_sort()
        .ok_or_else(|| Error::Forest("view contains a directed cycle".into()))?;
    let variables: Vec<Node> = order.into_iter().filter(|n| matches!(n, Node::Var(_))).collect();

    for var in variables {
        let rep = index[&var];
        debug_assert!(b.alive[rep], "a variable is split only after its turn");
        if b.out[rep].len() < 2 {
            continue;
        }
        let subtree = b.ancestors_inclusive(rep);
        let mut out_edges = b.out[rep].clone();
        out_edges.sort_by(|a, c| a.0.cmp(&c.0));
        let e_total: Rat = out_edges.iter().map(|(_, w)| w.clone()).sum();

        for (target, e_l) in &out_edges {
            let factor = e_l / &e_total;
            let mut map = BTreeMap::new();
            for &x in &subtree {
                let scale = &b.scale[x] * &factor;
                let id = b.add_node(b.origin[x], scale);
                map.insert(x, id);
            }
            for &x in &subtree {
                for (y, w) in b.out[x].clone() {
                    if let Some(&ny) = map.get(&y) {
                        let nw = &w * &factor;
                        b.add_edge(map[&x], ny, nw);
                    }
                }
            }
            b.add_edge(map[&rep], *target, e_l.clone());
            if b.alive_count > size_cap {
                return Err(Error::Forest(format!(
                    "expansion exceeded the replicate cap of {size_cap}; \
                     the path count of this view is too large"
                )));
            }
        }
        b.kill(&subtree);
    }

    // Compact live replicates into the output arrays.
    let mut compact = BTreeMap::new();
    let mut origin = Vec::new();
    let mut gamma_prime = Vec::new();
    for x in 0..b.origin.len() {
        if !b.alive[x] {
            continue;
        }
        compact.insert(x, origin.len());
        origin.push(b.origin[x]);
        gamma_prime.push(match b.origin[x] {
            Node::Var(v) => &g.wdag.gamma[v] * &b.scale[x],
            Node::Check(_) => rat_i(0),
        });
    }
    let mut out_edge = vec![None; origin.len()];
    let mut root = None;
    for (&x, &r) in &compact {
        match b.out[x].len() {
            0 => {
                if root.replace(r).is_some() {
                    return Err(Error::Forest("expansion produced two roots".into()));
                }
                if b.origin[x] != sink {
                    return Err(Error::Forest("root replicate is not the sink".into()));
                }
            }
            1 => {
                let (y, w) = &b.out[x][0];
                out_edge[r] = Some((compact[y], w.clone()));
            }
            n => {
                return Err(Error::Forest(format!(
                    "replicate of {:?} still has {n} outgoing edges",
                    b.origin[x]
                )))
            }
        }
    }
    Ok(WeightedForest { origin, out_edge, gamma_prime, root })
}

#[derive(Debug, Clone, Default)]
pub struct ForestReport {
    pub violations: Vec<String>,
    /// Directed-path multiset comparison runs only on small views.
    pub paths_checked: bool,
}

impl ForestReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Maximal directed paths (source to sink) as origin-id sequences.
fn all_paths(wdag: &Wdag) -> Vec<Vec<Node>> {
    let adj = wdag.out_adj();
    let nodes = wdag.nodes();
    let mut has_in: BTreeSet<Node> = BTreeSet::new();
    for &(_, to) in wdag.edges.keys() {
        has_in.insert(to);
    }
    let mut paths = Vec::new();
    let empty: Vec<Node> = Vec::new();
    for &start in nodes.iter().filter(|n| !has_in.contains(n)) {
        let mut stack = vec![(start, 0usize)];
        while let Some(&(node, idx)) = stack.last() {
            let succs = adj.get(&node).unwrap_or(&empty);
            if succs.is_empty() {
                paths.push(stack.iter().map(|&(n, _)| n).collect());
                stack.pop();
            } else if idx < succs.len() {
                stack.last_mut().unwrap().1 += 1;
                stack.push((succs[idx], 0));
            } else {
                stack.pop();
            }
        }
    }
    paths
}

const PATH_CHECK_NODE_LIMIT: usize = 16;

/// Re-check the expansion guarantees: replicate coverage, edge
/// provenance, per-node cost totals and signs, budget and flow shape on
/// the tree, path multiset equality (small views only), and sink edge
/// preservation.
pub fn verify_forest_properties(g: &SingleSinkWdag, forest: &WeightedForest) -> Result<ForestReport> {
    let mut report = ForestReport::default();
    let violations = &mut report.violations;

    if g.sink.is_none() {
        if !forest.is_empty() {
            violations.push("empty view expanded to a nonempty forest".into());
        }
        return Ok(report);
    }
    let g_nodes = g.wdag.nodes();

    // Coverage: replicates partition by origin, and every original node
    // keeps at least one replicate.
    for r in 0..forest.len() {
        if !g_nodes.contains(&forest.origin[r]) {
            violations.push(format!("replicate {r} has unknown origin {:?}", forest.origin[r]));
        }
    }
    for &n in &g_nodes {
        if forest.replicates_of(n).is_empty() {
            violations.push(format!("original node {n:?} has no replicate"));
        }
    }

    // Edge provenance: every tree edge projects to an original edge.
    for r in 0..forest.len() {
        if let Some((parent, w)) = &forest.out_edge[r] {
            let key = (forest.origin[r], forest.origin[*parent]);
            if !g.wdag.edges.contains_key(&key) {
                violations.push(format!(
                    "tree edge {r}->{parent} projects to {key:?}, absent from the view"
                ));
            }
            if !w.is_positive() {
                violations.push(format!("tree edge {r}->{parent} has nonpositive weight"));
            }
        } else if Some(r) != forest.root {
            violations.push(format!("replicate {r} has no parent yet is not the root"));
        }
    }
    match (forest.root, g.sink) {
        (Some(root), Some(sink)) => {
            if forest.origin[root] != sink {
                violations.push("root replicate does not originate from the sink".into());
            }
        }
        _ => violations.push("nonempty forest must have a root".into()),
    }

    // Cost totals and signs per original variable.
    for &n in &g_nodes {
        let Node::Var(v) = n else { continue };
        let gamma = &g.wdag.gamma[v];
        let total: Rat = forest
            .replicates_of(n)
            .into_iter()
            .map(|r| forest.gamma_prime[r].clone())
            .sum();
        if &total != gamma {
            violations.push(format!(
                "variable {v}: replicate costs sum to {}, original is {}",
                fmt_rat(&total),
                fmt_rat(gamma)
            ));
        }
        for r in forest.replicates_of(n) {
            let gp = &forest.gamma_prime[r];
            let same_sign = (gp.is_zero() && gamma.is_zero())
                || (gp.is_positive() && gamma.is_positive())
                || (gp.is_negative() && gamma.is_negative());
            if !same_sign {
                violations.push(format!(
                    "replicate {r} of variable {v} has cost {} against original {}",
                    fmt_rat(gp),
                    fmt_rat(gamma)
                ));
            }
        }
    }

    // Budget shape on the tree: outgoing minus incoming stays under the
    // replicate cost whenever the original satisfied it; checked as
    // scaled inequality per variable replicate.
    let children = forest.children();
    for r in 0..forest.len() {
        match forest.origin[r] {
            Node::Var(_) => {
                let out: Rat = forest.out_edge[r]
                    .as_ref()
                    .map(|(_, w)| w.clone())
                    .unwrap_or_else(|| rat_i(0));
                let inflow: Rat = children[r]
                    .iter()
                    .map(|&ch| forest.out_edge[ch].as_ref().unwrap().1.clone())
                    .sum();
                let original = match forest.origin[r] {
                    Node::Var(v) => v,
                    _ => unreachable!(),
                };
                let signed_original: Rat = g
                    .wdag
                    .edges
                    .iter()
                    .map(|(&(from, to), w)| {
                        if from == Node::Var(original) {
                            w.clone()
                        } else if to == Node::Var(original) {
                            -w.clone()
                        } else {
                            rat_i(0)
                        }
                    })
                    .sum();
                if signed_original < g.wdag.gamma[original] && &out - &inflow > forest.gamma_prime[r]
                {
                    violations.push(format!(
                        "replicate {r}: scaled outflow exceeds its cost share"
                    ));
                }
            }
            Node::Check(_) => {
                // Flow shape: every child edge carries the parent weight.
                let Some((_, out_w)) = &forest.out_edge[r] else {
                    violations.push(format!("check replicate {r} must not be the root"));
                    continue;
                };
                for &ch in &children[r] {
                    let w = &forest.out_edge[ch].as_ref().unwrap().1;
                    if w != out_w {
                        violations.push(format!(
                            "check replicate {r}: child edge weight {} differs from outgoing {}",
                            fmt_rat(w),
                            fmt_rat(out_w)
                        ));
                    }
                }
            }
        }
    }

    // Path multiset equality on small views.
    if g_nodes.len() <= PATH_CHECK_NODE_LIMIT {
        report.paths_checked = true;
        let mut original: Vec<Vec<Node>> = all_paths(&g.wdag);
        let mut unrolled: Vec<Vec<Node>> = forest
            .leaves()
            .into_iter()
            .map(|leaf| forest.path_origins(leaf))
            .collect();
        original.sort();
        unrolled.sort();
        if original != unrolled {
            violations.push(format!(
                "path multisets differ: {} in the view, {} in the tree",
                original.len(),
                unrolled.len()
            ));
        }
    }

    // Sink edge preservation, when the sink has a single incoming edge.
    if let (Some(sink), Some(root)) = (g.sink, forest.root) {
        let sink_in = g.wdag.edges.keys().filter(|&&(_, to)| to == sink).count();
        if sink_in == 1 {
            if children[root].len() != 1 {
                violations.push(format!(
                    "root has {} children; the sink had a single incoming edge",
                    children[root].len()
                ));
            } else {
                let w = &forest.out_edge[children[root][0]].as_ref().unwrap().1;
                if *w != g.alpha_max {
                    violations.push(format!(
                        "root edge weight {} differs from the sink weight {}",
                        fmt_rat(w),
                        fmt_rat(&g.alpha_max)
                    ));
                }
            }
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rat;

    fn wdag(n_vars: usize, n_checks: usize, gamma: Vec<Rat>, edges: &[(Node, Node, Rat)]) -> Wdag {
        Wdag {
            n_vars,
            n_checks,
            gamma,
            edges: edges.iter().map(|(a, b, w)| ((*a, *b), w.clone())).collect(),
        }
    }

    #[test]
    fn gmax_on_empty_and_single_edge_views() {
        let w = wdag(2, 1, vec![rat_i(1), rat_i(1)], &[]);
        let g = extract_gmax(&w).unwrap();
        assert!(g.sink.is_none());
        assert!(g.alpha_max.is_zero());

        let w = wdag(
            2,
            1,
            vec![rat_i(1), rat_i(1)],
            &[
                (Node::Var(1), Node::Check(0), rat_i(2)),
                (Node::Check(0), Node::Var(0), rat_i(2)),
            ],
        );
        let g = extract_gmax(&w).unwrap();
        assert_eq!(g.sink, Some(Node::Var(0)));
        assert_eq!(g.alpha_max, rat_i(2));
        assert_eq!(g.wdag.edges.len(), 2);
    }

    #[test]
    fn gmax_keeps_exactly_the_ancestors() {
        // Two chains into c2->v0 (weight 3) and a heavier side chain
        // c3->v4 (weight 1) that must be cut away.
        let edges = [
            (Node::Var(1), Node::Check(0), rat_i(3)),
            (Node::Check(0), Node::Var(2), rat_i(3)),
            (Node::Var(2), Node::Check(2), rat_i(3)),
            (Node::Var(3), Node::Check(2), rat_i(3)),
            (Node::Check(2), Node::Var(0), rat_i(3)),
            (Node::Var(3), Node::Check(3), rat_i(1)),
            (Node::Check(3), Node::Var(4), rat_i(1)),
        ];
        let w = wdag(5, 4, vec![rat_i(1); 5], &edges);
        let g = extract_gmax(&w).unwrap();
        assert_eq!(g.sink, Some(Node::Var(0)));
        assert_eq!(g.alpha_max, rat_i(3));
        // v4 and c3 are not ancestors of c2 and disappear; the edge
        // v3 -> c3 is dropped with them.
        assert!(!g.wdag.nodes().contains(&Node::Var(4)));
        assert!(!g.wdag.nodes().contains(&Node::Check(3)));
        assert_eq!(g.wdag.edges.len(), 5);
        // Every kept node reaches the chosen check.
        for &n in &g.wdag.nodes() {
            if n == Node::Var(0) {
                continue;
            }
            let mut frontier = BTreeSet::from([n]);
            let adj = g.wdag.out_adj();
            let mut reached = false;
            for _ in 0..10 {
                if frontier.contains(&Node::Check(2)) {
                    reached = true;
                    break;
                }
                frontier = frontier
                    .iter()
                    .flat_map(|x| adj.get(x).cloned().unwrap_or_default())
                    .collect();
            }
            assert!(reached, "{n:?} does not reach the sink check");
        }
    }

    #[test]
    fn tree_input_expands_to_itself() {
        let edges = [
            (Node::Var(1), Node::Check(0), rat_i(2)),
            (Node::Var(2), Node::Check(0), rat_i(2)),
            (Node::Check(0), Node::Var(0), rat_i(2)),
        ];
        let w = wdag(3, 1, vec![rat_i(1); 3], &edges);
        let g = SingleSinkWdag::new(w).unwrap();
        let forest = expand_to_forest(&g, 100_000).unwrap();
        assert_eq!(forest.len(), 4);
        assert_eq!(forest.leaves().len(), 2);
        let report = verify_forest_properties(&g, &forest).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
        assert!(report.paths_checked);
        // Weights are untouched.
        for r in 0..forest.len() {
            if let Some((_, w)) = &forest.out_edge[r] {
                assert_eq!(*w, rat_i(2));
            }
        }
    }

    #[test]
    fn diamond_splits_the_shared_source() {
        let edges = [
            (Node::Var(1), Node::Check(0), rat_i(1)),
            (Node::Var(1), Node::Check(1), rat_i(1)),
            (Node::Check(0), Node::Var(0), rat_i(1)),
            (Node::Check(1), Node::Var(0), rat_i(1)),
        ];
        let w = wdag(2, 2, vec![rat_i(1), rat_i(1)], &edges);
        let g = SingleSinkWdag::new(w).unwrap();
        let forest = expand_to_forest(&g, 100_000).unwrap();
        let v1_reps = forest.replicates_of(Node::Var(1));
        assert_eq!(v1_reps.len(), 2);
        for r in v1_reps {
            assert_eq!(forest.gamma_prime[r], rat(1, 2));
            assert_eq!(forest.out_edge[r].as_ref().unwrap().1, rat_i(1));
        }
        let report = verify_forest_properties(&g, &forest).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    fn doubling_chain(levels: usize) -> Wdag {
        // Level i variable feeds two checks, both feeding level i+1's
        // variable: path count doubles per level.
        let mut edges = Vec::new();
        for i in 0..levels {
            let (lo, hi) = (i, i + 1);
            edges.push((Node::Var(lo), Node::Check(2 * i), rat_i(1)));
            edges.push((Node::Var(lo), Node::Check(2 * i + 1), rat_i(1)));
            edges.push((Node::Check(2 * i), Node::Var(hi), rat_i(1)));
            edges.push((Node::Check(2 * i + 1), Node::Var(hi), rat_i(1)));
        }
        wdag(levels + 1, 2 * levels, vec![rat_i(1); levels + 1], &edges)
    }

    #[test]
    fn replicate_cap_aborts_exponential_growth() {
        let g = SingleSinkWdag::new(doubling_chain(12)).unwrap();
        let err = expand_to_forest(&g, 500).unwrap_err();
        assert!(err.to_string().contains("cap"));
    }

    #[test]
    fn doubling_chain_counts_paths() {
        let g = SingleSinkWdag::new(doubling_chain(3)).unwrap();
        let forest = expand_to_forest(&g, 100_000).unwrap();
        // 2^3 root-to-leaf paths.
        assert_eq!(forest.leaves().len(), 8);
        let report = verify_forest_properties(&g, &forest).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn verifier_flags_mutants() {
        let g = SingleSinkWdag::new(doubling_chain(2)).unwrap();
        let forest = expand_to_forest(&g, 100_000).unwrap();
        assert!(verify_forest_properties(&g, &forest).unwrap().is_valid());

        // Perturb one replicate cost: totals break.
        let mut bad = forest.clone();
        let r = bad.replicates_of(Node::Var(0))[0];
        bad.gamma_prime[r] += rat(1, 7);
        let report = verify_forest_properties(&g, &bad).unwrap();
        assert!(report.violations.iter().any(|m| m.contains("sum to")));

        // Unscale one subtree edge: flow shape breaks.
        let mut bad = forest.clone();
        let leaf = bad.leaves()[0];
        bad.out_edge[leaf].as_mut().unwrap().1 = rat_i(5);
        let report = verify_forest_properties(&g, &bad).unwrap();
        assert!(!report.is_valid());
    }

    #[test]
    fn multi_edge_sink_is_accepted_by_new_but_alpha_is_max() {
        let edges = [
            (Node::Var(1), Node::Check(0), rat_i(1)),
            (Node::Check(0), Node::Var(0), rat_i(1)),
            (Node::Var(2), Node::Check(1), rat_i(4)),
            (Node::Check(1), Node::Var(0), rat_i(4)),
        ];
        let w = wdag(3, 2, vec![rat_i(1); 3], &edges);
        let g = SingleSinkWdag::new(w).unwrap();
        assert_eq!(g.alpha_max, rat_i(4));
        let forest = expand_to_forest(&g, 100_000).unwrap();
        let report = verify_forest_properties(&g, &forest).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
    }
}
