//! Tanner graph constructions.
//!
//! Four families: configuration-model regular codes, spatially coupled
//! chains with truncated boundaries, their circulant graph covers, and the
//! codes derived from a cover by cutting out a contiguous arc of variable
//! positions. All randomness flows through a caller-supplied seed and every
//! construction is deterministic given that seed.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of a coupled ensemble. Check degree is `k * d_v`; a chain
/// with coupling length `l` has variable positions `-l ..= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub d_v: usize,
    pub d_c: usize,
    pub k: usize,
    pub l: i64,
    pub m: usize,
}

impl CodeParams {
    pub fn new(d_v: usize, k: usize, l: i64, m: usize) -> Result<Self> {
        let p = CodeParams { d_v, d_c: k * d_v, k, l, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_v < 3 || self.d_v % 2 == 0 {
            return Err(Error::invalid(format!(
                "variable degree must be odd and at least 3, got {}",
                self.d_v
            )));
        }
        if self.d_c != self.k * self.d_v {
            return Err(Error::invalid(format!(
                "check degree {} is not k*d_v = {}",
                self.d_c,
                self.k * self.d_v
            )));
        }
        if self.d_c <= 2 {
            return Err(Error::invalid("check degree must exceed 2".to_string()));
        }
        if self.l < 1 {
            return Err(Error::invalid("coupling length must be at least 1".to_string()));
        }
        if self.m == 0 || self.m % self.k != 0 {
            return Err(Error::invalid(format!(
                "layer size {} must be a positive multiple of k = {}",
                self.m, self.k
            )));
        }
        Ok(())
    }

    /// Half coupling width (d_v - 1) / 2.
    pub fn hat_dv(&self) -> i64 {
        ((self.d_v - 1) / 2) as i64
    }

    /// Checks per position.
    pub fn checks_per_pos(&self) -> usize {
        self.m / self.k
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphKind {
    Regular { d_v: usize, d_c: usize },
    SpatiallyCoupled(CodeParams),
    GraphCover(CodeParams),
    Custom,
}

/// Bipartite Tanner graph with optional spatial positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    pub kind: GraphKind,
    pub n_vars: usize,
    pub n_checks: usize,
    /// Per variable, sorted adjacent check ids.
    pub var_adj: Vec<Vec<usize>>,
    /// Per check, sorted adjacent variable ids.
    pub check_adj: Vec<Vec<usize>>,
    pub var_pos: Option<Vec<i64>>,
    pub check_pos: Option<Vec<i64>>,
}

impl TannerGraph {
    pub fn from_edges(
        kind: GraphKind,
        n_vars: usize,
        n_checks: usize,
        edges: &[(usize, usize)],
        var_pos: Option<Vec<i64>>,
        check_pos: Option<Vec<i64>>,
    ) -> Result<Self> {
        let mut var_adj = vec![Vec::new(); n_vars];
        let mut check_adj = vec![Vec::new(); n_checks];
        let mut seen = BTreeSet::new();
        for &(v, c) in edges {
            if v >= n_vars || c >= n_checks {
                return Err(Error::Construction(format!(
                    "edge ({v},{c}) out of range for {n_vars} variables, {n_checks} checks"
                )));
            }
            if !seen.insert((v, c)) {
                return Err(Error::Construction(format!("duplicate edge ({v},{c})")));
            }
            var_adj[v].push(c);
            check_adj[c].push(v);
        }
        for adj in var_adj.iter_mut() {
            adj.sort_unstable();
        }
        for adj in check_adj.iter_mut() {
            adj.sort_unstable();
        }
        if let Some(p) = &var_pos {
            if p.len() != n_vars {
                return Err(Error::Construction("variable position vector length mismatch".into()));
            }
        }
        if let Some(p) = &check_pos {
            if p.len() != n_checks {
                return Err(Error::Construction("check position vector length mismatch".into()));
            }
        }
        Ok(TannerGraph { kind, n_vars, n_checks, var_adj, check_adj, var_pos, check_pos })
    }

    /// Edge list sorted lexicographically by (variable, check).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (v, adj) in self.var_adj.iter().enumerate() {
            for &c in adj {
                out.push((v, c));
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.var_adj.iter().map(Vec::len).sum()
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_adj[v].len()
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_adj[c].len()
    }

    pub fn to_json(&self) -> String {
        let (kind, params) = match &self.kind {
            GraphKind::Regular { d_v, d_c } => (
                "regular",
                serde_json::json!({ "d_v": d_v, "d_c": d_c }),
            ),
            GraphKind::SpatiallyCoupled(p) => ("spatially_coupled", serde_json::to_value(p).unwrap()),
            GraphKind::GraphCover(p) => ("graph_cover", serde_json::to_value(p).unwrap()),
            GraphKind::Custom => ("custom", serde_json::json!({})),
        };
        let doc = GraphJson {
            kind: kind.to_string(),
            params,
            n_vars: self.n_vars,
            n_checks: self.n_checks,
            edges: self.edges(),
            var_pos: self.var_pos.clone(),
            check_pos: self.check_pos.clone(),
        };
        serde_json::to_string_pretty(&doc).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)
            .map_err(|e| Error::Serialization(format!("graph json: {e}")))?;
        let kind = match doc.kind.as_str() {
            "regular" => {
                #[derive(Deserialize)]
                struct P {
                    d_v: usize,
                    d_c: usize,
                }
                let p: P = serde_json::from_value(doc.params)
                    .map_err(|e| Error::Serialization(format!("regular params: {e}")))?;
                GraphKind::Regular { d_v: p.d_v, d_c: p.d_c }
            }
            "spatially_coupled" => GraphKind::SpatiallyCoupled(
                serde_json::from_value(doc.params)
                    .map_err(|e| Error::Serialization(format!("coupled params: {e}")))?,
            ),
            "graph_cover" => GraphKind::GraphCover(
                serde_json::from_value(doc.params)
                    .map_err(|e| Error::Serialization(format!("cover params: {e}")))?,
            ),
            "custom" => GraphKind::Custom,
            other => {
                return Err(Error::Serialization(format!("unknown graph kind {other:?}")))
            }
        };
        TannerGraph::from_edges(
            kind,
            doc.n_vars,
            doc.n_checks,
            &doc.edges,
            doc.var_pos,
            doc.check_pos,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    kind: String,
    params: serde_json::Value,
    n_vars: usize,
    n_checks: usize,
    edges: Vec<(usize, usize)>,
    var_pos: Option<Vec<i64>>,
    check_pos: Option<Vec<i64>>,
}

/// Derived code plus the bookkeeping linking it back to its cover.
#[derive(Debug, Clone)]
pub struct DerivedCode {
    pub graph: TannerGraph,
    pub cut: i64,
    /// Removed cover variable ids, sorted.
    pub special_vars: Vec<usize>,
    /// Derived variable id -> cover variable id.
    pub var_map: Vec<usize>,
    /// Derived check id -> cover check id.
    pub check_map: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Configuration-model (d_v, d_c)-regular code on n variables. Resamples
/// until the matching is simple. A random matching is simple with
/// probability near exp(-(d_v-1)(d_c-1)/2), so the attempt budget covers
/// check degrees up to about 8 at any size.
pub fn build_regular(d_v: usize, d_c: usize, n: usize, seed: u64) -> Result<TannerGraph> {
    if d_v == 0 || d_c == 0 || n == 0 {
        return Err(Error::invalid("degrees and size must be positive"));
    }
    if (n * d_v) % d_c != 0 {
        return Err(Error::invalid(format!(
            "{n} variables of degree {d_v} cannot split into checks of degree {d_c}"
        )));
    }
    let n_checks = n * d_v / d_c;
    let mut rng = rng_from_seed(seed);
    let mut var_sockets: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d_v)).collect();
    const MAX_ATTEMPTS: usize = 50_000;
    for _attempt in 0..MAX_ATTEMPTS {
        var_sockets.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(n * d_v);
        let mut ok = true;
        let mut seen = BTreeSet::new();
        for (s, &v) in var_sockets.iter().enumerate() {
            let c = s / d_c;
            if !seen.insert((v, c)) {
                ok = false;
                break;
            }
            edges.push((v, c));
        }
        if ok {
            return TannerGraph::from_edges(
                GraphKind::Regular { d_v, d_c },
                n,
                n_checks,
                &edges,
                None,
                None,
            );
        }
    }
    Err(Error::Construction(format!(
        "no simple ({d_v},{d_c})-regular matching on {n} variables after {MAX_ATTEMPTS} attempts"
    )))
}

// Variable positions covered by the check at position j: the coupling
// window clipped to the chain.
fn chain_window(params: &CodeParams, j: i64) -> std::ops::RangeInclusive<i64> {
    let hd = params.hat_dv();
    (j - hd).max(-params.l)..=(j + hd).min(params.l)
}

fn sc_var_id(params: &CodeParams, p: i64, t: usize) -> usize {
    ((p + params.l) as usize) * params.m + t
}

fn sc_check_id(params: &CodeParams, j: i64, u: usize) -> usize {
    ((j + params.l + params.hat_dv()) as usize) * params.checks_per_pos() + u
}

/// Spatially coupled chain: variables at positions -l..=l, checks at
/// -l-hat..=l+hat with boundary checks of reduced degree. Within each
/// (check position, variable position) pair the wiring is a uniform
/// random permutation, so no two checks at one position share a variable.
pub fn build_spatially_coupled(params: &CodeParams, seed: u64) -> Result<TannerGraph> {
    params.validate()?;
    let hd = params.hat_dv();
    let l = params.l;
    let mut rng = rng_from_seed(seed);
    let n_vars = (2 * l + 1) as usize * params.m;
    let n_checks = (2 * (l + hd) + 1) as usize * params.checks_per_pos();
    let mut edges = Vec::new();
    for j in -l - hd..=l + hd {
        for p in chain_window(params, j) {
            let mut perm: Vec<usize> = (0..params.m).collect();
            perm.shuffle(&mut rng);
            for (t, &s) in perm.iter().enumerate() {
                edges.push((sc_var_id(params, p, t), sc_check_id(params, j, s / params.k)));
            }
        }
    }
    let var_pos = (-l..=l).flat_map(|p| std::iter::repeat(p).take(params.m)).collect();
    let check_pos = (-l - hd..=l + hd)
        .flat_map(|j| std::iter::repeat(j).take(params.checks_per_pos()))
        .collect();
    TannerGraph::from_edges(
        GraphKind::SpatiallyCoupled(*params),
        n_vars,
        n_checks,
        &edges,
        Some(var_pos),
        Some(check_pos),
    )
}

fn wrap(p: i64, l: i64) -> i64 {
    (p + l).rem_euclid(2 * l + 1) - l
}

fn gc_var_id(params: &CodeParams, p: i64, t: usize) -> usize {
    ((p + params.l) as usize) * params.m + t
}

fn gc_check_id(params: &CodeParams, j: i64, u: usize) -> usize {
    ((j + params.l) as usize) * params.checks_per_pos() + u
}

/// Circulant graph cover: positions wrap modulo -l..=l, every check is
/// full degree.
pub fn build_graph_cover(params: &CodeParams, seed: u64) -> Result<TannerGraph> {
    params.validate()?;
    let l = params.l;
    let hd = params.hat_dv();
    if 2 * l + 1 < params.d_v as i64 {
        return Err(Error::invalid(format!(
            "cover needs 2l+1 >= d_v so window positions stay distinct; got l = {l}, d_v = {}",
            params.d_v
        )));
    }
    let mut rng = rng_from_seed(seed);
    let n_vars = (2 * l + 1) as usize * params.m;
    let n_checks = (2 * l + 1) as usize * params.checks_per_pos();
    let mut edges = Vec::new();
    for j in -l..=l {
        for i in -hd..=hd {
            let p = wrap(j + i, l);
            let mut perm: Vec<usize> = (0..params.m).collect();
            perm.shuffle(&mut rng);
            for (t, &s) in perm.iter().enumerate() {
                edges.push((gc_var_id(params, p, t), gc_check_id(params, j, s / params.k)));
            }
        }
    }
    let var_pos = (-l..=l).flat_map(|p| std::iter::repeat(p).take(params.m)).collect();
    let check_pos = (-l..=l)
        .flat_map(|j| std::iter::repeat(j).take(params.checks_per_pos()))
        .collect();
    TannerGraph::from_edges(
        GraphKind::GraphCover(*params),
        n_vars,
        n_checks,
        &edges,
        Some(var_pos),
        Some(check_pos),
    )
}

/// Cut the cover open at `cut`: remove the m variables at each of the
/// 2*hat positions cut, cut+1, ... (wrapped), then relabel what remains
/// as a spatially coupled chain with coupling length l - hat.
pub fn derive_sc_from_cover(cover: &TannerGraph, cut: i64) -> Result<DerivedCode> {
    let GraphKind::GraphCover(params) = &cover.kind else {
        return Err(Error::invalid("derivation requires a graph cover"));
    };
    let l = params.l;
    let hd = params.hat_dv();
    if cut < -l || cut > l {
        return Err(Error::invalid(format!("cut position {cut} outside -{l}..={l}")));
    }
    let new_l = l - hd;
    if new_l < 1 {
        return Err(Error::invalid(format!(
            "cover with l = {l} is too short to derive a chain (need l > {hd})"
        )));
    }
    let derived_params = CodeParams { d_v: params.d_v, d_c: params.d_c, k: params.k, l: new_l, m: params.m };

    let removed: BTreeSet<i64> = (0..2 * hd).map(|j| wrap(cut + j, l)).collect();
    let mut special_vars: Vec<usize> = (0..cover.n_vars)
        .filter(|&v| removed.contains(&cover.var_pos.as_ref().unwrap()[v]))
        .collect();
    special_vars.sort_unstable();

    // Surviving variable positions form an arc starting at cut + 2*hat;
    // walk it in order to relabel position-major.
    let mut var_map = Vec::new(); // derived id -> cover id
    let mut new_var_pos = Vec::new();
    let mut cover_to_new_var = vec![usize::MAX; cover.n_vars];
    for t in 0..=2 * new_l {
        let p = wrap(cut + 2 * hd + t, l);
        for s in 0..params.m {
            let cover_id = gc_var_id(params, p, s);
            cover_to_new_var[cover_id] = var_map.len();
            var_map.push(cover_id);
            new_var_pos.push(t - new_l);
        }
    }

    // Every check survives. Checks at surviving arc positions keep their
    // offset; checks at removed positions split between the two boundary
    // ends according to where their surviving neighbours sit.
    let span = 2 * l + 1;
    let mut new_pos_of_cover_check_pos = std::collections::BTreeMap::new();
    for j in -l..=l {
        let off = (j - (cut + 2 * hd)).rem_euclid(span);
        let new_pos = if off <= 2 * new_l {
            off - new_l
        } else {
            let s = off - (2 * new_l + 1);
            if s >= hd {
                -new_l + s - 2 * hd
            } else {
                new_l + 1 + s
            }
        };
        new_pos_of_cover_check_pos.insert(j, new_pos);
    }
    let cpp = params.checks_per_pos();
    let mut check_entries: Vec<(i64, usize)> = Vec::new(); // (new_pos, cover check id)
    for j in -l..=l {
        for u in 0..cpp {
            check_entries.push((new_pos_of_cover_check_pos[&j], gc_check_id(params, j, u)));
        }
    }
    check_entries.sort();
    let mut check_map = Vec::with_capacity(check_entries.len());
    let mut new_check_pos = Vec::with_capacity(check_entries.len());
    let mut cover_to_new_check = vec![usize::MAX; cover.n_checks];
    for (new_pos, cover_id) in check_entries {
        cover_to_new_check[cover_id] = check_map.len();
        check_map.push(cover_id);
        new_check_pos.push(new_pos);
    }

    let mut edges = Vec::new();
    for (new_v, &cover_v) in var_map.iter().enumerate() {
        for &cover_c in &cover.var_adj[cover_v] {
            edges.push((new_v, cover_to_new_check[cover_c]));
        }
    }
    let graph = TannerGraph::from_edges(
        GraphKind::SpatiallyCoupled(derived_params),
        var_map.len(),
        check_map.len(),
        &edges,
        Some(new_var_pos),
        Some(new_check_pos),
    )?;
    for c in 0..graph.n_checks {
        if graph.check_degree(c) < 2 {
            return Err(Error::Construction(format!(
                "derived check {c} has degree {} (< 2)",
                graph.check_degree(c)
            )));
        }
    }
    Ok(DerivedCode { graph, cut, special_vars, var_map, check_map })
}

/// Structural validation against the graph's declared kind.
pub fn validate(graph: &TannerGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut push = |msg: String| report.violations.push(msg);

    // Generic consistency.
    for (v, adj) in graph.var_adj.iter().enumerate() {
        for w in adj.windows(2) {
            if w[0] >= w[1] {
                push(format!("variable {v} has duplicate or unsorted adjacency"));
            }
        }
        for &c in adj {
            if c >= graph.n_checks || !graph.check_adj[c].contains(&v) {
                push(format!("edge ({v},{c}) not mirrored in check adjacency"));
            }
        }
    }
    for (c, adj) in graph.check_adj.iter().enumerate() {
        for &v in adj {
            if v >= graph.n_vars || !graph.var_adj[v].contains(&c) {
                push(format!("edge ({v},{c}) not mirrored in variable adjacency"));
            }
        }
    }

    match &graph.kind {
        GraphKind::Custom => {}
        GraphKind::Regular { d_v, d_c } => {
            for v in 0..graph.n_vars {
                if graph.var_degree(v) != *d_v {
                    push(format!("variable {v} has degree {}, expected {d_v}", graph.var_degree(v)));
                }
            }
            for c in 0..graph.n_checks {
                if graph.check_degree(c) != *d_c {
                    push(format!("check {c} has degree {}, expected {d_c}", graph.check_degree(c)));
                }
            }
        }
        GraphKind::SpatiallyCoupled(params) => {
            validate_coupled(graph, params, false, &mut push);
        }
        GraphKind::GraphCover(params) => {
            validate_coupled(graph, params, true, &mut push);
        }
    }
    report
}

fn validate_coupled(
    graph: &TannerGraph,
    params: &CodeParams,
    circulant: bool,
    push: &mut dyn FnMut(String),
) {
    if let Err(e) = params.validate() {
        push(format!("parameters invalid: {e}"));
        return;
    }
    let l = params.l;
    let hd = params.hat_dv();
    let n_positions = (2 * l + 1) as usize;
    let check_positions = if circulant { n_positions } else { (2 * (l + hd) + 1) as usize };
    if graph.n_vars != n_positions * params.m {
        push(format!(
            "expected {} variables, found {}",
            n_positions * params.m,
            graph.n_vars
        ));
        return;
    }
    if graph.n_checks != check_positions * params.checks_per_pos() {
        push(format!(
            "expected {} checks, found {}",
            check_positions * params.checks_per_pos(),
            graph.n_checks
        ));
        return;
    }
    let (Some(var_pos), Some(check_pos)) = (&graph.var_pos, &graph.check_pos) else {
        push("coupled graphs require position vectors".into());
        return;
    };
    for v in 0..graph.n_vars {
        if graph.var_degree(v) != params.d_v {
            push(format!("variable {v} has degree {}, expected {}", graph.var_degree(v), params.d_v));
        }
    }
    for c in 0..graph.n_checks {
        let j = check_pos[c];
        let want: Vec<i64> = if circulant {
            (-hd..=hd).map(|i| wrap(j + i, l)).collect()
        } else {
            chain_window(params, j).collect()
        };
        let mut count = std::collections::BTreeMap::new();
        for &v in &graph.check_adj[c] {
            *count.entry(var_pos[v]).or_insert(0usize) += 1;
        }
        for p in &want {
            if count.get(p) != Some(&params.k) {
                push(format!(
                    "check {c} at position {j} has {} neighbours at position {p}, expected {}",
                    count.get(p).unwrap_or(&0),
                    params.k
                ));
            }
        }
        for p in count.keys() {
            if !want.contains(p) {
                push(format!("check {c} at position {j} reaches out-of-window position {p}"));
            }
        }
    }
    // No two checks at one position may share a variable.
    let mut by_pos: std::collections::BTreeMap<i64, Vec<usize>> = std::collections::BTreeMap::new();
    for c in 0..graph.n_checks {
        by_pos.entry(check_pos[c]).or_default().push(c);
    }
    for (j, checks) in by_pos {
        let mut seen: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for &c in &checks {
            for &v in &graph.check_adj[c] {
                if let Some(&other) = seen.get(&v) {
                    push(format!(
                        "checks {other} and {c} at position {j} share variable {v}"
                    ));
                } else {
                    seen.insert(v, c);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_construction_and_shape() {
        let g = build_regular(3, 6, 6, 1).unwrap();
        assert_eq!((g.n_vars, g.n_checks, g.n_edges()), (6, 3, 18));
        assert!(validate(&g).is_valid());
        assert!(build_regular(3, 6, 7, 1).is_err());

        let g = build_regular(3, 4, 8, 7).unwrap();
        assert_eq!((g.n_vars, g.n_checks, g.n_edges()), (8, 6, 24));
        assert!(validate(&g).is_valid());
    }

    #[test]
    fn coupled_chain_shape() {
        let params = CodeParams::new(3, 2, 2, 2).unwrap();
        let g = build_spatially_coupled(&params, 3).unwrap();
        assert_eq!((g.n_vars, g.n_checks, g.n_edges()), (10, 7, 30));
        let degrees: Vec<usize> = (0..g.n_checks).map(|c| g.check_degree(c)).collect();
        assert_eq!(degrees, vec![2, 4, 6, 6, 6, 4, 2]);
        assert!(validate(&g).is_valid());

        let params = CodeParams::new(3, 2, 1, 2).unwrap();
        let g = build_spatially_coupled(&params, 3).unwrap();
        assert_eq!((g.n_vars, g.n_checks), (6, 5));
        let degrees: Vec<usize> = (0..g.n_checks).map(|c| g.check_degree(c)).collect();
        assert_eq!(degrees, vec![2, 4, 6, 4, 2]);
        assert!(validate(&g).is_valid());
    }

    #[test]
    fn cover_shape() {
        let params = CodeParams::new(3, 2, 2, 2).unwrap();
        let g = build_graph_cover(&params, 5).unwrap();
        assert_eq!((g.n_vars, g.n_checks, g.n_edges()), (10, 5, 30));
        assert!((0..g.n_checks).all(|c| g.check_degree(c) == 6));
        assert!((0..g.n_vars).all(|v| g.var_degree(v) == 3));
        assert!(validate(&g).is_valid());

        let params = CodeParams::new(3, 2, 1, 4).unwrap();
        let g = build_graph_cover(&params, 2).unwrap();
        assert_eq!((g.n_vars, g.n_checks), (12, 6));
        assert!(validate(&g).is_valid());
    }

    #[test]
    fn derive_cuts_one_window() {
        let params = CodeParams::new(3, 2, 2, 2).unwrap();
        let cover = build_graph_cover(&params, 11).unwrap();
        for cut in -2..=2 {
            let d = derive_sc_from_cover(&cover, cut).unwrap();
            assert_eq!(d.special_vars.len(), 4);
            assert_eq!(d.graph.n_vars, 6);
            assert_eq!(d.graph.n_checks, 5);
            assert!((0..d.graph.n_checks).all(|c| d.graph.check_degree(c) >= 2));
            let report = validate(&d.graph);
            assert!(report.is_valid(), "cut {cut}: {:?}", report.violations);
        }
        assert!(derive_sc_from_cover(&cover, 3).is_err());

        // A cover exactly as wide as the window is too short to derive.
        let params = CodeParams::new(3, 2, 1, 2).unwrap();
        let cover = build_graph_cover(&params, 1).unwrap();
        assert!(derive_sc_from_cover(&cover, 0).is_err());
    }

    #[test]
    fn validator_flags_mutations() {
        let params = CodeParams::new(3, 2, 2, 2).unwrap();
        let g = build_spatially_coupled(&params, 3).unwrap();
        assert!(validate(&g).is_valid());

        // Degree change: drop one edge.
        let mut broken = g.clone();
        let c = broken.var_adj[0][0];
        broken.var_adj[0].remove(0);
        broken.check_adj[c].retain(|&v| v != 0);
        let report = validate(&broken);
        assert!(report.violations.iter().any(|m| m.contains("degree")));

        // Asymmetric adjacency.
        let mut broken = g.clone();
        broken.var_adj[1].push(0);
        broken.var_adj[1].sort_unstable();
        let report = validate(&broken);
        assert!(!report.is_valid());
    }

    #[test]
    fn json_roundtrip_and_determinism() {
        let params = CodeParams::new(3, 2, 2, 4).unwrap();
        let a = build_graph_cover(&params, 9).unwrap();
        let b = build_graph_cover(&params, 9).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = build_graph_cover(&params, 10).unwrap();
        assert_ne!(a.to_json(), c.to_json());

        let back = TannerGraph::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);

        let g = build_regular(3, 6, 12, 4).unwrap();
        let back = TannerGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn param_validation() {
        assert!(CodeParams::new(4, 2, 2, 2).is_err()); // even d_v
        assert!(CodeParams::new(3, 2, 0, 2).is_err()); // l too small
        assert!(CodeParams::new(3, 2, 2, 3).is_err()); // m not multiple of k
        assert!(CodeParams::new(1, 2, 2, 2).is_err()); // d_v too small
    }
}
