//! Primal LP decoding over the parity-relaxation polytope.
//!
//! The decoder minimizes the channel cost over the polytope cut out by the
//! box [0,1]^n and, per check, every odd-subset parity inequality. Under the
//! all-zeros transmission convention, decoding succeeds exactly when the
//! origin is the unique minimizer; ties count as failure.

use num::{One, Signed, Zero};

use crate::graphs::TannerGraph;
use crate::lp::{rat_i, Constraint, LinearProgram, Rat, Rel, Sense};
use crate::{Error, Result};

/// Largest supported check degree; each check contributes 2^(d-1) rows.
pub const MAX_CHECK_DEGREE: usize = 12;

/// Bit-flip pattern of a channel error, 1 = flipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorPattern {
    pub bits: Vec<bool>,
}

impl ErrorPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        ErrorPattern { bits }
    }

    pub fn zeros(n: usize) -> Self {
        ErrorPattern { bits: vec![false; n] }
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Per-bit costs: +1 where the bit arrived clean, -1 where it flipped.
    pub fn llr(&self) -> LlrVector {
        LlrVector {
            gamma: self.bits.iter().map(|&b| rat_i(if b { -1 } else { 1 })).collect(),
        }
    }
}

/// Per-variable channel costs for the decoding objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlrVector {
    pub gamma: Vec<Rat>,
}

impl LlrVector {
    pub fn new(gamma: Vec<Rat>) -> Self {
        LlrVector { gamma }
    }

    pub fn is_pm_one(&self) -> bool {
        self.gamma.iter().all(|g| g.abs().is_one())
    }
}

#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub success: bool,
    /// Minimum cost over the polytope; never positive (the origin costs 0).
    pub optimal_value: Rat,
    /// On failure, an optimal polytope point other than the origin.
    pub witness_point: Option<Vec<Rat>>,
}

/// Odd-subset parity inequalities for every check. Box constraints are not
/// included; callers add them to the program separately.
pub fn fundamental_polytope_constraints(graph: &TannerGraph) -> Result<Vec<Constraint>> {
    let mut rows = Vec::new();
    for c in 0..graph.n_checks {
        let adj = &graph.check_adj[c];
        let d = adj.len();
        if d > MAX_CHECK_DEGREE {
            return Err(Error::invalid(format!(
                "check {c} has degree {d}, above the supported cap of {MAX_CHECK_DEGREE}"
            )));
        }
        for mask in 0u32..1 << d {
            if mask.count_ones() % 2 != 1 {
                continue;
            }
            let mut coeffs = Vec::with_capacity(d);
            let mut inside = 0i64;
            for (t, &v) in adj.iter().enumerate() {
                if mask >> t & 1 == 1 {
                    coeffs.push((v, rat_i(1)));
                    inside += 1;
                } else {
                    coeffs.push((v, rat_i(-1)));
                }
            }
            rows.push(Constraint { coeffs, rel: Rel::Le, rhs: rat_i(inside - 1) });
        }
    }
    Ok(rows)
}

fn polytope_program(graph: &TannerGraph, objective: Vec<Rat>, sense: Sense) -> Result<LinearProgram> {
    let mut lp = LinearProgram::new(graph.n_vars, sense);
    lp.objective = objective;
    lp.set_box(rat_i(0), rat_i(1));
    for row in fundamental_polytope_constraints(graph)? {
        lp.constraints.push(row);
    }
    Ok(lp)
}

/// Decode under the all-zeros convention: solve min gamma.x over the
/// polytope, then decide whether the origin is the unique optimum. The
/// uniqueness probe maximizes the coordinate sum over the optimal face;
/// since x >= 0, that sum is zero exactly when every coordinate maximum is.
pub fn lp_decode(graph: &TannerGraph, llr: &LlrVector) -> Result<DecodeResult> {
    decode_with_probe(graph, llr, false)
}

/// Same decision as [`lp_decode`] but probing uniqueness one coordinate at
/// a time. Slower (n probes instead of one); kept as an independent route
/// for cross-checking.
pub fn lp_decode_coordwise(graph: &TannerGraph, llr: &LlrVector) -> Result<DecodeResult> {
    decode_with_probe(graph, llr, true)
}

fn decode_with_probe(graph: &TannerGraph, llr: &LlrVector, coordwise: bool) -> Result<DecodeResult> {
    if llr.gamma.len() != graph.n_vars {
        return Err(Error::invalid(format!(
            "cost vector length {} does not match {} variables",
            llr.gamma.len(),
            graph.n_vars
        )));
    }
    let lp = polytope_program(graph, llr.gamma.clone(), Sense::Minimize)?;
    let outcome = lp.solve()?;
    let (value, point) = match &outcome {
        crate::lp::LpOutcome::Optimal { value, point } => (value.clone(), point.clone()),
        other => {
            return Err(Error::Lp(format!(
                "polytope program must have an optimum, got {other:?}"
            )))
        }
    };
    if value.is_negative() {
        return Ok(DecodeResult { success: false, optimal_value: value, witness_point: Some(point) });
    }
    debug_assert!(value.is_zero(), "origin is feasible, so the minimum is at most 0");

    // Optimal face probe: restrict to gamma.x <= 0 and look for mass.
    let gamma_row: Vec<(usize, Rat)> = llr
        .gamma
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_zero())
        .map(|(i, g)| (i, g.clone()))
        .collect();
    if coordwise {
        for i in 0..graph.n_vars {
            let mut objective = vec![rat_i(0); graph.n_vars];
            objective[i] = rat_i(1);
            let mut probe = polytope_program(graph, objective, Sense::Maximize)?;
            probe.add_le(gamma_row.clone(), rat_i(0));
            let out = probe.solve()?;
            let v = out.value().ok_or_else(|| Error::Lp("probe must be bounded".into()))?;
            if v.is_positive() {
                let p = out.point().unwrap().to_vec();
                return Ok(DecodeResult {
                    success: false,
                    optimal_value: value,
                    witness_point: Some(p),
                });
            }
        }
        Ok(DecodeResult { success: true, optimal_value: value, witness_point: None })
    } else {
        let mut probe = polytope_program(graph, vec![rat_i(1); graph.n_vars], Sense::Maximize)?;
        probe.add_le(gamma_row, rat_i(0));
        let out = probe.solve()?;
        let v = out.value().ok_or_else(|| Error::Lp("probe must be bounded".into()))?;
        if v.is_positive() {
            let p = out.point().unwrap().to_vec();
            Ok(DecodeResult { success: false, optimal_value: value, witness_point: Some(p) })
        } else {
            Ok(DecodeResult { success: true, optimal_value: value, witness_point: None })
        }
    }
}

/// Extreme rays of the cone { y >= 0 : sum_{i != i0} y_i >= y_i0 for all i0 }
/// in R^m, found by enumerating (m-1)-subsets of the facet normals and
/// keeping feasible one-dimensional kernels. Rays are scaled so their
/// largest entry is 1 and returned sorted.
pub fn parity_cone_extreme_rays(m: usize) -> Result<Vec<Vec<Rat>>> {
    if !(2..=7).contains(&m) {
        return Err(Error::invalid(format!("cone dimension {m} outside supported range 2..=7")));
    }
    // 2m facet normals a with constraint a.y >= 0.
    let mut normals: Vec<Vec<Rat>> = Vec::with_capacity(2 * m);
    for i in 0..m {
        let mut row = vec![rat_i(0); m];
        row[i] = rat_i(1);
        normals.push(row);
    }
    for i0 in 0..m {
        let mut row = vec![rat_i(1); m];
        row[i0] = rat_i(-1);
        normals.push(row);
    }
    let feasible = |y: &[Rat]| normals.iter().all(|a| dot(a, y) >= rat_i(0));

    let mut rays = std::collections::BTreeSet::new();
    let idx: Vec<usize> = (0..2 * m).collect();
    for subset in combinations(&idx, m - 1) {
        let rows: Vec<Vec<Rat>> = subset.iter().map(|&i| normals[i].clone()).collect();
        let kernel = crate::lp::kernel_basis(&rows);
        if kernel.len() != 1 {
            continue;
        }
        let g = &kernel[0];
        let oriented = if feasible(g) {
            g.clone()
        } else {
            let neg: Vec<Rat> = g.iter().map(|x| -x.clone()).collect();
            if feasible(&neg) {
                neg
            } else {
                continue;
            }
        };
        let max = oriented.iter().cloned().max().unwrap();
        if max.is_zero() {
            continue;
        }
        rays.insert(oriented.iter().map(|x| x / &max).collect::<Vec<Rat>>());
    }
    Ok(rays.into_iter().collect())
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            rec(items, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(items, k, 0, &mut current, &mut out);
    out
}
