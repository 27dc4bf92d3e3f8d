//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex over [`BigRational`] with Bland's
//! least-index rule, so every solve terminates and repeated solves of the
//! same program give bit-identical answers. Also hosts the small exact
//! linear algebra helpers (square solve, kernel basis) used by brute-force
//! oracles elsewhere in the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::{Error, Result};

pub type Rat = BigRational;

/// Integer as a rational.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// p/q with q != 0.
pub fn rat(p: i64, q: i64) -> Rat {
    assert!(q != 0, "zero denominator");
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Canonical "p/q" rendering; the denominator is always printed and is
/// always positive.
pub fn fmt_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts "p/q" or a bare integer "p".
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let mk_err = || Error::Serialization(format!("malformed rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| mk_err())?;
            let q: BigInt = q.trim().parse().map_err(|_| mk_err())?;
            if q.is_zero() {
                return Err(Error::Serialization(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| mk_err())?;
            Ok(Rat::from_integer(p))
        }
    }
}

/// Exact rational from a finite float (binary expansion, no rounding).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    // Convert via string only when the parts are too large for i128.
    match (i128::try_from(numer), i128::try_from(denom)) {
        (Ok(n), Ok(d)) => n as f64 / d as f64,
        _ => {
            let n: f64 = numer.to_string().parse().unwrap_or(f64::NAN);
            let d: f64 = denom.to_string().parse().unwrap_or(f64::NAN);
            n / d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Sparse (variable, coefficient) pairs; indices must be in range and
    /// may repeat (coefficients add up).
    pub coeffs: Vec<(usize, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    /// Dense objective vector, one entry per variable.
    pub objective: Vec<Rat>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[Rat]> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective: vec![Rat::zero(); num_vars],
            constraints: Vec::new(),
            lower: vec![None; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn minimize(num_vars: usize, objective: Vec<Rat>) -> Self {
        let mut lp = Self::new(num_vars, Sense::Minimize);
        assert_eq!(objective.len(), num_vars);
        lp.objective = objective;
        lp
    }

    pub fn maximize(num_vars: usize, objective: Vec<Rat>) -> Self {
        let mut lp = Self::new(num_vars, Sense::Maximize);
        assert_eq!(objective.len(), num_vars);
        lp.objective = objective;
        lp
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rat)>, rel: Rel, rhs: Rat) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn add_le(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.add_row(coeffs, Rel::Le, rhs);
    }

    pub fn add_ge(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.add_row(coeffs, Rel::Ge, rhs);
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.add_row(coeffs, Rel::Eq, rhs);
    }

    pub fn set_lower(&mut self, var: usize, bound: Rat) {
        self.lower[var] = Some(bound);
    }

    pub fn set_upper(&mut self, var: usize, bound: Rat) {
        self.upper[var] = Some(bound);
    }

    /// All variables restricted to [lo, hi].
    pub fn set_box(&mut self, lo: Rat, hi: Rat) {
        for v in 0..self.num_vars {
            self.lower[v] = Some(lo.clone());
            self.upper[v] = Some(hi.clone());
        }
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        solve(self)
    }
}

/// Maximize coordinate `var` over the constraint set of `lp` (its
/// objective and sense are ignored).
pub fn max_coordinate_over(lp: &LinearProgram, var: usize) -> Result<LpOutcome> {
    if var >= lp.num_vars {
        return Err(Error::Lp(format!(
            "coordinate {var} out of range for {} variables",
            lp.num_vars
        )));
    }
    let mut probe = lp.clone();
    probe.sense = Sense::Maximize;
    probe.objective = vec![Rat::zero(); lp.num_vars];
    probe.objective[var] = Rat::one();
    probe.solve()
}

// How an original variable maps onto nonnegative solver columns.
#[derive(Debug, Clone)]
enum VarMap {
    // x = lower + y[col]
    Shift { col: usize, lower: Rat },
    // x = upper - y[col]
    Flip { col: usize, upper: Rat },
    // x = y[pos] - y[neg]
    Split { pos: usize, neg: usize },
}

fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    for c in &lp.constraints {
        for (j, _) in &c.coeffs {
            if *j >= lp.num_vars {
                return Err(Error::Lp(format!(
                    "constraint references variable {j} but program has {} variables",
                    lp.num_vars
                )));
            }
        }
    }
    assert_eq!(lp.objective.len(), lp.num_vars);
    assert_eq!(lp.lower.len(), lp.num_vars);
    assert_eq!(lp.upper.len(), lp.num_vars);

    // Map every variable onto nonnegative columns. Upper bounds that
    // cannot be absorbed by a flip become extra rows.
    let mut maps = Vec::with_capacity(lp.num_vars);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, Rat)> = Vec::new(); // y[col] <= rhs
    for v in 0..lp.num_vars {
        match (&lp.lower[v], &lp.upper[v]) {
            (Some(lo), Some(hi)) => {
                if lo > hi {
                    return Ok(LpOutcome::Infeasible);
                }
                maps.push(VarMap::Shift { col: ncols, lower: lo.clone() });
                bound_rows.push((ncols, hi - lo));
                ncols += 1;
            }
            (Some(lo), None) => {
                maps.push(VarMap::Shift { col: ncols, lower: lo.clone() });
                ncols += 1;
            }
            (None, Some(hi)) => {
                maps.push(VarMap::Flip { col: ncols, upper: hi.clone() });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }

    // Rewrite each constraint over solver columns.
    let mut rows: Vec<(Vec<Rat>, Rel, Rat)> = Vec::new();
    for c in &lp.constraints {
        let mut dense = vec![Rat::zero(); ncols];
        let mut rhs = c.rhs.clone();
        for (j, coef) in &c.coeffs {
            match &maps[*j] {
                VarMap::Shift { col, lower } => {
                    dense[*col] += coef;
                    rhs -= coef * lower;
                }
                VarMap::Flip { col, upper } => {
                    dense[*col] -= coef;
                    rhs -= coef * upper;
                }
                VarMap::Split { pos, neg } => {
                    dense[*pos] += coef;
                    dense[*neg] -= coef;
                }
            }
        }
        rows.push((dense, c.rel, rhs));
    }
    for (col, rhs) in bound_rows {
        let mut dense = vec![Rat::zero(); ncols];
        dense[col] = Rat::one();
        rows.push((dense, Rel::Le, rhs));
    }

    // Internal sense is always minimize.
    let mut cost = vec![Rat::zero(); ncols];
    for v in 0..lp.num_vars {
        let coef = match lp.sense {
            Sense::Minimize => lp.objective[v].clone(),
            Sense::Maximize => -lp.objective[v].clone(),
        };
        if coef.is_zero() {
            continue;
        }
        match &maps[v] {
            VarMap::Shift { col, .. } => cost[*col] += &coef,
            VarMap::Flip { col, .. } => cost[*col] -= &coef,
            VarMap::Split { pos, neg } => {
                cost[*pos] += &coef;
                cost[*neg] -= &coef;
            }
        }
    }

    let y = match run_two_phase(rows, ncols, &cost)? {
        TableauEnd::Infeasible => return Ok(LpOutcome::Infeasible),
        TableauEnd::Unbounded => return Ok(LpOutcome::Unbounded),
        TableauEnd::Optimal(y) => y,
    };

    // Map back to the original variables and evaluate the objective there.
    let mut point = Vec::with_capacity(lp.num_vars);
    for v in 0..lp.num_vars {
        let x = match &maps[v] {
            VarMap::Shift { col, lower } => lower + &y[*col],
            VarMap::Flip { col, upper } => upper - &y[*col],
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
        };
        point.push(x);
    }
    let mut value = Rat::zero();
    for v in 0..lp.num_vars {
        value += &lp.objective[v] * &point[v];
    }
    return Ok(LpOutcome::Optimal { value, point });

    enum TableauEnd {
        Optimal(Vec<Rat>),
        Infeasible,
        Unbounded,
    }

    // min cost·y  s.t. rows, y >= 0.
    fn run_two_phase(
        mut rows: Vec<(Vec<Rat>, Rel, Rat)>,
        ncols: usize,
        cost: &[Rat],
    ) -> Result<TableauEnd> {
        // Normalize signs so every rhs is nonnegative.
        for (dense, rel, rhs) in rows.iter_mut() {
            if rhs.is_negative() {
                for a in dense.iter_mut() {
                    *a = -std::mem::take(a);
                }
                *rhs = -std::mem::take(rhs);
                *rel = match *rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
            }
        }

        let m = rows.len();
        // Columns: structural | slack/surplus | artificial, rhs last.
        let n_slack = m; // reserve one per row; unused slots stay zero-width
        let mut art_cols: Vec<usize> = Vec::new();
        let mut width = ncols + n_slack;
        let mut basis = vec![usize::MAX; m];
        for (i, (_, rel, _)) in rows.iter().enumerate() {
            match rel {
                Rel::Le => basis[i] = ncols + i,
                Rel::Ge | Rel::Eq => {
                    art_cols.push(width);
                    basis[i] = width;
                    width += 1;
                }
            }
        }
        let rhs_col = width;
        let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
        for (i, (dense, rel, rhs)) in rows.iter().enumerate() {
            let mut row = vec![Rat::zero(); width + 1];
            row[..ncols].clone_from_slice(dense);
            match rel {
                Rel::Le => row[ncols + i] = Rat::one(),
                Rel::Ge => row[ncols + i] = -Rat::one(),
                Rel::Eq => {}
            }
            if basis[i] >= ncols + n_slack {
                row[basis[i]] = Rat::one();
            }
            row[rhs_col] = rhs.clone();
            t.push(row);
        }

        let is_art = |col: usize| col >= ncols + n_slack;

        if !art_cols.is_empty() {
            // Phase 1: minimize the sum of artificials.
            let mut red = vec![Rat::zero(); width + 1];
            for row in t.iter().zip(&basis) {
                if is_art(*row.1) {
                    for (j, a) in row.0.iter().enumerate() {
                        red[j] -= a;
                    }
                }
            }
            for &c in &art_cols {
                red[c] += Rat::one(); // cost of an artificial is 1
            }
            if !simplex_loop(&mut t, &mut basis, &mut red, rhs_col, &|_| false)? {
                // Phase 1 of a feasibility objective cannot be unbounded.
                unreachable!("phase 1 unbounded");
            }
            let mut infeas = Rat::zero();
            for (row, b) in t.iter().zip(&basis) {
                if is_art(*b) {
                    infeas += &row[rhs_col];
                }
            }
            if !infeas.is_zero() {
                return Ok(TableauEnd::Infeasible);
            }
            // Drive leftover artificials out of the basis.
            for i in 0..m {
                if !is_art(basis[i]) {
                    continue;
                }
                let Some(pc) = (0..ncols + n_slack).find(|&j| !t[i][j].is_zero()) else {
                    // Redundant row; harmless to keep, basis stays on the
                    // (zero-valued) artificial which is banned below.
                    continue;
                };
                pivot(&mut t, &mut basis, None, i, pc, rhs_col);
            }
        }

        // Phase 2 reduced costs for the real objective.
        let mut red = vec![Rat::zero(); width + 1];
        red[..ncols].clone_from_slice(cost);
        for (row, b) in t.iter().zip(&basis) {
            if *b >= ncols {
                continue;
            }
            let cb = cost[*b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..=width {
                if !row[j].is_zero() {
                    red[j] -= &cb * &row[j];
                }
            }
        }
        if !simplex_loop(&mut t, &mut basis, &mut red, rhs_col, &is_art)? {
            return Ok(TableauEnd::Unbounded);
        }

        let mut y = vec![Rat::zero(); ncols];
        for (row, b) in t.iter().zip(&basis) {
            if *b < ncols {
                y[*b] = row[rhs_col].clone();
            }
        }
        Ok(TableauEnd::Optimal(y))
    }

    // Bland's rule: entering = least-index column with negative reduced
    // cost; leaving = minimum ratio, ties broken by least basic index.
    // Returns false when unbounded.
    fn simplex_loop(
        t: &mut [Vec<Rat>],
        basis: &mut [usize],
        red: &mut Vec<Rat>,
        rhs_col: usize,
        banned: &dyn Fn(usize) -> bool,
    ) -> Result<bool> {
        loop {
            let Some(pc) = (0..rhs_col).find(|&j| !banned(j) && red[j].is_negative()) else {
                return Ok(true);
            };
            let mut pr: Option<usize> = None;
            let mut best: Option<Rat> = None;
            for (i, row) in t.iter().enumerate() {
                if row[pc].is_positive() {
                    let ratio = &row[rhs_col] / &row[pc];
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            ratio < *b || (ratio == *b && basis[i] < basis[pr.unwrap()])
                        }
                    };
                    if better {
                        best = Some(ratio);
                        pr = Some(i);
                    }
                }
            }
            let Some(pr) = pr else {
                return Ok(false);
            };
            pivot(t, basis, Some(red), pr, pc, rhs_col);
        }
    }

    fn pivot(
        t: &mut [Vec<Rat>],
        basis: &mut [usize],
        red: Option<&mut Vec<Rat>>,
        pr: usize,
        pc: usize,
        rhs_col: usize,
    ) {
        let piv = t[pr][pc].clone();
        if !piv.is_one() {
            for a in t[pr].iter_mut() {
                if !a.is_zero() {
                    *a = std::mem::take(a) / &piv;
                }
            }
        }
        let nz: Vec<usize> = (0..=rhs_col).filter(|&j| !t[pr][j].is_zero()).collect();
        let prow = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == pr || row[pc].is_zero() {
                continue;
            }
            let f = std::mem::replace(&mut row[pc], Rat::zero());
            for &j in &nz {
                if j == pc {
                    continue;
                }
                row[j] -= &f * &prow[j];
            }
        }
        if let Some(red) = red {
            if !red[pc].is_zero() {
                let f = std::mem::replace(&mut red[pc], Rat::zero());
                for &j in &nz {
                    if j == pc {
                        continue;
                    }
                    red[j] -= &f * &prow[j];
                }
            }
        }
        basis[pr] = pc;
    }
}

/// Solve M x = rhs for square M; `None` when singular.
pub fn solve_square(m: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n) && rhs.len() == n);
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            if !x.is_zero() {
                *x = std::mem::take(x) / &p;
            }
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = std::mem::replace(&mut a[r][col], Rat::zero());
                for j in col + 1..=n {
                    let sub = &f * &a[col][j];
                    a[r][j] -= sub;
                }
            }
        }
    }
    Some(a.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Basis of the null space of a (not necessarily square) matrix.
pub fn kernel_basis(rows: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let ncols = rows[0].len();
    assert!(rows.iter().all(|r| r.len() == ncols));
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let nrows = a.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(piv) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        let p = a[rank][col].clone();
        for x in a[rank].iter_mut() {
            if !x.is_zero() {
                *x = std::mem::take(x) / &p;
            }
        }
        for r in 0..nrows {
            if r != rank && !a[r][col].is_zero() {
                let f = std::mem::replace(&mut a[r][col], Rat::zero());
                for j in 0..ncols {
                    if j != col && !a[rank][j].is_zero() {
                        let sub = &f * &a[rank][j];
                        a[r][j] -= sub;
                    }
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (col, piv) in pivot_of_col.iter().enumerate() {
            if let Some(r) = piv {
                v[col] = -a[*r][free].clone();
            }
        }
        basis.push(v);
    }
    basis
}

/// Rank of a rational matrix.
pub fn rank(rows: &[Vec<Rat>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    rows[0].len() - kernel_basis(rows).len()
}
