//! Graphical and matrix hypergraphs, their energies, and the expansions
//! between them.
//!
//! A graphical hypergraph is a set of weighted vertex subsets. Its energy at
//! `x` is `sum_S v_S * (max_{i in S} x_i - min_{i in S} x_i)^2`.
//!
//! A matrix hypergraph partitions the rows `a_1..a_m` of a sparse matrix into
//! groups `S_1..S_k` with optional weights `v_i`; its energy is
//! `sum_i v_i * max_{j in S_i} <a_j, x>^2`. Clique expansion turns the former
//! into the latter without changing the energy.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::sparse::SparseRows;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    vertices: Vec<usize>,
    weight: f64,
}

impl Hyperedge {
    /// Sorted, distinct vertex indices.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Weighted hypergraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphicalHypergraph {
    n: usize,
    hyperedges: Vec<Hyperedge>,
}

impl GraphicalHypergraph {
    /// Validates and builds a hypergraph. Vertex lists may be given in any
    /// order; they are stored sorted. Repeated vertices are rejected.
    pub fn new(n: usize, hyperedges: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("hypergraph must have at least one vertex"));
        }
        let mut edges = Vec::with_capacity(hyperedges.len());
        for (i, (mut vs, w)) in hyperedges.into_iter().enumerate() {
            if vs.len() < 2 {
                return Err(invalid(format!("hyperedge {i} has fewer than 2 vertices")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid(format!("hyperedge {i} has invalid weight {w}")));
            }
            vs.sort_unstable();
            if vs.windows(2).any(|p| p[0] == p[1]) {
                return Err(invalid(format!("hyperedge {i} repeats a vertex")));
            }
            if let Some(&v) = vs.last().filter(|&&v| v >= n) {
                return Err(invalid(format!("hyperedge {i}: vertex {v} out of range (n = {n})")));
            }
            edges.push(Hyperedge { vertices: vs, weight: w });
        }
        Ok(Self { n, hyperedges: edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_hyperedges(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn hyperedges(&self) -> &[Hyperedge] {
        &self.hyperedges
    }

    /// Largest hyperedge cardinality (0 for an empty hypergraph).
    pub fn rank(&self) -> usize {
        self.hyperedges.iter().map(Hyperedge::len).max().unwrap_or(0)
    }

    /// The hyperedges with positive weight, in order.
    pub fn without_zero_weights(&self) -> Self {
        Self { n: self.n, hyperedges: self.hyperedges.iter().filter(|e| e.weight > 0.0).cloned().collect() }
    }

    /// Lowest-index vertex of every hyperedge.
    pub fn default_centers(&self) -> Vec<usize> {
        self.hyperedges.iter().map(|e| e.vertices[0]).collect()
    }
}

/// Rows of a sparse matrix partitioned into weighted groups.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHypergraph {
    rows: SparseRows,
    groups: Vec<Vec<usize>>,
    row_group: Vec<usize>,
    weights: Option<Vec<f64>>,
}

impl MatrixHypergraph {
    /// Validates that `groups` is a partition of the row indices into
    /// nonempty parts, that no row is identically zero, and that weights (if
    /// any) are finite and nonnegative.
    pub fn new(rows: SparseRows, groups: Vec<Vec<usize>>, weights: Option<Vec<f64>>) -> Result<Self> {
        let m = rows.nrows();
        let mut row_group = vec![usize::MAX; m];
        for (i, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(invalid(format!("group {i} is empty")));
            }
            for &j in g {
                if j >= m {
                    return Err(invalid(format!("group {i} names row {j} but m = {m}")));
                }
                if row_group[j] != usize::MAX {
                    return Err(invalid(format!("row {j} belongs to more than one group")));
                }
                row_group[j] = i;
            }
        }
        if let Some(j) = row_group.iter().position(|&g| g == usize::MAX) {
            return Err(invalid(format!("row {j} belongs to no group")));
        }
        if let Some(j) = (0..m).find(|&j| rows.row_is_zero(j)) {
            return Err(invalid(format!("row {j} is identically zero")));
        }
        if let Some(w) = &weights {
            if w.len() != groups.len() {
                return Err(invalid(format!("{} group weights given for {} groups", w.len(), groups.len())));
            }
            if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(invalid(format!("group {i} has invalid weight {}", w[i])));
            }
        }
        Ok(Self { rows, groups, row_group, weights })
    }

    /// Builds the partition from a per-row group id; rows within a group keep
    /// increasing row order.
    pub fn from_row_groups(rows: SparseRows, row_group: &[usize], k: usize, weights: Option<Vec<f64>>) -> Result<Self> {
        if row_group.len() != rows.nrows() {
            return Err(invalid("one group id per row is required"));
        }
        let mut groups = vec![Vec::new(); k];
        for (j, &g) in row_group.iter().enumerate() {
            if g >= k {
                return Err(invalid(format!("row {j}: group id {g} out of range (k = {k})")));
            }
            groups[g].push(j);
        }
        Self::new(rows, groups, weights)
    }

    /// Same rows and groups, new group weights.
    pub fn with_weights(&self, weights: Option<Vec<f64>>) -> Result<Self> {
        if let Some(w) = &weights {
            if w.len() != self.k() {
                return Err(invalid("weight vector length differs from group count"));
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(invalid("group weights must be finite and nonnegative"));
            }
        }
        Ok(Self { weights, ..self.clone() })
    }

    pub fn rows(&self) -> &SparseRows {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.ncols()
    }

    pub fn m(&self) -> usize {
        self.rows.nrows()
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    /// `max_i |S_i|`.
    pub fn rank(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    pub fn group_of_row(&self, j: usize) -> usize {
        self.row_group[j]
    }

    pub fn row_groups(&self) -> &[usize] {
        &self.row_group
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// True when no weights are stored or all of them are exactly 1.
    pub fn is_unit(&self) -> bool {
        self.weights.as_ref().is_none_or(|w| w.iter().all(|&v| v == 1.0))
    }

    /// `(max_{j in S_i} <a_j, x>^2, argmax row)`; ties go to the first row.
    #[inline]
    pub fn group_term(&self, i: usize, x: &[f64]) -> (f64, usize) {
        let g = &self.groups[i];
        let mut best = (f64::NEG_INFINITY, g[0]);
        for &j in g {
            let d = self.rows.row_dot(j, x);
            let sq = d * d;
            if sq > best.0 {
                best = (sq, j);
            }
        }
        best
    }

    /// Energy total without building a profile. Sums in group order exactly
    /// like [`energy`].
    pub fn energy_total(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.k() {
            total += self.weight(i) * self.group_term(i, x).0;
        }
        total
    }
}

/// Per-group breakdown of an energy evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyProfile {
    pub total: f64,
    pub per_group: Vec<f64>,
    /// Row attaining each group maximum. For graphical evaluations this is
    /// the clique-expansion row of the (min, max) vertex pair.
    pub argmax_row: Vec<usize>,
}

fn check_len(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(invalid(format!("vector has length {} but n = {n}", x.len())));
    }
    Ok(())
}

/// Matrix hypergraph energy `sum_i v_i max_{j in S_i} <a_j, x>^2`.
pub fn energy(g: &MatrixHypergraph, x: &[f64]) -> Result<EnergyProfile> {
    check_len(g.n(), x)?;
    let mut per_group = Vec::with_capacity(g.k());
    let mut argmax_row = Vec::with_capacity(g.k());
    let mut total = 0.0;
    for i in 0..g.k() {
        let (sq, j) = g.group_term(i, x);
        let e = g.weight(i) * sq;
        total += e;
        per_group.push(e);
        argmax_row.push(j);
    }
    Ok(EnergyProfile { total, per_group, argmax_row })
}

/// Index of the pair `(p, q)`, `p < q`, among the lexicographically ordered
/// pairs of `0..s`.
#[inline]
pub(crate) fn pair_index(s: usize, p: usize, q: usize) -> usize {
    debug_assert!(p < q && q < s);
    p * (2 * s - p - 1) / 2 + (q - p - 1)
}

/// Graphical energy `sum_S v_S (max_S x - min_S x)^2`, computed in
/// `O(sum |S|)`.
pub fn energy_graphical(g: &GraphicalHypergraph, x: &[f64]) -> Result<EnergyProfile> {
    check_len(g.n(), x)?;
    let mut per_group = Vec::with_capacity(g.num_hyperedges());
    let mut argmax_row = Vec::with_capacity(g.num_hyperedges());
    let mut total = 0.0;
    let mut offset = 0;
    for e in g.hyperedges() {
        let vs = e.vertices();
        let (mut lo, mut hi) = (0, 0);
        for (p, &v) in vs.iter().enumerate() {
            if x[v] < x[vs[lo]] {
                lo = p;
            }
            if x[v] > x[vs[hi]] {
                hi = p;
            }
        }
        let spread = x[vs[hi]] - x[vs[lo]];
        let val = e.weight() * spread * spread;
        total += val;
        per_group.push(val);
        let (p, q) = match lo.cmp(&hi) {
            std::cmp::Ordering::Less => (lo, hi),
            std::cmp::Ordering::Greater => (hi, lo),
            std::cmp::Ordering::Equal => (0, 1),
        };
        argmax_row.push(offset + pair_index(vs.len(), p, q));
        offset += vs.len() * (vs.len() - 1) / 2;
    }
    Ok(EnergyProfile { total, per_group, argmax_row })
}

/// One group of rows `e_u - e_w` per hyperedge, over all pairs `u < w`, in
/// lexicographic pair order. Group weights are the hyperedge weights.
pub fn clique_expand(g: &GraphicalHypergraph) -> MatrixHypergraph {
    let mut rows = SparseRows::new(g.n());
    let mut groups = Vec::with_capacity(g.num_hyperedges());
    for e in g.hyperedges() {
        let vs = e.vertices();
        let start = rows.nrows();
        for p in 0..vs.len() {
            for q in p + 1..vs.len() {
                rows.push_difference(vs[p], vs[q], 1.0);
            }
        }
        groups.push((start..rows.nrows()).collect());
    }
    let weights = g.hyperedges().iter().map(Hyperedge::weight).collect();
    MatrixHypergraph::new(rows, groups, Some(weights)).expect("clique expansion of a valid hypergraph is valid")
}

/// One group of rows `e_a - e_c` per hyperedge, for each member `a` other
/// than the hyperedge's center `c`, in increasing vertex order.
pub fn star_expand(g: &GraphicalHypergraph, centers: &[usize]) -> Result<MatrixHypergraph> {
    if centers.len() != g.num_hyperedges() {
        return Err(invalid(format!("{} centers given for {} hyperedges", centers.len(), g.num_hyperedges())));
    }
    let mut rows = SparseRows::new(g.n());
    let mut groups = Vec::with_capacity(g.num_hyperedges());
    for (i, (e, &c)) in g.hyperedges().iter().zip(centers).enumerate() {
        if e.vertices().binary_search(&c).is_err() {
            return Err(invalid(format!("center {c} is not a member of hyperedge {i}")));
        }
        let start = rows.nrows();
        for &a in e.vertices().iter().filter(|&&a| a != c) {
            rows.push_difference(a, c, 1.0);
        }
        groups.push((start..rows.nrows()).collect());
    }
    let weights = g.hyperedges().iter().map(Hyperedge::weight).collect();
    MatrixHypergraph::new(rows, groups, Some(weights))
}

/// Folds group weights into the rows (`a_j <- sqrt(v_i) a_j`) and drops
/// zero-weight groups. Group and row order are preserved.
pub fn unitize(g: &MatrixHypergraph) -> MatrixHypergraph {
    let Some(w) = g.weights() else {
        return g.clone();
    };
    let mut order = Vec::with_capacity(g.m());
    let mut scales = Vec::with_capacity(g.m());
    let mut groups = Vec::new();
    for (i, grp) in g.groups().iter().enumerate() {
        if w[i] == 0.0 {
            continue;
        }
        let s = w[i].sqrt();
        let start = order.len();
        for &j in grp {
            order.push(j);
            scales.push(s);
        }
        groups.push((start..order.len()).collect());
    }
    let rows = g.rows().select_scaled(&order, &scales);
    MatrixHypergraph::new(rows, groups, None).expect("unitized hypergraph is valid")
}
