//! Group leverage score overestimates.
//!
//! `tau` are valid overestimates for a unit matrix hypergraph when there are
//! witness weights `w` with `sum_{j in S_i} w_j = 1` for every group and
//! `max_{j in S_i} a_j^T (A^T W A)^+ a_j <= tau_i`. They bound each group's
//! share of the energy: `max_{j in S_i} <a_j, x>^2 <= tau_i f(x)`.
//!
//! [`group_leverage_overestimate`] computes them by repeatedly renormalising
//! leverage score overestimates within each group and averaging the iterates.

use serde::Serialize;

use crate::certify::{brute_force_group_leverage, CertReport, Check};
use crate::error::{invalid, Error, Result};
use crate::hypergraph::{clique_expand, pair_index, star_expand, unitize, GraphicalHypergraph, MatrixHypergraph};
use crate::leverage::{make_overestimator, Overestimator, RowWeights, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceMode {
    Direct,
    StarLifted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOverestimates {
    /// One positive bound per group.
    pub tau: Vec<f64>,
    /// Averaged iterate `w-bar`, one entry per row.
    pub witness_weights: Vec<f64>,
    /// Certified bound on `sum(tau)`.
    pub nu: f64,
    /// Number of reweighting rounds `T`.
    pub iterations: usize,
    pub source: SourceMode,
    /// `sum(sigma)` of every oracle call, in order. Empty when read from disk.
    pub sigma_sums: Vec<f64>,
}

impl GroupOverestimates {
    pub fn tau_sum(&self) -> f64 {
        self.tau.iter().sum()
    }
}

/// `max(1, ceil(ln r))`, the smallest round count with inflation
/// `exp(ln r / T) <= e`.
pub fn default_iterations(r: usize) -> usize {
    ((r.max(1) as f64).ln().ceil() as usize).max(1)
}

/// Runs `T` rounds of leverage reweighting on a unit hypergraph.
///
/// Starting from `w_j = 1/|S_i|`, each round queries the oracle and sets
/// `w_j <- sigma_j / sum_{j' in S_i} sigma_j'`. The output is
/// `tau_i = r^{1/T} (1/T) sum_t sum_{j in S_i} sigma_j^(t)` with witness
/// weights equal to the mean of `w^(1)..w^(T)`, and `nu = r^{1/T} * max_t
/// nu^(t)`.
pub fn group_leverage_overestimate<O: Overestimator + ?Sized>(
    g: &MatrixHypergraph,
    iterations: usize,
    oracle: &mut O,
) -> Result<GroupOverestimates> {
    if !g.is_unit() {
        return Err(invalid("group leverage overestimates need a unit hypergraph; unitize first"));
    }
    if iterations == 0 {
        return Err(invalid("iteration count must be at least 1"));
    }
    let (m, k) = (g.m(), g.k());
    let mut w = vec![0.0; m];
    for grp in g.groups() {
        let share = (grp.len() as f64).recip();
        for &j in grp {
            w[j] = share;
        }
    }
    let mut w_sum = vec![0.0; m];
    let mut group_mass = vec![0.0; k];
    let mut sigma_sums = Vec::with_capacity(iterations);
    let mut nu = 0.0f64;

    for _ in 0..iterations {
        for (acc, &v) in w_sum.iter_mut().zip(&w) {
            *acc += v;
        }
        let est = oracle.estimate(&RowWeights::new(w.clone())?)?;
        if est.sigma.len() != m {
            return Err(Error::Internal(format!("overestimator returned {} scores for {m} rows", est.sigma.len())));
        }
        sigma_sums.push(est.sigma.iter().sum());
        nu = nu.max(est.nu);
        for (i, grp) in g.groups().iter().enumerate() {
            let mass: f64 = grp.iter().map(|&j| est.sigma[j]).sum();
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::Internal(format!("group {i} has leverage mass {mass}")));
            }
            group_mass[i] += mass;
            for &j in grp {
                w[j] = est.sigma[j] / mass;
            }
        }
    }

    let t = iterations as f64;
    let inflation = ((g.rank().max(1) as f64).ln() / t).exp();
    Ok(GroupOverestimates {
        tau: group_mass.iter().map(|s| inflation * s / t).collect(),
        witness_weights: w_sum.iter().map(|s| s / t).collect(),
        nu: inflation * nu,
        iterations,
        source: SourceMode::Direct,
        sigma_sums,
    })
}

/// The star expansion of a graphical hypergraph together with the map from
/// its rows into the rows of the clique expansion.
///
/// Only positive-weight hyperedges take part, matching [`unitize`] of the
/// clique expansion.
#[derive(Debug, Clone)]
pub struct StarLift {
    /// Unit star hypergraph; overestimates are computed on this.
    pub star: MatrixHypergraph,
    /// Clique row index of every star row.
    pub clique_row: Vec<usize>,
    /// Row count of the unit clique expansion.
    pub clique_rows: usize,
}

impl StarLift {
    /// `centers` is per hyperedge of `g` (zero-weight ones included);
    /// `None` picks the lowest-index vertex.
    pub fn new(g: &GraphicalHypergraph, centers: Option<&[usize]>) -> Result<Self> {
        let centers = match centers {
            Some(c) if c.len() != g.num_hyperedges() => {
                return Err(invalid(format!("{} centers given for {} hyperedges", c.len(), g.num_hyperedges())))
            }
            Some(c) => c.to_vec(),
            None => g.default_centers(),
        };
        let kept: Vec<usize> = (0..g.num_hyperedges()).filter(|&i| g.hyperedges()[i].weight() > 0.0).collect();
        let positive = g.without_zero_weights();
        let centers: Vec<usize> = kept.iter().map(|&i| centers[i]).collect();
        let star = unitize(&star_expand(&positive, &centers)?);

        let mut clique_row = Vec::with_capacity(star.m());
        let mut offset = 0;
        for (e, &c) in positive.hyperedges().iter().zip(&centers) {
            let vs = e.vertices();
            let s = vs.len();
            let pc = vs.binary_search(&c).expect("center validated by star_expand");
            for pa in (0..s).filter(|&p| p != pc) {
                let (p, q) = if pa < pc { (pa, pc) } else { (pc, pa) };
                clique_row.push(offset + pair_index(s, p, q));
            }
            offset += s * (s - 1) / 2;
        }
        Ok(Self { star, clique_row, clique_rows: offset })
    }

    /// Doubles star overestimates and moves their witness weights onto the
    /// clique rows (all other clique rows get weight 0). Valid because
    /// effective resistance obeys the triangle inequality through the center.
    pub fn lift(&self, star_over: &GroupOverestimates) -> Result<GroupOverestimates> {
        if star_over.witness_weights.len() != self.star.m() || star_over.tau.len() != self.star.k() {
            return Err(invalid("overestimates do not match the star hypergraph"));
        }
        let mut witness = vec![0.0; self.clique_rows];
        for (&row, &wt) in self.clique_row.iter().zip(&star_over.witness_weights) {
            witness[row] = wt;
        }
        Ok(GroupOverestimates {
            tau: star_over.tau.iter().map(|t| 2.0 * t).collect(),
            witness_weights: witness,
            nu: 2.0 * star_over.nu,
            iterations: star_over.iterations,
            source: SourceMode::StarLifted,
            sigma_sums: star_over.sigma_sums.clone(),
        })
    }
}

/// Overestimates for `unitize(clique_expand(g))` computed on the star
/// expansion. `iterations = None` uses [`default_iterations`] of the star
/// rank.
pub fn graphical_overestimates(
    g: &GraphicalHypergraph,
    centers: Option<&[usize]>,
    iterations: Option<usize>,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<GroupOverestimates> {
    let lift = StarLift::new(g, centers)?;
    let t = iterations.unwrap_or_else(|| default_iterations(lift.star.rank()));
    let mut oracle = make_overestimator(lift.star.rows(), cfg, seed)?;
    let star_over = group_leverage_overestimate(&lift.star, t, &mut oracle)?;
    lift.lift(&star_over)
}

/// Unit matrix hypergraph whose groups `tau` refers to for a graphical input.
pub fn clique_unit(g: &GraphicalHypergraph) -> MatrixHypergraph {
    unitize(&clique_expand(g))
}

pub const WITNESS_TOL: f64 = 1e-9;
pub const LEVERAGE_REL_TOL: f64 = 1e-8;
pub const MASS_TOL: f64 = 1e-9;

/// Checks the overestimate conditions with a dense pseudoinverse:
///
/// * `witness_normalization`: every group's witness mass is `1 +- 1e-9`
///   (worst slack = largest deviation);
/// * `group_leverage_bound`: `max_{j in S_i} a_j^T (A^T W A)^+ a_j <= tau_i (1 + 1e-8)`
///   (worst slack = largest ratio of the left side to `tau_i`);
/// * `tau_mass_bound`: `sum(tau) <= nu + 1e-9` (worst slack = `sum(tau) - nu`).
pub fn certify_overestimates(g: &MatrixHypergraph, o: &GroupOverestimates) -> Result<CertReport> {
    if o.tau.len() != g.k() || o.witness_weights.len() != g.m() {
        return Err(invalid(format!(
            "overestimates sized for k={}, m={} but hypergraph has k={}, m={}",
            o.tau.len(),
            o.witness_weights.len(),
            g.k(),
            g.m()
        )));
    }
    let mut report = CertReport::default();

    let (mut dev, mut worst_group) = (0.0f64, 0);
    for (i, grp) in g.groups().iter().enumerate() {
        let s: f64 = grp.iter().map(|&j| o.witness_weights[j]).sum();
        if (s - 1.0).abs() > dev || !s.is_finite() {
            dev = (s - 1.0).abs();
            worst_group = i;
        }
    }
    let nonneg = o.witness_weights.iter().all(|&v| v >= 0.0 && v.is_finite());
    report.push(Check::new(
        "witness_normalization",
        nonneg && dev <= WITNESS_TOL,
        dev,
        format!("max |sum_j w_j - 1| = {dev:e} at group {worst_group}; nonnegative: {nonneg}"),
    ));

    let w = RowWeights::new(o.witness_weights.iter().map(|v| v.max(0.0)).collect())?;
    let quad = brute_force_group_leverage(g, &w)?;
    let (mut ratio, mut worst) = (0.0f64, 0);
    for (i, (&qf, &t)) in quad.iter().zip(&o.tau).enumerate() {
        let r = if t > 0.0 {
            qf / t
        } else if qf > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if r > ratio || r.is_nan() {
            ratio = r;
            worst = i;
        }
    }
    report.push(Check::new(
        "group_leverage_bound",
        ratio <= 1.0 + LEVERAGE_REL_TOL,
        ratio,
        format!(
            "max_i max_j a_j^T (A^T W A)^+ a_j / tau_i = {ratio:.6} at group {worst} (tau = {:e})",
            o.tau.get(worst).copied().unwrap_or(f64::NAN)
        ),
    ));

    let sum = o.tau_sum();
    let positive = o.tau.iter().all(|&t| t > 0.0);
    report.push(Check::new(
        "tau_mass_bound",
        positive && sum <= o.nu + MASS_TOL,
        sum - o.nu,
        format!("sum(tau) = {sum:.9}, nu = {:.9}; all tau positive: {positive}", o.nu),
    ));
    Ok(report)
}
