//! Importance sampling of groups.
//!
//! Group `i` is kept with probability `p_i = min(1, rho * tau_i)` and, when
//! kept, reweighted by `1 / p_i`, which leaves every energy unbiased.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hypergraph::MatrixHypergraph;
use crate::rng::{substream, substream_seed, unit_f64, SAMPLING};
use crate::sparse::SparseRows;

/// How the oversampling factor `rho` is derived from `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `rho = C eps^-2 ln(m) ln(r)`
    Chaining,
    /// `rho = C eps^-2 ln(m)^3`
    Dudley,
    /// `rho = C`
    Explicit,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Chaining => "chaining",
            Schedule::Dudley => "dudley",
            Schedule::Explicit => "explicit",
        })
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chaining" => Ok(Self::Chaining),
            "dudley" => Ok(Self::Dudley),
            "explicit" => Ok(Self::Explicit),
            other => Err(invalid(format!("unknown schedule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingPlan {
    pub rho: f64,
    #[serde(skip)]
    pub probabilities: Vec<f64>,
    pub schedule: Schedule,
    pub epsilon: f64,
    pub constant: f64,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn expected_kept(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Oversampling factor. `m` and `r` are real so the formulas can be probed
/// off the integers; natural logarithms throughout.
pub fn oversampling(schedule: Schedule, epsilon: f64, constant: f64, m: f64, r: f64) -> f64 {
    let inv_eps2 = (epsilon * epsilon).recip();
    match schedule {
        Schedule::Chaining => constant * inv_eps2 * m.ln() * r.ln(),
        Schedule::Dudley => constant * inv_eps2 * m.ln().powi(3),
        Schedule::Explicit => constant,
    }
}

/// Builds keep probabilities for the groups. `m` and `r` below 2 are raised
/// to 2, the value obtained by duplicating a row.
pub fn make_plan(
    tau: &[f64],
    m: usize,
    r: usize,
    epsilon: f64,
    schedule: Schedule,
    constant: f64,
    seed: u64,
) -> Result<SamplingPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(invalid(format!("constant must be positive and finite, got {constant}")));
    }
    if let Some(i) = tau.iter().position(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid(format!("tau[{i}] = {} is not a positive finite number", tau[i])));
    }
    let rho = oversampling(schedule, epsilon, constant, m.max(2) as f64, r.max(2) as f64);
    Ok(SamplingPlan {
        rho,
        probabilities: tau.iter().map(|t| (rho * t).min(1.0)).collect(),
        schedule,
        epsilon,
        constant,
        seed,
    })
}

/// Result of one sampling round.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsifierOutput {
    /// Input rows and groups with the resampled weights `v'`.
    pub hypergraph: MatrixHypergraph,
    pub kept_groups: Vec<usize>,
    pub plan: SamplingPlan,
    /// `sum p_i`.
    pub expected_kept: f64,
}

/// Keeps group `i` independently with probability `p_i`, drawing from the
/// substream `(seed, i)`; kept groups get weight `1/p_i` (exactly 1 when
/// `p_i = 1`), dropped ones 0.
pub fn subsample(g: &MatrixHypergraph, plan: &SamplingPlan) -> Result<SparsifierOutput> {
    if plan.probabilities.len() != g.k() {
        return Err(invalid(format!("plan has {} probabilities for {} groups", plan.probabilities.len(), g.k())));
    }
    if !g.is_unit() {
        return Err(invalid("subsampling needs a unit hypergraph"));
    }
    let base = substream_seed(plan.seed, SAMPLING);
    let weights: Vec<f64> = plan
        .probabilities
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            if p >= 1.0 {
                return 1.0;
            }
            let u = unit_f64(&mut substream(base, i as u64));
            if u < p {
                p.recip()
            } else {
                0.0
            }
        })
        .collect();
    let kept_groups = (0..g.k()).filter(|&i| weights[i] > 0.0).collect();
    Ok(SparsifierOutput {
        hypergraph: g.with_weights(Some(weights))?,
        kept_groups,
        expected_kept: plan.expected_kept(),
        plan: plan.clone(),
    })
}

/// Drops zero-weight groups and their rows, renumbering what remains in
/// order.
pub fn compact(out: &SparsifierOutput) -> MatrixHypergraph {
    let h = &out.hypergraph;
    let mut rows = SparseRows::new(h.n());
    let mut groups = Vec::with_capacity(out.kept_groups.len());
    let mut weights = Vec::with_capacity(out.kept_groups.len());
    for &i in &out.kept_groups {
        let start = rows.nrows();
        for &j in h.group(i) {
            let entries: Vec<(usize, f64)> = h.rows().row_entries(j).collect();
            rows.push_row_unchecked(&entries);
        }
        groups.push((start..rows.nrows()).collect());
        weights.push(h.weight(i));
    }
    MatrixHypergraph::new(rows, groups, Some(weights)).expect("compaction of a valid hypergraph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{energy, GraphicalHypergraph};
    use crate::overestimates::clique_unit;
    use approx::assert_relative_eq;

    fn small() -> MatrixHypergraph {
        let h = GraphicalHypergraph::new(
            5,
            vec![(vec![0, 1, 2], 1.0), (vec![2, 3], 2.0), (vec![1, 3, 4], 1.0), (vec![0, 4], 3.0)],
        )
        .unwrap();
        clique_unit(&h)
    }

    #[test]
    fn explicit_schedule_clamps() {
        let plan = make_plan(&[0.2, 0.05], 10, 3, 0.5, Schedule::Explicit, 10.0, 0).unwrap();
        assert_eq!(plan.rho, 10.0);
        assert_eq!(plan.probabilities, vec![1.0, 0.5]);
    }

    #[test]
    fn chaining_formula() {
        let e = std::f64::consts::E;
        let rho = oversampling(Schedule::Chaining, 0.5, 1.0, e.powi(4), e.powi(2));
        assert_relative_eq!(rho, 32.0, max_relative = 1e-12);
    }

    #[test]
    fn dudley_over_chaining_ratio() {
        let (m, r) = (1234.0, 7.0);
        let ratio = oversampling(Schedule::Dudley, 0.3, 2.0, m, r) / oversampling(Schedule::Chaining, 0.3, 2.0, m, r);
        assert_relative_eq!(ratio, f64::ln(m).powi(2) / f64::ln(r), max_relative = 1e-12);
    }

    #[test]
    fn plan_rejects_bad_arguments() {
        assert!(make_plan(&[0.1], 10, 3, 1.5, Schedule::Chaining, 1.0, 0).is_err());
        assert!(make_plan(&[0.1], 10, 3, 0.0, Schedule::Chaining, 1.0, 0).is_err());
        assert!(make_plan(&[0.1], 10, 3, 0.5, Schedule::Chaining, 0.0, 0).is_err());
        assert!(make_plan(&[0.0], 10, 3, 0.5, Schedule::Chaining, 1.0, 0).is_err());
        // r = 1 is treated as r = 2
        let p = make_plan(&[0.1], 10, 1, 0.5, Schedule::Chaining, 1.0, 0).unwrap();
        assert!(p.rho > 0.0);
    }

    #[test]
    fn certain_groups_keep_unit_weight() {
        let g = small();
        let plan = make_plan(&vec![1.0; g.k()], g.m(), g.rank(), 0.5, Schedule::Explicit, 1.0, 3).unwrap();
        let out = subsample(&g, &plan).unwrap();
        assert_eq!(out.kept_groups, (0..g.k()).collect::<Vec<_>>());
        assert!(out.hypergraph.weights().unwrap().iter().all(|&w| w == 1.0));
        assert_eq!(compact(&out).rows(), g.rows());
    }

    #[test]
    fn weights_are_zero_or_inverse_probability() {
        let g = small();
        let tau = [0.1, 0.3, 0.05, 0.2];
        let plan = make_plan(&tau, g.m(), g.rank(), 0.5, Schedule::Explicit, 2.0, 17).unwrap();
        for seed in 0..50 {
            let plan = SamplingPlan { seed, ..plan.clone() };
            let out = subsample(&g, &plan).unwrap();
            for (i, &w) in out.hypergraph.weights().unwrap().iter().enumerate() {
                assert!(w == 0.0 || w == plan.probabilities[i].recip());
                assert_eq!(w > 0.0, out.kept_groups.contains(&i));
            }
            assert!(out.expected_kept <= plan.rho * tau.iter().sum::<f64>() + 1e-12);
        }
    }

    #[test]
    fn compaction_preserves_energy() {
        let g = small();
        let plan = make_plan(&[0.1, 0.3, 0.05, 0.2], g.m(), g.rank(), 0.5, Schedule::Explicit, 2.0, 4).unwrap();
        let out = subsample(&g, &plan).unwrap();
        let c = compact(&out);
        let rows: usize = out.kept_groups.iter().map(|&i| g.group(i).len()).sum();
        assert_eq!(c.m(), rows);
        assert_eq!(c.k(), out.kept_groups.len());
        for t in 0..10 {
            let x: Vec<f64> = (0..5).map(|v| ((v * 7 + t * 3) % 11) as f64 - 5.0).collect();
            assert_relative_eq!(
                energy(&c, &x).unwrap().total,
                energy(&out.hypergraph, &x).unwrap().total,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let g = small();
        let plan = make_plan(&[0.1, 0.3, 0.05, 0.2], g.m(), g.rank(), 0.5, Schedule::Explicit, 2.0, 4).unwrap();
        assert_eq!(subsample(&g, &plan).unwrap(), subsample(&g, &plan).unwrap());
    }

    #[test]
    fn bernoulli_rate_matches_probability() {
        // one group with p = 0.3 over 10^5 seeds
        let rows = SparseRows::from_rows(2, vec![vec![(0, 1.0), (1, -1.0)]]).unwrap();
        let g = MatrixHypergraph::new(rows, vec![vec![0]], None).unwrap();
        let base = make_plan(&[0.3], 2, 2, 0.5, Schedule::Explicit, 1.0, 0).unwrap();
        let trials = 100_000;
        let (mut kept, mut wsum) = (0usize, 0.0);
        for seed in 0..trials {
            let plan = SamplingPlan { seed, ..base.clone() };
            let out = subsample(&g, &plan).unwrap();
            kept += out.kept_groups.len();
            wsum += out.hypergraph.weight(0);
        }
        let rate = kept as f64 / trials as f64;
        assert!((rate - 0.3).abs() <= 0.005, "rate {rate}");
        assert!((wsum / trials as f64 - 1.0).abs() <= 0.02);
    }
}
