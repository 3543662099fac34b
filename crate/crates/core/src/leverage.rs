//! Leverage scores of row-reweighted matrices.
//!
//! For weights `w >= 0` the leverage score of row `j` of `W^{1/2} A` is
//! `sigma_j = w_j a_j^T (A^T W A)^+ a_j`. The scores lie in `[0, 1]` and sum to
//! the rank of `W^{1/2} A`. Two backends are provided:
//!
//! * [`leverage_exact`]: dense eigendecomposition of `A^T W A`.
//! * [`leverage_sketched`]: a Rademacher random projection of `W^{1/2} A`
//!   composed with conjugate gradient solves, rescaled so that on success the
//!   output dominates the true scores entrywise.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{pcg, weighted_gram_dense, PsdPseudoInverse, SparseGram};
use crate::rng::{substream, substream_seed};
use crate::sparse::SparseRows;

/// Constant in the default sketch size `ceil(C ln m / delta^2)`.
pub const SKETCH_CONSTANT: f64 = 8.0;

/// Nonnegative finite row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RowWeights(Vec<f64>);

impl RowWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(j) = w.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!("row weight {j} is {} (must be finite and >= 0)", w[j])));
        }
        Ok(Self(w))
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![1.0; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LeverageMode {
    Exact,
    Sketched,
}

impl fmt::Display for LeverageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LeverageMode::Exact => "exact",
            LeverageMode::Sketched => "sketched",
        })
    }
}

impl FromStr for LeverageMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "sketched" => Ok(Self::Sketched),
            other => Err(invalid(format!("unknown solver mode `{other}`"))),
        }
    }
}

/// Leverage score overestimates with their certified total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverageEstimate {
    pub sigma: Vec<f64>,
    /// Upper bound on `sum(sigma)`.
    pub nu: f64,
    pub mode: LeverageMode,
    /// Probability that `sigma` fails to dominate the true scores (0 for
    /// exact computations).
    pub failure_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: LeverageMode,
    /// Relative accuracy of the sketch.
    pub delta: f64,
    /// Number of projection rows; `None` means `ceil(8 ln m / delta^2)`.
    pub sketch_rows: Option<usize>,
    pub cg_tolerance: f64,
    /// Iteration cap per solve; `None` means `max(1000, 10 n)`.
    pub cg_max_iter: Option<usize>,
    /// Tikhonov term added to `A^T W A` in iterative solves.
    pub ridge: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: LeverageMode::Exact,
            delta: 0.25,
            sketch_rows: None,
            cg_tolerance: 1e-10,
            cg_max_iter: None,
            ridge: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn sketched() -> Self {
        Self { mode: LeverageMode::Sketched, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.sketch_rows == Some(0) {
            return Err(invalid("sketch rows must be at least 1"));
        }
        if !(self.cg_tolerance > 0.0 && self.cg_tolerance.is_finite()) {
            return Err(invalid("cg tolerance must be positive"));
        }
        if self.cg_max_iter == Some(0) {
            return Err(invalid("cg iteration cap must be at least 1"));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(invalid("ridge must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn sketch_rows_for(&self, m: usize) -> usize {
        self.sketch_rows.unwrap_or_else(|| default_sketch_rows(m, self.delta))
    }

    fn max_iter_for(&self, n: usize) -> usize {
        self.cg_max_iter.unwrap_or_else(|| (10 * n).max(1000))
    }
}

pub fn default_sketch_rows(m: usize, delta: f64) -> usize {
    let lnm = (m.max(2) as f64).ln();
    (SKETCH_CONSTANT * lnm / (delta * delta)).ceil() as usize
}

/// Union bound over `rows` vectors of the Rademacher projection tail
/// `2 exp(-s (delta^2/2 - delta^3/3) / 2)`.
pub fn jl_failure_probability(rows: usize, sketch_rows: usize, delta: f64) -> f64 {
    let per = 2.0 * (-(sketch_rows as f64) * (delta * delta / 2.0 - delta.powi(3) / 3.0) / 2.0).exp();
    (rows as f64 * per).min(1.0)
}

fn check_inputs(a: &SparseRows, w: &RowWeights) -> Result<()> {
    if w.len() != a.nrows() {
        return Err(invalid(format!("{} weights for {} rows", w.len(), a.nrows())));
    }
    Ok(())
}

/// Exact leverage scores of `W^{1/2} A` through a dense pseudoinverse.
pub fn leverage_exact(a: &SparseRows, w: &RowWeights) -> Result<LeverageEstimate> {
    check_inputs(a, w)?;
    let w = w.as_slice();
    let pinv = PsdPseudoInverse::new(weighted_gram_dense(a, w))?;
    let sigma: Vec<f64> = (0..a.nrows())
        .into_par_iter()
        .map(|j| if w[j] == 0.0 { 0.0 } else { w[j] * pinv.quad_form_row(a, j) })
        .collect();
    let nu = sigma.iter().sum();
    Ok(LeverageEstimate { sigma, nu, mode: LeverageMode::Exact, failure_probability: 0.0 })
}

/// Sketched leverage overestimates, deterministic in `seed`.
pub fn leverage_sketched(a: &SparseRows, w: &RowWeights, cfg: &SolverConfig, seed: u64) -> Result<LeverageEstimate> {
    check_inputs(a, w)?;
    cfg.validate()?;
    let (m, n) = (a.nrows(), a.ncols());
    let w = w.as_slice();
    let s = cfg.sketch_rows_for(m);
    let sqrt_w: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let gram = SparseGram::assemble(a, w, cfg.ridge);
    let scale = (s as f64).sqrt().recip();
    let max_iter = cfg.max_iter_for(n);

    // z_q = (A^T W A)^+ (Pi W^{1/2} A)^T e_q for every sketch row q.
    let solves: Vec<Vec<f64>> = (0..s)
        .into_par_iter()
        .map(|q| {
            let mut rng = substream(seed, q as u64);
            let mut b = vec![0.0; n];
            let (mut bits, mut left) = (0u64, 0u32);
            for (j, &sw) in sqrt_w.iter().enumerate() {
                if left == 0 {
                    bits = rng.next_u64();
                    left = 64;
                }
                let positive = bits & 1 == 1;
                bits >>= 1;
                left -= 1;
                if sw == 0.0 {
                    continue;
                }
                let c = if positive { scale } else { -scale } * sw;
                for (col, v) in a.row_entries(j) {
                    b[col] += c * v;
                }
            }
            pcg(&gram, &b, cfg.cg_tolerance, max_iter).map(|sol| sol.x)
        })
        .collect::<Result<_>>()?;

    let inflate = (1.0 - cfg.delta).recip();
    let sigma: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|j| {
            if w[j] == 0.0 {
                return 0.0;
            }
            let est: f64 = solves
                .iter()
                .map(|z| {
                    let d = a.row_dot(j, z);
                    d * d
                })
                .sum();
            (w[j] * est).clamp(0.0, 1.0) * inflate
        })
        .collect();
    let active = w.iter().filter(|&&v| v > 0.0).count();
    Ok(LeverageEstimate {
        sigma,
        nu: (1.0 + cfg.delta) / (1.0 - cfg.delta) * n as f64,
        mode: LeverageMode::Sketched,
        failure_probability: jl_failure_probability(active, s, cfg.delta),
    })
}

/// A procedure mapping row weights to leverage score overestimates of the
/// reweighted matrix.
pub trait Overestimator {
    fn estimate(&mut self, w: &RowWeights) -> Result<LeverageEstimate>;
}

impl<F> Overestimator for F
where
    F: FnMut(&RowWeights) -> Result<LeverageEstimate>,
{
    fn estimate(&mut self, w: &RowWeights) -> Result<LeverageEstimate> {
        self(w)
    }
}

/// Overestimator over a fixed matrix. Each call draws from its own
/// substream of `seed`, so a fresh oracle with the same seed replays the
/// same sequence of outputs.
#[derive(Debug, Clone)]
pub struct LeverageOracle<'a> {
    a: &'a SparseRows,
    cfg: SolverConfig,
    seed: u64,
    calls: u64,
}

impl Overestimator for LeverageOracle<'_> {
    fn estimate(&mut self, w: &RowWeights) -> Result<LeverageEstimate> {
        let call_seed = substream_seed(self.seed, self.calls);
        self.calls += 1;
        match self.cfg.mode {
            LeverageMode::Exact => leverage_exact(self.a, w),
            LeverageMode::Sketched => leverage_sketched(self.a, w, &self.cfg, call_seed),
        }
    }
}

pub fn make_overestimator<'a>(a: &'a SparseRows, cfg: &SolverConfig, seed: u64) -> Result<LeverageOracle<'a>> {
    cfg.validate()?;
    Ok(LeverageOracle { a, cfg: cfg.clone(), seed, calls: 0 })
}
