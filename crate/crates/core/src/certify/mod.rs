//! Ground-truth oracles and statistical harnesses used to certify
//! overestimates and sparsifiers.

mod generate;

pub use generate::{generate_random, GeneratorKind, WeightLaw};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::hypergraph::MatrixHypergraph;
use crate::leverage::RowWeights;
use crate::linalg::{weighted_gram_dense, PsdPseudoInverse};
use crate::rng::{gaussian_vec, substream, substream_seed, QUALITY};

/// Cut enumeration is exhaustive up to this many vertices.
pub const DEFAULT_CUT_CAP: usize = 14;
/// Directions with energy below this are skipped when measuring relative
/// error.
pub const ENERGY_FLOOR: f64 = 1e-14;
/// Relative slack allowed in the energy-share checks.
pub const CONTRIBUTION_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub worst_slack: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, worst_slack: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, worst_slack, detail: detail.into() }
    }
}

/// Ordered list of named checks. `overall` is the conjunction of every
/// `pass` flag (true when empty).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub overall: bool,
    pub checks: Vec<Check>,
}

impl Default for CertReport {
    fn default() -> Self {
        Self { overall: true, checks: Vec::new() }
    }
}

impl CertReport {
    pub fn push(&mut self, check: Check) {
        self.overall &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: CertReport) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Relative energy error of a candidate sparsifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityStats {
    pub max_rel_err_random: f64,
    /// Present only when every nontrivial cut was enumerated.
    pub max_rel_err_cuts: Option<f64>,
    pub directions_tested: usize,
    pub epsilon_target: f64,
}

/// Per group `max_{j in S_i} a_j^T (A^T W A)^+ a_j` from a dense
/// pseudoinverse.
pub fn brute_force_group_leverage(g: &MatrixHypergraph, w: &RowWeights) -> Result<Vec<f64>> {
    if w.len() != g.m() {
        return Err(invalid(format!("{} weights for {} rows", w.len(), g.m())));
    }
    let pinv = PsdPseudoInverse::new(weighted_gram_dense(g.rows(), w.as_slice()))?;
    Ok(g.groups().iter().map(|grp| grp.iter().map(|&j| pinv.quad_form_row(g.rows(), j)).fold(0.0, f64::max)).collect())
}

fn rel_err(fg: f64, fh: f64) -> f64 {
    (fh / fg - 1.0).abs()
}

/// Largest `|f_H(x)/f_G(x) - 1|` over `n_directions` seeded Gaussian
/// directions and, when `n <= cut_cap`, over all `2^n - 2` nontrivial cut
/// indicators. Directions with `f_G(x) < 1e-14` are skipped.
pub fn measure_quality(
    g: &MatrixHypergraph,
    h: &MatrixHypergraph,
    epsilon: f64,
    n_directions: usize,
    cut_cap: usize,
    seed: u64,
) -> Result<QualityStats> {
    if g.n() != h.n() {
        return Err(invalid(format!("column counts differ: {} vs {}", g.n(), h.n())));
    }
    if n_directions == 0 {
        return Err(invalid("at least one direction is required"));
    }
    let n = g.n();
    let base = substream_seed(seed, QUALITY);
    let mut tested = 0;
    let mut worst = 0.0f64;
    for d in 0..n_directions {
        let x = gaussian_vec(&mut substream(base, d as u64), n);
        let fg = g.energy_total(&x);
        if fg < ENERGY_FLOOR {
            continue;
        }
        tested += 1;
        worst = worst.max(rel_err(fg, h.energy_total(&x)));
    }
    let cuts = (n <= cut_cap && n < 64).then(|| {
        let mut worst = 0.0f64;
        let mut x = vec![0.0; n];
        for mask in 1..(1u64 << n) - 1 {
            for (v, xv) in x.iter_mut().enumerate() {
                *xv = ((mask >> v) & 1) as f64;
            }
            let fg = g.energy_total(&x);
            if fg < ENERGY_FLOOR {
                continue;
            }
            worst = worst.max(rel_err(fg, h.energy_total(&x)));
        }
        worst
    });
    Ok(QualityStats {
        max_rel_err_random: worst,
        max_rel_err_cuts: cuts,
        directions_tested: tested,
        epsilon_target: epsilon,
    })
}

/// Checks on explicit directions that each group's energy share is bounded
/// by its overestimate:
///
/// * `witness_form_vs_energy`: `x^T A^T W A x <= f(x)`;
/// * `group_term_vs_witness_form`: `max_{j in S_i} <a_j,x>^2 <= tau_i x^T A^T W A x`;
/// * `group_term_vs_energy`: `max_{j in S_i} <a_j,x>^2 <= tau_i f(x)`.
///
/// Worst slack is the largest observed left/right ratio. Directions along
/// which `f(x)` vanishes (relative to `|x|^2`) pass vacuously.
pub fn group_contribution_check_on(
    g: &MatrixHypergraph,
    tau: &[f64],
    wbar: &[f64],
    directions: &[Vec<f64>],
) -> Result<CertReport> {
    if tau.len() != g.k() || wbar.len() != g.m() {
        return Err(invalid("tau or witness weights do not match the hypergraph"));
    }
    let ratio = |num: f64, den: f64| {
        if num <= 0.0 {
            0.0
        } else if den <= 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    };
    let (mut form_vs_energy, mut term_vs_form, mut term_vs_energy) = (0.0f64, 0.0f64, 0.0f64);
    let mut skipped = 0;
    for x in directions {
        if x.len() != g.n() {
            return Err(invalid("direction length differs from n"));
        }
        let f = g.energy_total(x);
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        if f <= ENERGY_FLOOR * norm2 {
            skipped += 1;
            continue;
        }
        let form: f64 = (0..g.m())
            .map(|j| {
                let d = g.rows().row_dot(j, x);
                wbar[j] * d * d
            })
            .sum();
        form_vs_energy = form_vs_energy.max(ratio(form, f));
        for (i, &t) in tau.iter().enumerate() {
            let term = g.weight(i) * g.group_term(i, x).0;
            term_vs_form = term_vs_form.max(ratio(term, t * form));
            term_vs_energy = term_vs_energy.max(ratio(term, t * f));
        }
    }
    let lim = 1.0 + CONTRIBUTION_REL_TOL;
    let tested = directions.len() - skipped;
    let mut report = CertReport::default();
    for (name, worst) in [
        ("witness_form_vs_energy", form_vs_energy),
        ("group_term_vs_witness_form", term_vs_form),
        ("group_term_vs_energy", term_vs_energy),
    ] {
        report.push(Check::new(
            name,
            worst <= lim,
            worst,
            format!("max ratio {worst:.6} over {tested} directions ({skipped} degenerate)"),
        ));
    }
    Ok(report)
}

/// [`group_contribution_check_on`] with `n_directions` seeded Gaussian
/// directions.
pub fn group_contribution_check(
    g: &MatrixHypergraph,
    tau: &[f64],
    wbar: &[f64],
    n_directions: usize,
    seed: u64,
) -> Result<CertReport> {
    let base = substream_seed(seed, QUALITY);
    let dirs: Vec<Vec<f64>> = (0..n_directions).map(|d| gaussian_vec(&mut substream(base, d as u64), g.n())).collect();
    group_contribution_check_on(g, tau, wbar, &dirs)
}
