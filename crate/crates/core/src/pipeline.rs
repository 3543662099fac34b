//! End-to-end sparsification: unitize, overestimate, sample, certify.

use crate::certify::{group_contribution_check, measure_quality, CertReport, Check, QualityStats, DEFAULT_CUT_CAP};
use crate::error::{invalid, Result};
use crate::hypergraph::{unitize, GraphicalHypergraph, MatrixHypergraph};
use crate::leverage::{make_overestimator, LeverageMode, SolverConfig};
use crate::overestimates::{
    certify_overestimates, clique_unit, default_iterations, graphical_overestimates, group_leverage_overestimate,
    GroupOverestimates,
};
use crate::report::{Report, Sizes};
use crate::rng::{substream_seed, LEVERAGE, RETRY};
use crate::sampler::{compact, make_plan, subsample, Schedule, SparsifierOutput};

#[derive(Debug, Clone, PartialEq)]
pub enum HypergraphInput {
    Graphical(GraphicalHypergraph),
    Matrix(MatrixHypergraph),
}

impl From<crate::io::AnyHypergraph> for HypergraphInput {
    fn from(h: crate::io::AnyHypergraph) -> Self {
        match h {
            crate::io::AnyHypergraph::Graphical(g) => Self::Graphical(g),
            crate::io::AnyHypergraph::Matrix(g) => Self::Matrix(g),
        }
    }
}

impl HypergraphInput {
    /// The unit matrix hypergraph the overestimates and sampler act on.
    pub fn unit(&self) -> MatrixHypergraph {
        match self {
            Self::Graphical(g) => clique_unit(g),
            Self::Matrix(g) => unitize(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub solver: SolverConfig,
    pub schedule: Schedule,
    pub constant: f64,
    pub seed: u64,
    /// Reweighting rounds; `None` picks `max(1, ceil(ln r))`.
    pub iterations: Option<usize>,
    /// Star centers for graphical input, one per hyperedge.
    pub centers: Option<Vec<usize>>,
    pub certify: bool,
    /// Overestimates are certified only when the unit hypergraph has at
    /// most this many rows.
    pub certification_cap: usize,
    /// Extra attempts with fresh seeds when sketched overestimates fail
    /// certification.
    pub max_retries: usize,
    pub directions: usize,
    pub cut_cap: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            schedule: Schedule::Chaining,
            constant: 1.0,
            seed: 0,
            iterations: None,
            centers: None,
            certify: true,
            certification_cap: 2000,
            max_retries: 3,
            directions: 32,
            cut_cap: DEFAULT_CUT_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sparsification {
    pub unit: MatrixHypergraph,
    pub overestimates: GroupOverestimates,
    pub output: SparsifierOutput,
    pub certificate: CertReport,
    pub quality: Option<QualityStats>,
}

impl Sparsification {
    /// The sparsifier with dropped groups removed.
    pub fn sparsifier(&self) -> MatrixHypergraph {
        compact(&self.output)
    }

    pub fn report(&self) -> Report {
        let mut r = Report::new(self.certificate.clone());
        r.quality = self.quality.clone();
        r.plan = Some(self.output.plan.clone());
        r.sizes = Some(Sizes {
            n: self.unit.n(),
            m: self.unit.m(),
            k: self.unit.k(),
            kept: self.output.kept_groups.len(),
            expected_kept: self.output.expected_kept,
        });
        r
    }
}

fn overestimate(
    input: &HypergraphInput,
    unit: &MatrixHypergraph,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<GroupOverestimates> {
    match input {
        HypergraphInput::Graphical(g) => {
            graphical_overestimates(g, cfg.centers.as_deref(), cfg.iterations, &cfg.solver, seed)
        }
        HypergraphInput::Matrix(_) => {
            let t = cfg.iterations.unwrap_or_else(|| default_iterations(unit.rank()));
            let mut oracle = make_overestimator(unit.rows(), &cfg.solver, seed)?;
            group_leverage_overestimate(unit, t, &mut oracle)
        }
    }
}

/// Runs the full pipeline on `input` at accuracy `epsilon`.
pub fn sparsify(input: &HypergraphInput, epsilon: f64, cfg: &PipelineConfig) -> Result<Sparsification> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    cfg.solver.validate()?;
    if cfg.iterations == Some(0) {
        return Err(invalid("iteration count must be at least 1"));
    }
    if cfg.certify && cfg.directions == 0 {
        return Err(invalid("at least one test direction is required"));
    }
    if cfg.centers.is_some() && !matches!(input, HypergraphInput::Graphical(_)) {
        return Err(invalid("star centers apply only to graphical input"));
    }
    let unit = input.unit();
    if unit.k() == 0 {
        return Err(invalid("hypergraph has no positive-weight groups"));
    }

    let mut certificate = CertReport::default();
    let mut overestimates = overestimate(input, &unit, cfg, substream_seed(cfg.seed, LEVERAGE))?;
    if cfg.certify {
        if unit.m() <= cfg.certification_cap {
            let mut cert = certify_overestimates(&unit, &overestimates)?;
            let mut attempt = 0;
            while !cert.overall && cfg.solver.mode == LeverageMode::Sketched && attempt < cfg.max_retries {
                attempt += 1;
                let seed = substream_seed(substream_seed(cfg.seed, RETRY), attempt as u64);
                overestimates = overestimate(input, &unit, cfg, seed)?;
                cert = certify_overestimates(&unit, &overestimates)?;
            }
            if attempt > 0 {
                certificate.push(Check::new(
                    "overestimate_retries",
                    true,
                    attempt as f64,
                    format!("sketched overestimates recomputed {attempt} time(s) with fresh seeds"),
                ));
            }
            certificate.extend(cert);
        } else {
            certificate.push(Check::new(
                "certification_skipped",
                true,
                0.0,
                format!(
                    "m = {} exceeds the certification cap {}; overestimates are uncertified",
                    unit.m(),
                    cfg.certification_cap
                ),
            ));
        }
        certificate.extend(group_contribution_check(
            &unit,
            &overestimates.tau,
            &overestimates.witness_weights,
            cfg.directions,
            cfg.seed,
        )?);
    }

    let plan = make_plan(&overestimates.tau, unit.m(), unit.rank(), epsilon, cfg.schedule, cfg.constant, cfg.seed)?;
    let output = subsample(&unit, &plan)?;
    let quality = if cfg.certify {
        Some(measure_quality(&unit, &compact(&output), epsilon, cfg.directions, cfg.cut_cap, cfg.seed)?)
    } else {
        None
    };
    Ok(Sparsification { unit, overestimates, output, certificate, quality })
}
