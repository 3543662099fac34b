//! Seeded random hypergraph instances.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::hypergraph::GraphicalHypergraph;
use crate::rng::{below, substream, unit_f64, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Hyperedge sizes uniform in `[2, r]`, members uniform.
    UniformHypergraph,
    /// As above but members drawn with probability proportional to
    /// `1 / (v + 1)`, giving heavy-tailed degrees.
    PowerLawDegrees,
    /// Every hyperedge has exactly two vertices.
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightLaw {
    Constant,
    /// `10^U` with `U` uniform in `[0, 3]`.
    LogUniform,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-hypergraph" | "uniform" => Ok(Self::UniformHypergraph),
            "power-law-degrees" | "power-law" => Ok(Self::PowerLawDegrees),
            "graph" => Ok(Self::Graph),
            other => Err(invalid(format!("unknown generator kind `{other}`"))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::UniformHypergraph => "uniform-hypergraph",
            Self::PowerLawDegrees => "power-law-degrees",
            Self::Graph => "graph",
        })
    }
}

impl FromStr for WeightLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "log-uniform" => Ok(Self::LogUniform),
            other => Err(invalid(format!("unknown weight law `{other}`"))),
        }
    }
}

fn uniform_subset(rng: &mut SplitMix64, n: usize, size: usize) -> Vec<usize> {
    // Floyd's algorithm
    let mut out: Vec<usize> = Vec::with_capacity(size);
    for j in n - size..n {
        let t = below(rng, j as u64 + 1) as usize;
        if out.contains(&t) {
            out.push(j);
        } else {
            out.push(t);
        }
    }
    out.sort_unstable();
    out
}

fn weighted_subset(rng: &mut SplitMix64, cumulative: &[f64], size: usize) -> Vec<usize> {
    let total = *cumulative.last().unwrap();
    let mut out: Vec<usize> = Vec::with_capacity(size);
    while out.len() < size {
        let u = unit_f64(rng) * total;
        let v = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.sort_unstable();
    out
}

/// Random hypergraph on `n` vertices with `k` hyperedges of size at most `r`
/// in which every vertex belongs to some hyperedge. Deterministic in `seed`.
pub fn generate_random(
    kind: GeneratorKind,
    n: usize,
    k: usize,
    r: usize,
    weights: WeightLaw,
    seed: u64,
) -> Result<GraphicalHypergraph> {
    let r = if kind == GeneratorKind::Graph { 2 } else { r };
    if r < 2 || r > n {
        return Err(invalid(format!("rank must satisfy 2 <= r <= n (r = {r}, n = {n})")));
    }
    if k == 0 {
        return Err(invalid("at least one hyperedge is required"));
    }
    if k.saturating_mul(r) < n {
        return Err(invalid(format!("{k} hyperedges of size <= {r} cannot cover {n} vertices")));
    }
    let mut rng = substream(seed, 0);
    let cumulative: Vec<f64> = (0..n)
        .scan(0.0, |acc, v| {
            *acc += 1.0 / (v as f64 + 1.0);
            Some(*acc)
        })
        .collect();

    let mut edges: Vec<Vec<usize>> = (0..k)
        .map(|_| {
            let size = 2 + below(&mut rng, (r - 1) as u64) as usize;
            match kind {
                GeneratorKind::PowerLawDegrees => weighted_subset(&mut rng, &cumulative, size),
                _ => uniform_subset(&mut rng, n, size),
            }
        })
        .collect();

    // Patch isolated vertices into random hyperedges: insert where there is
    // room, otherwise replace a member that is covered elsewhere.
    let mut degree = vec![0usize; n];
    for e in &edges {
        for &v in e {
            degree[v] += 1;
        }
    }
    for v in 0..n {
        if degree[v] > 0 {
            continue;
        }
        let start = below(&mut rng, k as u64) as usize;
        let mut placed = false;
        for step in 0..k {
            let e = &mut edges[(start + step) % k];
            if e.len() < r {
                e.push(v);
                placed = true;
            } else if let Some(p) = e.iter().position(|&u| degree[u] > 1) {
                degree[e[p]] -= 1;
                e[p] = v;
                placed = true;
            }
            if placed {
                e.sort_unstable();
                degree[v] += 1;
                break;
            }
        }
        if !placed {
            return Err(Error::Internal(format!("could not place vertex {v}")));
        }
    }

    let hyperedges = edges
        .into_iter()
        .map(|e| {
            let w = match weights {
                WeightLaw::Constant => 1.0,
                WeightLaw::LogUniform => 10f64.powf(3.0 * unit_f64(&mut rng)),
            };
            (e, w)
        })
        .collect();
    GraphicalHypergraph::new(n, hyperedges)
}
