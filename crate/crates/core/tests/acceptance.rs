//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use hgsparse::certify::{generate_random, measure_quality, GeneratorKind, WeightLaw};
use hgsparse::hypergraph::{star_expand, unitize};
use hgsparse::io::{write_mhg, write_tau};
use hgsparse::leverage::{leverage_exact, leverage_sketched, LeverageEstimate, RowWeights};
use hgsparse::overestimates::{
    certify_overestimates, clique_unit, default_iterations, graphical_overestimates, group_leverage_overestimate,
    GroupOverestimates,
};
use hgsparse::rng::{below, gaussian_vec, substream, unit_f64};
use hgsparse::sampler::{compact, make_plan, oversampling, subsample, Schedule};
use hgsparse::sparse::SparseRows;
use hgsparse::{
    sparsify, GraphicalHypergraph, HypergraphInput, LeverageMode, MatrixHypergraph, PipelineConfig, SolverConfig,
};

mod common;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn exact_alg2(g: &MatrixHypergraph, t: usize) -> GroupOverestimates {
    let mut oracle = |w: &RowWeights| -> hgsparse::Result<LeverageEstimate> { leverage_exact(g.rows(), w) };
    group_leverage_overestimate(g, t, &mut oracle).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Random sparse Gaussian rows grouped into sets of size at most `r`, with
/// at least one group of size exactly `r`.
fn random_matrix_hypergraph(seed: u64, n: usize, k: usize, r: usize) -> MatrixHypergraph {
    let mut rng = substream(seed, 0);
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for i in 0..k {
        let size = if i == 0 { r } else { 1 + below(&mut rng, r as u64) as usize };
        let mut grp = Vec::new();
        for _ in 0..size {
            let nnz = 1 + below(&mut rng, 3.min(n) as u64) as usize;
            let mut cols: Vec<usize> = Vec::new();
            while cols.len() < nnz {
                let c = below(&mut rng, n as u64) as usize;
                if !cols.contains(&c) {
                    cols.push(c);
                }
            }
            cols.sort_unstable();
            let vals = gaussian_vec(&mut rng, nnz);
            grp.push(rows.len());
            rows.push(cols.into_iter().zip(vals).collect::<Vec<_>>());
        }
        groups.push(grp);
    }
    MatrixHypergraph::new(SparseRows::from_rows(n, rows).unwrap(), groups, None).unwrap()
}

/// Unit expansion of a random graphical hypergraph with hyperedges of size
/// at most `r`, shrinking `k` until it has at most `max_m` rows.
fn random_unit(
    seed: u64,
    n: usize,
    r: usize,
    max_m: usize,
    expand: impl Fn(&GraphicalHypergraph) -> MatrixHypergraph,
) -> MatrixHypergraph {
    let mut k = (4 * n).max(n.div_ceil(r));
    loop {
        let g = generate_random(GeneratorKind::UniformHypergraph, n, k, r, WeightLaw::LogUniform, seed).unwrap();
        let u = expand(&g);
        if u.m() <= max_m || k <= n.div_ceil(r) {
            return u;
        }
        k = (k * 3 / 4).max(n.div_ceil(r));
    }
}

fn random_clique_unit(seed: u64, n: usize, r: usize, max_m: usize) -> MatrixHypergraph {
    random_unit(seed, n, r, max_m, clique_unit)
}

fn star_unit(g: &GraphicalHypergraph) -> MatrixHypergraph {
    unitize(&star_expand(g, &g.default_centers()).unwrap())
}

/// The 50-instance suite shared by criteria 1 and 2, cycling through unit
/// clique expansions (group sizes 3 or 6), unit star expansions (group sizes
/// 2 to 8) and random sparse Gaussian rows (group sizes 2 to 8).
fn validity_suite() -> Vec<MatrixHypergraph> {
    let mut rng = substream(2024, 1);
    let mut suite = Vec::new();
    let mut s = 0u64;
    while suite.len() < 50 {
        s += 1;
        let g = match suite.len() % 3 {
            0 => {
                let edge = 3 + below(&mut rng, 2) as usize;
                random_clique_unit(s, 5 + below(&mut rng, 36) as usize, edge, 400)
            }
            1 => {
                let edge = 3 + below(&mut rng, 7) as usize;
                random_unit(s, (edge + 1).max(5 + below(&mut rng, 36) as usize), edge, 400, star_unit)
            }
            _ => {
                let r = 2 + below(&mut rng, 7) as usize;
                let n = 5 + below(&mut rng, 36) as usize;
                let k = (n / 2 + below(&mut rng, n as u64) as usize).clamp(1, 400 / r);
                random_matrix_hypergraph(s, n, k, r)
            }
        };
        // Rejects the rare draw whose largest group falls short of 2 rows.
        if (2..=8).contains(&g.rank()) {
            suite.push(g);
        }
    }
    suite
}

fn criterion_1_and_2() -> (Outcome, Outcome) {
    let start = Instant::now();
    let suite = validity_suite();
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_mass = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let mut economy_fail = Vec::new();
    let mut worst_economy = 0.0f64;
    let (mut max_m, mut max_n) = (0, 0);
    for (s, g) in suite.iter().enumerate() {
        assert!(g.n() <= 40 && g.m() <= 400 && (2..=8).contains(&g.rank()));
        max_m = max_m.max(g.m());
        max_n = max_n.max(g.n());
        let r = g.rank();
        let t = (r as f64).ln().ceil().max(1.0) as usize;
        assert_eq!(t, default_iterations(r));
        let o = exact_alg2(g, t);
        assert_eq!(o.sigma_sums.len(), t);
        let nu = o.sigma_sums.iter().copied().fold(0.0, f64::max);
        let bound = ((r as f64).ln() / t as f64).exp() * nu;
        let cert = certify_overestimates(g, &o).unwrap();
        let ratio = cert.check("group_leverage_bound").unwrap().worst_slack;
        worst_ratio = worst_ratio.max(ratio - 1.0);
        worst_mass = worst_mass.max(o.tau_sum() - bound);
        if !cert.overall || ratio - 1.0 > 1e-8 || o.tau_sum() > bound + 1e-9 {
            failures.push(s);
        }
        let e_n = std::f64::consts::E * g.n() as f64;
        worst_economy = worst_economy.max(o.tau_sum() / g.n() as f64);
        if o.tau_sum() > e_n {
            economy_fail.push(s);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let c1 = outcome(
        failures.is_empty() && secs < 30.0,
        format!(
            "{} instances (n <= {max_n}, m <= {max_m}); largest quadratic form / tau ratio minus 1 = {worst_ratio:.2e}; \
             worst sum(tau) - r^(1/T) nu = {worst_mass:.2e}; failing {failures:?}; {secs:.2} s",
            suite.len()
        ),
    );
    let c2 = outcome(
        economy_fail.is_empty(),
        format!("max sum(tau)/n = {worst_economy:.4} against e = {:.4}; failing {economy_fail:?}", std::f64::consts::E),
    );
    (c1, c2)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let g = generate_random(GeneratorKind::UniformHypergraph, 12, 300, 5, WeightLaw::LogUniform, 3).unwrap();
    let unit = clique_unit(&g);
    let o = graphical_overestimates(&g, None, None, &SolverConfig::default(), 3).unwrap();
    let constants = [0.5, 1.0, 2.0, 4.0, 8.0];
    let mut medians = Vec::new();
    let mut clamped = Vec::new();
    for &c in &constants {
        let errs: Vec<f64> = (0..30u64)
            .map(|seed| {
                let plan = make_plan(&o.tau, unit.m(), unit.rank(), 0.5, Schedule::Chaining, c, seed).unwrap();
                let h = compact(&subsample(&unit, &plan).unwrap());
                let q = measure_quality(&unit, &h, 0.5, 4, 14, seed).unwrap();
                q.max_rel_err_cuts.expect("n = 12 enumerates every cut")
            })
            .collect();
        let plan = make_plan(&o.tau, unit.m(), unit.rank(), 0.5, Schedule::Chaining, c, 0).unwrap();
        clamped.push(plan.probabilities.iter().filter(|&&p| p == 1.0).count());
        medians.push(median(errs));
    }
    let inversions = medians.windows(2).filter(|p| p[1] > p[0]).count();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        inversions <= 1 && medians[4] <= 0.5 && secs < 120.0,
        format!(
            "median max cut error by constant {constants:?}: {:?}; inversions {inversions}; \
             groups with p = 1: {clamped:?} of {}; {secs:.1} s",
            medians.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            unit.k()
        ),
    )
}

fn criterion_4() -> Outcome {
    let g = generate_random(GeneratorKind::UniformHypergraph, 10, 40, 4, WeightLaw::LogUniform, 4).unwrap();
    let unit = clique_unit(&g);
    let o = exact_alg2(&unit, default_iterations(unit.rank()));
    let tau_max = o.tau.iter().copied().fold(0.0, f64::max);
    let plan = make_plan(&o.tau, unit.m(), unit.rank(), 0.5, Schedule::Explicit, 0.6 / tau_max, 0).unwrap();
    let x = gaussian_vec(&mut substream(4, 9), unit.n());
    let fg = unit.energy_total(&x);
    let draws = 10_000u64;
    let samples: Vec<f64> = (0..draws)
        .map(|seed| {
            let mut p = plan.clone();
            p.seed = seed;
            subsample(&unit, &p).unwrap().hypergraph.energy_total(&x)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / draws as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    let se = (var / draws as f64).sqrt();
    let z = (mean - fg) / se;
    let random_groups = plan.probabilities.iter().filter(|&&p| p < 1.0).count();
    outcome(
        z.abs() <= 4.0 && se > 0.0,
        format!("f_G(x) = {fg:.6}, mean f_H(x) = {mean:.6}, standard error {se:.3e}, z = {z:.3}; {random_groups} of {} groups sampled with p < 1", unit.k()),
    )
}

fn criterion_5() -> Outcome {
    let g = generate_random(GeneratorKind::UniformHypergraph, 30, 600, 4, WeightLaw::Constant, 5).unwrap();
    let input = HypergraphInput::Graphical(g);
    let probe = sparsify(&input, 0.5, &PipelineConfig { certify: false, ..PipelineConfig::default() }).unwrap();
    let unit = &probe.unit;
    let tau_max = probe.overestimates.tau.iter().copied().fold(0.0, f64::max);
    // Largest p at epsilon = 0.25 is 0.9: nothing clamps at either epsilon.
    let constant = 0.9 / (oversampling(Schedule::Chaining, 0.25, 1.0, unit.m() as f64, unit.rank() as f64) * tau_max);
    let cfg = PipelineConfig { certify: false, constant, ..PipelineConfig::default() };
    let coarse = sparsify(&input, 0.5, &cfg).unwrap();
    let fine = sparsify(&input, 0.25, &cfg).unwrap();
    let mut bound_ok = true;
    for s in [&coarse, &fine] {
        let rhs = s.output.plan.rho * s.overestimates.tau_sum();
        bound_ok &= s.output.expected_kept <= rhs * (1.0 + 1e-12);
        bound_ok &= s.output.plan.probabilities.iter().all(|&p| p < 1.0);
    }
    let ratio = fine.output.expected_kept / coarse.output.expected_kept;
    let realized: (usize, usize) = (0..20u64)
        .map(|seed| {
            let c = PipelineConfig { seed, ..cfg.clone() };
            (
                sparsify(&input, 0.5, &c).unwrap().output.kept_groups.len(),
                sparsify(&input, 0.25, &c).unwrap().output.kept_groups.len(),
            )
        })
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    outcome(
        bound_ok && (3.6..=4.4).contains(&ratio),
        format!(
            "expected kept {:.3} -> {:.3} (ratio {ratio:.6}); expected_kept <= rho sum(tau) with no clamping: {bound_ok}; \
             realized kept over 20 seeds {} -> {} (ratio {:.3})",
            coarse.output.expected_kept,
            fine.output.expected_kept,
            realized.0,
            realized.1,
            realized.1 as f64 / realized.0 as f64
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = substream(6, 0);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for s in 0..30u64 {
        let n = 6 + below(&mut rng, 20) as usize;
        let r = 3 + below(&mut rng, 4) as usize;
        let k = n.div_ceil(r) + below(&mut rng, 2 * n as u64) as usize;
        let kind = if s % 3 == 0 { GeneratorKind::PowerLawDegrees } else { GeneratorKind::UniformHypergraph };
        let g = generate_random(kind, n, k, r, WeightLaw::LogUniform, s).unwrap();
        assert!(g.n() <= 25 && g.rank() <= 6);
        let o = graphical_overestimates(&g, None, None, &SolverConfig::default(), s).unwrap();
        let cert = certify_overestimates(&clique_unit(&g), &o).unwrap();
        let ratio = cert.check("group_leverage_bound").unwrap().worst_slack;
        worst = worst.max(ratio);
        let slack = ratio - 1.0;
        if !cert.overall || slack > 1e-8 {
            failures.push(s);
        }
    }
    outcome(
        failures.is_empty(),
        format!("30 graphical instances certified on the clique expansion; largest quadratic form / tau ratio {worst:.9} (limit 1 + 1e-8); failing {failures:?}"),
    )
}

fn criterion_7() -> Outcome {
    let cfg = SolverConfig::sketched();
    let delta = cfg.delta;
    let upper = (1.0 + delta) / (1.0 - delta) + 1e-9;
    let mut rng = substream(7, 0);
    let mut failed = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for s in 0..50u64 {
        let n = 8 + below(&mut rng, 23) as usize;
        let r = 2 + below(&mut rng, 5) as usize;
        let g = random_clique_unit(s, n, r, 400);
        let w = RowWeights::new((0..g.m()).map(|_| 10f64.powf(2.0 * unit_f64(&mut rng) - 1.0)).collect()).unwrap();
        let exact = leverage_exact(g.rows(), &w).unwrap();
        let sketched = leverage_sketched(g.rows(), &w, &cfg, s).unwrap();
        let ratios: Vec<f64> = sketched.sigma.iter().zip(&exact.sigma).map(|(a, b)| a / b).collect();
        let ok = ratios.iter().all(|&q| (1.0 - 1e-9..=upper).contains(&q));
        if ok {
            lo = ratios.iter().copied().fold(lo, f64::min);
            hi = ratios.iter().copied().fold(hi, f64::max);
        } else {
            failed += 1;
        }
    }
    let rate = failed as f64 / 50.0;
    outcome(
        rate <= 0.05,
        format!(
            "delta = {delta}; ratio range on successful trials [{lo:.6}, {hi:.6}] within [1 - 1e-9, {upper:.6}]; \
             failure rate {rate:.2} ({failed}/50)"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = substream(8, 0);
    let (mut sum_err, mut range_ok, mut scale_err, mut convex_worst) = (0.0f64, true, 0.0f64, f64::NEG_INFINITY);
    let random_w = |rng: &mut hgsparse::rng::SplitMix64, m: usize| -> Vec<f64> {
        (0..m).map(|_| 10f64.powf(2.0 * unit_f64(rng) - 1.0)).collect()
    };
    let instances: Vec<MatrixHypergraph> = (0..20u64)
        .map(|s| {
            let n = 5 + below(&mut rng, 26) as usize;
            let r = 2 + below(&mut rng, 5) as usize;
            random_clique_unit(100 + s, n, r, 300)
        })
        .collect();
    for g in &instances {
        let w = random_w(&mut rng, g.m());
        let sigma = leverage_exact(g.rows(), &RowWeights::new(w.clone()).unwrap()).unwrap().sigma;
        let (_, rank) = common::grounded_leverage(g, &w);
        sum_err = sum_err.max((sigma.iter().sum::<f64>() - rank as f64).abs());
        range_ok &= sigma.iter().all(|&s| (0.0..=1.0 + 1e-9).contains(&s));
        let c = 10f64.powf(6.0 * unit_f64(&mut rng) - 3.0);
        let scaled =
            leverage_exact(g.rows(), &RowWeights::new(w.iter().map(|v| c * v).collect()).unwrap()).unwrap().sigma;
        scale_err = scale_err.max(sigma.iter().zip(&scaled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    for t in 0..1000usize {
        let g = &instances[t % instances.len()];
        let (w1, w2) = (random_w(&mut rng, g.m()), random_w(&mut rng, g.m()));
        let j = below(&mut rng, g.m() as u64) as usize;
        let mid: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
        let f =
            |w: &[f64]| (leverage_exact(g.rows(), &RowWeights::new(w.to_vec()).unwrap()).unwrap().sigma[j] / w[j]).ln();
        convex_worst = convex_worst.max(f(&mid) - 0.5 * f(&w1) - 0.5 * f(&w2));
    }
    outcome(
        sum_err <= 1e-8 && range_ok && scale_err <= 1e-9 && convex_worst <= 1e-9,
        format!(
            "|sum sigma - rank| <= {sum_err:.2e}; sigma in [0, 1 + 1e-9]: {range_ok}; scale drift {scale_err:.2e}; \
             worst midpoint excess over 1000 triples {convex_worst:.2e}"
        ),
    )
}

fn pipeline_bytes(input: &HypergraphInput, cfg: &PipelineConfig, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let s = sparsify(input, 0.3, cfg).unwrap();
        format!("{}{}{}", write_mhg(&s.sparsifier()), write_tau(&s.overestimates), s.report().to_json())
    })
}

fn criterion_9() -> Outcome {
    let cases = [
        (
            generate_random(GeneratorKind::UniformHypergraph, 14, 40, 5, WeightLaw::LogUniform, 9).unwrap(),
            LeverageMode::Exact,
        ),
        (
            generate_random(GeneratorKind::PowerLawDegrees, 200, 400, 6, WeightLaw::LogUniform, 9).unwrap(),
            LeverageMode::Sketched,
        ),
    ];
    let mut identical = true;
    let mut sizes = Vec::new();
    for (g, mode) in cases {
        let input = HypergraphInput::Graphical(g);
        let cfg = PipelineConfig {
            solver: SolverConfig { mode, ..SolverConfig::default() },
            seed: 1234,
            ..PipelineConfig::default()
        };
        let a = pipeline_bytes(&input, &cfg, 1);
        let b = pipeline_bytes(&input, &cfg, 1);
        let c = pipeline_bytes(&input, &cfg, 4);
        identical &= a == b && a == c;
        sizes.push(format!("{mode}: {} bytes", a.len()));
    }
    outcome(
        identical,
        format!(
            "sparsifier, overestimates and report identical across runs and 1/4 threads: {identical} ({})",
            sizes.join(", ")
        ),
    )
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn criterion_10() -> Outcome {
    let g = generate_random(GeneratorKind::UniformHypergraph, 5000, 8333, 8, WeightLaw::LogUniform, 10).unwrap();
    let input = HypergraphInput::Graphical(g);
    let cfg = PipelineConfig { solver: SolverConfig::sketched(), seed: 10, ..PipelineConfig::default() };
    let start = Instant::now();
    let s = sparsify(&input, 0.5, &cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let peak = peak_rss_bytes();
    let mem_ok = peak.is_some_and(|b| b < 2 << 30);
    outcome(
        secs < 120.0 && mem_ok && s.unit.m() >= 100_000,
        format!(
            "n = {}, m = {}, k = {}, kept {}; {secs:.1} s; peak RSS {}",
            s.unit.n(),
            s.unit.m(),
            s.unit.k(),
            s.output.kept_groups.len(),
            peak.map_or("unavailable".into(), |b| format!("{:.0} MiB", b as f64 / (1 << 20) as f64))
        ),
    )
}

fn run(results: &mut Vec<bool>, id: &str, name: &str, f: impl FnOnce() -> Outcome) {
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    });
    report(results, id, name, out);
}

fn report(results: &mut Vec<bool>, id: &str, name: &str, out: Outcome) {
    println!("criterion {id:>2} {name:<28} {}  {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
    results.push(out.pass);
}

fn main() {
    let mut results = Vec::new();
    match catch_unwind(criterion_1_and_2) {
        Ok((c1, c2)) => {
            report(&mut results, "1", "overestimate validity", c1);
            report(&mut results, "2", "bound-sum economy", c2);
        }
        Err(_) => {
            report(&mut results, "1", "overestimate validity", outcome(false, "panicked".into()));
            report(&mut results, "2", "bound-sum economy", outcome(false, "panicked".into()));
        }
    }
    run(&mut results, "3", "approximation scaling law", criterion_3);
    run(&mut results, "4", "unbiasedness", criterion_4);
    run(&mut results, "5", "size law", criterion_5);
    run(&mut results, "6", "star-lift validity", criterion_6);
    run(&mut results, "7", "sketched backend", criterion_7);
    run(&mut results, "8", "oracle identities", criterion_8);
    run(&mut results, "9", "determinism", criterion_9);
    run(&mut results, "10", "performance smoke", criterion_10);
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
