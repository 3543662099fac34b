#![allow(dead_code)]

use hgsparse::MatrixHypergraph;
use nalgebra::DMatrix;

/// Connected components of a hypergraph whose rows are vertex differences,
/// as a union-find root per vertex.
pub fn components(g: &MatrixHypergraph) -> Vec<usize> {
    fn root(p: &[usize], mut v: usize) -> usize {
        while p[v] != v {
            v = p[v];
        }
        v
    }
    let mut parent: Vec<usize> = (0..g.n()).collect();
    for j in 0..g.m() {
        let (cols, _) = g.rows().row(j);
        let (a, b) = (root(&parent, cols[0]), root(&parent, cols[1]));
        parent[a.max(b)] = a.min(b);
    }
    (0..g.n()).map(|v| root(&parent, v)).collect()
}

/// Leverage scores of a difference-row instance by grounding one vertex per
/// connected component and solving the reduced positive definite system.
/// Returns the scores and the rank `n - components`.
pub fn grounded_leverage(g: &MatrixHypergraph, w: &[f64]) -> (Vec<f64>, usize) {
    let roots = components(g);
    let kept: Vec<usize> = (0..g.n()).filter(|&v| roots[v] != v).collect();
    let dense = g.rows().to_dense();
    let reduced = DMatrix::from_fn(g.m(), kept.len(), |j, c| dense[j][kept[c]]);
    let mut gram = DMatrix::zeros(kept.len(), kept.len());
    for (j, &wj) in w.iter().enumerate() {
        let r = reduced.row(j);
        gram += wj * r.transpose() * r;
    }
    let chol = gram.cholesky().expect("grounded system is positive definite");
    let sigma = (0..g.m())
        .map(|j| {
            let a = reduced.row(j).transpose();
            w[j] * a.dot(&chol.solve(&a))
        })
        .collect();
    (sigma, kept.len())
}
