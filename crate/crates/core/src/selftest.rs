//! Oracle suites that can run outside the test harness (`gnrisk selftest`).
//!
//! Each suite compares a production routine with an independent reference
//! on exhaustive small inputs or seeded random ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::centrality::{betweenness, closeness, eigenvector_centrality, hits, kshell, pagerank};
use crate::community::{girvan_newman, modularity};
use crate::eval::auc;
use crate::gbdt::{best_split, grad_hess, leaf_weight, logistic_loss, TrainParams};
use crate::graph::Subnetwork;
use crate::oracle;

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    /// Up to ten failure descriptions.
    pub failures: Vec<String>,
    pub failed: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

struct Suite {
    report: SuiteReport,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            report: SuiteReport {
                name,
                cases: 0,
                failures: Vec::new(),
                failed: 0,
            },
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.report.cases += 1;
        if !ok {
            self.report.failed += 1;
            if self.report.failures.len() < 10 {
                self.report.failures.push(describe());
            }
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A connected simple graph on `n` nodes: a random tree plus extra edges.
fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for _ in 0..rng.random_range(0..=n) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Each undirected edge kept one way or the other, or both ways.
fn random_orientation(rng: &mut ChaCha8Rng, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &(a, b) in edges {
        match rng.random_range(0..5) {
            0 => out.extend([(a, b), (b, a)]),
            1 | 2 => out.push((a, b)),
            _ => out.push((b, a)),
        }
    }
    out
}

/// Graphs the centrality suites run on beyond the exhaustive sets: 100
/// seeded random connected graphs with 2 to 8 nodes.
fn random_graphs(seed: u64) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..100)
        .map(|_| {
            let n = rng.random_range(2..=8);
            (n, random_connected(&mut rng, n))
        })
        .collect()
}

/// HITS and PageRank on every connected digraph with up to 4 nodes, one
/// random orientation of every connected graph with 5 nodes, and 100 random
/// digraphs with up to 8 nodes.
pub fn directed_centrality() -> SuiteReport {
    let mut s = Suite::new("directed centrality (HITS, PageRank) vs dense linear algebra");
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1);
    let mut cases: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    for n in 1..=4 {
        cases.extend(oracle::connected_digraphs(n).into_iter().map(|e| (n, e)));
    }
    for edges in oracle::connected_graphs(5) {
        cases.push((5, random_orientation(&mut rng, &edges)));
    }
    for (n, edges) in random_graphs(0xd2) {
        cases.push((n, random_orientation(&mut rng, &edges)));
    }
    for (n, edges) in cases {
        let sub = Subnetwork::from_edges(n, &edges);
        let h = hits(&sub, 1e-13, 1_000_000);
        let (auth, hub) = oracle::hits_dense(&sub);
        let pr = pagerank(&sub, 0.85, 1e-13, 100_000);
        let err = max_diff(&h.authority, &auth)
            .max(max_diff(&h.hub, &hub))
            .max(max_diff(&pr.scores, &oracle::pagerank_dense(&sub, 0.85)));
        s.check(h.converged && err <= 1e-6, || {
            format!("{edges:?}: deviation {err:e}")
        });
    }
    s.report
}

/// Eigenvector, betweenness, closeness and k-shell on every connected graph
/// with up to 5 nodes and 100 random ones with up to 8.
pub fn undirected_centrality() -> SuiteReport {
    let mut s = Suite::new(
        "undirected centrality (eigenvector, betweenness, closeness, k-shell) vs brute force",
    );
    let exhaustive =
        (1..=5).flat_map(|n| oracle::connected_graphs(n).into_iter().map(move |e| (n, e)));
    for (n, edges) in exhaustive.chain(random_graphs(0xd3)) {
        let sub = Subnetwork::from_edges(n, &edges);
        let ev = eigenvector_centrality(&sub, 1e-13, 1_000_000);
        let spectral = max_diff(&ev.scores, &oracle::eigenvector_dense(&sub));
        let paths = max_diff(&betweenness(&sub), &oracle::betweenness_by_paths(&sub)).max(
            max_diff(&closeness(&sub), &oracle::closeness_by_distances(&sub)),
        );
        let cores = kshell(&sub) == oracle::core_numbers_by_definition(&sub);
        s.check(
            ev.converged && spectral <= 1e-6 && paths <= 1e-9 && cores,
            || format!("{edges:?}: spectral {spectral:e}, paths {paths:e}, cores match {cores}"),
        );
    }
    s.report
}

/// BFS diameter against Floyd–Warshall on every connected graph with up to 5 nodes.
pub fn diameters() -> SuiteReport {
    let mut s = Suite::new("diameter by BFS vs Floyd-Warshall");
    for n in 1..=5 {
        for edges in oracle::connected_graphs(n) {
            let sub = Subnetwork::from_edges(n, &edges);
            let want = oracle::floyd_warshall(&sub)
                .iter()
                .flatten()
                .map(|d| d.unwrap_or(0))
                .max()
                .unwrap_or(0);
            let got = sub.diameter();
            s.check(got == want, || format!("{edges:?}: {got} vs {want}"));
        }
    }
    s.report
}

/// Girvan–Newman modularity bounded by zero and by the best partition on
/// every connected graph with up to 6 nodes, and the sparse modularity
/// formula against the matrix form.
pub fn communities() -> SuiteReport {
    let mut s = Suite::new("Girvan-Newman within [0, exhaustive maximum modularity]");
    for n in 2..=6 {
        for edges in oracle::connected_graphs(n) {
            let sub = Subnetwork::from_edges(n, &edges);
            let p = girvan_newman(&sub, usize::MAX);
            let best = oracle::best_modularity(&sub);
            let matrix = oracle::modularity_by_matrix(&sub, &p.membership);
            let ok = p.modularity >= -1e-12
                && p.modularity <= best + 1e-9
                && (modularity(&sub, &p.membership) - matrix).abs() <= 1e-12;
            s.check(ok, || format!("{edges:?}: GN {} best {best}", p.modularity));
        }
    }
    s.report
}

/// Split search, leaf weights and gradients of the boosted trees.
pub fn boosting() -> SuiteReport {
    let mut s = Suite::new("boosted-tree split search, leaf weight and gradients");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let params = TrainParams::default();
    for _ in 0..1000 {
        let n = rng.random_range(2..=12);
        let d = rng.random_range(1..=3);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| f64::from(rng.random_range(0..5u8)))
                    .collect()
            })
            .collect();
        let (g, h): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|_| grad_hess(rng.random_range(-3.0..3.0), rng.random_range(0..=1u8)))
            .unzip();
        let lambda = rng.random_range(0.0..2.0);
        let mch = rng.random_range(0.0..0.5);
        let p = TrainParams {
            lambda,
            min_child_hessian: mch,
            ..params.clone()
        };
        let got = best_split(&rows, &g, &h, &p).map(|b| (b.feature, b.threshold, b.gain));
        let want = oracle::exhaustive_split(&rows, &g, &h, lambda, 0.0, mch)
            .map(|b| (b.feature, b.threshold, b.gain));
        let same = match (got, want) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                a.0 == b.0 && a.1 == b.1 && (a.2 - b.2).abs() <= 1e-9 * b.2.abs().max(1.0)
            }
            _ => false,
        };
        s.check(same, || format!("rows {rows:?}: {got:?} vs {want:?}"));
    }
    for _ in 0..200 {
        let g = rng.random_range(-50.0..50.0);
        let h = rng.random_range(0.0..50.0);
        let lambda = rng.random_range(0.01..5.0);
        let w = leaf_weight(g, h, lambda);
        let numeric = oracle::golden_section_min(
            |w| oracle::leaf_objective_exact(g, h + lambda, w),
            -6000.0,
            6000.0,
            1e-12,
        );
        s.check((w - numeric).abs() < 1e-8, || {
            format!("leaf weight {w} vs {numeric}")
        });
    }
    for i in 0..=100 {
        let z = -5.0 + 0.1 * f64::from(i);
        for y in [0u8, 1] {
            let (g, h) = grad_hess(z, y);
            let dg = oracle::central_difference(|z| logistic_loss(z, y), z, 1e-6);
            let dh = oracle::central_difference(|z| grad_hess(z, y).0, z, 1e-6);
            s.check((g - dg).abs() < 1e-4 && (h - dh).abs() < 1e-4, || {
                format!("gradients at {z}, label {y}")
            });
        }
    }
    s.report
}

/// Rank-based AUC against counting every positive-negative pair.
pub fn metrics() -> SuiteReport {
    let mut s = Suite::new("AUC by ranks vs pair counting");
    let mut rng = ChaCha8Rng::seed_from_u64(0xa0c);
    for _ in 0..500 {
        let n = rng.random_range(2..40);
        let scores: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.random_range(0..8u8)) / 8.0)
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in (0..n).filter(|&i| labels[i] == 1) {
            for j in (0..n).filter(|&j| labels[j] == 0) {
                pairs += 1.0;
                wins += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
        let got = auc(&scores, &labels).ok();
        let want = (pairs > 0.0).then(|| wins / pairs);
        let same = match (got, want) {
            (Some(a), Some(b)) => (a - b).abs() < 1e-12,
            (None, None) => true,
            _ => false,
        };
        s.check(same, || {
            format!("{scores:?} {labels:?}: {got:?} vs {want:?}")
        });
    }
    s.report
}

/// Every suite, in a fixed order.
pub fn run_all() -> Vec<SuiteReport> {
    vec![
        directed_centrality(),
        undirected_centrality(),
        diameters(),
        communities(),
        boosting(),
        metrics(),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_suites_pass() {
        for r in super::run_all() {
            assert!(r.passed(), "{}: {:?}", r.name, r.failures);
            assert!(r.cases > 0);
        }
    }
}
