use super::Iterated;
use crate::graph::Subnetwork;

/// PageRank over directed edges with uniform teleportation. Mass sitting on
/// nodes without out-edges is spread uniformly. Iterates from the uniform
/// vector until the L1 change drops below `tol`; scores sum to 1.
pub fn pagerank(sub: &Subnetwork, damping: f64, tol: f64, max_iter: usize) -> Iterated {
    let n = sub.node_count();
    if n == 0 {
        return Iterated {
            scores: Vec::new(),
            iterations: 0,
            converged: true,
        };
    }
    let nf = n as f64;
    let mut p = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for it in 1..=max_iter {
        let dangling: f64 = (0..n)
            .filter(|&v| sub.out_neighbors(v).is_empty())
            .map(|v| p[v])
            .sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = sub
                .in_neighbors(v)
                .iter()
                .map(|&u| p[u] / sub.out_neighbors(u).len() as f64)
                .sum();
            *slot = base + damping * inflow;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if delta < tol {
            return Iterated {
                scores: p,
                iterations: it,
                converged: true,
            };
        }
    }
    Iterated {
        scores: p,
        iterations: max_iter,
        converged: false,
    }
}
