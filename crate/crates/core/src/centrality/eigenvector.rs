use super::{l2_normalize, max_abs_diff, Iterated};
use crate::graph::Subnetwork;

/// Eigenvector centrality on the undirected view.
///
/// Iterates `x ← (A + I)·x` from the uniform vector; the identity shift keeps
/// the eigenvectors of `A` but removes the sign oscillation power iteration
/// suffers on bipartite graphs. Scores are L2-normalised and non-negative;
/// an edgeless subnetwork scores all zero.
pub fn eigenvector_centrality(sub: &Subnetwork, tol: f64, max_iter: usize) -> Iterated {
    let n = sub.node_count();
    if sub.edge_count() == 0 {
        return Iterated {
            scores: vec![0.0; n],
            iterations: 0,
            converged: true,
        };
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for it in 1..=max_iter {
        for (v, slot) in next.iter_mut().enumerate() {
            *slot = x[v] + sub.neighbors(v).iter().map(|&w| x[w]).sum::<f64>();
        }
        l2_normalize(&mut next);
        let delta = max_abs_diff(&next, &x);
        std::mem::swap(&mut x, &mut next);
        if delta < tol {
            return Iterated {
                scores: x,
                iterations: it,
                converged: true,
            };
        }
    }
    Iterated {
        scores: x,
        iterations: max_iter,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2() {
        let r = eigenvector_centrality(&Subnetwork::from_edges(2, &[(0, 1)]), 1e-9, 1000);
        for x in r.scores {
            assert!((x - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn four_cycle() {
        let r = eigenvector_centrality(
            &Subnetwork::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
            1e-9,
            1000,
        );
        assert!(r.converged);
        for x in r.scores {
            assert!((x - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn path_converges_despite_bipartite_spectrum() {
        let r = eigenvector_centrality(&Subnetwork::from_edges(3, &[(0, 1), (1, 2)]), 1e-12, 1000);
        assert!(r.converged);
        // Dominant eigenvector of P3 is (1, √2, 1)/2.
        assert!((r.scores[0] - 0.5).abs() < 1e-9);
        assert!((r.scores[1] - 2f64.sqrt() / 2.0).abs() < 1e-9);
    }
}
