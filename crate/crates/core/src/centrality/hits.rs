use super::{l2_normalize, max_abs_diff};
use crate::graph::Subnetwork;

#[derive(Clone, Debug, PartialEq)]
pub struct Hits {
    pub authority: Vec<f64>,
    pub hub: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// No edges: both vectors are all zero.
    pub edgeless: bool,
}

/// Kleinberg's hubs and authorities by power iteration from the uniform hub
/// vector: `auth ← Aᵀ·hub`, `hub ← A·auth`, each L2-normalised, until the
/// largest entry change in either vector drops below `tol`.
///
/// Without convergence the last iterate is returned with `converged = false`.
pub fn hits(sub: &Subnetwork, tol: f64, max_iter: usize) -> Hits {
    let n = sub.node_count();
    if sub.edge_count() == 0 {
        return Hits {
            authority: vec![0.0; n],
            hub: vec![0.0; n],
            iterations: 0,
            converged: true,
            edgeless: true,
        };
    }

    let mut hub = vec![1.0 / (n as f64).sqrt(); n];
    let mut auth = vec![0.0; n];
    let mut next_auth = vec![0.0; n];
    let mut next_hub = vec![0.0; n];
    for it in 1..=max_iter {
        for (v, slot) in next_auth.iter_mut().enumerate() {
            *slot = sub.in_neighbors(v).iter().fold(0.0, |s, &u| s + hub[u]);
        }
        l2_normalize(&mut next_auth);
        for (v, slot) in next_hub.iter_mut().enumerate() {
            *slot = sub
                .out_neighbors(v)
                .iter()
                .fold(0.0, |s, &w| s + next_auth[w]);
        }
        l2_normalize(&mut next_hub);

        let delta = max_abs_diff(&next_auth, &auth).max(max_abs_diff(&next_hub, &hub));
        std::mem::swap(&mut auth, &mut next_auth);
        std::mem::swap(&mut hub, &mut next_hub);
        if delta < tol {
            return Hits {
                authority: auth,
                hub,
                iterations: it,
                converged: true,
                edgeless: false,
            };
        }
    }
    Hits {
        authority: auth,
        hub,
        iterations: max_iter,
        converged: false,
        edgeless: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let h = hits(&Subnetwork::from_edges(2, &[(0, 1)]), 1e-9, 1000);
        assert!(h.converged);
        assert_eq!(h.hub, [1.0, 0.0]);
        assert_eq!(h.authority, [0.0, 1.0]);
    }

    #[test]
    fn out_star() {
        let h = hits(
            &Subnetwork::from_edges(4, &[(0, 1), (0, 2), (0, 3)]),
            1e-9,
            1000,
        );
        assert!((h.hub[0] - 1.0).abs() < 1e-12);
        for leaf in 1..4 {
            assert!((h.authority[leaf] - 1.0 / 3f64.sqrt()).abs() < 1e-9);
            assert_eq!(h.hub[leaf], 0.0);
        }
        assert_eq!(h.authority[0], 0.0);
    }

    #[test]
    fn edgeless_component_is_flagged() {
        let h = hits(&Subnetwork::from_edges(1, &[]), 1e-9, 1000);
        assert!(h.edgeless);
        assert_eq!(h.authority, [0.0]);
    }

    #[test]
    fn non_convergence_is_flagged() {
        // Two competing stars converge slowly; one iteration is not enough.
        let sub = Subnetwork::from_edges(6, &[(0, 1), (0, 2), (3, 2), (3, 4), (3, 5)]);
        let h = hits(&sub, 1e-15, 1);
        assert!(!h.converged);
        assert_eq!(h.iterations, 1);
    }
}
