use crate::graph::Subnetwork;

/// Newman modularity of `membership` on the undirected view:
/// `Σ_c [ L_c / m − (D_c / 2m)² ]`. Zero for an edgeless graph.
pub fn modularity(sub: &Subnetwork, membership: &[usize]) -> f64 {
    let m = sub.undirected_edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = membership.iter().max().map_or(0, |x| x + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for v in 0..sub.node_count() {
        degree[membership[v]] += sub.neighbors(v).len() as f64;
    }
    for (u, v) in sub.undirected_edges() {
        if membership[u] == membership[v] {
            internal[membership[u]] += 1.0;
        }
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(l, d)| l / m - (d / (2.0 * m)).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_community_is_zero() {
        let tri = Subnetwork::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(modularity(&tri, &[0, 0, 0]).abs() < 1e-15);
    }

    #[test]
    fn two_triangles_with_bridge() {
        let sub =
            Subnetwork::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        // Each side: 3 internal edges of 7, degree 7 of 14.
        let expected = 2.0 * (3.0 / 7.0 - 0.25);
        assert!((modularity(&sub, &[0, 0, 0, 1, 1, 1]) - expected).abs() < 1e-15);
    }
}
