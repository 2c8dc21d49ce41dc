use std::collections::VecDeque;

use super::{densify, modularity, Method, Partition};
use crate::graph::Subnetwork;

/// Relative slack under which two edge betweenness values count as tied.
const TIE_TOL: f64 = 1e-9;

/// Girvan–Newman divisive clustering.
///
/// Repeatedly deletes the edge(s) of maximum betweenness, recomputing
/// betweenness inside the pieces that changed, and returns the partition along
/// the dendrogram with the highest modularity on the original graph. Tied
/// maximum edges (within a relative 1e-9) are removed together, which keeps
/// the result independent of node labelling. The search stops once
/// `max_communities` pieces exist.
pub fn girvan_newman(sub: &Subnetwork, max_communities: usize) -> Partition {
    let n = sub.node_count();
    let edges = sub.undirected_edges();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut alive = vec![true; edges.len()];
    let mut labels = component_labels(&adj);
    let mut best = densify(&labels);
    let mut best_q = modularity(sub, &best);
    let mut pieces = best.iter().max().map_or(0, |m| m + 1);

    let mut eb = vec![0.0f64; edges.len()];
    let all: Vec<usize> = (0..n).collect();
    accumulate_edge_betweenness(&adj, &all, &mut eb);
    let mut remaining = edges.len();

    while remaining > 0 && pieces < max_communities {
        let top = (0..edges.len())
            .filter(|&e| alive[e])
            .map(|e| eb[e])
            .fold(f64::MIN, f64::max);
        let cutoff = top - TIE_TOL * top.abs().max(1.0);
        let doomed: Vec<usize> = (0..edges.len())
            .filter(|&e| alive[e] && eb[e] >= cutoff)
            .collect();
        for &e in &doomed {
            let (u, v) = edges[e];
            alive[e] = false;
            adj[u].retain(|&(x, _)| x != v);
            adj[v].retain(|&(x, _)| x != u);
        }
        remaining -= doomed.len();

        let mut touched: Vec<usize> = doomed.iter().map(|&e| labels[edges[e].0]).collect();
        touched.sort_unstable();
        touched.dedup();
        let stale: Vec<usize> = (0..n)
            .filter(|v| touched.binary_search(&labels[*v]).is_ok())
            .collect();
        for &v in &stale {
            for &(_, e) in &adj[v] {
                eb[e] = 0.0;
            }
        }
        accumulate_edge_betweenness(&adj, &stale, &mut eb);

        labels = component_labels(&adj);
        let count = labels.iter().max().map_or(0, |m| m + 1);
        if count != pieces {
            pieces = count;
            let membership = densify(&labels);
            let q = modularity(sub, &membership);
            if q > best_q + 1e-12 {
                best_q = q;
                best = membership;
            }
        }
    }

    Partition {
        membership: best,
        modularity: best_q,
        method: Method::EdgeBetweenness,
    }
}

/// Component label per node, numbered by smallest member.
fn component_labels(adj: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let n = adj.len();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// Adds the edge betweenness contributed by shortest paths from every node in
/// `sources` to `eb` (indexed by edge id). Callers pass whole components, so
/// all edges of those components end up with complete values (each pair
/// counted from both ends).
fn accumulate_edge_betweenness(adj: &[Vec<(usize, usize)>], sources: &[usize], eb: &mut [f64]) {
    let n = adj.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut stack = Vec::new();
    let mut queue = VecDeque::new();

    for &s in sources {
        for &v in &stack {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
        }
        stack.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &(w, _) in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        for &w in stack.iter().rev() {
            for &(v, e) in &adj[w] {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                    eb[e] += c;
                    delta[v] += c;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique(n: usize) -> Vec<(usize, usize)> {
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect()
    }

    #[test]
    fn clique_stays_whole() {
        let p = girvan_newman(&Subnetwork::from_edges(4, &clique(4)), usize::MAX);
        assert_eq!(p.membership, [0, 0, 0, 0]);
        assert_eq!(p.community_count(), 1);
    }

    #[test]
    fn bridge_between_triangles_is_cut() {
        let sub =
            Subnetwork::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let p = girvan_newman(&sub, usize::MAX);
        assert_eq!(p.membership, [0, 0, 0, 1, 1, 1]);
        assert!((p.modularity - 2.0 * (3.0 / 7.0 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn edgeless_nodes_are_singletons() {
        let p = girvan_newman(&Subnetwork::from_edges(3, &[]), usize::MAX);
        assert_eq!(p.membership, [0, 1, 2]);
        assert_eq!(p.modularity, 0.0);
    }

    #[test]
    fn pendant_edges_go_first() {
        // Triangle 0-1-2 with leaves 3 and 4 on node 0. The leaf edges carry
        // the most betweenness, so the {0,3,4} | {1,2} split (Q = 0.08) is
        // never on the dendrogram.
        let sub = Subnetwork::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)]);
        let p = girvan_newman(&sub, usize::MAX);
        assert_eq!(p.modularity, 0.0);
        assert!((modularity(&sub, &[0, 1, 1, 0, 0]) - 0.08).abs() < 1e-12);
    }

    #[test]
    fn symmetric_ties_split_together() {
        // Path 0-1-2-3-4: the two middle edges tie and both go at once.
        let path: Vec<_> = (0..4).map(|i| (i, i + 1)).collect();
        let p = girvan_newman(&Subnetwork::from_edges(5, &path), usize::MAX);
        assert_eq!(p.membership, [0, 0, 1, 2, 2]);
        assert!((p.modularity - 0.15625).abs() < 1e-12);
    }

    #[test]
    fn community_cap_limits_search() {
        // Path of 6: the best split has 2 pieces, so capping at 1 keeps it whole.
        let path: Vec<_> = (0..5).map(|i| (i, i + 1)).collect();
        let sub = Subnetwork::from_edges(6, &path);
        assert_eq!(girvan_newman(&sub, 1).community_count(), 1);
        assert!(girvan_newman(&sub, usize::MAX).community_count() >= 2);
    }

    #[test]
    fn incremental_betweenness_matches_full_recompute() {
        let sub = Subnetwork::from_edges(
            7,
            &[
                (0, 1),
                (1, 2),
                (2, 0),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 4),
            ],
        );
        let edges = sub.undirected_edges();
        let cut = edges.iter().position(|&e| e == (2, 3)).unwrap();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 7];
        for (e, &(u, v)) in edges.iter().enumerate().filter(|&(e, _)| e != cut) {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        let labels = component_labels(&adj);
        let mut piecewise = vec![0.0; edges.len()];
        for c in 0..2 {
            let nodes: Vec<usize> = (0..7).filter(|&v| labels[v] == c).collect();
            accumulate_edge_betweenness(&adj, &nodes, &mut piecewise);
        }
        let mut full = vec![0.0; edges.len()];
        accumulate_edge_betweenness(&adj, &(0..7).collect::<Vec<_>>(), &mut full);
        assert_eq!(piecewise, full);
        assert_eq!(full[cut], 0.0);
    }
}
