use std::collections::VecDeque;

use crate::graph::Subnetwork;

/// Shortest-path betweenness on the undirected view (Brandes), unnormalised,
/// each unordered pair counted once.
pub fn betweenness(sub: &Subnetwork) -> Vec<f64> {
    let n = sub.node_count();
    let mut score = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in sub.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    // Every unordered pair was visited from both ends.
    score.iter_mut().for_each(|x| *x /= 2.0);
    score
}

/// `(n − 1) / Σ d(v, u)` over the `n` nodes of the subnetwork; an isolated
/// node scores 0.
pub fn closeness(sub: &Subnetwork) -> Vec<f64> {
    let n = sub.node_count();
    (0..n)
        .map(|v| {
            let total: usize = sub
                .bfs_distances(v)
                .into_iter()
                .filter(|&d| d != usize::MAX)
                .sum();
            if total == 0 {
                0.0
            } else {
                (n - 1) as f64 / total as f64
            }
        })
        .collect()
}
