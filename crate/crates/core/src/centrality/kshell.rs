use crate::graph::Subnetwork;

/// Core number of every node on the undirected view, by repeatedly removing
/// a node of minimum remaining degree (bucket queue, linear time).
pub fn kshell(sub: &Subnetwork) -> Vec<u32> {
    let n = sub.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| sub.neighbors(v).len()).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);

    // Nodes sorted by degree, with bucket start offsets.
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &degree {
        bin[d] += 1;
    }
    let mut start = 0;
    for slot in bin.iter_mut() {
        let count = *slot;
        *slot = start;
        start += count;
    }
    let mut order = vec![0usize; n];
    let mut pos = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[degree[v]];
        order[pos[v]] = v;
        bin[degree[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    if !bin.is_empty() {
        bin[0] = 0;
    }

    for i in 0..n {
        let v = order[i];
        for &u in sub.neighbors(v) {
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    degree.into_iter().map(|d| d as u32).collect()
}
