//! Slow, direct reference implementations.
//!
//! Each function computes a quantity from its definition rather than with the
//! fast algorithm used by the pipeline. They back the property tests and the
//! `selftest` command and are only meant for small inputs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::gbdt::GAIN_TOLERANCE;
use crate::graph::Subnetwork;

fn adjacency(sub: &Subnetwork) -> DMatrix<f64> {
    let n = sub.node_count();
    let mut a = DMatrix::zeros(n, n);
    for (u, v) in sub.directed_edges() {
        a[(u, v)] = 1.0;
    }
    a
}

fn undirected_adjacency(sub: &Subnetwork) -> DMatrix<f64> {
    let n = sub.node_count();
    let mut a = DMatrix::zeros(n, n);
    for (u, v) in sub.undirected_edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

/// Orthogonal projector onto the eigenspace of the largest eigenvalue.
fn dominant_projector(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let slack = 1e-8 * top.abs().max(1.0);
    let mut p = DMatrix::zeros(n, n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda >= top - slack {
            let v = eig.eigenvectors.column(i);
            p += v * v.transpose();
        }
    }
    p
}

fn normalized(v: DVector<f64>) -> Vec<f64> {
    let norm = v.norm();
    if norm == 0.0 {
        return v.iter().copied().collect();
    }
    (v / norm).iter().copied().collect()
}

/// Limit of HITS power iteration from the uniform hub vector: the projection
/// of `Aᵀ·u` onto the dominant eigenspace of `AᵀA`, and its image under `A`.
/// Returns `(authority, hub)`; zeros for an edgeless graph.
pub fn hits_dense(sub: &Subnetwork) -> (Vec<f64>, Vec<f64>) {
    let n = sub.node_count();
    if sub.edge_count() == 0 {
        return (vec![0.0; n], vec![0.0; n]);
    }
    let a = adjacency(sub);
    let u = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let p = dominant_projector(a.transpose() * &a);
    let auth = DVector::from_vec(normalized(p * (a.transpose() * u)));
    let hub = normalized(&a * &auth);
    (auth.iter().copied().collect(), hub)
}

/// Perron vector of the undirected adjacency matrix, unit L2 norm.
/// Zeros for an edgeless graph. Assumes the graph is connected.
pub fn eigenvector_dense(sub: &Subnetwork) -> Vec<f64> {
    let n = sub.node_count();
    if sub.undirected_edge_count() == 0 {
        return vec![0.0; n];
    }
    let eig = SymmetricEigen::new(undirected_adjacency(sub));
    let (i, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(
            (0, f64::MIN),
            |best, (i, &l)| if l > best.1 { (i, l) } else { best },
        );
    let v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
    let sign = if v.sum() < 0.0 { -1.0 } else { 1.0 };
    normalized(v * sign)
}

/// PageRank as the solution of the linear system
/// `(I − d·Pᵀ − (d/n)·1·δᵀ) p = ((1 − d)/n)·1`, where `δ` marks dangling nodes.
pub fn pagerank_dense(sub: &Subnetwork, damping: f64) -> Vec<f64> {
    let n = sub.node_count();
    let nf = n as f64;
    let mut m = DMatrix::<f64>::identity(n, n);
    for u in 0..n {
        let out = sub.out_neighbors(u);
        if out.is_empty() {
            for v in 0..n {
                m[(v, u)] -= damping / nf;
            }
        } else {
            for &v in out {
                m[(v, u)] -= damping / out.len() as f64;
            }
        }
    }
    let rhs = DVector::from_element(n, (1.0 - damping) / nf);
    let p = m
        .lu()
        .solve(&rhs)
        .expect("PageRank system is non-singular for damping < 1");
    p.iter().copied().collect()
}

/// All-pairs hop distances on the undirected view; `None` when unreachable.
pub fn floyd_warshall(sub: &Subnetwork) -> Vec<Vec<Option<usize>>> {
    let n = sub.node_count();
    let mut d = vec![vec![None; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = Some(0);
    }
    for (u, v) in sub.undirected_edges() {
        d[u][v] = Some(1);
        d[v][u] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Every shortest path from `s` to `t`, listed explicitly.
fn shortest_paths(
    sub: &Subnetwork,
    dist: &[Vec<Option<usize>>],
    s: usize,
    t: usize,
) -> Vec<Vec<usize>> {
    fn extend(
        sub: &Subnetwork,
        dist: &[Vec<Option<usize>>],
        path: &mut Vec<usize>,
        t: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().expect("non-empty path");
        if v == t {
            out.push(path.clone());
            return;
        }
        for &w in sub.neighbors(v) {
            if dist[w][t].is_some_and(|d| Some(d + 1) == dist[v][t]) {
                path.push(w);
                extend(sub, dist, path, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if dist[s][t].is_some() {
        extend(sub, dist, &mut vec![s], t, &mut out);
    }
    out
}

/// Betweenness by enumerating every shortest path between every unordered
/// pair and crediting each interior node with its share of the paths.
pub fn betweenness_by_paths(sub: &Subnetwork) -> Vec<f64> {
    let n = sub.node_count();
    let dist = floyd_warshall(sub);
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = shortest_paths(sub, &dist, s, t);
            if paths.is_empty() {
                continue;
            }
            let mut through = vec![0usize; n];
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    through[v] += 1;
                }
            }
            for v in 0..n {
                score[v] += through[v] as f64 / paths.len() as f64;
            }
        }
    }
    score
}

/// `(n − 1) / Σ d(v, ·)` from Floyd–Warshall distances; 0 for a lone node.
pub fn closeness_by_distances(sub: &Subnetwork) -> Vec<f64> {
    let n = sub.node_count();
    floyd_warshall(sub)
        .iter()
        .map(|row| {
            let total: usize = row.iter().flatten().sum();
            if total == 0 {
                0.0
            } else {
                (n - 1) as f64 / total as f64
            }
        })
        .collect()
}

/// Core numbers from the definition: for each `k`, repeatedly delete nodes of
/// degree below `k`; a node's core number is the largest `k` it survives.
pub fn core_numbers_by_definition(sub: &Subnetwork) -> Vec<u32> {
    let n = sub.node_count();
    let max_degree = (0..n).map(|v| sub.neighbors(v).len()).max().unwrap_or(0);
    let mut core = vec![0u32; n];
    for k in 1..=max_degree {
        let mut alive = vec![true; n];
        loop {
            let doomed: Vec<usize> = (0..n)
                .filter(|&v| alive[v] && sub.neighbors(v).iter().filter(|&&w| alive[w]).count() < k)
                .collect();
            if doomed.is_empty() {
                break;
            }
            for v in doomed {
                alive[v] = false;
            }
        }
        for v in 0..n {
            if alive[v] {
                core[v] = k as u32;
            }
        }
    }
    core
}

/// Modularity from the matrix form `(1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j)`.
pub fn modularity_by_matrix(sub: &Subnetwork, membership: &[usize]) -> f64 {
    let a = undirected_adjacency(sub);
    let two_m = a.sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let n = sub.node_count();
    let k: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] == membership[j] {
                q += a[(i, j)] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Highest modularity over every set partition of the nodes (restricted
/// growth strings). Exponential; keep `n` at 10 or below.
pub fn best_modularity(sub: &Subnetwork) -> f64 {
    fn walk(sub: &Subnetwork, labels: &mut Vec<usize>, next: usize, best: &mut f64) {
        if labels.len() == sub.node_count() {
            *best = best.max(modularity_by_matrix(sub, labels));
            return;
        }
        for l in 0..=next {
            labels.push(l);
            walk(sub, labels, next.max(l + 1), best);
            labels.pop();
        }
    }
    let mut best = f64::MIN;
    walk(sub, &mut Vec::new(), 0, &mut best);
    best
}

/// A split found by exhaustive search: rows go left iff `x[feature] < threshold`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteSplit {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Tries every feature and every midpoint between distinct observed values,
/// summing gradient statistics over the rows directly for each candidate.
/// A candidate must beat the incumbent (initially zero) by more than
/// [`GAIN_TOLERANCE`]; ties go to the lowest feature, then the lowest threshold.
pub fn exhaustive_split(
    rows: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    lambda: f64,
    gamma: f64,
    min_child_hessian: f64,
) -> Option<BruteSplit> {
    let d = rows.first().map_or(0, Vec::len);
    let score = |gs: f64, hs: f64| gs * gs / (hs + lambda);
    let (g_all, h_all): (f64, f64) = (g.iter().sum(), h.iter().sum());
    let mut best: Option<BruteSplit> = None;
    for f in 0..d {
        let mut values: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let mut thr = pair[0] + (pair[1] - pair[0]) / 2.0;
            if thr <= pair[0] {
                thr = pair[1];
            }
            let (mut gl, mut hl) = (0.0, 0.0);
            for (i, r) in rows.iter().enumerate() {
                if r[f] < thr {
                    gl += g[i];
                    hl += h[i];
                }
            }
            let (gr, hr) = (g_all - gl, h_all - hl);
            if hl < min_child_hessian || hr < min_child_hessian {
                continue;
            }
            let gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(g_all, h_all)) - gamma;
            let floor = best.map_or(0.0, |b| b.gain);
            if gain > floor + GAIN_TOLERANCE * floor.abs().max(1.0) {
                best = Some(BruteSplit {
                    feature: f,
                    threshold: thr,
                    gain,
                });
            }
        }
    }
    best
}

/// Golden-section search for the minimiser of a unimodal function on `[lo, hi]`.
/// The function may return any ordered value, such as a double-double pair.
pub fn golden_section_min<T: PartialOrd>(
    f: impl Fn(f64) -> T,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while (hi - lo).abs() > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `G·w + ½·c·w²` evaluated in double-double arithmetic and returned as a
/// normalised `(high, low)` pair, which orders correctly as a tuple.
pub fn leaf_objective_exact(g_sum: f64, c: f64, w: f64) -> (f64, f64) {
    let (a_hi, a_lo) = two_prod(g_sum, w);
    let (sq_hi, sq_lo) = two_prod(w, w);
    let half = 0.5 * c;
    let (b_hi, b_lo) = two_prod(half, sq_hi);
    let b_lo = b_lo + half * sq_lo;
    let (s, e) = two_sum(a_hi, b_hi);
    let e = e + a_lo + b_lo;
    two_sum(s, e)
}

/// Central finite difference of `f` at `x`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}

/// Every weakly connected directed graph on `n` labelled nodes without
/// self-loops (reciprocal pairs allowed). `2^(n(n−1))` candidates, so `n ≤ 4`.
pub fn connected_digraphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let arcs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    (0u64..1 << arcs.len())
        .map(|mask| {
            arcs.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect::<Vec<_>>()
        })
        .filter(|edges| is_connected(n, edges))
        .collect()
}

/// Every connected simple undirected graph on `n` labelled nodes, each edge
/// listed once as `(low, high)`.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect::<Vec<_>>()
        })
        .filter(|edges| is_connected(n, edges))
        .collect()
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut pieces = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            pieces -= 1;
        }
    }
    pieces == 1
}
