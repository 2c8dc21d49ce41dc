use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::SynthConfig;
use crate::error::{Error, Result};

/// Guarantee structure before any dates are attached.
#[derive(Clone, Debug)]
pub(crate) struct Topology {
    /// Distinct (guarantor, borrower) pairs.
    pub relations: Vec<(usize, usize)>,
    /// Firms that take out loans.
    pub borrower: Vec<bool>,
    pub community: Vec<usize>,
}

const ATTACH_WEIGHTS: [(usize, f64); 4] = [(1, 0.45), (2, 0.30), (3, 0.15), (4, 0.10)];

/// Draws component sizes for the configured mix.
pub(crate) fn component_sizes(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let mix = &cfg.component_mix;
    let n = cfg.n_customers;
    let share_mid = 1.0 - mix.share_small - mix.share_large;
    let mean = |(lo, hi): (usize, usize)| (lo + hi) as f64 / 2.0;
    let per_component = mix.share_small * mix.small_mean_size
        + share_mid * mean(mix.mid_size)
        + mix.share_large * mean(mix.large_size);
    let total = n as f64 / per_component;
    let mut large = (mix.share_large * total).round() as usize;
    if mix.share_large > 0.0 {
        large = large.max(1);
    }
    if large * mix.large_size.0 > n {
        return Err(Error::Infeasible(format!(
            "{large} component(s) of more than {} firms need more than n_customers = {n}",
            mix.large_size.0 - 1
        )));
    }
    let mid = (share_mid * total).round() as usize;

    let mut sizes = Vec::new();
    let mut left = n;
    for _ in 0..large {
        let s = rng
            .random_range(mix.large_size.0..=mix.large_size.1)
            .min(left);
        sizes.push(s);
        left -= s;
    }
    for _ in 0..mid {
        if left < mix.mid_size.0 + mix.small_mean_size.ceil() as usize {
            break;
        }
        let s = rng.random_range(mix.mid_size.0..=mix.mid_size.1).min(left);
        sizes.push(s);
        left -= s;
    }
    let geometric = Geometric::new(1.0 / mix.small_mean_size).expect("probability in (0, 1]");
    while left > 0 {
        let s = (1 + geometric.sample(rng) as usize).min(49).min(left);
        sizes.push(s);
        left -= s;
    }
    Ok(sizes)
}

pub(crate) fn build_topology(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Topology> {
    let sizes = component_sizes(cfg, rng)?;
    let mut t = Topology {
        relations: Vec::new(),
        borrower: vec![true; cfg.n_customers],
        community: vec![0; cfg.n_customers],
    };
    let mut next_node = 0;
    let mut next_community = 0;
    for &size in &sizes {
        let nodes: Vec<usize> = (next_node..next_node + size).collect();
        next_node += size;
        if size >= 50 {
            clustered_component(cfg, rng, &nodes, &mut t, &mut next_community);
        } else {
            sparse_component(cfg, rng, &nodes, &mut t);
            for &v in &nodes {
                t.community[v] = next_community;
            }
            next_community += 1;
        }
    }
    t.relations.sort_unstable();
    t.relations.dedup();
    Ok(t)
}

/// Splits a component into clusters that each grow by preferential
/// attachment, then links the clusters with a few bridging guarantees.
fn clustered_component(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    nodes: &[usize],
    t: &mut Topology,
    next_community: &mut usize,
) {
    let k = ((nodes.len() as f64 / cfg.community_size as f64).round() as usize).max(1);
    let mut clusters: Vec<&[usize]> = Vec::with_capacity(k);
    let mut from = 0;
    for c in 0..k {
        let to = nodes.len() * (c + 1) / k;
        clusters.push(&nodes[from..to]);
        from = to;
    }
    // Preferential weight (out-degree + 1) of every node of the component.
    let mut weight = vec![1.0f64; nodes.len()];
    for (c, cluster) in clusters.iter().enumerate() {
        for &v in cluster.iter() {
            t.community[v] = *next_community;
        }
        *next_community += 1;
        let offset = cluster[0] - nodes[0];
        preferential_cluster(
            cfg,
            rng,
            offset,
            cluster.len(),
            c > 0,
            nodes,
            &mut weight,
            t,
        );
    }
    for c in 1..k {
        let other = rng.random_range(0..c);
        let bridges = rng.random_range(1..=2);
        for _ in 0..bridges {
            let (a, b) = if rng.random_bool(0.5) {
                (c, other)
            } else {
                (other, c)
            };
            let g = clusters[a][rng.random_range(0..clusters[a].len())];
            // Every node but the first of a cluster is a borrower.
            let b = clusters[b][rng.random_range(1..clusters[b].len())];
            t.relations.push((g, b));
        }
    }
}

/// Grows one cluster occupying `nodes[offset..offset + len]`. Each new
/// borrower picks its guarantors by preferential attachment, occasionally
/// from the clusters grown before this one.
#[allow(clippy::too_many_arguments)]
fn preferential_cluster(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    offset: usize,
    len: usize,
    has_earlier: bool,
    nodes: &[usize],
    weight: &mut [f64],
    t: &mut Topology,
) {
    t.borrower[nodes[offset]] = !rng.random_bool(cfg.guarantor_only_share);
    for i in 1..len {
        let me = offset + i;
        let m = pick_attachments(rng).min(i);
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        while chosen.len() < m {
            let pool = if has_earlier && rng.random_bool(cfg.cross_cluster_share) {
                0..offset
            } else {
                offset..me
            };
            let total: f64 = pool
                .clone()
                .filter(|j| !chosen.contains(j))
                .map(|j| weight[j])
                .sum();
            if total == 0.0 {
                continue;
            }
            let mut x = rng.random::<f64>() * total;
            let mut pick = None;
            for j in pool.filter(|j| !chosen.contains(j)) {
                pick = Some(j);
                x -= weight[j];
                if x < 0.0 {
                    break;
                }
            }
            chosen.push(pick.expect("at least one candidate"));
        }
        for j in chosen {
            weight[j] += 1.0;
            t.relations.push((nodes[j], nodes[me]));
        }
    }
}

fn pick_attachments(rng: &mut ChaCha8Rng) -> usize {
    let mut x = rng.random::<f64>();
    for (m, p) in ATTACH_WEIGHTS {
        if x < p {
            return m;
        }
        x -= p;
    }
    ATTACH_WEIGHTS[ATTACH_WEIGHTS.len() - 1].0
}

/// A random spanning tree with an occasional extra edge.
fn sparse_component(cfg: &SynthConfig, rng: &mut ChaCha8Rng, nodes: &[usize], t: &mut Topology) {
    let size = nodes.len();
    let mut order: Vec<usize> = nodes.to_vec();
    order.shuffle(rng);
    let mut has_in = vec![false; size];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 1..size {
        let u = rng.random_range(0..j);
        let (g, b) = if rng.random_bool(0.7) { (u, j) } else { (j, u) };
        pairs.push((g, b));
        has_in[b] = true;
    }
    if size >= 3 && rng.random_bool(0.2) {
        let g = rng.random_range(0..size);
        let b = rng.random_range(0..size);
        if g != b && !pairs.contains(&(g, b)) && !pairs.contains(&(b, g)) {
            pairs.push((g, b));
            has_in[b] = true;
        }
    }
    for (g, b) in pairs {
        t.relations.push((order[g], order[b]));
    }
    if size > 1 {
        for (j, &v) in order.iter().enumerate() {
            if !has_in[j] {
                t.borrower[v] = !rng.random_bool(cfg.guarantor_only_share);
            }
        }
    }
}
