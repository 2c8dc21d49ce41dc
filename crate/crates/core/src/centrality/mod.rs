//! Per-node structural scores on one weakly connected subnetwork.
//!
//! HITS and PageRank follow edge direction (guarantor → borrower), so a high
//! authority means "backed by many" and a high hub means "backs many". The
//! remaining measures use the undirected view. Every function takes a single
//! [`Subnetwork`]; callers iterate components.

mod eigenvector;
mod hits;
mod kshell;
mod pagerank;
mod paths;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{GuaranteeNetwork, Subnetwork};

pub use eigenvector::eigenvector_centrality;
pub use hits::{hits, Hits};
pub use kshell::kshell;
pub use pagerank::pagerank;
pub use paths::{betweenness, closeness};

/// Output of a power iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterated {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const PAGERANK_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_DAMPING: f64 = 0.85;

pub(crate) fn l2_normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// All measures for one node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NodeScores {
    pub authority: f64,
    pub hub: f64,
    pub pagerank: f64,
    pub kshell: u32,
    pub eigenvector: f64,
    pub betweenness: f64,
    pub closeness: f64,
    pub in_degree: u32,
    pub out_degree: u32,
}

/// Scores for every node of one subnetwork, indexed by local node index.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralityScores {
    pub nodes: Vec<NodeScores>,
    /// A power iteration stopped at `max_iter` without converging.
    pub not_converged: bool,
    /// The subnetwork has no edges; HITS and eigenvector scores are zero.
    pub edgeless: bool,
}

/// Runs every measure with default parameters.
pub fn score_component(sub: &Subnetwork) -> CentralityScores {
    let n = sub.node_count();
    let h = hits(sub, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let pr = pagerank(sub, DEFAULT_DAMPING, PAGERANK_TOL, DEFAULT_MAX_ITER);
    let ev = eigenvector_centrality(sub, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let core = kshell(sub);
    let btw = betweenness(sub);
    let clo = closeness(sub);
    let nodes = (0..n)
        .map(|v| NodeScores {
            authority: h.authority[v],
            hub: h.hub[v],
            pagerank: pr.scores[v],
            kshell: core[v],
            eigenvector: ev.scores[v],
            betweenness: btw[v],
            closeness: clo[v],
            in_degree: sub.in_neighbors(v).len() as u32,
            out_degree: sub.out_neighbors(v).len() as u32,
        })
        .collect();
    CentralityScores {
        nodes,
        not_converged: !(h.converged && pr.converged && ev.converged),
        edgeless: sub.edge_count() == 0,
    }
}

/// Scores for a whole network, indexed by global node index.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkScores {
    pub nodes: Vec<NodeScores>,
    /// Position of each node's component in the `components` slice it was built from.
    pub component_of: Vec<usize>,
    pub component_size: Vec<usize>,
    pub component_diameter: Vec<usize>,
    pub not_converged: usize,
}

/// Scores every component in parallel and scatters results to global indices.
pub fn score_network(net: &GuaranteeNetwork, comps: &[Subnetwork]) -> NetworkScores {
    let per_comp: Vec<(CentralityScores, usize)> = comps
        .par_iter()
        .map(|c| (score_component(c), c.diameter()))
        .collect();
    let n = net.node_count();
    let mut out = NetworkScores {
        nodes: vec![NodeScores::default(); n],
        component_of: vec![0; n],
        component_size: Vec::with_capacity(comps.len()),
        component_diameter: Vec::with_capacity(comps.len()),
        not_converged: 0,
    };
    for (ci, (comp, (scores, diameter))) in comps.iter().zip(per_comp).enumerate() {
        for (local, &global) in comp.nodes.iter().enumerate() {
            out.nodes[global] = scores.nodes[local];
            out.component_of[global] = ci;
        }
        out.component_size.push(comp.node_count());
        out.component_diameter.push(diameter);
        out.not_converged += usize::from(scores.not_converged);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_scores() {
        let star = Subnetwork::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let s = score_component(&star);
        assert!(!s.not_converged);
        assert_eq!(s.nodes[0].out_degree, 3);
        assert_eq!(s.nodes[1].in_degree, 1);
        assert_eq!(s.nodes[0].betweenness, 3.0);
        assert_eq!(s.nodes[2].kshell, 1);
        assert!((s.nodes.iter().map(|n| n.pagerank).sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn isolated_node() {
        let s = score_component(&Subnetwork::from_edges(1, &[]));
        assert!(s.edgeless);
        let n = s.nodes[0];
        assert_eq!(
            (n.authority, n.hub, n.eigenvector, n.closeness),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(n.pagerank, 1.0);
    }
}
