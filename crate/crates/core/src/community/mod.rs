//! Community detection on guarantee subnetworks and per-community default rates.
//!
//! Girvan–Newman (edge betweenness) is the default method; asynchronous label
//! propagation is the cheaper alternative. Both work on the undirected view and
//! depend on topology only.

mod girvan_newman;
mod label_propagation;
mod modularity;
mod risk;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{GuaranteeNetwork, Subnetwork};

pub use girvan_newman::girvan_newman;
pub use label_propagation::label_propagation;
pub use modularity::modularity;
pub use risk::{community_default_rate, CommunityRisk, CommunityRiskTable, DefaultSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    EdgeBetweenness,
    LabelPropagation,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge_betweenness" | "girvan_newman" => Ok(Method::EdgeBetweenness),
            "label_propagation" => Ok(Method::LabelPropagation),
            other => Err(crate::Error::Config(format!(
                "unknown community method `{other}` (edge_betweenness, label_propagation)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::EdgeBetweenness => "edge_betweenness",
            Method::LabelPropagation => "label_propagation",
        })
    }
}

/// Community membership of every node of one subnetwork.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    /// Dense community ids, numbered by smallest member.
    pub membership: Vec<usize>,
    pub modularity: f64,
    pub method: Method,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.membership.iter().max().map_or(0, |m| m + 1)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count()];
        for &c in &self.membership {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Renumbers labels densely in order of first appearance.
pub(crate) fn densify(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Partitions one subnetwork. `max_communities` caps how far the
/// Girvan–Newman dendrogram is explored; label propagation ignores it.
pub fn detect_communities(sub: &Subnetwork, method: Method, max_communities: usize) -> Partition {
    match method {
        Method::EdgeBetweenness => girvan_newman(sub, max_communities),
        Method::LabelPropagation => label_propagation(sub),
    }
}

/// Communities of a whole network, with network-wide ids.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkPartition {
    /// Global community id per global node index.
    pub community_of: Vec<usize>,
    pub community_size: Vec<usize>,
    /// Per component, in the order of the components slice.
    pub partitions: Vec<Partition>,
}

pub fn partition_network(
    net: &GuaranteeNetwork,
    comps: &[Subnetwork],
    method: Method,
    max_communities: usize,
) -> NetworkPartition {
    let partitions: Vec<Partition> = comps
        .par_iter()
        .map(|c| detect_communities(c, method, max_communities))
        .collect();
    let mut community_of = vec![0; net.node_count()];
    let mut community_size = Vec::new();
    for (comp, part) in comps.iter().zip(&partitions) {
        let offset = community_size.len();
        community_size.extend(part.sizes());
        for (local, &global) in comp.nodes.iter().enumerate() {
            community_of[global] = offset + part.membership[local];
        }
    }
    NetworkPartition {
        community_of,
        community_size,
        partitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn densify_by_first_appearance() {
        assert_eq!(densify(&[7, 7, 3, 9, 3]), [0, 0, 1, 2, 1]);
    }

    #[test]
    fn methods_parse() {
        assert_eq!(
            "edge_betweenness".parse::<Method>().unwrap(),
            Method::EdgeBetweenness
        );
        assert!("spinglass".parse::<Method>().is_err());
    }
}
