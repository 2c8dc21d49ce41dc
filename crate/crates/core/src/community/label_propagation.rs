use super::{densify, modularity, Method, Partition};
use crate::graph::Subnetwork;

const MAX_SWEEPS: usize = 100;

/// Asynchronous label propagation with a fixed node order (ascending index).
///
/// Each node takes the label most common among its neighbours; it keeps its
/// own label when that is among the most common, otherwise the lowest tied
/// label wins. Sweeps stop when nothing changes (or after 100 sweeps).
pub fn label_propagation(sub: &Subnetwork) -> Partition {
    let n = sub.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for v in 0..n {
            let neigh = sub.neighbors(v);
            if neigh.is_empty() {
                continue;
            }
            for &w in neigh {
                counts[labels[w]] += 1;
            }
            let top = neigh.iter().map(|&w| counts[labels[w]]).max().unwrap_or(0);
            let choice = if counts[labels[v]] == top {
                labels[v]
            } else {
                neigh
                    .iter()
                    .map(|&w| labels[w])
                    .filter(|&l| counts[l] == top)
                    .min()
                    .expect("non-empty neighbourhood")
            };
            for &w in neigh {
                counts[labels[w]] = 0;
            }
            if choice != labels[v] {
                labels[v] = choice;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let membership = densify(&labels);
    Partition {
        modularity: modularity(sub, &membership),
        membership,
        method: Method::LabelPropagation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clique_collapses_to_one_label() {
        let k4: Vec<_> = (0..4)
            .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
            .collect();
        let p = label_propagation(&Subnetwork::from_edges(4, &k4));
        assert_eq!(p.community_count(), 1);
    }

    #[test]
    fn two_cliques_joined_by_a_bridge() {
        let mut edges: Vec<_> = (0..4)
            .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
            .collect();
        edges.extend((4..8).flat_map(|a| (a + 1..8).map(move |b| (a, b))));
        edges.push((3, 7));
        let p = label_propagation(&Subnetwork::from_edges(8, &edges));
        assert_eq!(p.membership, [0, 0, 0, 0, 1, 1, 1, 1]);
        assert!(p.modularity > 0.3);
    }

    #[test]
    fn isolated_nodes_keep_their_labels() {
        let p = label_propagation(&Subnetwork::from_edges(3, &[]));
        assert_eq!(p.membership, [0, 1, 2]);
    }
}
