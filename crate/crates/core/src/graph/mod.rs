//! Time-scoped guarantee networks and their weakly connected subnetworks.
//!
//! An edge points from guarantor to borrower. Parallel guarantees between the
//! same pair collapse into one edge carrying the earliest signing date.

mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use chrono::NaiveDate;
use serde::Serialize;

use crate::loan_data::JoinedRecord;

pub use stats::{
    distinct_relations, overall_stats, ComponentSizeBucket, DefaultOffsetBucket, LoanPeriodBucket,
    MonthlyDefaults, StatsReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub guarantor: usize,
    pub borrower: usize,
    pub signed: NaiveDate,
}

/// A directed guarantee network snapshot. Node indices follow ascending
/// customer id.
#[derive(Clone, Debug, PartialEq)]
pub struct GuaranteeNetwork {
    pub as_of: NaiveDate,
    pub nodes: Vec<String>,
    /// Sorted by (guarantor, borrower).
    pub edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

impl GuaranteeNetwork {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, customer_id: &str) -> Option<usize> {
        self.index.get(customer_id).copied()
    }

    fn from_parts(
        as_of: NaiveDate,
        nodes: BTreeSet<&str>,
        edges: BTreeMap<(&str, &str), NaiveDate>,
    ) -> Self {
        let nodes: Vec<String> = nodes.into_iter().map(str::to_string).collect();
        let index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let edges = edges
            .into_iter()
            .map(|((g, b), signed)| Edge {
                guarantor: index[g],
                borrower: index[b],
                signed,
            })
            .collect();
        GuaranteeNetwork {
            as_of,
            nodes,
            edges,
            index,
        }
    }
}

/// Snapshot of guarantees in force on `as_of`.
///
/// A guarantee contributes an edge while its contract runs
/// (`start_date <= as_of < maturity`) and once it has been signed. Borrowers
/// with a running contract are nodes even without any guarantee.
pub fn build_network(records: &[JoinedRecord<'_>], as_of: NaiveDate) -> GuaranteeNetwork {
    collect_network(records, as_of, |r| r.contract.is_active_on(as_of))
}

/// Every guarantee signed for a contract started on or before `as_of`,
/// ignoring maturity. This is the view the portfolio statistics use.
pub fn build_cumulative_network(
    records: &[JoinedRecord<'_>],
    as_of: NaiveDate,
) -> GuaranteeNetwork {
    collect_network(records, as_of, |r| r.contract.start_date <= as_of)
}

fn collect_network(
    records: &[JoinedRecord<'_>],
    as_of: NaiveDate,
    keep: impl Fn(&JoinedRecord<'_>) -> bool,
) -> GuaranteeNetwork {
    let mut nodes = BTreeSet::new();
    let mut edges: BTreeMap<(&str, &str), NaiveDate> = BTreeMap::new();
    for rec in records.iter().filter(|r| keep(r)) {
        let borrower = rec.contract.borrower_id.as_str();
        nodes.insert(borrower);
        for g in rec.guarantees.iter().filter(|g| g.signed_date <= as_of) {
            let guarantor = g.guarantor_id.as_str();
            if guarantor == borrower {
                continue;
            }
            nodes.insert(guarantor);
            edges
                .entry((guarantor, borrower))
                .and_modify(|d| *d = (*d).min(g.signed_date))
                .or_insert(g.signed_date);
        }
    }
    GuaranteeNetwork::from_parts(as_of, nodes, edges)
}

/// One weakly connected component, with local (0-based) node indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Subnetwork {
    /// 1-based rank: largest component first, ties by smallest customer id.
    pub index: usize,
    /// Global node indices in the parent network, ascending.
    pub nodes: Vec<usize>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    undirected: Vec<Vec<usize>>,
    n_edges: usize,
}

impl Subnetwork {
    /// A standalone directed graph on nodes `0..n`. Duplicate edges collapse;
    /// self-loops are dropped. The graph does not have to be connected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let nodes: Vec<usize> = (0..n).collect();
        Self::with_local_edges(1, nodes, edges.iter().copied())
    }

    fn with_local_edges(
        index: usize,
        nodes: Vec<usize>,
        edges: impl Iterator<Item = (usize, usize)>,
    ) -> Self {
        let n = nodes.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut undirected = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) outside 0..{n}");
            if u == v {
                continue;
            }
            out_adj[u].push(v);
            in_adj[v].push(u);
            undirected[u].push(v);
            undirected[v].push(u);
        }
        for list in out_adj.iter_mut().chain(&mut in_adj).chain(&mut undirected) {
            list.sort_unstable();
            list.dedup();
        }
        let n_edges = out_adj.iter().map(Vec::len).sum();
        Subnetwork {
            index,
            nodes,
            out_adj,
            in_adj,
            undirected,
            n_edges,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Directed edge count.
    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    /// Neighbours in the undirected view, ascending.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.undirected[v]
    }

    /// Directed edges in (source, target) order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// Undirected edges as (low, high) pairs, ascending.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, vs) in self.undirected.iter().enumerate() {
            out.extend(vs.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.undirected.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distances from `source` in the undirected view; `usize::MAX` when unreachable.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &self.undirected[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Longest shortest path in the undirected view, ignoring unreachable
    /// pairs. A single node has diameter 0.
    pub fn diameter(&self) -> usize {
        (0..self.node_count())
            .map(|s| {
                self.bfs_distances(s)
                    .into_iter()
                    .filter(|&d| d != usize::MAX)
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }
}

/// Weakly connected components, largest first.
pub fn components(net: &GuaranteeNetwork) -> Vec<Subnetwork> {
    let n = net.node_count();
    let mut adj = vec![Vec::new(); n];
    for e in &net.edges {
        adj[e.guarantor].push(e.borrower);
        adj[e.borrower].push(e.guarantor);
    }
    let mut label = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < members.len() {
            let v = members[head];
            head += 1;
            for &w in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = id;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }

    // Node indices follow customer-id order, so members[0] is the smallest id.
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut local = vec![0usize; n];
    let mut edges_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); groups.len()];
    for (gi, members) in groups.iter().enumerate() {
        for (li, &v) in members.iter().enumerate() {
            local[v] = li;
            label[v] = gi;
        }
    }
    for e in &net.edges {
        edges_of[label[e.guarantor]].push((local[e.guarantor], local[e.borrower]));
    }
    groups
        .into_iter()
        .zip(edges_of)
        .enumerate()
        .map(|(gi, (members, edges))| {
            Subnetwork::with_local_edges(gi + 1, members, edges.into_iter())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityMetrics {
    pub month: NaiveDate,
    pub avg_diameter: f64,
    pub n_components: usize,
    pub n_nodes: usize,
    pub n_edges: usize,
}

/// Mean component diameter of `net`; single-node components count as 0.
pub fn diameter_stats(net: &GuaranteeNetwork, month: NaiveDate) -> ComplexityMetrics {
    let comps = components(net);
    let avg_diameter = if comps.is_empty() {
        0.0
    } else {
        comps.iter().map(|c| c.diameter() as f64).sum::<f64>() / comps.len() as f64
    };
    ComplexityMetrics {
        month,
        avg_diameter,
        n_components: comps.len(),
        n_nodes: net.node_count(),
        n_edges: net.edge_count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loan_data::fixtures::*;
    use crate::loan_data::{join_records, LoanDataset};

    fn net_from_pairs(pairs: &[(&str, &str)]) -> GuaranteeNetwork {
        let mut ds = LoanDataset::default();
        let mut ids: BTreeSet<&str> = BTreeSet::new();
        for (g, b) in pairs {
            ids.insert(g);
            ids.insert(b);
        }
        ds.customers = ids.iter().map(|id| customer(id)).collect();
        for (i, (g, b)) in pairs.iter().enumerate() {
            let k = format!("K{i}");
            ds.contracts.push(contract(&k, b, "2013-01-01", 12));
            ds.guarantees.push(guarantee(&k, g, "2013-01-01"));
        }
        build_network(&join_records(&ds), date("2013-06-30"))
    }

    #[test]
    fn three_firm_snapshot() {
        let ds = three_firms();
        let net = build_network(&join_records(&ds), date("2013-03-01"));
        assert_eq!(net.nodes, ["A", "B", "C"]);
        let pairs: Vec<_> = net
            .edges
            .iter()
            .map(|e| (e.guarantor, e.borrower))
            .collect();
        assert_eq!(pairs, [(0, 1), (0, 2)]);
    }

    #[test]
    fn snapshot_before_signing_has_isolated_borrowers() {
        // Build directly from records; signing after the contract start is a
        // validation error but the builder must still honour the signing date.
        let mut ds = three_firms();
        for g in &mut ds.guarantees {
            g.signed_date = date("2013-03-01");
        }
        let net = build_network(&join_records(&ds), date("2013-02-20"));
        assert_eq!(net.nodes, ["B", "C"]);
        assert_eq!(net.edge_count(), 0);

        let net = build_network(&join_records(&ds), date("2012-12-31"));
        assert_eq!(net.node_count(), 0);
    }

    #[test]
    fn borrowers_without_edges_are_nodes() {
        let mut ds = three_firms();
        ds.guarantees.clear();
        let net = build_network(&join_records(&ds), date("2013-03-01"));
        assert_eq!(net.nodes, ["B", "C"]);
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn parallel_guarantees_collapse_to_earliest() {
        let mut ds = three_firms();
        ds.contracts.push(contract("KB2", "B", "2013-02-01", 12));
        ds.guarantees.push(guarantee("KB2", "A", "2013-01-20"));
        let net = build_network(&join_records(&ds), date("2013-03-01"));
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.edges[0].signed, date("2013-01-10"));
    }

    #[test]
    fn matured_contracts_drop_out() {
        let ds = three_firms();
        let recs = join_records(&ds);
        let net = build_network(&recs, date("2014-01-20"));
        assert_eq!(net.nodes, ["A", "C"]);
        let cumulative = build_cumulative_network(&recs, date("2014-06-01"));
        assert_eq!(cumulative.edge_count(), 2);
    }

    #[test]
    fn component_counts() {
        let net = net_from_pairs(&[("A", "B"), ("C", "D")]);
        assert_eq!(components(&net).len(), 2);
        let net = net_from_pairs(&[("A", "B"), ("B", "C")]);
        let comps = components(&net);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].node_count(), 3);
        let empty = build_network(&[], date("2013-01-01"));
        assert!(components(&empty).is_empty());
    }

    #[test]
    fn components_ordered_by_size_then_smallest_id() {
        let net = net_from_pairs(&[("X", "Y"), ("B", "C"), ("P", "Q"), ("Q", "R")]);
        let comps = components(&net);
        let firsts: Vec<_> = comps
            .iter()
            .map(|c| net.nodes[c.nodes[0]].as_str())
            .collect();
        assert_eq!(firsts, ["P", "B", "X"]);
        assert_eq!(comps.iter().map(|c| c.index).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn diameters() {
        let path = Subnetwork::from_edges(3, &[(0, 1), (2, 1)]);
        assert_eq!(path.diameter(), 2);
        let star = Subnetwork::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(star.diameter(), 2);

        let mut ds = three_firms();
        ds.contracts.push(contract("KD", "D", "2013-01-01", 12));
        ds.customers.push(customer("D"));
        ds.guarantees.remove(1);
        let net = build_network(&join_records(&ds), date("2013-03-01"));
        // {A,B} with one edge, C and D isolated.
        let m = diameter_stats(&net, date("2013-03-01"));
        assert_eq!(m.n_components, 3);
        assert!((m.avg_diameter - 1.0 / 3.0).abs() < 1e-12);

        let net = net_from_pairs(&[("A", "B")]);
        let m = diameter_stats(&net, date("2013-06-30"));
        assert_eq!(m.avg_diameter, 1.0);
    }

    #[test]
    fn edge_plus_isolated_node_averages_half() {
        let mut ds = three_firms();
        ds.guarantees.remove(1);
        ds.customers.retain(|c| c.customer_id != "C");
        ds.contracts.retain(|c| c.borrower_id != "C");
        ds.repayments.retain(|r| r.contract_id != "KC");
        ds.customers.push(customer("D"));
        ds.contracts.push(contract("KD", "D", "2013-01-01", 12));
        let net = build_network(&join_records(&ds), date("2013-03-01"));
        assert_eq!(diameter_stats(&net, date("2013-03-01")).avg_diameter, 0.5);
    }
}
