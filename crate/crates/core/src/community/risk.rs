use std::collections::HashSet;

use chrono::NaiveDate;
use serde::Serialize;

use super::Partition;
use crate::graph::{GuaranteeNetwork, Subnetwork};
use crate::loan_data::LoanDataset;

/// Customers with at least one defaulted repayment due on or before a cutoff.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefaultSet {
    pub cutoff: NaiveDate,
    customers: HashSet<String>,
}

impl DefaultSet {
    pub fn as_of(ds: &LoanDataset, cutoff: NaiveDate) -> Self {
        let bad_contracts: HashSet<&str> = ds
            .repayments
            .iter()
            .filter(|r| r.due_date <= cutoff && r.default_flag())
            .map(|r| r.contract_id.as_str())
            .collect();
        let customers = ds
            .contracts
            .iter()
            .filter(|c| bad_contracts.contains(c.contract_id.as_str()))
            .map(|c| c.borrower_id.clone())
            .collect();
        DefaultSet { cutoff, customers }
    }

    pub fn contains(&self, customer_id: &str) -> bool {
        self.customers.contains(customer_id)
    }

    pub fn len(&self) -> usize {
        self.customers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.customers.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommunityRisk {
    pub community: usize,
    pub size: usize,
    pub default_count: usize,
    pub default_rate: f64,
}

/// Default statistics per community of one subnetwork.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommunityRiskTable {
    pub component: usize,
    pub cutoff: NaiveDate,
    /// Customer whose own record was left out of its community, if any.
    pub focal: Option<String>,
    pub communities: Vec<CommunityRisk>,
}

/// Customer-level default rate of every community.
///
/// With a `focal` customer, that customer is removed from its own community's
/// numerator and denominator so the rate carries no trace of its own label.
/// A community left empty by the exclusion has rate 0.
pub fn community_default_rate(
    partition: &Partition,
    sub: &Subnetwork,
    net: &GuaranteeNetwork,
    defaults: &DefaultSet,
    focal: Option<&str>,
) -> CommunityRiskTable {
    let k = partition.community_count();
    let mut size = vec![0usize; k];
    let mut bad = vec![0usize; k];
    for (local, &global) in sub.nodes.iter().enumerate() {
        let id = net.nodes[global].as_str();
        if focal == Some(id) {
            continue;
        }
        let c = partition.membership[local];
        size[c] += 1;
        bad[c] += usize::from(defaults.contains(id));
    }
    let communities = (0..k)
        .map(|c| CommunityRisk {
            community: c,
            size: size[c],
            default_count: bad[c],
            default_rate: if size[c] == 0 {
                0.0
            } else {
                bad[c] as f64 / size[c] as f64
            },
        })
        .collect();
    CommunityRiskTable {
        component: sub.index,
        cutoff: defaults.cutoff,
        focal: focal.map(str::to_string),
        communities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::{girvan_newman, Method};
    use crate::graph::{build_network, components};
    use crate::loan_data::fixtures::*;
    use crate::loan_data::{join_records, LoanDataset};

    /// Star of four: A backs B, C and D; only `bad` borrowers default.
    fn star(bad: &[&str]) -> LoanDataset {
        let mut ds = LoanDataset::default();
        for id in ["A", "B", "C", "D"] {
            ds.customers.push(customer(id));
        }
        for id in ["B", "C", "D"] {
            let k = format!("K{id}");
            ds.contracts.push(contract(&k, id, "2013-01-01", 12));
            ds.guarantees.push(guarantee(&k, "A", "2013-01-01"));
            let paid = (!bad.contains(&id)).then_some("2013-04-01");
            ds.repayments.push(repayment(&k, "2013-04-01", paid));
        }
        ds
    }

    fn table(ds: &LoanDataset, focal: Option<&str>) -> CommunityRiskTable {
        let net = build_network(&join_records(ds), date("2013-06-30"));
        let comps = components(&net);
        let p = girvan_newman(&comps[0], usize::MAX);
        assert_eq!(p.method, Method::EdgeBetweenness);
        community_default_rate(
            &p,
            &comps[0],
            &net,
            &DefaultSet::as_of(ds, date("2013-06-30")),
            focal,
        )
    }

    #[test]
    fn one_defaulter_in_four() {
        let t = table(&star(&["B"]), None);
        assert_eq!(t.communities.len(), 1);
        assert_eq!(t.communities[0].default_rate, 0.25);
    }

    #[test]
    fn no_defaults() {
        let t = table(&star(&[]), None);
        assert!(t.communities.iter().all(|c| c.default_rate == 0.0));
    }

    #[test]
    fn focal_exclusion() {
        let mut ds = star(&["B"]);
        // Shrink to a community of three: A, B, C.
        ds.contracts.retain(|c| c.borrower_id != "D");
        ds.guarantees.retain(|g| g.contract_id != "KD");
        ds.repayments.retain(|r| r.contract_id != "KD");
        let t = table(&ds, Some("B"));
        assert_eq!(t.communities[0].size, 2);
        assert_eq!(t.communities[0].default_rate, 0.0);
    }

    #[test]
    fn defaults_after_cutoff_are_ignored() {
        let ds = star(&["B"]);
        assert_eq!(DefaultSet::as_of(&ds, date("2013-03-31")).len(), 0);
        assert_eq!(DefaultSet::as_of(&ds, date("2013-04-01")).len(), 1);
    }
}
