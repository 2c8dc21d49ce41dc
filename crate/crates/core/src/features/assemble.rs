use chrono::NaiveDate;

use super::{FeatureMatrix, FeatureSchema};
use crate::calendar::{whole_months_between, Quarter};
use crate::centrality::{score_network, NetworkScores};
use crate::community::{partition_network, DefaultSet, Method, NetworkPartition};
use crate::error::{Error, Result};
use crate::graph::{build_network, components, GuaranteeNetwork, Subnetwork};
use crate::loan_data::{join_records, EnterpriseScale, LoanDataset, LoanIndex};

const MONTHS_SINCE_DEFAULT_CAP: f64 = 120.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SnapshotOptions {
    pub method: Method,
    pub max_communities: usize,
}

impl Default for SnapshotOptions {
    fn default() -> Self {
        SnapshotOptions {
            method: Method::EdgeBetweenness,
            max_communities: 64,
        }
    }
}

/// The guarantee network on one day with its node scores and communities.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub as_of: NaiveDate,
    pub network: GuaranteeNetwork,
    pub components: Vec<Subnetwork>,
    pub scores: NetworkScores,
    pub communities: NetworkPartition,
}

impl Snapshot {
    pub fn build(ds: &LoanDataset, as_of: NaiveDate, opts: SnapshotOptions) -> Snapshot {
        let network = build_network(&join_records(ds), as_of);
        let comps = components(&network);
        let scores = score_network(&network, &comps);
        let communities = partition_network(&network, &comps, opts.method, opts.max_communities);
        Snapshot {
            as_of,
            network,
            components: comps,
            scores,
            communities,
        }
    }
}

/// Customers with at least one contract running on some day of `quarter`,
/// sorted by id. Guarantors without loans of their own are not instances.
pub fn select_instances(ds: &LoanDataset, quarter: Quarter) -> Vec<String> {
    let (first, last) = (quarter.first_day(), quarter.last_day());
    let mut ids: Vec<String> = ds
        .contracts
        .iter()
        .filter(|c| c.overlaps(first, last))
        .map(|c| c.borrower_id.clone())
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// 1 iff some repayment of the customer's contracts due in `quarter` defaulted.
pub fn label(ds: &LoanDataset, customer_id: &str, quarter: Quarter) -> u8 {
    let contracts: std::collections::HashSet<&str> = ds
        .contracts
        .iter()
        .filter(|c| c.borrower_id == customer_id)
        .map(|c| c.contract_id.as_str())
        .collect();
    u8::from(ds.repayments.iter().any(|r| {
        contracts.contains(r.contract_id.as_str())
            && quarter.contains(r.due_date)
            && r.default_flag()
    }))
}

/// [`label`] for many customers at once.
pub fn labels_for(ds: &LoanDataset, customers: &[String], quarter: Quarter) -> Vec<u8> {
    let index = LoanIndex::new(ds);
    customers
        .iter()
        .map(|id| {
            let Some(&c) = index.customer_by_id.get(id.as_str()) else {
                return 0;
            };
            let bad = index.contracts_of[c].iter().any(|&k| {
                index.repayments_of[k].iter().any(|&r| {
                    let r = &ds.repayments[r];
                    quarter.contains(r.due_date) && r.default_flag()
                })
            });
            u8::from(bad)
        })
        .collect()
}

/// Labels every row with its outcome in `quarter`.
pub fn attach_labels(
    mut matrix: FeatureMatrix,
    ds: &LoanDataset,
    quarter: Quarter,
) -> FeatureMatrix {
    matrix.labels = Some(labels_for(ds, &matrix.customers, quarter));
    matrix
}

/// Builds the unlabelled feature matrix of `quarter`.
///
/// `snapshot` must be taken on the quarter's last day; any other date is
/// refused so network features cannot see past the cutoff.
pub fn assemble(
    ds: &LoanDataset,
    schema: &FeatureSchema,
    quarter: Quarter,
    snapshot: &Snapshot,
) -> Result<FeatureMatrix> {
    let as_of = quarter.last_day();
    if snapshot.as_of != as_of || snapshot.network.as_of != as_of {
        return Err(Error::SnapshotMismatch {
            snapshot: snapshot.as_of,
            expected: as_of,
        });
    }
    let cutoff = quarter.end();
    let index = LoanIndex::new(ds);
    let defaults = DefaultSet::as_of(ds, as_of);
    let net = &snapshot.network;
    let part = &snapshot.communities;

    let mut community_bad = vec![0usize; part.community_size.len()];
    for (v, id) in net.nodes.iter().enumerate() {
        if defaults.contains(id) {
            community_bad[part.community_of[v]] += 1;
        }
    }
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); net.node_count()];
    for e in &net.edges {
        neighbors[e.guarantor].push(e.borrower);
        neighbors[e.borrower].push(e.guarantor);
    }

    let columns = schema.columns();
    let customers = select_instances(ds, quarter);
    let mut rows = Vec::with_capacity(customers.len());
    for id in &customers {
        let c = index.customer_by_id[id.as_str()];
        let customer = &ds.customers[c];
        let mut row = Vec::with_capacity(columns.len());

        row.push((customer.registered_capital.max(0) as f64).ln_1p());
        for s in EnterpriseScale::ALL {
            row.push(f64::from(u8::from(customer.enterprise_scale == s)));
        }
        row.push(f64::from(customer.employee_count));
        for n in &schema.business_natures {
            row.push(f64::from(u8::from(&customer.business_nature == n)));
        }
        row.push(whole_months_between(customer.registration_date, as_of).max(0) as f64);

        let (mut loans, mut loan_amount) = (0usize, 0i64);
        let (mut due, mut bad, mut bad_amount) = (0usize, 0usize, 0i64);
        let mut last_default: Option<NaiveDate> = None;
        let mut active = Vec::new();
        for &k in &index.contracts_of[c] {
            let contract = &ds.contracts[k];
            if contract.start_date >= cutoff {
                continue;
            }
            if contract.maturity() <= cutoff {
                loans += 1;
                loan_amount += contract.loan_amount;
            }
            if contract.overlaps(quarter.first_day(), as_of) {
                active.push(contract);
            }
            for &r in &index.repayments_of[k] {
                let r = &ds.repayments[r];
                if r.due_date >= cutoff {
                    break;
                }
                due += 1;
                if r.default_flag() {
                    bad += 1;
                    bad_amount += r.amount_due;
                    last_default = last_default.max(Some(r.due_date));
                }
            }
        }
        row.push(loans as f64);
        row.push(loan_amount as f64);
        row.push(bad as f64);
        row.push(bad_amount as f64);
        row.push(if due == 0 {
            0.0
        } else {
            bad as f64 / due as f64
        });
        row.push(last_default.map_or(MONTHS_SINCE_DEFAULT_CAP, |d| {
            (whole_months_between(d, as_of) as f64).min(MONTHS_SINCE_DEFAULT_CAP)
        }));
        row.push(f64::from(u8::from(loans > 0 || due > 0)));

        let n_active = active.len() as f64;
        row.push(active.iter().map(|k| k.loan_amount as f64).sum());
        row.push(n_active);
        let remaining: f64 = active
            .iter()
            .map(|k| whole_months_between(as_of, k.maturity()).max(0) as f64)
            .sum();
        row.push(if active.is_empty() {
            0.0
        } else {
            remaining / n_active
        });
        let share = |hit: usize| {
            if active.is_empty() {
                0.0
            } else {
                hit as f64 / n_active
            }
        };
        for t in &schema.capital_return_types {
            row.push(share(
                active
                    .iter()
                    .filter(|k| &k.capital_return_type == t)
                    .count(),
            ));
        }
        for t in &schema.interest_return_types {
            row.push(share(
                active
                    .iter()
                    .filter(|k| &k.interest_return_type == t)
                    .count(),
            ));
        }

        match net.node_index(id) {
            Some(v) if snapshot.scores.component_size[snapshot.scores.component_of[v]] > 1 => {
                let s = &snapshot.scores.nodes[v];
                let ci = snapshot.scores.component_of[v];
                let n = snapshot.scores.component_size[ci] as f64;
                let pairs = (n - 1.0) * (n - 2.0) / 2.0;
                row.extend([
                    f64::from(s.in_degree),
                    f64::from(s.out_degree),
                    s.authority,
                    s.hub,
                    s.pagerank,
                    f64::from(s.kshell),
                    s.eigenvector,
                    s.betweenness,
                    if pairs > 0.0 {
                        s.betweenness / pairs
                    } else {
                        0.0
                    },
                    s.closeness,
                    n,
                    snapshot.scores.component_diameter[ci] as f64,
                ]);
                let comm = part.community_of[v];
                let size = part.community_size[comm];
                let own = usize::from(defaults.contains(id));
                let others = size - 1;
                row.push(if others == 0 {
                    0.0
                } else {
                    (community_bad[comm] - own) as f64 / others as f64
                });
                row.push(size as f64);
                let mut nb: Vec<usize> = neighbors[v].clone();
                nb.sort_unstable();
                nb.dedup();
                row.push(
                    nb.iter()
                        .filter(|&&w| defaults.contains(&net.nodes[w]))
                        .count() as f64,
                );
            }
            _ => {
                row.extend([0.0; 10]);
                row.push(1.0);
                row.push(0.0);
                row.extend([0.0, 1.0, 0.0]);
            }
        }
        debug_assert_eq!(row.len(), columns.len());
        rows.push(row);
    }

    let (dimensions, categories) = columns.into_iter().unzip();
    FeatureMatrix::new(quarter, dimensions, categories, customers, rows, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Category;
    use crate::loan_data::fixtures::*;

    fn q(s: &str) -> Quarter {
        s.parse().unwrap()
    }

    fn value(m: &FeatureMatrix, customer: &str, dim: &str) -> f64 {
        let i = m.customers.iter().position(|c| c == customer).unwrap();
        let j = m.dimensions.iter().position(|d| d == dim).unwrap();
        m.rows[i][j]
    }

    fn matrix(ds: &LoanDataset, quarter: &str) -> FeatureMatrix {
        let quarter = q(quarter);
        let snap = Snapshot::build(ds, quarter.last_day(), SnapshotOptions::default());
        assemble(ds, &FeatureSchema::from_dataset(ds), quarter, &snap).unwrap()
    }

    #[test]
    fn instance_selection_boundaries() {
        let mut ds = three_firms();
        // KB runs 2013-01-15 .. 2014-01-15; a contract maturing the day before Q2 starts:
        ds.contracts.push(contract("KA", "A", "2013-01-01", 3));
        assert_eq!(select_instances(&ds, q("2013Q2")), ["B", "C"]);
        assert_eq!(select_instances(&ds, q("2013Q1")), ["A", "B", "C"]);
    }

    #[test]
    fn guarantor_is_not_an_instance() {
        assert!(!select_instances(&three_firms(), q("2013Q1")).contains(&"A".to_string()));
    }

    #[test]
    fn three_firm_component() {
        let mut ds = three_firms();
        ds.contracts.push(contract("KA", "A", "2013-01-01", 12));
        let m = matrix(&ds, "2013Q1");
        assert_eq!(value(&m, "A", "ns_component_size"), 3.0);
        assert_eq!(value(&m, "A", "ns_out_degree"), 2.0);
        assert_eq!(value(&m, "B", "ns_in_degree"), 1.0);
    }

    #[test]
    fn isolated_borrower_has_trivial_network_features() {
        let mut ds = three_firms();
        ds.customers.push(customer("D"));
        ds.contracts.push(contract("KD", "D", "2013-02-01", 12));
        let m = matrix(&ds, "2013Q1");
        for (j, d) in m.dimensions.iter().enumerate() {
            if m.categories[j] == Category::NetworkStructure {
                let expected = if d == "ns_component_size" { 1.0 } else { 0.0 };
                assert_eq!(value(&m, "D", d), expected, "{d}");
            }
        }
    }

    #[test]
    fn first_loan_has_no_credit_record() {
        let m = matrix(&three_firms(), "2013Q1");
        for (j, d) in m.dimensions.iter().enumerate() {
            if m.categories[j] == Category::CreditRecord {
                let expected = if d == "cr_months_since_default" {
                    120.0
                } else {
                    0.0
                };
                assert_eq!(value(&m, "B", d), expected, "{d}");
            }
        }
    }

    #[test]
    fn credit_record_counts_defaults_before_cutoff() {
        let m = matrix(&three_firms(), "2013Q3");
        // KB's 07-15 installment is unpaid; 04-15 was paid on time.
        assert_eq!(value(&m, "B", "cr_default_count"), 1.0);
        assert_eq!(value(&m, "B", "cr_default_rate"), 0.5);
        assert_eq!(value(&m, "B", "cr_months_since_default"), 2.0);
        assert_eq!(value(&m, "B", "cr_has_history"), 1.0);
    }

    #[test]
    fn labels_follow_due_quarter() {
        let ds = three_firms();
        assert_eq!(label(&ds, "B", q("2013Q3")), 1);
        assert_eq!(label(&ds, "B", q("2013Q2")), 0);
        assert_eq!(label(&ds, "C", q("2013Q3")), 0);
        assert_eq!(
            labels_for(&ds, &["B".into(), "C".into()], q("2013Q3")),
            [1, 0]
        );
    }

    #[test]
    fn snapshot_date_must_match() {
        let ds = three_firms();
        let snap = Snapshot::build(&ds, date("2013-03-30"), SnapshotOptions::default());
        let err = assemble(&ds, &FeatureSchema::from_dataset(&ds), q("2013Q1"), &snap).unwrap_err();
        assert!(matches!(err, Error::SnapshotMismatch { .. }));
    }

    #[test]
    fn community_rate_excludes_the_focal_firm() {
        let ds = three_firms();
        let m = matrix(&ds, "2013Q3");
        // B defaulted; among A and C nobody has.
        assert_eq!(value(&m, "B", "cm_default_rate"), 0.0);
        assert_eq!(value(&m, "C", "cm_default_rate"), 0.5);
        assert_eq!(value(&m, "C", "cm_defaulted_neighbors"), 0.0);
    }

    #[test]
    fn assembly_is_deterministic_and_projections_share_columns() {
        let ds = three_firms();
        let a = matrix(&ds, "2013Q3");
        assert_eq!(a.to_csv(), matrix(&ds, "2013Q3").to_csv());
        let full = a.fingerprints();
        for ab in crate::features::Ablation::ALL {
            for (name, fp) in a.project(ab).fingerprints() {
                assert_eq!(full[&name], fp);
            }
        }
    }
}
