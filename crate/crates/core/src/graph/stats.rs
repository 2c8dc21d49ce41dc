use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use super::{build_cumulative_network, components};
use crate::calendar::{add_months, month_number, month_start, whole_months_between};
use crate::error::{Error, Result};
use crate::loan_data::{join_records, LoanDataset, LoanIndex};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoanPeriodBucket {
    pub label: &'static str,
    pub min_months: u32,
    pub max_months: Option<u32>,
    pub contracts: usize,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonthlyDefaults {
    pub month: String,
    pub repayments_due: usize,
    pub defaults: usize,
    pub default_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefaultOffsetBucket {
    /// Whole months between contract start and the defaulted due date.
    pub offset_months: i32,
    pub defaults: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentSizeBucket {
    pub label: &'static str,
    pub min_nodes: usize,
    pub max_nodes: Option<usize>,
    pub components: usize,
    pub customers: usize,
    pub component_share: f64,
    pub customer_share: f64,
    /// Share of customers in these components with at least one defaulted repayment.
    pub default_rate: f64,
}

/// Portfolio-level descriptive statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub n_customers: usize,
    pub n_guarantee_relations: usize,
    pub n_contracts: usize,
    pub n_repayments: usize,
    pub n_defaults: usize,
    pub default_rate: f64,
    pub loan_period_histogram: Vec<LoanPeriodBucket>,
    pub defaults_by_month: Vec<MonthlyDefaults>,
    pub default_month_offset_histogram: Vec<DefaultOffsetBucket>,
    /// Share of defaults within the first 12 months of the contract; absent without defaults.
    pub first_year_default_share: Option<f64>,
    pub component_size_vs_default_rate: Vec<ComponentSizeBucket>,
}

const PERIODS: [(&str, u32, Option<u32>); 4] = [
    ("one_year", 1, Some(12)),
    ("two_three_year", 13, Some(36)),
    ("four_seven_year", 37, Some(95)),
    ("eight_year_plus", 96, None),
];

const SIZES: [(&str, usize, Option<usize>); 3] = [
    ("1-49", 1, Some(49)),
    ("50-299", 50, Some(299)),
    ("300+", 300, None),
];

fn share(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

/// Computes the descriptive statistics of a valid dataset.
///
/// Component statistics use the cumulative guarantee network (every guarantee
/// ever signed), with unguaranteed borrowers as single-node components.
pub fn overall_stats(ds: &LoanDataset) -> StatsReport {
    let index = LoanIndex::new(ds);
    let n_defaults = ds.repayments.iter().filter(|r| r.default_flag()).count();

    let loan_period_histogram = PERIODS
        .iter()
        .map(|&(label, lo, hi)| {
            let contracts = ds
                .contracts
                .iter()
                .filter(|c| c.term_months >= lo && hi.is_none_or(|h| c.term_months <= h))
                .count();
            LoanPeriodBucket {
                label,
                min_months: lo,
                max_months: hi,
                contracts,
                share: share(contracts, ds.contracts.len()),
            }
        })
        .collect();

    let mut by_month: BTreeMap<i32, (NaiveDate, usize, usize)> = BTreeMap::new();
    for r in &ds.repayments {
        let slot =
            by_month
                .entry(month_number(r.due_date))
                .or_insert((month_start(r.due_date), 0, 0));
        slot.1 += 1;
        slot.2 += usize::from(r.default_flag());
    }
    let mut defaults_by_month = Vec::new();
    if let (Some((&first, _)), Some((&last, _))) =
        (by_month.first_key_value(), by_month.last_key_value())
    {
        let origin = by_month[&first].0;
        for (i, m) in (first..=last).enumerate() {
            let (_, due, defaults) = by_month.get(&m).copied().unwrap_or((origin, 0, 0));
            defaults_by_month.push(MonthlyDefaults {
                month: add_months(origin, i as u32).format("%Y-%m").to_string(),
                repayments_due: due,
                defaults,
                default_rate: share(defaults, due),
            });
        }
    }

    let mut offsets: BTreeMap<i32, usize> = BTreeMap::new();
    for (k, contract) in ds.contracts.iter().enumerate() {
        for &r in &index.repayments_of[k] {
            let r = &ds.repayments[r];
            if r.default_flag() {
                *offsets
                    .entry(whole_months_between(contract.start_date, r.due_date))
                    .or_default() += 1;
            }
        }
    }
    let first_year: usize = offsets.range(..=12).map(|(_, n)| n).sum();
    let offset_total: usize = offsets.values().sum();
    let default_month_offset_histogram = match offsets.last_key_value() {
        None => Vec::new(),
        Some((&max, _)) => (0..=max)
            .map(|m| DefaultOffsetBucket {
                offset_months: m,
                defaults: offsets.get(&m).copied().unwrap_or(0),
            })
            .collect(),
    };

    StatsReport {
        n_customers: ds.customers.len(),
        n_guarantee_relations: ds.guarantees.len(),
        n_contracts: ds.contracts.len(),
        n_repayments: ds.repayments.len(),
        n_defaults,
        default_rate: share(n_defaults, ds.repayments.len()),
        loan_period_histogram,
        defaults_by_month,
        default_month_offset_histogram,
        first_year_default_share: (offset_total > 0).then(|| share(first_year, offset_total)),
        component_size_vs_default_rate: component_buckets(ds, &index),
    }
}

fn component_buckets(ds: &LoanDataset, index: &LoanIndex<'_>) -> Vec<ComponentSizeBucket> {
    let defaulted: HashSet<&str> = ds
        .customers
        .iter()
        .enumerate()
        .filter(|(c, _)| {
            index.contracts_of[*c].iter().any(|&k| {
                index.repayments_of[k]
                    .iter()
                    .any(|&r| ds.repayments[r].default_flag())
            })
        })
        .map(|(_, c)| c.customer_id.as_str())
        .collect();

    let records = join_records(ds);
    let comps = match ds.last_date() {
        Some(end) => {
            let net = build_cumulative_network(&records, end);
            components(&net)
                .into_iter()
                .map(|c| {
                    let bad = c
                        .nodes
                        .iter()
                        .filter(|&&v| defaulted.contains(net.nodes[v].as_str()))
                        .count();
                    (c.node_count(), bad)
                })
                .collect::<Vec<_>>()
        }
        None => Vec::new(),
    };
    let total_components = comps.len();
    let total_customers: usize = comps.iter().map(|c| c.0).sum();

    SIZES
        .iter()
        .map(|&(label, lo, hi)| {
            let inside: Vec<_> = comps
                .iter()
                .filter(|(n, _)| *n >= lo && hi.is_none_or(|h| *n <= h))
                .collect();
            let customers: usize = inside.iter().map(|c| c.0).sum();
            let bad: usize = inside.iter().map(|c| c.1).sum();
            ComponentSizeBucket {
                label,
                min_nodes: lo,
                max_nodes: hi,
                components: inside.len(),
                customers,
                component_share: share(inside.len(), total_components),
                customer_share: share(customers, total_customers),
                default_rate: share(bad, customers),
            }
        })
        .collect()
}

impl StatsReport {
    /// Writes `stats.json` plus one plot-ready CSV per histogram into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();

        let json = dir.join("stats.json");
        write_file(&json, &serde_json::to_vec_pretty(self)?)?;
        written.push(json);

        written.push(write_rows(
            dir,
            "loan_period.csv",
            &self.loan_period_histogram,
        )?);
        written.push(write_rows(
            dir,
            "defaults_by_month.csv",
            &self.defaults_by_month,
        )?);
        written.push(write_rows(
            dir,
            "default_offset.csv",
            &self.default_month_offset_histogram,
        )?);
        written.push(write_rows(
            dir,
            "component_sizes.csv",
            &self.component_size_vs_default_rate,
        )?);
        Ok(written)
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_rows<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Distinct guarantor→borrower pairs, for callers that want relation counts
/// rather than guarantee rows.
pub fn distinct_relations(ds: &LoanDataset) -> usize {
    let borrower: HashMap<&str, &str> = ds
        .contracts
        .iter()
        .map(|c| (c.contract_id.as_str(), c.borrower_id.as_str()))
        .collect();
    ds.guarantees
        .iter()
        .filter_map(|g| {
            borrower
                .get(g.contract_id.as_str())
                .map(|b| (g.guarantor_id.as_str(), *b))
        })
        .collect::<HashSet<_>>()
        .len()
}
