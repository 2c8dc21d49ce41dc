//! Loan-record schema, CSV ingestion, validation and the contract-level join.
//!
//! The bank's physical tables collapse into four logical ones:
//!
//! | table          | key                         | holds                                   |
//! |----------------|-----------------------------|-----------------------------------------|
//! | `customers`    | `customer_id`               | registration profile                    |
//! | `contracts`    | `contract_id`               | loan contract and its return types      |
//! | `guarantees`   | (`contract_id`, guarantor)  | who backs which contract, and when      |
//! | `repayments`   | (`contract_id`, `due_date`) | installment schedule and payment status |
//!
//! Money is integer minor units. Dates carry no time of day. A repayment is in
//! default when it was not paid by its due date; there is no grace period.

mod io;
mod join;
mod validate;

use std::collections::HashMap;

use chrono::{Months, NaiveDate};
use serde::{Deserialize, Serialize};

pub use io::{load_tables, write_tables, TablePaths};
pub use join::{join_records, JoinedRecord};
pub use validate::{validate, Table, ValidationReport, Violation};

/// Integer minor currency units.
pub type Money = i64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnterpriseScale {
    Micro,
    Small,
    Medium,
    Large,
}

impl EnterpriseScale {
    pub const ALL: [EnterpriseScale; 4] = [
        EnterpriseScale::Micro,
        EnterpriseScale::Small,
        EnterpriseScale::Medium,
        EnterpriseScale::Large,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EnterpriseScale::Micro => "micro",
            EnterpriseScale::Small => "small",
            EnterpriseScale::Medium => "medium",
            EnterpriseScale::Large => "large",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Customer {
    pub customer_id: String,
    pub business_nature: String,
    pub registered_capital: Money,
    pub enterprise_scale: EnterpriseScale,
    pub employee_count: u32,
    pub registration_date: NaiveDate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contract {
    pub contract_id: String,
    pub borrower_id: String,
    pub loan_amount: Money,
    pub start_date: NaiveDate,
    pub term_months: u32,
    pub capital_return_type: String,
    pub interest_return_type: String,
}

impl Contract {
    /// First day on which the contract is no longer running.
    pub fn maturity(&self) -> NaiveDate {
        self.start_date
            .checked_add_months(Months::new(self.term_months))
            .unwrap_or(NaiveDate::MAX)
    }

    /// `start_date <= day < maturity`.
    pub fn is_active_on(&self, day: NaiveDate) -> bool {
        self.start_date <= day && day < self.maturity()
    }

    /// True when the contract runs on at least one day of `[first, last]`.
    pub fn overlaps(&self, first: NaiveDate, last: NaiveDate) -> bool {
        self.start_date <= last && self.maturity() > first
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guarantee {
    pub contract_id: String,
    pub guarantor_id: String,
    pub guarantee_amount: Money,
    pub signed_date: NaiveDate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repayment {
    pub contract_id: String,
    pub due_date: NaiveDate,
    pub amount_due: Money,
    pub paid_date: Option<NaiveDate>,
    pub amount_paid: Money,
}

impl Repayment {
    /// Unpaid, or paid after the due date.
    pub fn default_flag(&self) -> bool {
        match self.paid_date {
            None => true,
            Some(paid) => paid > self.due_date,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoanDataset {
    pub customers: Vec<Customer>,
    pub contracts: Vec<Contract>,
    pub guarantees: Vec<Guarantee>,
    pub repayments: Vec<Repayment>,
}

impl LoanDataset {
    /// Repayment-level default rate; 0 for a dataset without repayments.
    pub fn default_rate(&self) -> f64 {
        if self.repayments.is_empty() {
            return 0.0;
        }
        let defaults = self.repayments.iter().filter(|r| r.default_flag()).count();
        defaults as f64 / self.repayments.len() as f64
    }

    /// Latest date that appears anywhere in the dataset.
    pub fn last_date(&self) -> Option<NaiveDate> {
        let contracts = self.contracts.iter().map(|c| c.start_date);
        let guarantees = self.guarantees.iter().map(|g| g.signed_date);
        let repayments = self
            .repayments
            .iter()
            .flat_map(|r| std::iter::once(r.due_date).chain(r.paid_date));
        contracts.chain(guarantees).chain(repayments).max()
    }

    /// The dataset as it was known just before `cutoff`.
    ///
    /// Drops every contract, guarantee and repayment dated on or after the
    /// cutoff (along with the children of dropped contracts) and customers
    /// registered on or after it. Payments recorded on or after the cutoff are
    /// erased, which leaves every remaining `default_flag` unchanged.
    pub fn truncated(&self, cutoff: NaiveDate) -> LoanDataset {
        let contracts: Vec<Contract> = self
            .contracts
            .iter()
            .filter(|c| c.start_date < cutoff)
            .cloned()
            .collect();
        let kept: std::collections::HashSet<&str> =
            contracts.iter().map(|c| c.contract_id.as_str()).collect();
        let guarantees = self
            .guarantees
            .iter()
            .filter(|g| g.signed_date < cutoff && kept.contains(g.contract_id.as_str()))
            .cloned()
            .collect();
        let repayments = self
            .repayments
            .iter()
            .filter(|r| r.due_date < cutoff && kept.contains(r.contract_id.as_str()))
            .map(|r| {
                let mut r = r.clone();
                if r.paid_date.is_some_and(|p| p >= cutoff) {
                    r.paid_date = None;
                    r.amount_paid = 0;
                }
                r
            })
            .collect();
        let customers = self
            .customers
            .iter()
            .filter(|c| c.registration_date < cutoff)
            .cloned()
            .collect();
        LoanDataset {
            customers,
            contracts,
            guarantees,
            repayments,
        }
    }
}

/// Positional lookups over a dataset. All vectors are indexed by position in
/// the corresponding `LoanDataset` collection.
#[derive(Debug)]
pub struct LoanIndex<'a> {
    pub customer_by_id: HashMap<&'a str, usize>,
    pub contract_by_id: HashMap<&'a str, usize>,
    /// Contracts per customer (as borrower), in file order.
    pub contracts_of: Vec<Vec<usize>>,
    /// Guarantee rows per contract, in file order.
    pub guarantees_of: Vec<Vec<usize>>,
    /// Repayments per contract, sorted by due date (stable).
    pub repayments_of: Vec<Vec<usize>>,
}

impl<'a> LoanIndex<'a> {
    /// Rows that reference unknown keys are skipped; run [`validate`] first
    /// when that matters.
    pub fn new(ds: &'a LoanDataset) -> Self {
        let customer_by_id: HashMap<&str, usize> = ds
            .customers
            .iter()
            .enumerate()
            .map(|(i, c)| (c.customer_id.as_str(), i))
            .collect();
        let contract_by_id: HashMap<&str, usize> = ds
            .contracts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.contract_id.as_str(), i))
            .collect();
        let mut contracts_of = vec![Vec::new(); ds.customers.len()];
        for (i, c) in ds.contracts.iter().enumerate() {
            if let Some(&b) = customer_by_id.get(c.borrower_id.as_str()) {
                contracts_of[b].push(i);
            }
        }
        let mut guarantees_of = vec![Vec::new(); ds.contracts.len()];
        for (i, g) in ds.guarantees.iter().enumerate() {
            if let Some(&k) = contract_by_id.get(g.contract_id.as_str()) {
                guarantees_of[k].push(i);
            }
        }
        let mut repayments_of = vec![Vec::new(); ds.contracts.len()];
        for (i, r) in ds.repayments.iter().enumerate() {
            if let Some(&k) = contract_by_id.get(r.contract_id.as_str()) {
                repayments_of[k].push(i);
            }
        }
        for list in &mut repayments_of {
            list.sort_by_key(|&i| ds.repayments[i].due_date);
        }
        LoanIndex {
            customer_by_id,
            contract_by_id,
            contracts_of,
            guarantees_of,
            repayments_of,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn default_flag_has_no_grace_period() {
        assert!(!repayment("K", "2013-04-15", Some("2013-04-15")).default_flag());
        assert!(!repayment("K", "2013-04-15", Some("2013-04-01")).default_flag());
        assert!(repayment("K", "2013-04-15", Some("2013-04-16")).default_flag());
        assert!(repayment("K", "2013-04-15", None).default_flag());
    }

    #[test]
    fn maturity_and_activity() {
        let c = contract("K", "B", "2013-01-31", 1);
        assert_eq!(c.maturity(), date("2013-02-28"));
        assert!(c.is_active_on(date("2013-02-27")));
        assert!(!c.is_active_on(date("2013-02-28")));
        assert!(!c.is_active_on(date("2013-01-30")));
    }

    #[test]
    fn truncation_preserves_known_default_flags() {
        let mut ds = three_firms();
        ds.repayments[1].paid_date = Some(date("2013-08-01"));
        let cut = ds.truncated(date("2013-07-20"));
        assert_eq!(cut.repayments.len(), 3);
        assert_eq!(cut.repayments[1].paid_date, None);
        for (a, b) in ds.repayments.iter().zip(&cut.repayments) {
            assert_eq!(a.default_flag(), b.default_flag());
        }
        let early = ds.truncated(date("2013-02-01"));
        assert_eq!(early.contracts.len(), 1);
        assert_eq!(early.guarantees.len(), 1);
        assert!(early.repayments.is_empty());
    }

    #[test]
    fn dataset_default_rate() {
        assert_eq!(three_firms().default_rate(), 1.0 / 3.0);
        assert_eq!(LoanDataset::default().default_rate(), 0.0);
    }
}
