use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::LoanDataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    Customers,
    Contracts,
    Guarantees,
    Repayments,
}

impl Table {
    pub fn file_name(self) -> &'static str {
        match self {
            Table::Customers => "customers.csv",
            Table::Contracts => "contracts.csv",
            Table::Guarantees => "guarantees.csv",
            Table::Repayments => "repayments.csv",
        }
    }
}

/// One broken invariant, located by table and 0-based record index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub table: Table,
    pub index: usize,
    pub key: String,
    pub rule: &'static str,
    pub detail: String,
}

impl Violation {
    /// Line in the CSV file, counting the header as line 1.
    pub fn line(&self) -> usize {
        self.index + 2
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} line {} ({}): {}: {}",
            self.table.file_name(),
            self.line(),
            self.key,
            self.rule,
            self.detail
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Lists every invariant violation in `ds`. Violations are data: an empty
/// report means the dataset is valid.
pub fn validate(ds: &LoanDataset) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |table, index, key: &str, rule, detail: String| {
        out.push(Violation {
            table,
            index,
            key: key.to_string(),
            rule,
            detail,
        })
    };

    let mut customers = HashMap::new();
    for (i, c) in ds.customers.iter().enumerate() {
        if customers.insert(c.customer_id.as_str(), c).is_some() {
            push(
                Table::Customers,
                i,
                &c.customer_id,
                "customer_id unique",
                "duplicate id".into(),
            );
        }
        if c.registered_capital < 0 {
            push(
                Table::Customers,
                i,
                &c.customer_id,
                "registered_capital >= 0",
                format!("registered_capital = {}", c.registered_capital),
            );
        }
    }

    let mut contracts = HashMap::new();
    for (i, k) in ds.contracts.iter().enumerate() {
        if contracts.insert(k.contract_id.as_str(), k).is_some() {
            push(
                Table::Contracts,
                i,
                &k.contract_id,
                "contract_id unique",
                "duplicate id".into(),
            );
        }
        match customers.get(k.borrower_id.as_str()) {
            None => push(
                Table::Contracts,
                i,
                &k.contract_id,
                "unknown borrower",
                format!("borrower_id `{}` not in customers", k.borrower_id),
            ),
            Some(b) if b.registration_date > k.start_date => push(
                Table::Contracts,
                i,
                &k.contract_id,
                "registration_date <= start_date",
                format!(
                    "borrower registered {} after start {}",
                    b.registration_date, k.start_date
                ),
            ),
            Some(_) => {}
        }
        if k.loan_amount <= 0 {
            push(
                Table::Contracts,
                i,
                &k.contract_id,
                "loan_amount > 0",
                format!("loan_amount = {}", k.loan_amount),
            );
        }
        if k.term_months < 1 {
            push(
                Table::Contracts,
                i,
                &k.contract_id,
                "term_months >= 1",
                "term_months = 0".into(),
            );
        }
    }

    let mut pairs = HashSet::new();
    for (i, g) in ds.guarantees.iter().enumerate() {
        let key = format!("{}/{}", g.contract_id, g.guarantor_id);
        let contract = contracts.get(g.contract_id.as_str());
        if contract.is_none() {
            push(
                Table::Guarantees,
                i,
                &key,
                "unknown contract",
                format!("contract_id `{}` not in contracts", g.contract_id),
            );
        }
        let guarantor = customers.get(g.guarantor_id.as_str());
        if guarantor.is_none() {
            push(
                Table::Guarantees,
                i,
                &key,
                "unknown guarantor",
                format!("guarantor_id `{}` not in customers", g.guarantor_id),
            );
        }
        if let Some(k) = contract {
            if k.borrower_id == g.guarantor_id {
                push(
                    Table::Guarantees,
                    i,
                    &key,
                    "self-guarantee",
                    format!("`{}` guarantees its own contract", g.guarantor_id),
                );
            }
            if g.signed_date > k.start_date {
                push(
                    Table::Guarantees,
                    i,
                    &key,
                    "signed_date <= start_date",
                    format!(
                        "signed {} after contract start {}",
                        g.signed_date, k.start_date
                    ),
                );
            }
            if let Some(c) = guarantor {
                if c.registration_date > k.start_date {
                    push(
                        Table::Guarantees,
                        i,
                        &key,
                        "registration_date <= start_date",
                        format!(
                            "guarantor registered {} after start {}",
                            c.registration_date, k.start_date
                        ),
                    );
                }
            }
        }
        pairs.insert((g.contract_id.as_str(), g.guarantor_id.as_str()));
    }

    for (i, r) in ds.repayments.iter().enumerate() {
        let key = format!("{}@{}", r.contract_id, r.due_date);
        match contracts.get(r.contract_id.as_str()) {
            None => push(
                Table::Repayments,
                i,
                &key,
                "unknown contract",
                format!("contract_id `{}` not in contracts", r.contract_id),
            ),
            Some(k) => {
                if r.due_date < k.start_date || r.due_date > k.maturity() {
                    push(
                        Table::Repayments,
                        i,
                        &key,
                        "due_date within term",
                        format!(
                            "due {} outside [{}, {}]",
                            r.due_date,
                            k.start_date,
                            k.maturity()
                        ),
                    );
                }
            }
        }
    }

    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loan_data::fixtures::*;

    #[test]
    fn valid_fixture_has_empty_report() {
        assert!(validate(&three_firms()).is_empty());
    }

    #[test]
    fn negative_loan_amount() {
        let mut ds = three_firms();
        ds.contracts[0].loan_amount = -1;
        let report = validate(&ds);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].rule, "loan_amount > 0");
        assert_eq!(report.violations[0].key, "KB");
    }

    #[test]
    fn self_guarantee() {
        let mut ds = three_firms();
        ds.guarantees[0].guarantor_id = "B".into();
        let report = validate(&ds);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].rule, "self-guarantee");
    }

    #[test]
    fn every_violation_is_listed() {
        let mut ds = three_firms();
        ds.customers[0].registered_capital = -5;
        ds.contracts[1].term_months = 0;
        ds.contracts[1].borrower_id = "Z".into();
        ds.guarantees[0].signed_date = date("2013-02-01");
        ds.repayments[0].due_date = date("2015-01-01");
        let rules: Vec<_> = validate(&ds).violations.iter().map(|v| v.rule).collect();
        assert_eq!(
            rules,
            [
                "registered_capital >= 0",
                "unknown borrower",
                "term_months >= 1",
                "signed_date <= start_date",
                "due_date within term",
                // KC's only installment falls outside a zero-month term.
                "due_date within term",
            ]
        );
    }
}
