use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{validate, Contract, Customer, LoanDataset};
use crate::error::{Error, Result};

const CUSTOMER_COLUMNS: &[&str] = &[
    "customer_id",
    "business_nature",
    "registered_capital",
    "enterprise_scale",
    "employee_count",
    "registration_date",
];
const CONTRACT_COLUMNS: &[&str] = &[
    "contract_id",
    "borrower_id",
    "loan_amount",
    "start_date",
    "term_months",
    "capital_return_type",
    "interest_return_type",
];
const GUARANTEE_COLUMNS: &[&str] = &[
    "contract_id",
    "guarantor_id",
    "guarantee_amount",
    "signed_date",
];
const REPAYMENT_COLUMNS: &[&str] = &[
    "contract_id",
    "due_date",
    "amount_due",
    "paid_date",
    "amount_paid",
];

/// Locations of the four table files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TablePaths {
    pub customers: PathBuf,
    pub contracts: PathBuf,
    pub guarantees: PathBuf,
    pub repayments: PathBuf,
}

impl TablePaths {
    /// `customers.csv`, `contracts.csv`, `guarantees.csv` and `repayments.csv` under `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        TablePaths {
            customers: dir.join("customers.csv"),
            contracts: dir.join("contracts.csv"),
            guarantees: dir.join("guarantees.csv"),
            repayments: dir.join("repayments.csv"),
        }
    }

    pub fn all(&self) -> [&Path; 4] {
        [
            &self.customers,
            &self.contracts,
            &self.guarantees,
            &self.repayments,
        ]
    }
}

/// Reads the four tables, rejecting malformed rows, duplicate primary keys
/// and any dataset that fails [`validate`].
pub fn load_tables(paths: &TablePaths) -> Result<LoanDataset> {
    let customers: Vec<Customer> = read_table(&paths.customers, CUSTOMER_COLUMNS)?;
    check_unique(
        &paths.customers,
        customers.iter().map(|c| c.customer_id.as_str()),
    )?;
    let contracts: Vec<Contract> = read_table(&paths.contracts, CONTRACT_COLUMNS)?;
    check_unique(
        &paths.contracts,
        contracts.iter().map(|c| c.contract_id.as_str()),
    )?;
    let guarantees = read_table(&paths.guarantees, GUARANTEE_COLUMNS)?;
    let repayments = read_table(&paths.repayments, REPAYMENT_COLUMNS)?;

    let ds = LoanDataset {
        customers,
        contracts,
        guarantees,
        repayments,
    };
    let report = validate(&ds);
    if report.is_empty() {
        Ok(ds)
    } else {
        Err(Error::Invalid(report))
    }
}

/// Writes the four tables under `dir` (created if missing).
pub fn write_tables(ds: &LoanDataset, dir: impl AsRef<Path>) -> Result<TablePaths> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = TablePaths::in_dir(dir);
    write_table(&paths.customers, CUSTOMER_COLUMNS, &ds.customers)?;
    write_table(&paths.contracts, CONTRACT_COLUMNS, &ds.contracts)?;
    write_table(&paths.guarantees, GUARANTEE_COLUMNS, &ds.guarantees)?;
    write_table(&paths.repayments, REPAYMENT_COLUMNS, &ds.repayments)?;
    Ok(paths)
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn read_table<T: DeserializeOwned>(path: &Path, columns: &[&str]) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = file_label(path);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);

    let headers = reader.headers().map_err(|e| csv_error(&label, e))?.clone();
    if headers.iter().ne(columns.iter().copied()) {
        return Err(Error::Malformed {
            file: label,
            line: 1,
            column: None,
            message: format!(
                "header must be `{}`, found `{}`",
                columns.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    reader
        .deserialize()
        .map(|row| row.map_err(|e| csv_error(&label, e)))
        .collect()
}

fn csv_error(file: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    let column = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.field().map(|f| f as usize + 1),
        _ => None,
    };
    let message = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.kind().to_string(),
        _ => err.to_string(),
    };
    Error::Malformed {
        file: file.to_string(),
        line,
        column,
        message,
    }
}

fn check_unique<'a>(path: &Path, keys: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for (i, key) in keys.enumerate() {
        if !seen.insert(key) {
            return Err(Error::DuplicateKey {
                file: file_label(path),
                line: i as u64 + 2,
                key: key.to_string(),
            });
        }
    }
    Ok(())
}

fn write_table<T: Serialize>(path: &Path, columns: &[&str], rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    writer.write_record(columns)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
