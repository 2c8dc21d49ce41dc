use super::{Contract, Customer, Guarantee, LoanDataset, LoanIndex, Repayment};

/// One contract with everything the downstream analysis needs about it.
#[derive(Clone, Debug, PartialEq)]
pub struct JoinedRecord<'a> {
    pub contract: &'a Contract,
    pub borrower: &'a Customer,
    /// Guarantee rows in file order; empty for an unguaranteed loan.
    pub guarantees: Vec<&'a Guarantee>,
    /// Sorted by due date.
    pub repayments: Vec<&'a Repayment>,
}

impl<'a> JoinedRecord<'a> {
    pub fn guarantor_ids(&self) -> impl Iterator<Item = &'a str> + '_ {
        self.guarantees.iter().map(|g| g.guarantor_id.as_str())
    }

    pub fn default_count(&self) -> usize {
        self.repayments.iter().filter(|r| r.default_flag()).count()
    }

    pub fn defaulted(&self) -> bool {
        self.repayments.iter().any(|r| r.default_flag())
    }
}

/// Joins the tables into one record per contract, in contract file order.
///
/// Expects a dataset that passed validation; contracts whose borrower is
/// unknown are skipped.
pub fn join_records(ds: &LoanDataset) -> Vec<JoinedRecord<'_>> {
    let index = LoanIndex::new(ds);
    ds.contracts
        .iter()
        .enumerate()
        .filter_map(|(k, contract)| {
            let borrower =
                &ds.customers[*index.customer_by_id.get(contract.borrower_id.as_str())?];
            Some(JoinedRecord {
                contract,
                borrower,
                guarantees: index.guarantees_of[k]
                    .iter()
                    .map(|&g| &ds.guarantees[g])
                    .collect(),
                repayments: index.repayments_of[k]
                    .iter()
                    .map(|&r| &ds.repayments[r])
                    .collect(),
            })
        })
        .collect()
}
