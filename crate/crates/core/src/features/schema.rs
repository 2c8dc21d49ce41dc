use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Category;
use crate::loan_data::{EnterpriseScale, LoanDataset};

/// Category vocabularies behind the one-hot columns.
///
/// Fixing them once per dataset keeps every quarter's matrix on the same
/// columns, whichever values happen to occur before a given cutoff.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub business_natures: Vec<String>,
    pub capital_return_types: Vec<String>,
    pub interest_return_types: Vec<String>,
}

fn sorted<'a>(it: impl Iterator<Item = &'a String>) -> Vec<String> {
    it.collect::<BTreeSet<_>>().into_iter().cloned().collect()
}

impl FeatureSchema {
    pub fn from_dataset(ds: &LoanDataset) -> Self {
        FeatureSchema {
            business_natures: sorted(ds.customers.iter().map(|c| &c.business_nature)),
            capital_return_types: sorted(ds.contracts.iter().map(|c| &c.capital_return_type)),
            interest_return_types: sorted(ds.contracts.iter().map(|c| &c.interest_return_type)),
        }
    }

    /// Column names and categories in matrix order.
    pub fn columns(&self) -> Vec<(String, Category)> {
        use Category::*;
        let mut cols = Vec::new();
        let mut push = |name: String, c: Category| cols.push((name, c));
        push("bp_log_capital".into(), BasicProfile);
        for s in EnterpriseScale::ALL {
            push(format!("bp_scale_{}", s.as_str()), BasicProfile);
        }
        push("bp_employees".into(), BasicProfile);
        for n in &self.business_natures {
            push(format!("bp_nature_{}", slug(n)), BasicProfile);
        }
        push("bp_age_months".into(), BasicProfile);
        for name in [
            "cr_loan_count",
            "cr_loan_amount",
            "cr_default_count",
            "cr_default_amount",
            "cr_default_rate",
            "cr_months_since_default",
            "cr_has_history",
        ] {
            push(name.into(), CreditRecord);
        }
        push("al_amount".into(), ActiveLoan);
        push("al_count".into(), ActiveLoan);
        push("al_mean_remaining_months".into(), ActiveLoan);
        for t in &self.capital_return_types {
            push(format!("al_capital_{}", slug(t)), ActiveLoan);
        }
        for t in &self.interest_return_types {
            push(format!("al_interest_{}", slug(t)), ActiveLoan);
        }
        for name in [
            "ns_in_degree",
            "ns_out_degree",
            "ns_authority",
            "ns_hub",
            "ns_pagerank",
            "ns_kshell",
            "ns_eigenvector",
            "ns_betweenness",
            "ns_betweenness_norm",
            "ns_closeness",
            "ns_component_size",
            "ns_component_diameter",
        ] {
            push(name.into(), NetworkStructure);
        }
        for name in ["cm_default_rate", "cm_size", "cm_defaulted_neighbors"] {
            push(name.into(), Community);
        }
        cols
    }
}

/// Lowercase ASCII alphanumerics, everything else collapsed to `_`.
fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("Wholesale & Retail"), "wholesale_retail");
        assert_eq!(slug("equal-installment"), "equal_installment");
    }

    #[test]
    fn every_column_has_one_category() {
        let schema = FeatureSchema {
            business_natures: vec!["a".into(), "b".into()],
            capital_return_types: vec!["bullet".into()],
            interest_return_types: vec!["monthly".into()],
        };
        let cols = schema.columns();
        let names: BTreeSet<_> = cols.iter().map(|c| c.0.as_str()).collect();
        assert_eq!(names.len(), cols.len());
        for (name, cat) in &cols {
            assert!(name.starts_with(&cat.code().to_lowercase()));
        }
    }
}
