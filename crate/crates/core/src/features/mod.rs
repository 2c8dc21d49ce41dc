//! Quarterly feature matrices.
//!
//! Every instance is a customer with a running loan in the feature quarter.
//! Its features use only records dated before the end of that quarter; its
//! label comes from the following quarter's repayments.

mod assemble;
mod matrix;
mod schema;

use serde::{Deserialize, Serialize};

pub use assemble::{
    assemble, attach_labels, label, labels_for, select_instances, Snapshot, SnapshotOptions,
};
pub use matrix::FeatureMatrix;
pub use schema::FeatureSchema;

use crate::calendar::Quarter;

/// Feature categories. Codes are used in column names and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "BP")]
    BasicProfile,
    #[serde(rename = "CR")]
    CreditRecord,
    #[serde(rename = "AL")]
    ActiveLoan,
    #[serde(rename = "NS")]
    NetworkStructure,
    #[serde(rename = "CM")]
    Community,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::BasicProfile,
        Category::CreditRecord,
        Category::ActiveLoan,
        Category::NetworkStructure,
        Category::Community,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Category::BasicProfile => "BP",
            Category::CreditRecord => "CR",
            Category::ActiveLoan => "AL",
            Category::NetworkStructure => "NS",
            Category::Community => "CM",
        }
    }

    pub fn group(self) -> FeatureGroup {
        match self {
            Category::BasicProfile | Category::CreditRecord | Category::ActiveLoan => {
                FeatureGroup::NodeWise
            }
            Category::NetworkStructure => FeatureGroup::Network,
            Category::Community => FeatureGroup::Community,
        }
    }
}

/// Coarse grouping used when tracking importance over time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    NodeWise,
    Network,
    Community,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 3] = [
        FeatureGroup::NodeWise,
        FeatureGroup::Network,
        FeatureGroup::Community,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::NodeWise => "node_wise",
            FeatureGroup::Network => "network",
            FeatureGroup::Community => "community",
        }
    }
}

/// Column subsets compared by the evaluation harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ablation {
    /// Node-wise: basic profile, credit record and active loans.
    #[serde(rename = "NW")]
    NodeWise,
    #[serde(rename = "NW+CM")]
    NodeWiseCommunity,
    #[serde(rename = "NW+N")]
    NodeWiseNetwork,
    /// Hybrid: every category.
    #[serde(rename = "H")]
    Hybrid,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::NodeWise,
        Ablation::NodeWiseCommunity,
        Ablation::NodeWiseNetwork,
        Ablation::Hybrid,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Ablation::NodeWise => "NW",
            Ablation::NodeWiseCommunity => "NW+CM",
            Ablation::NodeWiseNetwork => "NW+N",
            Ablation::Hybrid => "H",
        }
    }

    pub fn categories(self) -> &'static [Category] {
        use Category::*;
        match self {
            Ablation::NodeWise => &[BasicProfile, CreditRecord, ActiveLoan],
            Ablation::NodeWiseCommunity => &[BasicProfile, CreditRecord, ActiveLoan, Community],
            Ablation::NodeWiseNetwork => {
                &[BasicProfile, CreditRecord, ActiveLoan, NetworkStructure]
            }
            Ablation::Hybrid => &Category::ALL,
        }
    }
}

impl std::fmt::Display for Ablation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Ablation {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                crate::Error::Config(format!("unknown ablation `{s}` (NW, NW+CM, NW+N, H)"))
            })
    }
}

/// The quarters one rolling window touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WindowQuad {
    /// Training features come from this quarter.
    pub train: Quarter,
    /// Training labels; also the prediction cohort's feature quarter.
    pub observation: Quarter,
    /// Outcomes of the prediction cohort.
    pub evaluation: Quarter,
}

impl WindowQuad {
    pub fn starting(train: Quarter) -> Self {
        WindowQuad {
            train,
            observation: train.next(),
            evaluation: train.next().next(),
        }
    }

    pub fn prediction(&self) -> Quarter {
        self.observation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ablations_nest() {
        for a in Ablation::ALL {
            for c in Ablation::NodeWise.categories() {
                assert!(a.categories().contains(c));
            }
            assert_eq!(a.label().parse::<Ablation>().unwrap(), a);
        }
        assert_eq!(Ablation::Hybrid.categories().len(), 5);
    }

    #[test]
    fn window_quarters_are_consecutive() {
        let w = WindowQuad::starting(Quarter::new(2013, 1).unwrap());
        assert_eq!(w.observation.to_string(), "2013Q2");
        assert_eq!(w.evaluation.to_string(), "2013Q3");
    }
}
