//! Default-risk prediction for firms in loan guarantee networks.
//!
//! The crate covers the whole pipeline: loading (or synthesising) loan records,
//! building dated guarantee networks, scoring nodes with centrality measures,
//! detecting communities, assembling quarterly feature matrices, training a
//! gradient-boosted tree classifier and evaluating it on rolling windows.

pub mod calendar;
pub mod centrality;
pub mod community;
pub mod config;
mod error;
pub mod eval;
pub mod features;
pub mod gbdt;
pub mod graph;
pub mod loan_data;
pub mod oracle;
pub mod selftest;
pub mod synth;

pub use calendar::Quarter;
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/loan-records.md")]
    mod loan_records {}
    #[doc = include_str!("../../../book/src/synthetic-data.md")]
    mod synthetic_data {}
    #[doc = include_str!("../../../book/src/guarantee-networks.md")]
    mod guarantee_networks {}
    #[doc = include_str!("../../../book/src/centrality.md")]
    mod centrality {}
    #[doc = include_str!("../../../book/src/communities.md")]
    mod communities {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/boosted-trees.md")]
    mod boosted_trees {}
    #[doc = include_str!("../../../book/src/rolling-evaluation.md")]
    mod rolling_evaluation {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
