//! Rolling quarterly evaluation of the feature ablations.

mod metrics;
mod rolling;

use serde::Serialize;

pub use metrics::{auc, midranks, recall, spearman, Undefined};
pub use rolling::{
    last_outcome_quarter, run_rolling, AblationResult, GroupShares, RollingReport, WindowResult,
};

use crate::calendar::Quarter;
use crate::config::parse_value;
use crate::error::{Error, Result};
use crate::features::{Ablation, SnapshotOptions, WindowQuad};
use crate::gbdt::TrainParams;

/// `n` consecutive windows, the first training on `start`. `last` is the
/// final quarter with outcome data.
pub fn schedule(start: Quarter, n: usize, last: Quarter) -> Result<Vec<WindowQuad>> {
    if n == 0 {
        return Err(Error::NoWindows);
    }
    let windows: Vec<WindowQuad> = (0..n)
        .map(|i| WindowQuad::starting(start.offset(i as i32)))
        .collect();
    let required = windows[n - 1].evaluation;
    if required > last {
        return Err(Error::TimelineTooShort {
            required: required.to_string(),
            available: last.to_string(),
        });
    }
    Ok(windows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RollingConfig {
    pub start: Quarter,
    pub n_windows: usize,
    pub ablations: Vec<Ablation>,
    /// Predicted probability at or above which an instance counts as flagged.
    pub recall_threshold: f64,
    pub train: TrainParams,
    #[serde(skip)]
    pub snapshot: SnapshotOptions,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig {
            start: Quarter::new(2013, 1).expect("valid quarter"),
            n_windows: 10,
            ablations: Ablation::ALL.to_vec(),
            recall_threshold: 0.5,
            train: TrainParams::default(),
            snapshot: SnapshotOptions::default(),
        }
    }
}

impl RollingConfig {
    /// Every key accepted by [`RollingConfig::set`] besides the training keys.
    pub const KEYS: &'static [&'static str] = &[
        "start",
        "windows",
        "ablations",
        "recall_threshold",
        "community_method",
        "max_communities",
    ];

    /// Applies one setting (including [`TrainParams`] keys). Returns
    /// `Ok(false)` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "start" => self.start = value.trim().parse()?,
            "windows" => self.n_windows = parse_value(key, value)?,
            "ablations" => {
                self.ablations = value
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<Vec<Ablation>>>()?;
                self.ablations.sort();
                self.ablations.dedup();
            }
            "recall_threshold" => self.recall_threshold = parse_value(key, value)?,
            "community_method" => self.snapshot.method = value.trim().parse()?,
            "max_communities" => self.snapshot.max_communities = parse_value(key, value)?,
            _ => return self.train.set(key, value),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_windows == 0 {
            return Err(Error::NoWindows);
        }
        if self.ablations.is_empty() {
            return Err(Error::Config("at least one ablation is required".into()));
        }
        if !(0.0..=1.0).contains(&self.recall_threshold) {
            return Err(Error::Config("recall_threshold must lie in [0, 1]".into()));
        }
        if self.snapshot.max_communities == 0 {
            return Err(Error::Config("max_communities must be at least 1".into()));
        }
        self.train.validate()
    }
}
