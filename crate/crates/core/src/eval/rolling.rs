use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{auc, recall, schedule, RollingConfig};
use crate::calendar::Quarter;
use crate::error::{Error, Result};
use crate::features::{
    assemble, attach_labels, Ablation, FeatureGroup, FeatureMatrix, FeatureSchema, Snapshot,
};
use crate::gbdt::{train, Importance};
use crate::loan_data::LoanDataset;

/// Outcome of one ablation in one window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationResult {
    pub ablation: Ablation,
    pub auc: Option<f64>,
    pub recall: Option<f64>,
    /// Why a metric is missing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub train_instances: usize,
    pub train_positives: usize,
    pub instances: usize,
    pub positives: usize,
}

/// Split shares of the hybrid model per feature group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupShares {
    pub node_wise: f64,
    pub network: f64,
    pub community: f64,
}

impl GroupShares {
    fn from_importance(imp: &Importance) -> Self {
        let mut s = GroupShares {
            node_wise: 0.0,
            network: 0.0,
            community: 0.0,
        };
        for c in crate::features::Category::ALL {
            let share = imp.share(c);
            match c.group() {
                FeatureGroup::NodeWise => s.node_wise += share,
                FeatureGroup::Network => s.network += share,
                FeatureGroup::Community => s.community += share,
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowResult {
    pub train: Quarter,
    pub observation: Quarter,
    pub evaluation: Quarter,
    pub results: Vec<AblationResult>,
    /// Present when the hybrid model was trained.
    pub importance: Option<GroupShares>,
    /// Every ablation matrix matched the full matrix column by column.
    pub column_subsets_verified: bool,
}

impl WindowResult {
    pub fn result(&self, ablation: Ablation) -> Option<&AblationResult> {
        self.results.iter().find(|r| r.ablation == ablation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RollingReport {
    pub config: RollingConfig,
    pub windows: Vec<WindowResult>,
    /// Mean over the windows where the metric is defined.
    pub mean_auc: BTreeMap<Ablation, Option<f64>>,
    pub mean_recall: BTreeMap<Ablation, Option<f64>>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Quarter of the latest repayment due date, if there are repayments.
pub fn last_outcome_quarter(ds: &LoanDataset) -> Option<Quarter> {
    ds.repayments
        .iter()
        .map(|r| r.due_date)
        .max()
        .map(Quarter::containing)
}

/// Trains and evaluates every ablation on every window.
///
/// Each quarter's matrix is assembled once from a snapshot on its last day;
/// ablations are column subsets of it. Window `i` trains on quarter `i`
/// features with quarter `i+1` outcomes, then scores the quarter `i+1`
/// cohort against quarter `i+2` outcomes.
pub fn run_rolling(ds: &LoanDataset, cfg: &RollingConfig) -> Result<RollingReport> {
    cfg.validate()?;
    let last = last_outcome_quarter(ds).ok_or(Error::NoRows)?;
    let windows = schedule(cfg.start, cfg.n_windows, last)?;
    let schema = FeatureSchema::from_dataset(ds);
    let matrices: Vec<FeatureMatrix> = (0..=cfg.n_windows)
        .into_par_iter()
        .map(|i| {
            let quarter = cfg.start.offset(i as i32);
            let snapshot = Snapshot::build(ds, quarter.last_day(), cfg.snapshot);
            assemble(ds, &schema, quarter, &snapshot)
        })
        .collect::<Result<_>>()?;

    let results: Vec<WindowResult> = windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let train_full = attach_labels(matrices[i].clone(), ds, w.observation);
            let test_full = attach_labels(matrices[i + 1].clone(), ds, w.evaluation);
            let full_prints = test_full.fingerprints();
            let mut verified = true;
            let mut importance = None;
            let mut out = Vec::new();
            for &a in &cfg.ablations {
                let train_m = train_full.project(a);
                let test_m = test_full.project(a);
                verified &= test_m
                    .fingerprints()
                    .iter()
                    .all(|(name, print)| full_prints.get(name) == Some(print));
                let labels = test_m.labels.clone().unwrap_or_default();
                let mut r = AblationResult {
                    ablation: a,
                    auc: None,
                    recall: None,
                    note: None,
                    train_instances: train_m.n_rows(),
                    train_positives: train_m.positives(),
                    instances: test_m.n_rows(),
                    positives: labels.iter().filter(|&&l| l == 1).count(),
                };
                if r.train_positives == 0 || r.train_positives == r.train_instances {
                    r.note = Some("training labels have a single class".into());
                    out.push(r);
                    continue;
                }
                let model = train(&train_m, &cfg.train)?;
                if a == Ablation::Hybrid {
                    importance = Some(GroupShares::from_importance(&model.importance()));
                }
                let scores = model.predict_matrix(&test_m)?;
                let mut notes = Vec::new();
                match auc(&scores, &labels) {
                    Ok(v) => r.auc = Some(v),
                    Err(e) => notes.push(e.0),
                }
                match recall(&scores, &labels, cfg.recall_threshold) {
                    Ok(v) => r.recall = Some(v),
                    Err(e) => notes.push(e.0),
                }
                if !notes.is_empty() {
                    r.note = Some(notes.join("; "));
                }
                out.push(r);
            }
            Ok(WindowResult {
                train: w.train,
                observation: w.observation,
                evaluation: w.evaluation,
                results: out,
                importance,
                column_subsets_verified: verified,
            })
        })
        .collect::<Result<_>>()?;

    let per = |f: fn(&AblationResult) -> Option<f64>| -> BTreeMap<Ablation, Option<f64>> {
        cfg.ablations
            .iter()
            .map(|&a| (a, mean(results.iter().map(|w| w.result(a).and_then(f)))))
            .collect()
    };
    Ok(RollingReport {
        config: cfg.clone(),
        mean_auc: per(|r| r.auc),
        mean_recall: per(|r| r.recall),
        windows: results,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl RollingReport {
    fn metric_csv(&self, f: fn(&AblationResult) -> Option<f64>) -> String {
        let mut s = String::from("evaluation_quarter");
        for a in &self.config.ablations {
            write!(s, ",{a}").expect("write to string");
        }
        s.push('\n');
        for w in &self.windows {
            s.push_str(&w.evaluation.to_string());
            for &a in &self.config.ablations {
                write!(s, ",{}", cell(w.result(a).and_then(f))).expect("write to string");
            }
            s.push('\n');
        }
        s
    }

    /// Table-style AUC per window (rows labelled by evaluation quarter).
    pub fn auc_csv(&self) -> String {
        self.metric_csv(|r| r.auc)
    }

    pub fn recall_csv(&self) -> String {
        self.metric_csv(|r| r.recall)
    }

    /// Hybrid-model split shares per feature group and window.
    pub fn importance_csv(&self) -> String {
        let mut s = String::from("evaluation_quarter,node_wise,network,community\n");
        for w in &self.windows {
            let g = w.importance;
            writeln!(
                s,
                "{},{},{},{}",
                w.evaluation,
                cell(g.map(|g| g.node_wise)),
                cell(g.map(|g| g.network)),
                cell(g.map(|g| g.community))
            )
            .expect("write to string");
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `report.json` and the three per-window CSVs into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("report.json", self.to_json()?),
            ("auc_by_window.csv", self.auc_csv()),
            ("recall_by_window.csv", self.recall_csv()),
            ("importance_by_window.csv", self.importance_csv()),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}
