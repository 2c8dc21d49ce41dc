//! Gradient-boosted regression trees for binary classification.
//!
//! Second-order boosting on the logistic loss with exact greedy splits. The
//! ensemble predicts `sigmoid(base_score + Σ_k eta·f_k(x))`.

mod json;
mod split;
mod train;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Category, FeatureMatrix};

pub use split::{
    best_split, grad_hess, leaf_weight, logistic_loss, midpoint, sigmoid, split_gain,
    SplitDecision, GAIN_TOLERANCE,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainParams {
    /// Boosting rounds `K`.
    pub rounds: usize,
    /// Shrinkage applied to every tree.
    pub eta: f64,
    pub max_depth: usize,
    /// Penalty per leaf.
    pub gamma: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    pub min_child_hessian: f64,
    /// Initial log-odds.
    pub base_score: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            rounds: 100,
            eta: 0.1,
            max_depth: 4,
            gamma: 0.0,
            lambda: 1.0,
            min_child_hessian: 1.0,
            base_score: 0.0,
        }
    }
}

impl TrainParams {
    /// Every key accepted by [`TrainParams::set`].
    pub const KEYS: &'static [&'static str] = &[
        "rounds",
        "eta",
        "max_depth",
        "gamma",
        "lambda",
        "min_child_hessian",
        "base_score",
    ];

    /// Applies one setting. Returns `Ok(false)` for keys this struct does not know.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        use crate::config::parse_value;
        match key {
            "rounds" => self.rounds = parse_value(key, value)?,
            "eta" => self.eta = parse_value(key, value)?,
            "max_depth" => self.max_depth = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "min_child_hessian" => self.min_child_hessian = parse_value(key, value)?,
            "base_score" => self.base_score = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta must lie in (0, 1]");
        }
        if !(self.gamma >= 0.0 && self.lambda >= 0.0) {
            return bad("gamma and lambda must be non-negative");
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1");
        }
        if !(self.min_child_hessian >= 0.0) || !self.base_score.is_finite() {
            return bad("min_child_hessian must be non-negative and base_score finite");
        }
        Ok(())
    }
}

/// A regression tree. Rows go left iff `x[feat] < thr`.
#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Split {
        feat: usize,
        thr: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        leaf: f64,
    },
}

impl TreeNode {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return *leaf,
                TreeNode::Split {
                    feat,
                    thr,
                    left,
                    right,
                } => {
                    node = if x[*feat] < *thr { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Calls `f` with the feature of every internal node, pre-order.
    pub fn for_each_split(&self, f: &mut impl FnMut(usize)) {
        if let TreeNode::Split {
            feat, left, right, ..
        } = self
        {
            f(*feat);
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }

    pub fn leaves(&self) -> Vec<f64> {
        match self {
            TreeNode::Leaf { leaf } => vec![*leaf],
            TreeNode::Split { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEnsemble {
    pub params: TrainParams,
    pub dimensions: Vec<String>,
    pub categories: Vec<Category>,
    pub trees: Vec<TreeNode>,
    /// Round at which training stopped because the loss would have risen.
    pub stopped_at: Option<usize>,
}

/// Trains on a labelled matrix.
pub fn train(matrix: &FeatureMatrix, params: &TrainParams) -> Result<TreeEnsemble> {
    train_traced(matrix, params).map(|(model, _)| model)
}

/// Like [`train`], also returning the training loss before the first round
/// and after every accepted round.
pub fn train_traced(
    matrix: &FeatureMatrix,
    params: &TrainParams,
) -> Result<(TreeEnsemble, Vec<f64>)> {
    params.validate()?;
    if matrix.n_dims() == 0 {
        return Err(Error::NoFeatures);
    }
    if matrix.n_rows() == 0 {
        return Err(Error::NoRows);
    }
    let labels = matrix
        .labels
        .as_deref()
        .ok_or_else(|| Error::Config("training matrix has no labels".into()))?;
    let fit = train::fit(&matrix.rows, labels, params);
    Ok((
        TreeEnsemble {
            params: params.clone(),
            dimensions: matrix.dimensions.clone(),
            categories: matrix.categories.clone(),
            trees: fit.trees,
            stopped_at: fit.stopped_at,
        },
        fit.losses,
    ))
}

impl TreeEnsemble {
    pub fn predict_logit(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimensions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dimensions.len(),
                got: x.len(),
            });
        }
        Ok(self.params.base_score
            + self
                .trees
                .iter()
                .map(|t| self.params.eta * t.eval(x))
                .sum::<f64>())
    }

    /// Default probability for one instance.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.predict_logit(x).map(sigmoid)
    }

    pub fn predict_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        if matrix.dimensions != self.dimensions {
            return Err(Error::DimensionMismatch {
                expected: self.dimensions.len(),
                got: matrix.n_dims(),
            });
        }
        matrix.rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn importance(&self) -> Importance {
        importance(self)
    }
}

/// Split counts per dimension and their share per category.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Importance {
    pub counts: BTreeMap<String, usize>,
    pub total_splits: usize,
    /// Share of splits per category code; all zero when the model has no splits.
    pub category_shares: BTreeMap<&'static str, f64>,
    pub no_splits: bool,
}

impl Importance {
    pub fn share(&self, category: Category) -> f64 {
        self.category_shares
            .get(category.code())
            .copied()
            .unwrap_or(0.0)
    }
}

/// Counts how often each dimension is used by an internal node across all trees.
pub fn importance(model: &TreeEnsemble) -> Importance {
    let mut per_dim = vec![0usize; model.dimensions.len()];
    for tree in &model.trees {
        tree.for_each_split(&mut |f| per_dim[f] += 1);
    }
    let total: usize = per_dim.iter().sum();
    let mut by_category: BTreeMap<&'static str, usize> = BTreeMap::new();
    for (j, c) in model.categories.iter().enumerate() {
        *by_category.entry(c.code()).or_default() += per_dim[j];
    }
    Importance {
        counts: model.dimensions.iter().cloned().zip(per_dim).collect(),
        total_splits: total,
        category_shares: by_category
            .into_iter()
            .map(|(c, n)| {
                (
                    c,
                    if total == 0 {
                        0.0
                    } else {
                        n as f64 / total as f64
                    },
                )
            })
            .collect(),
        no_splits: total == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::Quarter;

    pub(crate) fn matrix(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> FeatureMatrix {
        let d = rows[0].len();
        FeatureMatrix::new(
            Quarter::new(2013, 1).unwrap(),
            (0..d).map(|j| format!("f{j}")).collect(),
            vec![Category::BasicProfile; d],
            (0..rows.len()).map(|i| format!("C{i:03}")).collect(),
            rows,
            Some(labels),
        )
        .unwrap()
    }

    fn leaf(w: f64) -> TreeNode {
        TreeNode::Leaf { leaf: w }
    }

    fn ensemble(trees: Vec<TreeNode>, dims: usize) -> TreeEnsemble {
        TreeEnsemble {
            params: TrainParams::default(),
            dimensions: (0..dims).map(|j| format!("f{j}")).collect(),
            categories: vec![Category::NetworkStructure; dims],
            trees,
            stopped_at: None,
        }
    }

    #[test]
    fn empty_ensemble_predicts_base() {
        assert_eq!(ensemble(vec![], 1).predict(&[3.0]).unwrap(), 0.5);
    }

    #[test]
    fn single_leaf_prediction() {
        let p = ensemble(vec![leaf(1.0)], 1).predict(&[0.0]).unwrap();
        assert!((p - 0.524_979_187_478_939_8).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            ensemble(vec![], 2).predict(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn all_negative_labels_drive_probabilities_down() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let params = TrainParams {
            rounds: 50,
            ..TrainParams::default()
        };
        let model = train(&matrix(rows.clone(), vec![0; 20]), &params).unwrap();
        assert_eq!(model.trees.len(), 50);
        assert!(model.trees.iter().all(|t| t.depth() == 0));
        for r in &rows {
            assert!(model.predict(r).unwrap() <= 0.05);
        }
    }

    #[test]
    fn root_leaf_only() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let labels = vec![1, 0, 0, 1, 1, 1];
        let params = TrainParams {
            rounds: 1,
            max_depth: 0,
            ..TrainParams::default()
        };
        let model = train(&matrix(rows.clone(), labels), &params).unwrap();
        // G = 6·0.5 − 4 = −1, H = 6·0.25.
        let expected = sigmoid(0.1 * (1.0 / 2.5));
        for r in &rows {
            assert!((model.predict(r).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn no_features_is_an_error() {
        let m = FeatureMatrix::new(
            Quarter::new(2013, 1).unwrap(),
            vec![],
            vec![],
            vec!["C1".into()],
            vec![vec![]],
            Some(vec![1]),
        )
        .unwrap();
        assert!(matches!(
            train(&m, &TrainParams::default()),
            Err(Error::NoFeatures)
        ));
    }

    #[test]
    fn importance_counts_internal_nodes() {
        let tree = TreeNode::Split {
            feat: 1,
            thr: 0.5,
            left: Box::new(TreeNode::Split {
                feat: 1,
                thr: 0.2,
                left: Box::new(leaf(0.1)),
                right: Box::new(leaf(0.2)),
            }),
            right: Box::new(leaf(0.3)),
        };
        let mut model = ensemble(vec![tree], 2);
        model.categories = vec![Category::BasicProfile, Category::Community];
        let imp = model.importance();
        assert_eq!(imp.counts["f1"], 2);
        assert_eq!(imp.total_splits, 2);
        assert_eq!(imp.share(Category::Community), 1.0);
        assert_eq!(imp.share(Category::BasicProfile), 0.0);
    }

    #[test]
    fn leaf_only_importance_is_flagged() {
        let imp = ensemble(vec![leaf(0.3), leaf(-0.1)], 3).importance();
        assert!(imp.no_splits);
        assert!(imp.category_shares.values().all(|&s| s == 0.0));
    }

    #[test]
    fn invalid_params() {
        let p = TrainParams {
            eta: 0.0,
            ..TrainParams::default()
        };
        assert!(p.validate().is_err());
    }
}
