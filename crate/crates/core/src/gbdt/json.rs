use serde::ser::{Error as _, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use super::{TrainParams, TreeEnsemble, TreeNode};
use crate::error::{Error, Result};
use crate::features::Category;

const FORMAT: &str = "gnrisk-gbdt-logistic";

/// A float written with 17 significant digits, enough to read back exactly.
struct Exact(f64);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom("non-finite number in model"));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl Serialize for TreeNode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TreeNode::Leaf { leaf } => {
                let mut st = s.serialize_struct("Leaf", 1)?;
                st.serialize_field("leaf", &Exact(*leaf))?;
                st.end()
            }
            TreeNode::Split {
                feat,
                thr,
                left,
                right,
            } => {
                let mut st = s.serialize_struct("Split", 4)?;
                st.serialize_field("feat", feat)?;
                st.serialize_field("thr", &Exact(*thr))?;
                st.serialize_field("left", left)?;
                st.serialize_field("right", right)?;
                st.end()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Split {
        feat: usize,
        thr: f64,
        left: Box<NodeDoc>,
        right: Box<NodeDoc>,
    },
    Leaf {
        leaf: f64,
    },
}

impl From<NodeDoc> for TreeNode {
    fn from(doc: NodeDoc) -> Self {
        match doc {
            NodeDoc::Leaf { leaf } => TreeNode::Leaf { leaf },
            NodeDoc::Split {
                feat,
                thr,
                left,
                right,
            } => TreeNode::Split {
                feat,
                thr,
                left: Box::new((*left).into()),
                right: Box::new((*right).into()),
            },
        }
    }
}

impl<'de> Deserialize<'de> for TreeNode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        NodeDoc::deserialize(d).map(Into::into)
    }
}

struct ParamsDoc<'a>(&'a TrainParams);

impl Serialize for ParamsDoc<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let p = self.0;
        let mut st = s.serialize_struct("TrainParams", 7)?;
        st.serialize_field("rounds", &p.rounds)?;
        st.serialize_field("eta", &Exact(p.eta))?;
        st.serialize_field("max_depth", &p.max_depth)?;
        st.serialize_field("gamma", &Exact(p.gamma))?;
        st.serialize_field("lambda", &Exact(p.lambda))?;
        st.serialize_field("min_child_hessian", &Exact(p.min_child_hessian))?;
        st.serialize_field("base_score", &Exact(p.base_score))?;
        st.end()
    }
}

#[derive(Serialize)]
struct ModelOut<'a> {
    format: &'static str,
    params: ParamsDoc<'a>,
    dimensions: &'a [String],
    categories: &'a [Category],
    stopped_at: Option<usize>,
    trees: &'a [TreeNode],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelIn {
    format: String,
    params: TrainParams,
    dimensions: Vec<String>,
    categories: Vec<Category>,
    stopped_at: Option<usize>,
    trees: Vec<TreeNode>,
}

impl TreeEnsemble {
    /// Serialises the model as one JSON document.
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(&ModelOut {
            format: FORMAT,
            params: ParamsDoc(&self.params),
            dimensions: &self.dimensions,
            categories: &self.categories,
            stopped_at: self.stopped_at,
            trees: &self.trees,
        })?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelIn = serde_json::from_str(text)?;
        if doc.format != FORMAT {
            return Err(<serde_json::Error as serde::de::Error>::custom(format!(
                "unknown model format `{}`",
                doc.format
            ))
            .into());
        }
        if doc.categories.len() != doc.dimensions.len() {
            return Err(Error::DimensionMismatch {
                expected: doc.dimensions.len(),
                got: doc.categories.len(),
            });
        }
        let d = doc.dimensions.len();
        for tree in &doc.trees {
            let mut bad = None;
            tree.for_each_split(&mut |f| {
                if f >= d {
                    bad = Some(f);
                }
            });
            if let Some(f) = bad {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: f + 1,
                });
            }
        }
        Ok(TreeEnsemble {
            params: doc.params,
            dimensions: doc.dimensions,
            categories: doc.categories,
            trees: doc.trees,
            stopped_at: doc.stopped_at,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::tests::matrix;
    use crate::gbdt::train;

    #[test]
    fn round_trip_is_exact() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                vec![
                    (i as f64 * 0.37).sin(),
                    (i as f64 / 7.0).exp(),
                    (i % 5) as f64 / 3.0,
                ]
            })
            .collect();
        let labels = (0..40).map(|i| u8::from((i * 7) % 11 < 4)).collect();
        let m = matrix(rows, labels);
        let model = train(&m, &TrainParams::default()).unwrap();
        let text = model.to_json().unwrap();
        let back = TreeEnsemble::from_json(&text).unwrap();
        assert_eq!(back, model);
        for r in &m.rows {
            assert_eq!(
                back.predict(r).unwrap().to_bits(),
                model.predict(r).unwrap().to_bits()
            );
        }
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn node_shapes() {
        let tree = TreeNode::Split {
            feat: 0,
            thr: 0.5,
            left: Box::new(TreeNode::Leaf { leaf: -0.25 }),
            right: Box::new(TreeNode::Leaf { leaf: 0.1 }),
        };
        let text = serde_json::to_string(&tree).unwrap();
        assert_eq!(
            text,
            r#"{"feat":0,"thr":5.0000000000000000e-1,"left":{"leaf":-2.5000000000000000e-1},"right":{"leaf":1.0000000000000001e-1}}"#
        );
        assert_eq!(serde_json::from_str::<TreeNode>(&text).unwrap(), tree);
    }

    #[test]
    fn out_of_range_feature_is_rejected() {
        let text = r#"{"format":"gnrisk-gbdt-logistic","params":{"rounds":1,"eta":0.1,"max_depth":1,"gamma":0,"lambda":1,"min_child_hessian":1,"base_score":0},"dimensions":["a"],"categories":["BP"],"stopped_at":null,"trees":[{"feat":3,"thr":1,"left":{"leaf":0},"right":{"leaf":1}}]}"#;
        assert!(TreeEnsemble::from_json(text).is_err());
    }
}
