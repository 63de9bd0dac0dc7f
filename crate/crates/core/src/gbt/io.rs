use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GbtModel, PlattParams, Tree, TreeNode};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    /// Split slot, or -1 for a leaf.
    feat: i64,
    thr: f64,
    default_left: bool,
    left: i64,
    right: i64,
    leaf: f64,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format_version: u32,
    base_score: f64,
    eta: f64,
    platt: PlattParams,
    slot_names: Vec<String>,
    trees: Vec<TreeDoc>,
}

fn to_doc(m: &GbtModel) -> ModelDoc {
    let trees = m
        .trees
        .iter()
        .map(|t| TreeDoc {
            nodes: t
                .nodes
                .iter()
                .map(|n| match *n {
                    TreeNode::Split {
                        feature,
                        threshold,
                        default_left,
                        left,
                        right,
                    } => NodeDoc {
                        feat: feature as i64,
                        thr: threshold,
                        default_left,
                        left: left as i64,
                        right: right as i64,
                        leaf: 0.0,
                    },
                    TreeNode::Leaf { value } => NodeDoc {
                        feat: -1,
                        thr: 0.0,
                        default_left: false,
                        left: -1,
                        right: -1,
                        leaf: value,
                    },
                })
                .collect(),
        })
        .collect();
    ModelDoc {
        format_version: FORMAT_VERSION,
        base_score: m.base_score,
        eta: m.eta,
        platt: PlattParams {
            a: m.platt_a,
            b: m.platt_b,
        },
        slot_names: m.slot_names.clone(),
        trees,
    }
}

fn from_doc(doc: ModelDoc) -> Result<GbtModel> {
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let width = doc.slot_names.len();
    let mut trees = Vec::with_capacity(doc.trees.len());
    for (ti, t) in doc.trees.into_iter().enumerate() {
        if t.nodes.is_empty() {
            return Err(Error::ModelFormat(format!("tree {ti} has no nodes")));
        }
        let n = t.nodes.len();
        let mut nodes = Vec::with_capacity(n);
        for (i, d) in t.nodes.into_iter().enumerate() {
            let bad = |what: &str| Error::ModelFormat(format!("tree {ti} node {i}: {what}"));
            if d.feat < 0 {
                nodes.push(TreeNode::Leaf { value: d.leaf });
                continue;
            }
            if d.feat as usize >= width {
                return Err(bad("feature index out of range"));
            }
            for c in [d.left, d.right] {
                if c <= i as i64 || c as usize >= n {
                    return Err(bad("child index out of range"));
                }
            }
            nodes.push(TreeNode::Split {
                feature: d.feat as usize,
                threshold: d.thr,
                default_left: d.default_left,
                left: d.left as usize,
                right: d.right as usize,
            });
        }
        trees.push(Tree { nodes });
    }
    Ok(GbtModel {
        trees,
        base_score: doc.base_score,
        eta: doc.eta,
        platt_a: doc.platt.a,
        platt_b: doc.platt.b,
        slot_names: doc.slot_names,
    })
}

pub(crate) fn to_json(m: &GbtModel) -> Result<String> {
    Ok(serde_json::to_string(&to_doc(m))?)
}

pub fn from_json(s: &str) -> Result<GbtModel> {
    from_doc(serde_json::from_str(s)?)
}

pub fn save_model(model: &GbtModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GbtModel> {
    let path = path.as_ref();
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&s)
}
