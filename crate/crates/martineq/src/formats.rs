//! JSON input formats: probability trees, integrand specs and search configs.
//!
//! Tree file:
//!
//! ```json
//! { "d": 1, "M0": [0.0],
//!   "root": { "children": [
//!     { "prob": 0.5, "incr": [1.0], "node": {} },
//!     { "prob": 0.5, "incr": [-1.0], "node": {} } ] } }
//! ```
//!
//! A node is either `{}` (leaf) or `{"children": [...]}`. Shallow leaves are
//! padded to the full depth with probability-one zero increments.

use std::fs;
use std::path::Path;

use martineq_core::ptree::Branch;
use martineq_core::sharpness::SearchConfig;
use martineq_core::wiener::IntegrandSpec;
use martineq_core::{ProbTree, TreeNode};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub d: usize,
    #[serde(rename = "M0")]
    pub m0: Vec<f64>,
    pub root: NodeFile,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<BranchFile>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchFile {
    pub prob: f64,
    pub incr: Vec<f64>,
    pub node: NodeFile,
}

impl NodeFile {
    fn to_node(&self) -> TreeNode {
        match &self.children {
            None => TreeNode::Leaf,
            Some(children) => TreeNode::Internal(
                children
                    .iter()
                    .map(|b| Branch { prob: b.prob, incr: b.incr.clone(), node: b.node.to_node() })
                    .collect(),
            ),
        }
    }

    fn from_node(node: &TreeNode) -> Self {
        match node {
            TreeNode::Leaf => Self { children: None },
            TreeNode::Internal(children) => Self {
                children: Some(
                    children
                        .iter()
                        .map(|b| BranchFile { prob: b.prob, incr: b.incr.clone(), node: Self::from_node(&b.node) })
                        .collect(),
                ),
            },
        }
    }
}

impl TreeFile {
    /// Builds the tree. Structural problems are errors; martingale and
    /// probability violations are recorded on the tree for the caller.
    pub fn to_tree(&self) -> Result<ProbTree> {
        Ok(ProbTree::new_padded(self.d, self.m0.clone(), self.root.to_node())?)
    }

    pub fn from_tree(tree: &ProbTree) -> Self {
        Self { d: tree.dim(), m0: tree.m0().to_vec(), root: NodeFile::from_node(&tree.to_node()) }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.into(), source })
}

pub fn read_tree(path: &Path) -> Result<TreeFile> {
    read_json(path)
}

pub fn read_spec(path: &Path) -> Result<IntegrandSpec> {
    let spec: IntegrandSpec = read_json(path)?;
    spec.check()?;
    Ok(spec)
}

pub fn read_search_config(path: &Path) -> Result<SearchConfig> {
    read_json(path)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}
