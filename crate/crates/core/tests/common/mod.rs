#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::collections::BTreeMap;

use msos::granularity::{compute_context, GranularityContext};
use msos::logical_tree::{build_logical_tree, optimize_tree};
use msos::segmenter::{segment, SegmenterConfig, Segmentation};
use msos::{ClassifierConfig, DomSnapshot, LogicalTree};

/// Optimized tree, context and segmentation of a snapshot with default settings.
pub fn pipeline(s: &DomSnapshot, cfg: &SegmenterConfig) -> Option<(LogicalTree, GranularityContext, Segmentation)> {
    let tree = optimize_tree(&build_logical_tree(s, &ClassifierConfig::default()).ok()?);
    let g = compute_context(&tree, s).unwrap();
    let out = segment(&tree, &g, cfg);
    Some((tree, g, out))
}

/// Multiset of element references over the whole tree.
pub fn ref_multiset(t: &LogicalTree) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for r in t.root.subtree_refs() {
        *m.entry(r.to_string()).or_insert(0) += 1;
    }
    m
}
