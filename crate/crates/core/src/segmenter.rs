//! Block production from the partially labeled logical tree.
//!
//! The tree is walked depth-first from the root with the global pG:
//!
//! 1. a labeled node is merged with its following siblings;
//! 2. an unlabeled node whose subtree holds several functions is descended;
//! 3. an unlabeled node whose subtree holds one function is descended when its
//!    relative area exceeds the current pG, and merged with its following
//!    siblings otherwise.
//!
//! Merging scans the next siblings left to right. A sibling whose subtree
//! carries another function stops the scan, whatever the geometry says. A
//! sibling without any function is absorbed, and so takes the group's
//! function, when the Gestalt predicates accept it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifier::Function;
use crate::geometry::Rect;
use crate::granularity::GranularityContext;
use crate::logical_tree::{LogicalNode, LogicalTree};

/// What happens to content no labeled group absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResiduePolicy {
    /// Leave it out of the output and report it as a diagnostic.
    #[default]
    Drop,
    /// Emit it as interactive blocks.
    EmitInteractive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterConfig {
    pub proximity: bool,
    pub similarity: bool,
    pub simplicity: bool,
    /// Lower bound of the proximity threshold, in pixels.
    pub min_gap_px: f64,
    /// Proximity threshold as a multiple of the page's median sibling gap.
    pub median_gap_factor: f64,
    pub align_tolerance_px: f64,
    /// Pull unlabeled leaves lying over multimedia content into that block.
    pub overlap_adoption: bool,
    pub overlap_fraction: f64,
    pub residue: ResiduePolicy,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            proximity: true,
            similarity: true,
            simplicity: true,
            min_gap_px: 16.0,
            median_gap_factor: 1.5,
            align_tolerance_px: 4.0,
            overlap_adoption: true,
            overlap_fraction: 0.5,
            residue: ResiduePolicy::Drop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    #[serde(rename = "rect")]
    pub bbox: Rect,
    pub function: Function,
    pub dom_refs: Vec<String>,
    pub source_pg: f64,
}

/// Blocks file written by `segment` and read by the other subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSet {
    pub global_pg: f64,
    pub blocks: Vec<Block>,
}

impl BlockSet {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("block serialization is infallible")
    }

    pub fn from_json(bytes: &[u8]) -> crate::Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    EmptyPage,
    SubtreePg { node: String, pg: f64 },
    ResidueDropped { node: String, dom_refs: Vec<String> },
    ResidueEmitted { node: String, dom_refs: Vec<String> },
    OverlapAdopted { leaf: String, into: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub global_pg: f64,
    pub blocks: Vec<Block>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Segmentation {
    pub fn block_set(&self) -> BlockSet {
        BlockSet {
            global_pg: self.global_pg,
            blocks: self.blocks.clone(),
        }
    }

    /// Element ids left out of every block.
    pub fn dropped_refs(&self) -> Vec<&str> {
        self.diagnostics
            .iter()
            .filter_map(|d| match d {
                Diagnostic::ResidueDropped { dom_refs, .. } => Some(dom_refs),
                _ => None,
            })
            .flatten()
            .map(String::as_str)
            .collect()
    }
}

/// Geometric merge predicates, with thresholds resolved for one page.
#[derive(Debug, Clone)]
pub struct GestaltRules<'t> {
    tree: &'t LogicalTree,
    cfg: &'t SegmenterConfig,
    relevant_area: f64,
    proximity_threshold: f64,
}

impl<'t> GestaltRules<'t> {
    pub fn new(tree: &'t LogicalTree, g: &GranularityContext, cfg: &'t SegmenterConfig) -> Self {
        let median = median_sibling_gap(&tree.root);
        GestaltRules {
            tree,
            cfg,
            relevant_area: g.relevant_area,
            proximity_threshold: cfg.min_gap_px.max(cfg.median_gap_factor * median),
        }
    }

    pub fn proximity_threshold(&self) -> f64 {
        self.proximity_threshold
    }

    pub fn proximity(&self, a: &LogicalNode, b: &LogicalNode) -> bool {
        a.bbox.gap(&b.bbox) <= self.proximity_threshold
    }

    /// Same tag, same primary class, or a shared edge line.
    pub fn similarity(&self, a: &LogicalNode, b: &LogicalNode) -> bool {
        let ea = self.tree.element(&a.dom_refs[0]);
        let eb = self.tree.element(&b.dom_refs[0]);
        if ea.tag == eb.tag || (ea.class.is_some() && ea.class == eb.class) {
            return true;
        }
        let tol = self.cfg.align_tolerance_px;
        let (ra, rb) = (&a.bbox, &b.bbox);
        (ra.x - rb.x).abs() <= tol
            || (ra.right() - rb.right()).abs() <= tol
            || (ra.y - rb.y).abs() <= tol
            || (ra.bottom() - rb.bottom()).abs() <= tol
    }

    /// The merged region must not outgrow the current pG.
    pub fn simplicity(&self, union: &Rect, pg: f64) -> bool {
        (union.area() / self.relevant_area).clamp(0.0, 1.0) <= pg
    }
}

/// Whether `b` may join the group whose last member is `a` and whose covering
/// rectangle after the merge would be `union`.
pub fn gestalt_mergeable(
    a: &LogicalNode,
    b: &LogicalNode,
    union: &Rect,
    pg: f64,
    rules: &GestaltRules<'_>,
) -> bool {
    let cfg = rules.cfg;
    (!cfg.proximity || rules.proximity(a, b))
        && (!cfg.similarity || rules.similarity(a, b))
        && (!cfg.simplicity || rules.simplicity(union, pg))
}

/// Median edge gap between consecutive siblings over the whole tree, 0 when
/// no node has two children.
pub fn median_sibling_gap(root: &LogicalNode) -> f64 {
    let mut gaps: Vec<f64> = root
        .iter()
        .flat_map(|n| n.children.windows(2).map(|w| w[0].bbox.gap(&w[1].bbox)))
        .collect();
    if gaps.is_empty() {
        return 0.0;
    }
    gaps.sort_by(f64::total_cmp);
    let mid = gaps.len() / 2;
    if gaps.len() % 2 == 1 {
        gaps[mid]
    } else {
        (gaps[mid - 1] + gaps[mid]) / 2.0
    }
}

struct Group {
    function: Option<Function>,
    source_pg: f64,
    /// Logical node that started the group.
    head: String,
    refs: Vec<String>,
}

struct Run<'t, 'r> {
    tree: &'t LogicalTree,
    g: &'r GranularityContext,
    rules: GestaltRules<'t>,
    groups: Vec<Group>,
    diagnostics: Vec<Diagnostic>,
}

impl<'t> Run<'t, '_> {
    fn process_siblings(&mut self, nodes: &'t [LogicalNode], pg: f64) {
        let mut i = 0;
        while i < nodes.len() {
            let node = &nodes[i];
            if let Some(f) = node.label {
                i = self.merge_run(nodes, i, f, pg);
                continue;
            }
            let functions = self.tree.subtree_functions(node);
            let mut iter = functions.iter();
            match (iter.next(), iter.next()) {
                (None, _) => {
                    self.groups.push(Group {
                        function: None,
                        source_pg: pg,
                        head: node.id.clone(),
                        refs: owned_refs(node),
                    });
                    i += 1;
                }
                (Some(&f), None) => {
                    if self.g.ratio(&node.bbox) > pg && !node.is_leaf() {
                        self.descend(node);
                        i += 1;
                    } else {
                        i = self.merge_run(nodes, i, f, pg);
                    }
                }
                (Some(_), Some(_)) => {
                    debug_assert!(!node.is_leaf(), "mixed-function leaf {}", node.id);
                    self.descend(node);
                    i += 1;
                }
            }
        }
    }

    fn descend(&mut self, node: &'t LogicalNode) {
        let pg = self.g.local_pg(&node.id);
        self.diagnostics.push(Diagnostic::SubtreePg {
            node: node.id.clone(),
            pg,
        });
        self.process_siblings(&node.children, pg);
    }

    /// Merge `nodes[start]` with as many following siblings as allowed and
    /// emit one block; returns the index of the first sibling not merged.
    fn merge_run(&mut self, nodes: &'t [LogicalNode], start: usize, function: Function, pg: f64) -> usize {
        let mut last = &nodes[start];
        let mut union = last.bbox;
        let mut refs = owned_refs(last);
        let mut next = start + 1;
        while let Some(sibling) = nodes.get(next) {
            if self.tree.subtree_functions(sibling).iter().any(|&f| f != function) {
                break;
            }
            let candidate = Rect::union_all([&union, &sibling.bbox]).unwrap_or(union);
            if !gestalt_mergeable(last, sibling, &candidate, pg, &self.rules) {
                break;
            }
            refs.extend(owned_refs(sibling));
            union = candidate;
            last = sibling;
            next += 1;
        }
        self.groups.push(Group {
            function: Some(function),
            source_pg: pg,
            head: nodes[start].id.clone(),
            refs,
        });
        next
    }

    /// Moves unlabeled leaves lying mostly over a multimedia element into the
    /// block holding that element.
    fn adopt_overlapping_leaves(&mut self, root: &LogicalNode, fraction: f64) {
        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (gi, group) in self.groups.iter().enumerate() {
            for r in &group.refs {
                owner.insert(r.as_str(), gi);
            }
        }
        let mut moves: Vec<(&LogicalNode, usize)> = Vec::new();
        for leaf in root.leaves().filter(|l| l.label.is_none()) {
            let area = leaf.bbox.area();
            if area <= crate::geometry::AREA_EPSILON {
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for (gi, group) in self.groups.iter().enumerate() {
                if group.function != Some(Function::Multimedia) {
                    continue;
                }
                for r in &group.refs {
                    let el = self.tree.element(r);
                    if el.function != Some(Function::Multimedia) {
                        continue;
                    }
                    let overlap = leaf.bbox.intersection_area(&el.rect);
                    if overlap >= fraction * area && best.map_or(true, |(b, _)| overlap > b) {
                        best = Some((overlap, gi));
                    }
                }
            }
            if let Some((_, target)) = best {
                if owner.get(leaf.dom_refs[0].as_str()) != Some(&target) {
                    moves.push((leaf, target));
                }
            }
        }
        for (leaf, target) in moves {
            for group in &mut self.groups {
                group.refs.retain(|r| !leaf.dom_refs.contains(r));
            }
            self.groups[target].refs.extend(leaf.dom_refs.iter().cloned());
            self.diagnostics.push(Diagnostic::OverlapAdopted {
                leaf: leaf.id.clone(),
                into: self.groups[target].head.clone(),
            });
        }
        self.groups.retain(|g| !g.refs.is_empty());
    }
}

fn owned_refs(node: &LogicalNode) -> Vec<String> {
    node.subtree_refs().into_iter().map(str::to_string).collect()
}

/// Segment an optimized logical tree into function-homogeneous blocks, listed
/// in document order.
pub fn segment(t: &LogicalTree, g: &GranularityContext, cfg: &SegmenterConfig) -> Segmentation {
    let mut run = Run {
        tree: t,
        g,
        rules: GestaltRules::new(t, g, cfg),
        groups: Vec::new(),
        diagnostics: Vec::new(),
    };
    run.process_siblings(std::slice::from_ref(&t.root), g.global_pg);
    if cfg.overlap_adoption {
        run.adopt_overlapping_leaves(&t.root, cfg.overlap_fraction);
    }

    let mut blocks = Vec::new();
    let mut diagnostics = run.diagnostics;
    for group in run.groups {
        let function = match (group.function, cfg.residue) {
            (Some(f), _) => f,
            (None, ResiduePolicy::Drop) => {
                diagnostics.push(Diagnostic::ResidueDropped {
                    node: group.head,
                    dom_refs: group.refs,
                });
                continue;
            }
            (None, ResiduePolicy::EmitInteractive) => {
                diagnostics.push(Diagnostic::ResidueEmitted {
                    node: group.head,
                    dom_refs: group.refs.clone(),
                });
                Function::Interactive
            }
        };
        let bbox = t
            .union_of(group.refs.iter().map(String::as_str))
            .expect("groups are never empty");
        blocks.push(Block {
            id: format!("b{}", blocks.len()),
            bbox,
            function,
            dom_refs: group.refs,
            source_pg: group.source_pg,
        });
    }
    Segmentation {
        global_pg: g.global_pg,
        blocks,
        diagnostics,
    }
}
