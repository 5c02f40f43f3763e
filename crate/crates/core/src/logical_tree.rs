//! Logical tree: an abstraction over the retained DOM elements.
//!
//! Every retained element becomes a logical node carrying its geometry and,
//! when the classifier recognizes it, a function label. [`optimize_tree`] then
//! shrinks the number of leaves by merging equally labeled neighbours and
//! lifting lone labels to their parents.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::classifier::{ClassifierConfig, Function};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::snapshot::{DomNode, DomSnapshot};

/// Per-element facts the later stages need without going back to the snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementInfo {
    pub rect: Rect,
    pub tag: String,
    pub class: Option<String>,
    /// Classifier verdict for the element itself.
    pub function: Option<Function>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalNode {
    pub id: String,
    pub dom_refs: Vec<String>,
    pub bbox: Rect,
    pub label: Option<Function>,
    pub children: Vec<LogicalNode>,
}

impl LogicalNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order traversal including `self`.
    pub fn iter(&self) -> impl Iterator<Item = &LogicalNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn leaves(&self) -> impl Iterator<Item = &LogicalNode> {
        self.iter().filter(|n| n.is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn node_count(&self) -> usize {
        self.iter().count()
    }

    /// Every element referenced in the subtree, in pre-order.
    pub fn subtree_refs(&self) -> Vec<&str> {
        self.iter()
            .flat_map(|n| n.dom_refs.iter().map(String::as_str))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalTree {
    pub snapshot_ref: String,
    pub root: LogicalNode,
    #[serde(skip)]
    pub elements: BTreeMap<String, ElementInfo>,
}

impl LogicalTree {
    pub fn element(&self, id: &str) -> &ElementInfo {
        &self.elements[id]
    }

    /// Classifier functions found anywhere in the subtree of `node`.
    pub fn subtree_functions(&self, node: &LogicalNode) -> BTreeSet<Function> {
        node.iter()
            .flat_map(|n| n.dom_refs.iter())
            .filter_map(|r| self.elements.get(r).and_then(|e| e.function))
            .collect()
    }

    /// Covering rectangle of a list of elements.
    pub fn union_of<'a>(&self, refs: impl IntoIterator<Item = &'a str>) -> Option<Rect> {
        let rects: Vec<Rect> = refs.into_iter().map(|r| self.elements[r].rect).collect();
        Rect::union_all(&rects)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("logical tree serialization is infallible")
    }
}

/// Build the partially labeled logical tree of a snapshot.
///
/// Dropped elements disappear and their retained descendants are re-parented
/// to the nearest retained ancestor. A node is labeled with its own element's
/// function unless a descendant carries a different function.
pub fn build_logical_tree(s: &DomSnapshot, cfg: &ClassifierConfig) -> Result<LogicalTree> {
    let mut elements = BTreeMap::new();
    let mut tops = build_nodes(&s.root, cfg, &mut elements);
    let mut root = match tops.len() {
        0 => return Err(Error::EmptyPage),
        1 => tops.remove(0),
        _ => {
            // Dropped root with several retained subtrees: the root element
            // stands in as a plain container.
            elements.insert(s.root.id.clone(), element_info(&s.root, None));
            let bbox = Rect::union_all(tops.iter().map(|n| &n.bbox)).unwrap_or_default();
            LogicalNode {
                id: s.root.id.clone(),
                dom_refs: vec![s.root.id.clone()],
                bbox,
                label: None,
                children: tops,
            }
        }
    };
    assign_labels(&mut root, &elements);
    refresh_bbox(&mut root, &elements);
    let snapshot_ref = if s.url.is_empty() { s.root.id.clone() } else { s.url.clone() };
    Ok(LogicalTree { snapshot_ref, root, elements })
}

fn element_info(node: &DomNode, function: Option<Function>) -> ElementInfo {
    ElementInfo {
        rect: node.rect,
        tag: node.tag.clone(),
        class: node.primary_class().map(str::to_string),
        function,
    }
}

fn build_nodes(
    node: &DomNode,
    cfg: &ClassifierConfig,
    elements: &mut BTreeMap<String, ElementInfo>,
) -> Vec<LogicalNode> {
    let children: Vec<LogicalNode> = node
        .children
        .iter()
        .flat_map(|c| build_nodes(c, cfg, elements))
        .collect();
    if !cfg.is_retained(node) {
        return children;
    }
    elements.insert(node.id.clone(), element_info(node, cfg.classify_element(node)));
    let bbox = Rect::union_all(std::iter::once(&node.rect).chain(children.iter().map(|c| &c.bbox)))
        .unwrap_or(node.rect);
    vec![LogicalNode {
        id: node.id.clone(),
        dom_refs: vec![node.id.clone()],
        bbox,
        label: None,
        children,
    }]
}

/// Recomputes every box as the union of all element rects in the subtree.
///
/// Returns the (non-empty rects only, all rects) unions so that zero-area
/// elements only count when the whole subtree is zero-area.
fn refresh_bbox(node: &mut LogicalNode, elements: &BTreeMap<String, ElementInfo>) -> (Option<Rect>, Option<Rect>) {
    let join = |a: Option<Rect>, b: Option<Rect>| match (a, b) {
        (Some(a), Some(b)) => Some(a.union(&b)),
        (a, b) => a.or(b),
    };
    let (mut solid, mut any) = (None, None);
    for r in &node.dom_refs {
        let rect = elements[r].rect;
        any = join(any, Some(rect));
        if !rect.is_empty() {
            solid = join(solid, Some(rect));
        }
    }
    for child in &mut node.children {
        let (s, a) = refresh_bbox(child, elements);
        solid = join(solid, s);
        any = join(any, a);
    }
    if let Some(b) = solid.or(any) {
        node.bbox = b;
    }
    (solid, any)
}

/// Labels every node from its own element, returning the subtree's functions.
fn assign_labels(node: &mut LogicalNode, elements: &BTreeMap<String, ElementInfo>) -> BTreeSet<Function> {
    let mut below = BTreeSet::new();
    for child in &mut node.children {
        below.extend(assign_labels(child, elements));
    }
    let own: BTreeSet<Function> = node
        .dom_refs
        .iter()
        .filter_map(|r| elements[r].function)
        .collect();
    node.label = match own.iter().next() {
        Some(&f) if own.len() == 1 && below.iter().all(|&b| b == f) => Some(f),
        _ => None,
    };
    below.extend(own);
    below
}

/// Merge labeled siblings and propagate labels upward until nothing changes.
///
/// Each pass walks the tree breadth-first. At every node, adjacent children
/// sharing a label are merged into one node (concatenated references and
/// children, union box). A node then adopts the label of its only labeled
/// child when that child is the only one carrying any function and the node's
/// whole subtree has that single function.
pub fn optimize_tree(t: &LogicalTree) -> LogicalTree {
    let mut out = t.clone();
    while optimize_pass(&mut out.root, &out.elements) {}
    refresh_bbox(&mut out.root, &out.elements);
    out
}

fn optimize_pass(root: &mut LogicalNode, elements: &BTreeMap<String, ElementInfo>) -> bool {
    let mut changed = false;
    let mut queue: VecDeque<&mut LogicalNode> = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        changed |= merge_labeled_siblings(&mut node.children);
        changed |= propagate_label(node, elements);
        queue.extend(node.children.iter_mut());
    }
    changed
}

fn merge_labeled_siblings(children: &mut Vec<LogicalNode>) -> bool {
    let before = children.len();
    let mut merged: Vec<LogicalNode> = Vec::with_capacity(before);
    for child in children.drain(..) {
        match merged.last_mut() {
            Some(prev) if prev.label.is_some() && prev.label == child.label => {
                prev.dom_refs.extend(child.dom_refs);
                prev.bbox = Rect::union_all([&prev.bbox, &child.bbox]).unwrap_or(prev.bbox);
                prev.children.extend(child.children);
            }
            _ => merged.push(child),
        }
    }
    *children = merged;
    children.len() != before
}

fn propagate_label(node: &mut LogicalNode, elements: &BTreeMap<String, ElementInfo>) -> bool {
    if node.label.is_some() {
        return false;
    }
    let functions_of = |n: &LogicalNode| -> BTreeSet<Function> {
        n.iter()
            .flat_map(|m| m.dom_refs.iter())
            .filter_map(|r| elements[r].function)
            .collect()
    };
    let mut bearing = node.children.iter().filter(|c| !functions_of(c).is_empty());
    let (Some(only), None) = (bearing.next(), bearing.next()) else {
        return false;
    };
    let Some(label) = only.label else { return false };
    let own_ok = node
        .dom_refs
        .iter()
        .filter_map(|r| elements[r].function)
        .all(|f| f == label);
    if own_ok && functions_of(only).len() == 1 {
        node.label = Some(label);
        true
    } else {
        false
    }
}
