//! Granularity values (pG) derived from the geometry of labeled nodes.
//!
//! All ratios share one denominator, the relevant page area: the page width
//! times the smaller of the page height and five screen heights, anchored at
//! the top-left corner of the page.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::logical_tree::{LogicalNode, LogicalTree};
use crate::snapshot::DomSnapshot;

/// Number of screen heights covered by the relevant page area.
pub const RELEVANT_SCREENS: f64 = 5.0;

/// Global pG used when the tree carries no label at all.
pub const DEFAULT_FALLBACK_PG: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GranularityOptions {
    pub fallback_pg: f64,
    /// Forces the global value instead of deriving it from the tree.
    pub global_override: Option<f64>,
    /// Use the global value for every subtree.
    pub fixed: bool,
}

impl Default for GranularityOptions {
    fn default() -> Self {
        GranularityOptions {
            fallback_pg: DEFAULT_FALLBACK_PG,
            global_override: None,
            fixed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularityContext {
    pub relevant_area: f64,
    pub global_pg: f64,
    pub per_subtree_pg: BTreeMap<String, f64>,
}

impl GranularityContext {
    /// pG governing the subtree rooted at `node_id`.
    pub fn local_pg(&self, node_id: &str) -> f64 {
        self.per_subtree_pg.get(node_id).copied().unwrap_or(self.global_pg)
    }

    /// Area of `rect` over the relevant area, clamped to `[0, 1]`.
    pub fn ratio(&self, rect: &Rect) -> f64 {
        area_ratio(rect, self.relevant_area)
    }
}

pub fn relevant_page_area(s: &DomSnapshot) -> Result<f64> {
    let height = s.page_height().min(RELEVANT_SCREENS * s.viewport_height());
    let area = s.page_width() * height;
    if area.is_finite() && area > 0.0 {
        Ok(area)
    } else {
        Err(Error::DegeneratePage)
    }
}

fn area_ratio(rect: &Rect, relevant_area: f64) -> f64 {
    (rect.area() / relevant_area).clamp(0.0, 1.0)
}

pub fn node_pg(node: &LogicalNode, relevant_area: f64) -> f64 {
    area_ratio(&node.bbox, relevant_area)
}

pub fn compute_context(t: &LogicalTree, s: &DomSnapshot) -> Result<GranularityContext> {
    compute_context_with(t, s, &GranularityOptions::default())
}

/// Global pG is the largest labeled ratio in the tree; each node takes the
/// largest labeled ratio within its own subtree, or the global value when it
/// has no labeled node.
pub fn compute_context_with(
    t: &LogicalTree,
    s: &DomSnapshot,
    opts: &GranularityOptions,
) -> Result<GranularityContext> {
    let relevant_area = relevant_page_area(s)?;
    let mut subtree_max = BTreeMap::new();
    let tree_max = collect_subtree_max(&t.root, relevant_area, &mut subtree_max);

    let global_pg = match opts.global_override {
        Some(v) => v.clamp(0.0, 1.0),
        None => tree_max.unwrap_or(opts.fallback_pg),
    };
    let per_subtree_pg = subtree_max
        .into_iter()
        .map(|(id, max): (String, Option<f64>)| {
            let pg = match max {
                Some(v) if !opts.fixed => v.min(global_pg),
                _ => global_pg,
            };
            (id, pg)
        })
        .collect();
    Ok(GranularityContext {
        relevant_area,
        global_pg,
        per_subtree_pg,
    })
}

/// Records, for every node, the max labeled ratio over its subtree.
fn collect_subtree_max(
    node: &LogicalNode,
    relevant_area: f64,
    out: &mut BTreeMap<String, Option<f64>>,
) -> Option<f64> {
    let below = node
        .children
        .iter()
        .filter_map(|c| collect_subtree_max(c, relevant_area, out))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let own = node.label.map(|_| node_pg(node, relevant_area));
    let total = match (own, below) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    out.insert(node.id.clone(), total);
    total
}
