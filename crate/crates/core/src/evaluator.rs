//! Block-level comparison against a manually built ground truth.
//!
//! Precision is the number of matching blocks over the number of produced
//! blocks; recall is the same count over the number of ground-truth blocks.
//! A produced block matches a ground-truth block when both carry the same
//! function and their IoU reaches the threshold, with a one-to-one greedy
//! assignment by decreasing IoU.

use serde::{Deserialize, Serialize};

use crate::classifier::Function;
use crate::error::{Error, Result};
use crate::geometry::{Rect, AREA_EPSILON};
use crate::segmenter::Block;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.7;

/// Fraction of an unmatched block's area that must lie inside a same-function
/// ground-truth block for it to count as over-segmented.
pub const OVER_SEGMENTED_CONTAINMENT: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtBlock {
    pub rect: Rect,
    pub function: Function,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dom_refs: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub blocks: Vec<GtBlock>,
}

impl GroundTruth {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let gt: GroundTruth = serde_json::from_slice(bytes)?;
        if gt.blocks.is_empty() {
            return Err(Error::EmptyGroundTruth);
        }
        for (i, b) in gt.blocks.iter().enumerate() {
            if !b.rect.is_finite() || b.rect.w < 0.0 || b.rect.h < 0.0 {
                return Err(Error::validation(format!("ground truth block {i}: invalid rect")));
            }
        }
        Ok(gt)
    }

    /// Checks that every block lies inside the page box.
    pub fn check_bounds(&self, page_width: f64, page_height: f64) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            let r = &b.rect;
            if r.x < 0.0 || r.y < 0.0 || r.right() > page_width || r.bottom() > page_height {
                return Err(Error::validation(format!(
                    "ground truth block {i} lies outside the {page_width}x{page_height} page"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub matching: usize,
    pub msos_total: usize,
    pub gt_total: usize,
    pub precision: f64,
    pub recall: f64,
    pub over_segmented: usize,
    pub non_related: usize,
    /// Matched (block id, ground-truth index) pairs, in assignment order.
    pub pairs: Vec<(String, usize)>,
    /// Set when no block was produced; precision is then reported as 0.
    #[serde(default)]
    pub precision_undefined: bool,
}

impl EvalReport {
    /// Report for the given counts, with ratios computed from them.
    pub fn from_counts(
        matching: usize,
        msos_total: usize,
        gt_total: usize,
        over_segmented: usize,
        non_related: usize,
    ) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        EvalReport {
            matching,
            msos_total,
            gt_total,
            precision: ratio(matching, msos_total),
            recall: ratio(matching, gt_total),
            over_segmented,
            non_related,
            pairs: Vec::new(),
            precision_undefined: msos_total == 0,
        }
    }
}

pub fn match_blocks(msos: &[Block], gt: &GroundTruth, iou_threshold: f64) -> Result<EvalReport> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::config(format!("IoU threshold must be in (0, 1], got {iou_threshold}")));
    }
    if gt.blocks.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, b) in msos.iter().enumerate() {
        for (j, g) in gt.blocks.iter().enumerate() {
            if b.function != g.function {
                continue;
            }
            let iou = b.bbox.iou(&g.rect);
            if iou >= iou_threshold {
                candidates.push((iou, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| msos[a.1].id.cmp(&msos[b.1].id))
            .then(a.2.cmp(&b.2))
    });

    let mut msos_used = vec![false; msos.len()];
    let mut gt_used = vec![false; gt.blocks.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !msos_used[i] && !gt_used[j] {
            msos_used[i] = true;
            gt_used[j] = true;
            pairs.push((msos[i].id.clone(), j));
        }
    }

    let mut over_segmented = 0;
    let mut non_related = 0;
    for (b, _) in msos.iter().zip(&msos_used).filter(|(_, used)| !**used) {
        let area = b.bbox.area();
        let inside = area > AREA_EPSILON
            && gt.blocks.iter().any(|g| {
                g.function == b.function
                    && b.bbox.intersection_area(&g.rect) >= OVER_SEGMENTED_CONTAINMENT * area
            });
        if inside {
            over_segmented += 1;
        } else {
            non_related += 1;
        }
    }

    let mut report = EvalReport::from_counts(
        pairs.len(),
        msos.len(),
        gt.blocks.len(),
        over_segmented,
        non_related,
    );
    report.pairs = pairs;
    Ok(report)
}

pub fn format_report(r: &EvalReport) -> Vec<u8> {
    serde_json::to_vec_pretty(r).expect("report serialization is infallible")
}

pub fn parse_report(bytes: &[u8]) -> Result<EvalReport> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Averages over a set of pages, in the shape of a results-table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub pages: usize,
    pub precision: f64,
    pub recall: f64,
    /// Mean over-segmented blocks per page.
    pub over_segmented: f64,
    /// Mean non-related blocks per page.
    pub non_related: f64,
}

pub fn summarize(name: &str, reports: &[EvalReport]) -> SummaryRow {
    let n = reports.len().max(1) as f64;
    let mean = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    SummaryRow {
        name: name.to_string(),
        pages: reports.len(),
        precision: mean(&|r| r.precision),
        recall: mean(&|r| r.recall),
        over_segmented: mean(&|r| r.over_segmented as f64),
        non_related: mean(&|r| r.non_related as f64),
    }
}
