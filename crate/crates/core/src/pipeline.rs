//! End-to-end composition: snapshot to blocks.

use crate::classifier::ClassifierConfig;
use crate::error::{Error, Result};
use crate::granularity::{compute_context_with, GranularityContext, GranularityOptions};
use crate::logical_tree::{build_logical_tree, optimize_tree, LogicalTree};
use crate::segmenter::{segment, Diagnostic, SegmenterConfig, Segmentation};
use crate::snapshot::DomSnapshot;

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub classifier: ClassifierConfig,
    pub granularity: GranularityOptions,
    pub segmenter: SegmenterConfig,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Optimized tree; `None` when the page had no retained element.
    pub tree: Option<LogicalTree>,
    pub context: Option<GranularityContext>,
    pub segmentation: Segmentation,
}

/// Build, optimize, measure and segment. A page without any retained element
/// yields no block and an [`Diagnostic::EmptyPage`] entry rather than an error.
pub fn run(s: &DomSnapshot, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let tree = match build_logical_tree(s, &cfg.classifier) {
        Ok(t) => optimize_tree(&t),
        Err(Error::EmptyPage) => {
            return Ok(PipelineOutput {
                tree: None,
                context: None,
                segmentation: Segmentation {
                    global_pg: cfg.granularity.global_override.unwrap_or(cfg.granularity.fallback_pg),
                    blocks: Vec::new(),
                    diagnostics: vec![Diagnostic::EmptyPage],
                },
            })
        }
        Err(e) => return Err(e),
    };
    let context = compute_context_with(&tree, s, &cfg.granularity)?;
    let segmentation = segment(&tree, &context, &cfg.segmenter);
    Ok(PipelineOutput {
        tree: Some(tree),
        context: Some(context),
        segmentation,
    })
}
