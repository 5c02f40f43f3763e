//! Function-aware web page segmentation for splitting a page across two screens.
//!
//! The pipeline turns a DOM snapshot into a logical tree, labels nodes with the
//! end-user function of their content ("multimedia" or "interactive"), derives
//! granularity thresholds from the labeled geometry and produces blocks that
//! never mix functions. Blocks can then be mapped onto two devices, rendered
//! as an SVG overlay, or scored against a ground truth.

pub mod classifier;
pub mod cli;
pub mod devices;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod granularity;
pub mod logical_tree;
pub mod pipeline;
pub mod render;
pub mod segmenter;
pub mod snapshot;
#[cfg(test)]
mod testutil;

pub use classifier::{ClassifierConfig, Function};
pub use error::{Error, Result};
pub use geometry::Rect;
pub use logical_tree::{LogicalNode, LogicalTree};
pub use segmenter::{Block, BlockSet};
pub use snapshot::{parse_snapshot, serialize_snapshot, DomNode, DomSnapshot};
