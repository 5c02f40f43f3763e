//! DOM snapshot data model: the single input document consumed by the engine.
//!
//! A snapshot carries the element tree of a rendered page together with the
//! geometry, visibility and captured event listeners of every element. Geometry
//! is pre-computed by the browser-side extractor; nothing here lays out HTML.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomNode {
    pub id: String,
    pub tag: String,
    #[serde(default)]
    pub attrs: BTreeMap<String, String>,
    #[serde(default)]
    pub listeners: BTreeSet<String>,
    pub rect: Rect,
    pub visible: bool,
    #[serde(default)]
    pub text_len: u64,
    #[serde(default)]
    pub children: Vec<DomNode>,
}

impl DomNode {
    /// Pre-order traversal, parents before children, siblings in document order.
    pub fn descendants(&self) -> Vec<&DomNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(DomNode::count).sum::<usize>()
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.get(name).map(String::as_str)
    }

    /// First token of the `class` attribute.
    pub fn primary_class(&self) -> Option<&str> {
        self.attr("class").and_then(|c| c.split_whitespace().next())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomSnapshot {
    pub version: u32,
    #[serde(default)]
    pub url: String,
    pub page: Size,
    pub viewport: Size,
    pub root: DomNode,
}

impl DomSnapshot {
    pub fn page_width(&self) -> f64 {
        self.page.width
    }

    pub fn page_height(&self) -> f64 {
        self.page.height
    }

    /// Screen height of the capturing device.
    pub fn viewport_height(&self) -> f64 {
        self.viewport.height
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    pub fn find(&self, id: &str) -> Option<&DomNode> {
        self.root.descendants().into_iter().find(|n| n.id == id)
    }

    /// Map of element id to its parent id; the root maps to `None`.
    pub fn parents(&self) -> BTreeMap<&str, Option<&str>> {
        let mut out = BTreeMap::new();
        out.insert(self.root.id.as_str(), None);
        for node in self.root.descendants() {
            for child in &node.children {
                out.insert(child.id.as_str(), Some(node.id.as_str()));
            }
        }
        out
    }
}

/// Parse and validate a snapshot document.
///
/// Tags and listener names are lower-cased and every rectangle is clamped to
/// the page box. Negative sizes, duplicate ids and unknown versions are rejected.
pub fn parse_snapshot(bytes: &[u8]) -> Result<DomSnapshot> {
    let mut snapshot: DomSnapshot = serde_json::from_slice(bytes)?;
    validate(&snapshot)?;
    normalize(&mut snapshot);
    Ok(snapshot)
}

pub fn serialize_snapshot(snapshot: &DomSnapshot) -> Vec<u8> {
    serde_json::to_vec_pretty(snapshot).expect("snapshot serialization is infallible")
}

fn validate(s: &DomSnapshot) -> Result<()> {
    if s.version != SNAPSHOT_VERSION {
        return Err(Error::validation(format!(
            "unsupported snapshot version {}",
            s.version
        )));
    }
    for (name, v) in [
        ("page width", s.page.width),
        ("page height", s.page.height),
        ("viewport height", s.viewport.height),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::validation(format!("{name} must be positive, got {v}")));
        }
    }
    if !s.viewport.width.is_finite() || s.viewport.width < 0.0 {
        return Err(Error::validation("viewport width must be non-negative"));
    }

    let mut seen = HashSet::new();
    for node in s.root.descendants() {
        if !seen.insert(node.id.as_str()) {
            return Err(Error::validation(format!("duplicate node id \"{}\"", node.id)));
        }
        let r = &node.rect;
        if !r.is_finite() {
            return Err(Error::validation(format!("node \"{}\": non-finite rect", node.id)));
        }
        if r.w < 0.0 || r.h < 0.0 {
            return Err(Error::validation(format!(
                "node \"{}\": negative rect size {}x{}",
                node.id, r.w, r.h
            )));
        }
    }
    Ok(())
}

fn normalize(s: &mut DomSnapshot) {
    fn walk(node: &mut DomNode, width: f64, height: f64) {
        node.tag = node.tag.to_ascii_lowercase();
        if node.listeners.iter().any(|l| l.chars().any(|c| c.is_ascii_uppercase())) {
            node.listeners = node.listeners.iter().map(|l| l.to_ascii_lowercase()).collect();
        }
        node.rect = node.rect.clamp_to(width, height);
        for child in &mut node.children {
            walk(child, width, height);
        }
    }
    let (w, h) = (s.page.width, s.page.height);
    walk(&mut s.root, w, h);
}
