//! Builders for hand-made snapshots in unit tests.

use crate::geometry::Rect;
use crate::snapshot::{DomNode, DomSnapshot, Size};

pub fn el(id: &str, tag: &str, x: f64, y: f64, w: f64, h: f64) -> DomNode {
    DomNode {
        id: id.into(),
        tag: tag.into(),
        attrs: Default::default(),
        listeners: Default::default(),
        rect: Rect::new(x, y, w, h),
        visible: true,
        text_len: 1,
        children: vec![],
    }
}

pub trait NodeExt {
    fn kids(self, children: Vec<DomNode>) -> Self;
    fn listen(self, event: &str) -> Self;
}

impl NodeExt for DomNode {
    fn kids(mut self, children: Vec<DomNode>) -> Self {
        self.children = children;
        self
    }

    fn listen(mut self, event: &str) -> Self {
        self.listeners.insert(event.into());
        self
    }
}

pub fn page(width: f64, height: f64, root: DomNode) -> DomSnapshot {
    DomSnapshot {
        version: 1,
        url: "test".into(),
        page: Size { width, height },
        viewport: Size { width, height },
        root,
    }
}
