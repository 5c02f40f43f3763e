//! Axis-aligned rectangles in CSS pixel page coordinates.

use serde::{Deserialize, Serialize};

/// Absolute tolerance used when comparing areas.
pub const AREA_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_empty(&self) -> bool {
        self.area() <= AREA_EPSILON
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &Rect) -> Rect {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        let r = self.right().max(other.right());
        let b = self.bottom().max(other.bottom());
        Rect::new(x, y, r - x, b - y)
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x = self.x.max(other.x);
        let y = self.y.max(other.y);
        let r = self.right().min(other.right());
        let b = self.bottom().min(other.bottom());
        if r < x || b < y {
            None
        } else {
            Some(Rect::new(x, y, r - x, b - y))
        }
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        self.intersection(other).map_or(0.0, |r| r.area())
    }

    /// Intersection over union; 0 when the union is empty.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= AREA_EPSILON {
            0.0
        } else {
            inter / union
        }
    }

    /// Euclidean distance between the closest edges, 0 when touching or overlapping.
    pub fn gap(&self, other: &Rect) -> f64 {
        let dx = (other.x - self.right()).max(self.x - other.right()).max(0.0);
        let dy = (other.y - self.bottom()).max(self.y - other.bottom()).max(0.0);
        dx.hypot(dy)
    }

    /// Clamp into `[0, width] x [0, height]`.
    pub fn clamp_to(&self, width: f64, height: f64) -> Rect {
        let x = self.x.clamp(0.0, width);
        let y = self.y.clamp(0.0, height);
        let r = self.right().clamp(0.0, width);
        let b = self.bottom().clamp(0.0, height);
        Rect::new(x, y, (r - x).max(0.0), (b - y).max(0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }

    /// Covering rectangle of a set of rects. Zero-area rects are ignored unless
    /// every rect is zero-area; `None` for an empty input.
    pub fn union_all<'a>(rects: impl IntoIterator<Item = &'a Rect>) -> Option<Rect> {
        let mut solid: Option<Rect> = None;
        let mut any: Option<Rect> = None;
        for r in rects {
            any = Some(any.map_or(*r, |u| u.union(r)));
            if !r.is_empty() {
                solid = Some(solid.map_or(*r, |u| u.union(r)));
            }
        }
        solid.or(any)
    }
}
