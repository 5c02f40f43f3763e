//! Seeded random page generator for property and acceptance tests.

use std::collections::{BTreeMap, BTreeSet};

use msos::snapshot::Size;
use msos::{DomNode, DomSnapshot, Rect};
use rand::Rng;

pub const PAGE_WIDTH: f64 = 1000.0;
pub const PAGE_HEIGHT: f64 = 2000.0;
pub const VIEWPORT_HEIGHT: f64 = 600.0;

const TAGS: &[(&str, u32)] = &[
    ("div", 30),
    ("p", 14),
    ("span", 10),
    ("section", 5),
    ("video", 7),
    ("img", 7),
    ("button", 9),
    ("a", 8),
    ("input", 4),
    ("script", 3),
    ("ul", 3),
];

const CLASSES: &[&str] = &["item", "nav", "card", "media"];

fn pick_tag(rng: &mut impl Rng) -> &'static str {
    let total: u32 = TAGS.iter().map(|t| t.1).sum();
    let mut roll = rng.gen_range(0..total);
    for &(tag, weight) in TAGS {
        if roll < weight {
            return tag;
        }
        roll -= weight;
    }
    "div"
}

struct Builder<'r, R: Rng> {
    rng: &'r mut R,
    next_id: usize,
    budget: usize,
}

impl<R: Rng> Builder<'_, R> {
    fn node(&mut self, rect: Rect, depth: usize) -> DomNode {
        let id = format!("n{}", self.next_id);
        self.next_id += 1;
        self.budget = self.budget.saturating_sub(1);
        let tag = if depth == 0 { "body" } else { pick_tag(self.rng) };

        let mut attrs = BTreeMap::new();
        if tag == "a" && self.rng.gen_bool(0.8) {
            attrs.insert("href".to_string(), "/x".to_string());
        }
        if self.rng.gen_bool(0.3) {
            let c = CLASSES[self.rng.gen_range(0..CLASSES.len())];
            attrs.insert("class".to_string(), format!("{c} extra"));
        }
        if tag == "div" && self.rng.gen_bool(0.05) {
            attrs.insert("role".to_string(), "button".to_string());
        }
        let mut listeners = BTreeSet::new();
        if depth > 0 && self.rng.gen_bool(0.1) {
            listeners.insert("click".to_string());
        }
        let visible = depth == 0 || self.rng.gen_bool(0.96);
        let text_len = if self.rng.gen_bool(0.6) { self.rng.gen_range(1..200) } else { 0 };

        let mut children = Vec::new();
        let leafy = matches!(tag, "video" | "img" | "input" | "script");
        if !leafy && self.budget > 0 && depth < 6 {
            let wanted = self.rng.gen_range(0..=4usize).min(self.budget);
            let vertical = self.rng.gen_bool(0.7);
            let gap = [0.0, 4.0, 8.0, 12.0, 24.0, 40.0][self.rng.gen_range(0..6)];
            let mut cursor = if vertical { rect.y } else { rect.x };
            for _ in 0..wanted {
                if self.budget == 0 {
                    break;
                }
                let span = if vertical { rect.h } else { rect.w };
                let size = (span / (wanted as f64 + 1.0) * self.rng.gen_range(0.5..1.2)).floor().max(0.0);
                let other = if vertical { rect.w } else { rect.h };
                let cross = (other * self.rng.gen_range(0.4..1.0)).floor();
                let mut child_rect = if vertical {
                    Rect::new(rect.x, cursor, cross, size)
                } else {
                    Rect::new(cursor, rect.y, size, cross)
                };
                // occasional overlay on top of the previous sibling
                if self.rng.gen_bool(0.1) {
                    let back = size * 0.6;
                    if vertical {
                        child_rect.y = (child_rect.y - back).max(rect.y);
                    } else {
                        child_rect.x = (child_rect.x - back).max(rect.x);
                    }
                }
                if self.rng.gen_bool(0.05) {
                    child_rect.w = 0.0;
                    child_rect.h = 0.0;
                }
                cursor = if vertical { child_rect.bottom() } else { child_rect.right() } + gap;
                children.push(self.node(child_rect, depth + 1));
            }
        }
        DomNode {
            id,
            tag: tag.to_string(),
            attrs,
            listeners,
            rect,
            visible,
            text_len,
            children,
        }
    }
}

/// Random page with at most `max_nodes` DOM elements.
pub fn random_snapshot(rng: &mut impl Rng, max_nodes: usize) -> DomSnapshot {
    let budget = rng.gen_range(1..=max_nodes);
    let mut b = Builder { rng, next_id: 0, budget };
    let height = [600.0, 1200.0, PAGE_HEIGHT][b.rng.gen_range(0..3)];
    let root = b.node(Rect::new(0.0, 0.0, PAGE_WIDTH, height), 0);
    let snapshot = DomSnapshot {
        version: 1,
        url: "random".into(),
        page: Size { width: PAGE_WIDTH, height: PAGE_HEIGHT },
        viewport: Size { width: PAGE_WIDTH, height: VIEWPORT_HEIGHT },
        root,
    };
    msos::parse_snapshot(&msos::serialize_snapshot(&snapshot)).expect("generated snapshot is valid")
}
