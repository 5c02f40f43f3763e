//! Static SVG overlay of segmentation results.

use std::fmt::Write as _;

use crate::classifier::Function;
use crate::geometry::Rect;
use crate::segmenter::Block;
use crate::snapshot::DomSnapshot;

pub const INTERACTIVE_STROKE: &str = "#808080";
pub const MULTIMEDIA_STROKE: &str = "#800080";

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayShape {
    pub rect: Rect,
    pub function: Function,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayDoc {
    pub width: f64,
    pub height: f64,
    pub shapes: Vec<OverlayShape>,
}

impl OverlayDoc {
    pub fn new(s: &DomSnapshot, blocks: &[Block]) -> Self {
        OverlayDoc {
            width: s.page_width(),
            height: s.page_height(),
            shapes: blocks
                .iter()
                .map(|b| OverlayShape {
                    rect: b.bbox,
                    function: b.function,
                    label: format!("{} pG={}", b.id, b.source_pg),
                })
                .collect(),
        }
    }

    /// Shapes are painted in block order, so later blocks sit on top.
    pub fn to_svg(&self, scale: f64) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            self.width * scale,
            self.height * scale,
            self.width * scale,
            self.height * scale
        );
        for shape in &self.shapes {
            let stroke = match shape.function {
                Function::Interactive => INTERACTIVE_STROKE,
                Function::Multimedia => MULTIMEDIA_STROKE,
            };
            let r = &shape.rect;
            let _ = writeln!(
                out,
                r#"  <g class="{}"><rect x="{}" y="{}" width="{}" height="{}" fill="{}" fill-opacity="0.15" stroke="{}" stroke-width="2"/><text x="{}" y="{}" font-size="12" fill="{}">{}</text></g>"#,
                shape.function,
                r.x * scale,
                r.y * scale,
                r.w * scale,
                r.h * scale,
                stroke,
                stroke,
                r.x * scale + 2.0,
                r.y * scale + 12.0,
                stroke,
                escape(&shape.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_overlay(s: &DomSnapshot, blocks: &[Block]) -> Vec<u8> {
    render_overlay_scaled(s, blocks, 1.0)
}

pub fn render_overlay_scaled(s: &DomSnapshot, blocks: &[Block], scale: f64) -> Vec<u8> {
    OverlayDoc::new(s, blocks).to_svg(scale).into_bytes()
}
