//! Brute-force interpreter of the block production rules.
//!
//! Works on a flattened copy of the logical tree with parent links and
//! recomputes every quantity (subtree membership, functions, pG values, median
//! gap, unions) by exhaustive enumeration instead of recursion over the tree.
//! Used as the reference the real segmenter must agree with.

use std::collections::BTreeSet;

use msos::segmenter::{ResiduePolicy, SegmenterConfig};
use msos::{DomSnapshot, Function, LogicalNode, LogicalTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl R {
    fn of(r: &msos::Rect) -> R {
        R { x: r.x, y: r.y, w: r.w, h: r.h }
    }
    fn area(&self) -> f64 {
        self.w * self.h
    }
    fn solid(&self) -> bool {
        self.area() > 1e-9
    }
    fn cover(&self, o: &R) -> R {
        let x0 = if self.x < o.x { self.x } else { o.x };
        let y0 = if self.y < o.y { self.y } else { o.y };
        let x1 = if self.x + self.w > o.x + o.w { self.x + self.w } else { o.x + o.w };
        let y1 = if self.y + self.h > o.y + o.h { self.y + self.h } else { o.y + o.h };
        R { x: x0, y: y0, w: x1 - x0, h: y1 - y0 }
    }
    fn overlap(&self, o: &R) -> f64 {
        let w = (self.x + self.w).min(o.x + o.w) - self.x.max(o.x);
        let h = (self.y + self.h).min(o.y + o.h) - self.y.max(o.y);
        if w < 0.0 || h < 0.0 {
            0.0
        } else {
            w * h
        }
    }
    fn distance(&self, o: &R) -> f64 {
        let mut dx = 0.0f64;
        if o.x > self.x + self.w {
            dx = o.x - (self.x + self.w);
        } else if self.x > o.x + o.w {
            dx = self.x - (o.x + o.w);
        }
        let mut dy = 0.0f64;
        if o.y > self.y + self.h {
            dy = o.y - (self.y + self.h);
        } else if self.y > o.y + o.h {
            dy = self.y - (o.y + o.h);
        }
        (dx * dx + dy * dy).sqrt()
    }
}

/// Covering rect ignoring zero-area inputs unless all of them are zero-area.
fn cover_all(rects: &[R]) -> Option<R> {
    let solid: Vec<&R> = rects.iter().filter(|r| r.solid()).collect();
    let pool: Vec<&R> = if solid.is_empty() { rects.iter().collect() } else { solid };
    let mut it = pool.into_iter();
    let first = *it.next()?;
    Some(it.fold(first, |acc, r| acc.cover(r)))
}

struct Flat {
    refs: Vec<String>,
    bbox: R,
    label: Option<Function>,
    parent: Option<usize>,
    children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBlock {
    pub function: Function,
    pub refs: Vec<String>,
    pub rect: R,
    pub pg: f64,
}

struct Oracle<'a> {
    tree: &'a LogicalTree,
    nodes: Vec<Flat>,
    relevant: f64,
    global: f64,
    threshold: f64,
    cfg: &'a SegmenterConfig,
}

impl Oracle<'_> {
    fn is_below(&self, j: usize, i: usize) -> bool {
        let mut cur = Some(j);
        while let Some(c) = cur {
            if c == i {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    fn members(&self, i: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&j| self.is_below(j, i)).collect()
    }

    fn all_refs(&self, i: usize) -> Vec<String> {
        // arena is in pre-order, so member order is document order
        self.members(i).into_iter().flat_map(|j| self.nodes[j].refs.clone()).collect()
    }

    fn functions(&self, i: usize) -> BTreeSet<Function> {
        self.all_refs(i)
            .iter()
            .filter_map(|r| self.tree.elements[r].function)
            .collect()
    }

    fn ratio(&self, r: &R) -> f64 {
        let v = r.area() / self.relevant;
        if v > 1.0 {
            1.0
        } else if v < 0.0 {
            0.0
        } else {
            v
        }
    }

    fn local(&self, i: usize) -> f64 {
        let mut best: Option<f64> = None;
        for j in self.members(i) {
            if self.nodes[j].label.is_some() {
                let v = self.ratio(&self.nodes[j].bbox);
                if best.map_or(true, |b| v > b) {
                    best = Some(v);
                }
            }
        }
        match best {
            Some(v) if v < self.global => v,
            Some(_) => self.global,
            None => self.global,
        }
    }

    fn may_join(&self, last: usize, cand: usize, union: &R, pg: f64) -> bool {
        let a = &self.nodes[last];
        let b = &self.nodes[cand];
        if self.cfg.proximity && a.bbox.distance(&b.bbox) > self.threshold {
            return false;
        }
        if self.cfg.similarity {
            let ea = &self.tree.elements[&a.refs[0]];
            let eb = &self.tree.elements[&b.refs[0]];
            let same_kind = ea.tag == eb.tag || (ea.class.is_some() && ea.class == eb.class);
            let t = self.cfg.align_tolerance_px;
            let aligned = (a.bbox.x - b.bbox.x).abs() <= t
                || ((a.bbox.x + a.bbox.w) - (b.bbox.x + b.bbox.w)).abs() <= t
                || (a.bbox.y - b.bbox.y).abs() <= t
                || ((a.bbox.y + a.bbox.h) - (b.bbox.y + b.bbox.h)).abs() <= t;
            if !same_kind && !aligned {
                return false;
            }
        }
        if self.cfg.simplicity && self.ratio(union) > pg {
            return false;
        }
        true
    }
}

/// Group under construction: function (None for residue), pG, element ids.
type Group = (Option<Function>, f64, Vec<String>);

pub fn oracle_segment(tree: &LogicalTree, s: &DomSnapshot, cfg: &SegmenterConfig) -> Vec<OracleBlock> {
    // flatten in pre-order with explicit parent links
    let mut nodes: Vec<Flat> = Vec::new();
    let mut stack: Vec<(&LogicalNode, Option<usize>)> = vec![(&tree.root, None)];
    while let Some((n, parent)) = stack.pop() {
        let idx = nodes.len();
        nodes.push(Flat {
            refs: n.dom_refs.clone(),
            bbox: R::of(&n.bbox),
            label: n.label,
            parent,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            nodes[p].children.push(idx);
        }
        for c in n.children.iter().rev() {
            stack.push((c, Some(idx)));
        }
    }

    let page_h = s.page.height;
    let five = 5.0 * s.viewport.height;
    let relevant = s.page.width * if page_h < five { page_h } else { five };

    let mut oracle = Oracle {
        tree,
        nodes,
        relevant,
        global: 0.0,
        threshold: 0.0,
        cfg,
    };
    let labeled: Vec<f64> = (0..oracle.nodes.len())
        .filter(|&i| oracle.nodes[i].label.is_some())
        .map(|i| oracle.ratio(&oracle.nodes[i].bbox))
        .collect();
    oracle.global = labeled.iter().cloned().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))).unwrap_or(0.30);

    let mut gaps = Vec::new();
    for n in &oracle.nodes {
        for k in 1..n.children.len() {
            let a = &oracle.nodes[n.children[k - 1]].bbox;
            let b = &oracle.nodes[n.children[k]].bbox;
            gaps.push(a.distance(b));
        }
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if gaps.is_empty() {
        0.0
    } else if gaps.len() % 2 == 1 {
        gaps[gaps.len() / 2]
    } else {
        (gaps[gaps.len() / 2 - 1] + gaps[gaps.len() / 2]) / 2.0
    };
    let scaled = cfg.median_gap_factor * median;
    oracle.threshold = if scaled > cfg.min_gap_px { scaled } else { cfg.min_gap_px };

    // explicit work stack of (sibling list, position, pG)
    let mut groups: Vec<Group> = Vec::new();
    let mut work: Vec<(Vec<usize>, usize, f64)> = vec![(vec![0], 0, oracle.global)];
    while let Some((list, pos, pg)) = work.pop() {
        if pos >= list.len() {
            continue;
        }
        let i = list[pos];
        let node = &oracle.nodes[i];
        let funcs = oracle.functions(i);
        let merge_as = if let Some(f) = node.label {
            Some(f)
        } else if funcs.is_empty() {
            groups.push((None, pg, oracle.all_refs(i)));
            work.push((list, pos + 1, pg));
            continue;
        } else if funcs.len() > 1 {
            None
        } else {
            let f = *funcs.iter().next().unwrap();
            if oracle.ratio(&node.bbox) > pg && !node.children.is_empty() {
                None
            } else {
                Some(f)
            }
        };
        match merge_as {
            None => {
                let children = node.children.clone();
                let local = oracle.local(i);
                work.push((list, pos + 1, pg));
                work.push((children, 0, local));
            }
            Some(f) => {
                let mut taken = vec![i];
                let mut union = node.bbox;
                let mut k = pos + 1;
                while k < list.len() {
                    let cand = list[k];
                    if oracle.functions(cand).iter().any(|&g| g != f) {
                        break;
                    }
                    let next_union = cover_all(&[union, oracle.nodes[cand].bbox]).unwrap();
                    if !oracle.may_join(*taken.last().unwrap(), cand, &next_union, pg) {
                        break;
                    }
                    taken.push(cand);
                    union = next_union;
                    k += 1;
                }
                let refs = taken.iter().flat_map(|&t| oracle.all_refs(t)).collect();
                groups.push((Some(f), pg, refs));
                work.push((list, k, pg));
            }
        }
    }

    if cfg.overlap_adoption {
        let mut moves: Vec<(usize, usize)> = Vec::new();
        for (li, leaf) in oracle.nodes.iter().enumerate() {
            if !leaf.children.is_empty() || leaf.label.is_some() || !leaf.bbox.solid() {
                continue;
            }
            let need = cfg.overlap_fraction * leaf.bbox.area();
            let mut best: Option<(f64, usize)> = None;
            for (gi, g) in groups.iter().enumerate() {
                if g.0 != Some(Function::Multimedia) {
                    continue;
                }
                for r in &g.2 {
                    let e = &tree.elements[r];
                    if e.function != Some(Function::Multimedia) {
                        continue;
                    }
                    let o = leaf.bbox.overlap(&R::of(&e.rect));
                    if o >= need {
                        let better = match best {
                            None => true,
                            Some((b, _)) => o > b,
                        };
                        if better {
                            best = Some((o, gi));
                        }
                    }
                }
            }
            if let Some((_, target)) = best {
                let already = groups[target].2.contains(&leaf.refs[0]);
                if !already {
                    moves.push((li, target));
                }
            }
        }
        for (li, target) in moves {
            let refs = oracle.nodes[li].refs.clone();
            for g in groups.iter_mut() {
                g.2.retain(|r| !refs.contains(r));
            }
            groups[target].2.extend(refs);
        }
    }

    let mut out = Vec::new();
    for (f, pg, refs) in groups {
        if refs.is_empty() {
            continue;
        }
        let function = match (f, cfg.residue) {
            (Some(f), _) => f,
            (None, ResiduePolicy::Drop) => continue,
            (None, ResiduePolicy::EmitInteractive) => Function::Interactive,
        };
        let rects: Vec<R> = refs.iter().map(|r| R::of(&tree.elements[r].rect)).collect();
        out.push(OracleBlock {
            function,
            rect: cover_all(&rects).unwrap(),
            refs,
            pg,
        });
    }
    out
}

/// Compare the segmenter's blocks against the oracle's; `None` when equal.
pub fn diff(blocks: &[msos::Block], expected: &[OracleBlock]) -> Option<String> {
    if blocks.len() != expected.len() {
        return Some(format!("{} blocks vs oracle {}", blocks.len(), expected.len()));
    }
    for (i, (b, e)) in blocks.iter().zip(expected).enumerate() {
        let same = b.function == e.function
            && b.dom_refs == e.refs
            && R::of(&b.bbox) == e.rect
            && b.source_pg == e.pg;
        if !same {
            return Some(format!("block {i}: {b:?} vs oracle {e:?}"));
        }
    }
    None
}
