//! Grid lattice and the exhaustive scan over grid-aligned rectangles.
//!
//! Grid lines sit at integer multiples of the pitch. A coordinate `v` is
//! mapped to a *site* on a doubled lattice: `2l` when `v` lies on line `l`,
//! `2l + 1` when it lies strictly between lines `l` and `l + 1`. A closed box
//! spanning lines `[a, b]` then contains exactly the sites `[2a, 2b]`, which
//! lets the scan reuse per-site case bitsets without re-testing coordinates.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::GridBox;
use crate::mapping::PolylineGraph;

/// Largest line index `l` with `l * pitch <= v`.
fn line_at_or_below(v: f64, pitch: f64) -> i64 {
    let mut l = (v / pitch).floor() as i64;
    while (l + 1) as f64 * pitch <= v {
        l += 1;
    }
    while l as f64 * pitch > v {
        l -= 1;
    }
    l
}

/// Smallest line index `l` with `l * pitch >= v`.
fn line_at_or_above(v: f64, pitch: f64) -> i64 {
    let mut l = (v / pitch).ceil() as i64;
    while ((l - 1) as f64) * pitch >= v {
        l -= 1;
    }
    while (l as f64) * pitch < v {
        l += 1;
    }
    l
}

pub(crate) fn site(v: f64, pitch: f64) -> i64 {
    line_at_or_below(v, pitch) + line_at_or_above(v, pitch)
}

/// Grid lines covering the bounding rectangle of a set of graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub pitch: f64,
    pub x_lines: (i64, i64),
    pub y_lines: (i64, i64),
}

impl Lattice {
    /// Returns `None` when there are no nodes.
    pub fn covering(graphs: &[PolylineGraph], pitch: f64) -> Option<Self> {
        let mut nodes = graphs.iter().flat_map(|g| g.nodes.iter());
        let first = nodes.next()?;
        let (mut x0, mut x1, mut y0, mut y1) = (first[0], first[0], first[1], first[1]);
        for n in nodes {
            x0 = x0.min(n[0]);
            x1 = x1.max(n[0]);
            y0 = y0.min(n[1]);
            y1 = y1.max(n[1]);
        }
        // one line beyond an extreme that sits on a line, so boxes can close
        // on it from outside
        let lines = |lo: f64, hi: f64| {
            let a = line_at_or_above(lo, pitch) - 1;
            let b = line_at_or_below(hi, pitch) + 1;
            (a, b)
        };
        Some(Self {
            pitch,
            x_lines: lines(x0, x1),
            y_lines: lines(y0, y1),
        })
    }

    pub fn cells(&self) -> (usize, usize) {
        (
            (self.x_lines.1 - self.x_lines.0) as usize,
            (self.y_lines.1 - self.y_lines.0) as usize,
        )
    }

    pub fn to_box(&self, id: impl Into<String>, r: &Rect) -> GridBox {
        GridBox {
            id: id.into(),
            x1: r.i0 as f64 * self.pitch,
            x2: r.i1 as f64 * self.pitch,
            y1: r.j0 as f64 * self.pitch,
            y2: r.j1 as f64 * self.pitch,
        }
    }

    /// Line indices of an aligned box, or `None` if a corner is off-grid.
    pub fn rect_of(&self, b: &GridBox) -> Option<Rect> {
        let idx = |v: f64| {
            let l = line_at_or_below(v, self.pitch);
            (l as f64 * self.pitch == v).then_some(l)
        };
        Some(Rect {
            i0: idx(b.x1)?,
            i1: idx(b.x2)?,
            j0: idx(b.y1)?,
            j1: idx(b.y2)?,
        })
    }
}

/// A rectangle in grid-line indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub i0: i64,
    pub i1: i64,
    pub j0: i64,
    pub j1: i64,
}

impl Rect {
    pub fn cells(&self) -> (i64, i64) {
        (self.i1 - self.i0, self.j1 - self.j0)
    }

    pub fn area(&self) -> i64 {
        let (w, h) = self.cells();
        w * h
    }
}

/// A scanned rectangle with the per-class counts of active cases it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub rect: Rect,
    pub counts: Vec<usize>,
}

impl Candidate {
    pub fn support(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Dominant class; ties go to the lower class index.
    pub fn dominant(&self) -> (usize, usize) {
        dominant(&self.counts)
    }

    pub fn is_pure(&self) -> bool {
        let s = self.support();
        s > 0 && self.dominant().1 == s
    }
}

pub(crate) fn dominant(counts: &[usize]) -> (usize, usize) {
    let mut best = (0, 0);
    for (c, &n) in counts.iter().enumerate() {
        if n > best.1 {
            best = (c, n);
        }
    }
    best
}

type Order = fn(Rect, &[usize], Rect, &[usize]) -> Ordering;

fn pure_cmp(ra: Rect, ca: &[usize], rb: Rect, cb: &[usize]) -> Ordering {
    let (sa, sb): (usize, usize) = (ca.iter().sum(), cb.iter().sum());
    sb.cmp(&sa)
        .then(ra.area().cmp(&rb.area()))
        .then(ra.cmp(&rb))
}

fn joint_cmp(ra: Rect, ca: &[usize], rb: Rect, cb: &[usize]) -> Ordering {
    let (sa, sb): (usize, usize) = (ca.iter().sum(), cb.iter().sum());
    let (da, db) = (dominant(ca).1, dominant(cb).1);
    (db * sa)
        .cmp(&(da * sb))
        .then(sb.cmp(&sa))
        .then(ra.area().cmp(&rb.area()))
        .then(ra.cmp(&rb))
}

/// Order for pure boxes of one class: support descending, then area, then
/// corner order.
pub fn pure_order(a: &Candidate, b: &Candidate) -> Ordering {
    pure_cmp(a.rect, &a.counts, b.rect, &b.counts)
}

/// Joint ranking: purity descending, support descending, area ascending,
/// corner order. Purity is compared exactly by cross-multiplication.
pub fn joint_order(a: &Candidate, b: &Candidate) -> Ordering {
    joint_cmp(a.rect, &a.counts, b.rect, &b.counts)
}

/// Bounded best-first list under a total order.
#[derive(Debug, Clone)]
struct Top {
    limit: usize,
    items: Vec<Candidate>,
    order: Order,
}

impl Top {
    fn new(limit: usize, order: Order) -> Self {
        Self {
            limit,
            items: Vec::new(),
            order,
        }
    }

    fn admits(&self, rect: Rect, counts: &[usize]) -> bool {
        self.limit > 0
            && (self.items.len() < self.limit
                || self
                    .items
                    .last()
                    .is_some_and(|w| (self.order)(rect, counts, w.rect, &w.counts) == Ordering::Less))
    }

    fn push(&mut self, c: Candidate) {
        let pos = self
            .items
            .binary_search_by(|x| (self.order)(x.rect, &x.counts, c.rect, &c.counts))
            .unwrap_or_else(|p| p);
        self.items.insert(pos, c);
        self.items.truncate(self.limit);
    }

    fn merge(mut self, other: Top) -> Top {
        for c in other.items {
            if self.admits(c.rect, &c.counts) {
                self.push(c);
            }
        }
        self
    }
}

/// Results of one scan over all candidate rectangles.
#[derive(Debug, Clone, Default)]
pub struct ScanResult {
    /// Per class: best pure boxes with support at least the pure minimum.
    pub pure_by_class: Vec<Vec<Candidate>>,
    /// Best boxes under [`joint_order`].
    pub joint: Vec<Candidate>,
}

/// Per-site bitsets of the active cases' nodes.
pub struct Scanner {
    lattice: Lattice,
    words: usize,
    n_classes: usize,
    class_masks: Vec<Vec<u64>>,
    /// Indexed by x-site offset: `(y-site offset, case)` pairs.
    columns: Vec<Vec<(usize, usize)>>,
    y_sites: usize,
}

impl Scanner {
    pub fn new(
        lattice: Lattice,
        graphs: &[PolylineGraph],
        labels: &[usize],
        n_classes: usize,
        active: &[bool],
    ) -> Self {
        let n = graphs.len();
        let words = n.div_ceil(64).max(1);
        let mut class_masks = vec![vec![0u64; words]; n_classes];
        for (case, &l) in labels.iter().enumerate() {
            class_masks[l][case / 64] |= 1 << (case % 64);
        }
        let x_base = 2 * lattice.x_lines.0;
        let y_base = 2 * lattice.y_lines.0;
        let x_sites = (2 * (lattice.x_lines.1 - lattice.x_lines.0) + 1) as usize;
        let y_sites = (2 * (lattice.y_lines.1 - lattice.y_lines.0) + 1) as usize;
        let mut columns = vec![Vec::new(); x_sites];
        for (case, g) in graphs.iter().enumerate() {
            if !active[case] {
                continue;
            }
            for node in &g.nodes {
                let sx = site(node[0], lattice.pitch) - x_base;
                let sy = site(node[1], lattice.pitch) - y_base;
                if (0..x_sites as i64).contains(&sx) && (0..y_sites as i64).contains(&sy) {
                    columns[sx as usize].push((sy as usize, case));
                }
            }
        }
        Self {
            lattice,
            words,
            n_classes,
            class_masks,
            columns,
            y_sites,
        }
    }

    /// Visits every rectangle of 1..=max_w by 1..=max_h cells that covers at
    /// least one active case, for the rectangles whose left line is `i0`.
    fn sweep_column<F: FnMut(Rect, &[usize])>(
        &self,
        i0: i64,
        max_w: usize,
        max_h: usize,
        visit: &mut F,
    ) {
        let (xl0, xl1) = self.lattice.x_lines;
        let (yl0, yl1) = self.lattice.y_lines;
        let words = self.words;
        let mut strip = vec![0u64; self.y_sites * words];
        let mut row_used = vec![false; self.y_sites];
        let mut acc = vec![0u64; words];
        let mut counts = vec![0usize; self.n_classes];
        let add_site = |strip: &mut [u64], used: &mut [bool], xs: usize| {
            for &(ys, case) in &self.columns[xs] {
                strip[ys * words + case / 64] |= 1 << (case % 64);
                used[ys] = true;
            }
        };
        add_site(&mut strip, &mut row_used, (2 * (i0 - xl0)) as usize);
        for w in 1..=max_w as i64 {
            let i1 = i0 + w;
            if i1 > xl1 {
                break;
            }
            add_site(&mut strip, &mut row_used, (2 * (i1 - xl0) - 1) as usize);
            add_site(&mut strip, &mut row_used, (2 * (i1 - xl0)) as usize);
            for j0 in yl0..yl1 {
                let base = (2 * (j0 - yl0)) as usize;
                acc.copy_from_slice(&strip[base * words..(base + 1) * words]);
                let mut any = row_used[base];
                for h in 1..=max_h as i64 {
                    let j1 = j0 + h;
                    if j1 > yl1 {
                        break;
                    }
                    let r = (2 * (j1 - yl0)) as usize;
                    for row in [r - 1, r] {
                        if row_used[row] {
                            any = true;
                            let src = &strip[row * words..(row + 1) * words];
                            for (a, s) in acc.iter_mut().zip(src) {
                                *a |= s;
                            }
                        }
                    }
                    if !any {
                        continue;
                    }
                    let mut support = 0;
                    for (c, mask) in self.class_masks.iter().enumerate() {
                        let n: u32 = acc.iter().zip(mask).map(|(a, m)| (a & m).count_ones()).sum();
                        counts[c] = n as usize;
                        support += n as usize;
                    }
                    if support > 0 {
                        visit(Rect { i0, i1, j0, j1 }, &counts);
                    }
                }
            }
        }
    }

    /// All non-empty rectangles within the size bounds, in corner order.
    pub fn enumerate(&self, max_w: usize, max_h: usize) -> Vec<Candidate> {
        let mut out = Vec::new();
        for i0 in self.lattice.x_lines.0..self.lattice.x_lines.1 {
            self.sweep_column(i0, max_w, max_h, &mut |rect, counts| {
                out.push(Candidate {
                    rect,
                    counts: counts.to_vec(),
                })
            });
        }
        out.sort_by_key(|c| c.rect);
        out
    }

    /// Best pure boxes per class and best boxes in joint order, each list
    /// capped at `limit`. Columns are scanned in parallel; the reduction is
    /// order independent because both orders are total.
    pub fn scan(&self, max_w: usize, max_h: usize, min_pure: usize, limit: usize) -> ScanResult {
        let n_classes = self.n_classes;
        let empty = || {
            (
                (0..n_classes)
                    .map(|_| Top::new(limit, pure_cmp))
                    .collect::<Vec<_>>(),
                Top::new(limit, joint_cmp),
            )
        };
        let (pure, joint) = (self.lattice.x_lines.0..self.lattice.x_lines.1)
            .into_par_iter()
            .fold(empty, |(mut pure, mut joint), i0| {
                self.sweep_column(i0, max_w, max_h, &mut |rect, counts| {
                    let support: usize = counts.iter().sum();
                    let (dom, n) = dominant(counts);
                    if n == support && support >= min_pure && pure[dom].admits(rect, counts) {
                        pure[dom].push(Candidate {
                            rect,
                            counts: counts.to_vec(),
                        });
                    }
                    if joint.admits(rect, counts) {
                        joint.push(Candidate {
                            rect,
                            counts: counts.to_vec(),
                        });
                    }
                });
                (pure, joint)
            })
            .reduce(empty, |(pa, ja), (pb, jb)| {
                (
                    pa.into_iter().zip(pb).map(|(a, b)| a.merge(b)).collect(),
                    ja.merge(jb),
                )
            });
        ScanResult {
            pure_by_class: pure.into_iter().map(|t| t.items).collect(),
            joint: joint.items,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(nodes: &[[f64; 2]]) -> PolylineGraph {
        PolylineGraph {
            nodes: nodes.to_vec(),
            padded: false,
            source_dim: 2 * nodes.len(),
        }
    }

    #[test]
    fn sites() {
        assert_eq!(site(1.0, 0.5), 4);
        assert_eq!(site(1.2, 0.5), 5);
        assert_eq!(site(-0.25, 0.5), -1);
        assert_eq!(site(0.0, 0.5), 0);
    }

    fn scanner(graphs: &[PolylineGraph], labels: &[usize]) -> Scanner {
        let lat = Lattice::covering(graphs, 0.5).unwrap();
        Scanner::new(lat, graphs, labels, 2, &vec![true; graphs.len()])
    }

    #[test]
    fn two_by_two_grid_has_nine_rectangles() {
        let graphs = vec![
            g(&[[0.25, 0.25]]),
            g(&[[0.75, 0.75]]),
            g(&[[0.25, 0.75]]),
            g(&[[0.75, 0.25]]),
        ];
        let s = scanner(&graphs, &[0, 1, 0, 1]);
        assert_eq!(s.lattice.cells(), (2, 2));
        let all = s.enumerate(2, 2);
        assert_eq!(all.len(), 9);
        // formula: (cells - w + 1) positions per width, summed, squared
        let per_axis: usize = (1..=2).map(|w| 2 - w + 1).sum();
        assert_eq!(all.len(), per_axis * per_axis);
        let cells = s.enumerate(1, 1);
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|c| c.rect.area() == 1));
    }

    #[test]
    fn one_by_one_bound_yields_non_empty_cells_only() {
        let graphs = vec![g(&[[0.25, 0.25]]), g(&[[1.75, 1.75]])];
        let s = scanner(&graphs, &[0, 1]);
        assert_eq!(s.lattice.cells(), (4, 4));
        assert_eq!(s.enumerate(1, 1).len(), 2);
    }

    #[test]
    fn empty_active_set_yields_nothing() {
        let graphs = vec![g(&[[0.25, 0.25]])];
        let lat = Lattice::covering(&graphs, 0.5).unwrap();
        let s = Scanner::new(lat, &graphs, &[0], 1, &[false]);
        assert!(s.enumerate(3, 3).is_empty());
        assert!(Lattice::covering(&[], 0.5).is_none());
    }

    #[test]
    fn on_line_node_belongs_to_both_sides() {
        let graphs = vec![g(&[[0.5, 0.5]]), g(&[[0.25, 0.25]]), g(&[[0.9, 0.9]])];
        let s = scanner(&graphs, &[0, 1, 1]);
        let all = s.enumerate(1, 1);
        // (0.5, 0.5) is a grid corner shared by four cells
        let hits = all.iter().filter(|c| c.counts[0] == 1).count();
        assert_eq!(hits, 4);
    }
}
