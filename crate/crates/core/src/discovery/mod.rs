//! Greedy box discovery over mapped graphs.
//!
//! The plane is cut by a grid of the configured pitch and every grid-aligned
//! rectangle within the size bounds is a candidate. A box covers a case when
//! at least one node of the case's graph lies in the closed rectangle.
//!
//! Discovery runs in two phases over the set of still-active cases:
//!
//! 1. Classes take turns (in dataset label order). On its turn a class gets
//!    its largest pure box, provided it covers at least `min_pure_support`
//!    cases. The covered cases are removed. This repeats while any class has
//!    such a box.
//! 2. Afterwards every candidate is ranked by purity, then support, then
//!    smaller area, then corner order, and a [`CandidateSelector`] picks one.
//!    The headless selector takes the top entry; an analyst can pick any.
//!
//! Discovery stops once every case is covered.

mod grid;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::PolylineGraph;

pub use grid::{joint_order, pure_order, Candidate, Lattice, Rect, ScanResult, Scanner};

/// Axis-aligned rectangle in graph units: left, right, bottom, top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub id: String,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl GridBox {
    pub fn new(id: impl Into<String>, x1: f64, x2: f64, y1: f64, y2: f64) -> Result<Self> {
        let b = Self {
            id: id.into(),
            x1,
            x2,
            y1,
            y2,
        };
        if !(x1.is_finite() && x2.is_finite() && y1.is_finite() && y2.is_finite()) {
            return Err(Error::Invalid(format!("box `{}` has a non-finite corner", b.id)));
        }
        if x1 > x2 || y1 > y2 {
            return Err(Error::Invalid(format!(
                "box `{}` has inverted corners ({x1}, {x2}, {y1}, {y2})",
                b.id
            )));
        }
        Ok(b)
    }

    pub fn contains(&self, node: [f64; 2]) -> bool {
        self.x1 <= node[0] && node[0] <= self.x2 && self.y1 <= node[1] && node[1] <= self.y2
    }

    pub fn same_geometry(&self, other: &GridBox) -> bool {
        self.x1 == other.x1 && self.x2 == other.x2 && self.y1 == other.y1 && self.y2 == other.y2
    }

    /// True when every corner is an integer multiple of `pitch`.
    pub fn is_aligned(&self, pitch: f64) -> bool {
        [self.x1, self.x2, self.y1, self.y2]
            .iter()
            .all(|&v| (v / pitch).round() * pitch == v)
    }

    pub fn area(&self) -> f64 {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }
}

/// True iff some node of `g` lies in the closed box.
pub fn covers(b: &GridBox, g: &PolylineGraph) -> bool {
    g.nodes.iter().any(|&n| b.contains(n))
}

/// Per-class counts of the active cases a box covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub counts: Vec<usize>,
    pub support: usize,
    /// `None` when the box covers no active case.
    pub purity: Option<f64>,
    pub dominant: Option<usize>,
}

impl BoxStats {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let support = counts.iter().sum();
        let (dominant, purity) = if support == 0 {
            (None, None)
        } else {
            let (c, n) = grid::dominant(&counts);
            (Some(c), Some(n as f64 / support as f64))
        };
        Self {
            counts,
            support,
            purity,
            dominant,
        }
    }

    pub fn is_pure(&self) -> bool {
        self.purity == Some(1.0)
    }
}

/// Counts active cases covered by `b`; each case counts once however many of
/// its nodes fall inside.
pub fn box_stats(
    b: &GridBox,
    graphs: &[PolylineGraph],
    labels: &[usize],
    n_classes: usize,
    active: &[bool],
) -> BoxStats {
    let mut counts = vec![0; n_classes];
    for (case, g) in graphs.iter().enumerate() {
        if active[case] && covers(b, g) {
            counts[labels[case]] += 1;
        }
    }
    BoxStats::from_counts(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryConfig {
    /// Grid cell size in graph units.
    pub pitch: f64,
    pub max_box_cells_x: usize,
    pub max_box_cells_y: usize,
    /// Minimum support of a pure box accepted in the first phase.
    pub min_pure_support: usize,
    /// Support at or below which an accepted box counts as "mini".
    pub mini_threshold: usize,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            pitch: 0.5,
            max_box_cells_x: 40,
            max_box_cells_y: 24,
            min_pure_support: 8,
            mini_threshold: 7,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(Error::Config(format!("pitch must be positive, got {}", self.pitch)));
        }
        if self.max_box_cells_x == 0 || self.max_box_cells_y == 0 {
            return Err(Error::Config("box size bounds must be at least 1 cell".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Classes alternate taking their largest pure box.
    Pure,
    /// Candidates ranked jointly; the selector decides.
    Ranked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    #[serde(rename = "box")]
    pub grid_box: GridBox,
    pub class: usize,
    /// Per-class counts over the active cases at acceptance time.
    pub counts: Vec<usize>,
    /// Case indices removed by this step.
    pub removed: Vec<usize>,
    pub phase: Phase,
}

impl TraceStep {
    pub fn support(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn purity(&self) -> f64 {
        self.counts[self.class] as f64 / self.support() as f64
    }
}

/// Accepted boxes in acceptance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryTrace {
    pub pitch: f64,
    pub class_names: Vec<String>,
    pub steps: Vec<TraceStep>,
}

impl DiscoveryTrace {
    pub fn covered(&self) -> usize {
        self.steps.iter().map(|s| s.removed.len()).sum()
    }

    pub fn boxes(&self) -> impl Iterator<Item = &GridBox> {
        self.steps.iter().map(|s| &s.grid_box)
    }
}

/// A candidate offered to a selector, as a box with its statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    #[serde(rename = "box")]
    pub grid_box: GridBox,
    pub stats: BoxStats,
}

/// Ranked candidates for the next acceptance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub phase: Phase,
    /// Class whose turn it is during the pure phase.
    pub turn: Option<usize>,
    pub items: Vec<RankedCandidate>,
}

/// Picks one of the ranked candidates, or `None` to stop.
pub trait CandidateSelector {
    fn select(&mut self, list: &CandidateList) -> Option<usize>;
}

/// Always takes the top-ranked candidate.
#[derive(Debug, Default, Clone, Copy)]
pub struct TopSelector;

impl CandidateSelector for TopSelector {
    fn select(&mut self, list: &CandidateList) -> Option<usize> {
        (!list.items.is_empty()).then_some(0)
    }
}

/// Mutable part of a discovery run; cheap to snapshot for undo.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryState {
    pub active: Vec<bool>,
    pub trace: DiscoveryTrace,
    /// Next class to take a turn in the pure phase.
    pub turn: usize,
    pub phase: Phase,
}

/// A discovery run over fixed graphs and labels.
pub struct Discovery<'a> {
    graphs: &'a [PolylineGraph],
    labels: &'a [usize],
    n_classes: usize,
    cfg: DiscoveryConfig,
    lattice: Option<Lattice>,
    pub state: DiscoveryState,
}

impl<'a> Discovery<'a> {
    pub fn new(
        graphs: &'a [PolylineGraph],
        labels: &'a [usize],
        class_names: &[String],
        cfg: DiscoveryConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if graphs.len() != labels.len() {
            return Err(Error::Invalid(format!(
                "{} graphs but {} labels",
                graphs.len(),
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Invalid(format!("label index {l} has no class")));
        }
        let lattice = Lattice::covering(graphs, cfg.pitch);
        Ok(Self {
            graphs,
            labels,
            n_classes: class_names.len(),
            state: DiscoveryState {
                active: vec![true; graphs.len()],
                trace: DiscoveryTrace {
                    pitch: cfg.pitch,
                    class_names: class_names.to_vec(),
                    steps: Vec::new(),
                },
                turn: 0,
                phase: Phase::Pure,
            },
            cfg,
            lattice,
        })
    }

    pub fn config(&self) -> &DiscoveryConfig {
        &self.cfg
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn active_count(&self) -> usize {
        self.state.active.iter().filter(|&&a| a).count()
    }

    pub fn is_done(&self) -> bool {
        self.active_count() == 0
    }

    fn scan(&self, limit: usize) -> Option<ScanResult> {
        let lattice = self.lattice?;
        let scanner = Scanner::new(
            lattice,
            self.graphs,
            self.labels,
            self.n_classes,
            &self.state.active,
        );
        Some(scanner.scan(
            self.cfg.max_box_cells_x,
            self.cfg.max_box_cells_y,
            self.cfg.min_pure_support.max(1),
            limit,
        ))
    }

    /// Ranked candidates for the next step, at most `limit` of them.
    pub fn candidates(&self, limit: usize) -> CandidateList {
        let limit = limit.max(1);
        let ranked = |items: Vec<Candidate>, lattice: &Lattice| -> Vec<RankedCandidate> {
            items
                .into_iter()
                .map(|c| RankedCandidate {
                    grid_box: lattice.to_box("", &c.rect),
                    stats: BoxStats::from_counts(c.counts),
                })
                .collect()
        };
        let empty = |phase| CandidateList {
            phase,
            turn: None,
            items: Vec::new(),
        };
        if self.is_done() {
            return empty(self.state.phase);
        }
        let Some(scan) = self.scan(limit) else {
            return empty(self.state.phase);
        };
        let lattice = self.lattice.as_ref().expect("scan implies lattice");
        if self.state.phase == Phase::Pure {
            for k in 0..self.n_classes {
                let class = (self.state.turn + k) % self.n_classes;
                if !scan.pure_by_class[class].is_empty() {
                    return CandidateList {
                        phase: Phase::Pure,
                        turn: Some(class),
                        items: ranked(scan.pure_by_class[class].clone(), lattice),
                    };
                }
            }
        }
        CandidateList {
            phase: Phase::Ranked,
            turn: None,
            items: ranked(scan.joint, lattice),
        }
    }

    /// Checks that `b` is a grid-aligned box within the size bounds.
    pub fn check_box(&self, b: &GridBox) -> Result<Rect> {
        let lattice = self
            .lattice
            .ok_or_else(|| Error::Invalid("no graphs to place a box on".into()))?;
        let rect = lattice
            .rect_of(b)
            .ok_or_else(|| Error::Invalid(format!("box corners are not multiples of {}", self.cfg.pitch)))?;
        let (w, h) = rect.cells();
        if w < 1 || h < 1 || w as usize > self.cfg.max_box_cells_x || h as usize > self.cfg.max_box_cells_y {
            return Err(Error::Invalid(format!(
                "box spans {w}x{h} cells; allowed 1..={} by 1..={}",
                self.cfg.max_box_cells_x, self.cfg.max_box_cells_y
            )));
        }
        Ok(rect)
    }

    /// Accepts `b`: records it with its dominant class and removes every
    /// active case it covers.
    pub fn accept(&mut self, b: &GridBox, phase: Phase) -> Result<&TraceStep> {
        let rect = self.check_box(b)?;
        let lattice = self.lattice.expect("checked");
        let id = format!("B{}", self.state.trace.steps.len() + 1);
        let grid_box = lattice.to_box(id, &rect);
        let stats = box_stats(
            &grid_box,
            self.graphs,
            self.labels,
            self.n_classes,
            &self.state.active,
        );
        let Some(class) = stats.dominant else {
            return Err(Error::Invalid("box covers no active case".into()));
        };
        let removed: Vec<usize> = (0..self.graphs.len())
            .filter(|&i| self.state.active[i] && covers(&grid_box, &self.graphs[i]))
            .collect();
        for &i in &removed {
            self.state.active[i] = false;
        }
        log::debug!(
            "accepted {} [{}, {}]x[{}, {}] class {} counts {:?}",
            grid_box.id,
            grid_box.x1,
            grid_box.x2,
            grid_box.y1,
            grid_box.y2,
            class,
            stats.counts
        );
        if phase == Phase::Pure {
            self.state.turn = (class + 1) % self.n_classes.max(1);
        }
        if phase == Phase::Ranked {
            self.state.phase = Phase::Ranked;
        }
        self.state.trace.steps.push(TraceStep {
            grid_box,
            class,
            counts: stats.counts,
            removed,
            phase,
        });
        Ok(self.state.trace.steps.last().expect("just pushed"))
    }

    /// One step: rank candidates, let `selector` pick, accept. Returns false
    /// when finished or when the selector declines.
    pub fn step(&mut self, selector: &mut dyn CandidateSelector, limit: usize) -> Result<bool> {
        if self.is_done() {
            return Ok(false);
        }
        let list = self.candidates(limit);
        let Some(pick) = selector.select(&list) else {
            return Ok(false);
        };
        let chosen = list
            .items
            .get(pick)
            .ok_or_else(|| Error::Invalid(format!("selector picked {pick} of {}", list.items.len())))?;
        let b = chosen.grid_box.clone();
        self.accept(&b, list.phase)?;
        Ok(true)
    }

    pub fn run(&mut self, selector: &mut dyn CandidateSelector, limit: usize) -> Result<()> {
        while self.step(selector, limit)? {}
        Ok(())
    }

    pub fn into_trace(self) -> DiscoveryTrace {
        self.state.trace
    }
}

/// Headless discovery with the given selector.
pub fn discover(
    graphs: &[PolylineGraph],
    labels: &[usize],
    class_names: &[String],
    cfg: &DiscoveryConfig,
    selector: &mut dyn CandidateSelector,
) -> Result<DiscoveryTrace> {
    let mut d = Discovery::new(graphs, labels, class_names, cfg.clone())?;
    d.run(selector, 1)?;
    Ok(d.into_trace())
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

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn closed_membership() {
        let b = GridBox::new("B1", 15.0, 20.5, 1.0, 1.5).unwrap();
        assert!(covers(&b, &g(&[[3.0, 9.0], [16.0, 1.2]])));
        assert!(!covers(&b, &g(&[[16.0, 1.6], [18.0, 4.0]])));
        assert!(covers(&b, &g(&[[20.5, 1.5]])));
        assert!(GridBox::new("bad", 2.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn stats_count_cases_once() {
        let b = GridBox::new("B", 0.0, 1.0, 0.0, 1.0).unwrap();
        let graphs = vec![g(&[[0.5, 0.5], [0.6, 0.6]]), g(&[[0.2, 0.2]])];
        let s = box_stats(&b, &graphs, &[0, 1], 2, &[true, true]);
        assert_eq!(s.support, 2);
        assert_eq!(s.purity, Some(0.5));
        assert_eq!(s.counts, vec![1, 1]);
        let none = box_stats(&b, &graphs, &[0, 1], 2, &[false, false]);
        assert_eq!(none.support, 0);
        assert_eq!(none.purity, None);
        assert_eq!(none.dominant, None);
    }

    #[test]
    fn single_class_is_one_box() {
        let graphs = vec![g(&[[0.2, 0.2]]), g(&[[1.2, 0.7]]), g(&[[0.9, 1.9]])];
        let cfg = DiscoveryConfig {
            min_pure_support: 1,
            ..DiscoveryConfig::default()
        };
        let t = discover(&graphs, &[0, 0, 0], &names(1), &cfg, &mut TopSelector).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].removed, vec![0, 1, 2]);
        assert_eq!(t.steps[0].purity(), 1.0);
    }

    #[test]
    fn empty_input_gives_empty_trace() {
        let t = discover(&[], &[], &names(2), &DiscoveryConfig::default(), &mut TopSelector).unwrap();
        assert!(t.steps.is_empty());
    }

    #[test]
    fn xor_layout_needs_several_pure_boxes() {
        let graphs = vec![
            g(&[[0.25, 0.25]]),
            g(&[[0.75, 0.75]]),
            g(&[[0.25, 0.75]]),
            g(&[[0.75, 0.25]]),
        ];
        let labels = [0, 0, 1, 1];
        let cfg = DiscoveryConfig {
            min_pure_support: 1,
            ..DiscoveryConfig::default()
        };
        let t = discover(&graphs, &labels, &names(2), &cfg, &mut TopSelector).unwrap();
        assert!(t.steps.len() >= 2);
        assert!(t.steps.iter().all(|s| s.purity() == 1.0));
        assert_eq!(t.covered(), 4);
        // first step: class 0's best pure box is a single cell (the diagonal
        // cells of one class never share a rectangle without the other class)
        assert_eq!(t.steps[0].support(), 1);
        assert_eq!(t.steps[0].grid_box.x1, 0.0);
        assert_eq!(t.steps[0].grid_box.y1, 0.0);
    }

    #[test]
    fn accept_validates_boxes() {
        let graphs = vec![g(&[[0.25, 0.25]]), g(&[[1.75, 1.75]])];
        let labels = [0, 1];
        let names = names(2);
        let mut d = Discovery::new(&graphs, &labels, &names, DiscoveryConfig::default()).unwrap();
        let off = GridBox::new("x", 0.1, 0.5, 0.0, 0.5).unwrap();
        assert!(d.accept(&off, Phase::Ranked).is_err());
        let empty = GridBox::new("x", 1.0, 1.5, 0.0, 0.5).unwrap();
        assert!(d.accept(&empty, Phase::Ranked).is_err());
        let ok = GridBox::new("x", 0.0, 0.5, 0.0, 0.5).unwrap();
        assert_eq!(d.accept(&ok, Phase::Ranked).unwrap().removed, vec![0]);
        assert_eq!(d.active_count(), 1);
    }
}
