//! Projection-line models on graph nodes.
//!
//! A node of each graph is projected onto the line at angle θ and compared
//! with a threshold: `M(x) > T ⇒ x ∈ C`, optionally `else x ∈ Q`.
//! Conjunctions of such half-planes cover classes that a single line cannot.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::PolylineGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSelector {
    /// Last node of the graph.
    Endpoint,
    /// Node by zero-based index.
    Node(usize),
}

impl fmt::Display for NodeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Endpoint => write!(f, "endpoint"),
            Self::Node(k) => write!(f, "node {k}"),
        }
    }
}

/// `endpoint` or a zero-based node index.
impl FromStr for NodeSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "endpoint" | "end" => Ok(Self::Endpoint),
            n => n
                .parse()
                .map(Self::Node)
                .map_err(|_| Error::Config(format!("node selector `{s}` is neither `endpoint` nor an index"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Predicts the target class or nothing.
    OneSided,
    /// Predicts the target class or the other class.
    TwoSided,
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('_', "-").as_str() {
            "one-sided" => Ok(Self::OneSided),
            "two-sided" => Ok(Self::TwoSided),
            _ => Err(Error::Config(format!("unknown threshold mode `{s}`"))),
        }
    }
}

/// Which side of the threshold the target class lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Above,
    Below,
}

impl Side {
    fn holds(self, p: f64, t: f64) -> bool {
        match self {
            Side::Above => p > t,
            Side::Below => p < t,
        }
    }
}

pub fn project(g: &PolylineGraph, theta: f64, selector: NodeSelector) -> Result<f64> {
    let node = match selector {
        NodeSelector::Endpoint => g.nodes.last(),
        NodeSelector::Node(k) => g.nodes.get(k),
    }
    .ok_or(Error::SelectorOutOfRange {
        index: match selector {
            NodeSelector::Endpoint => 0,
            NodeSelector::Node(k) => k,
        },
        nodes: g.nodes.len(),
    })?;
    Ok(node[0] * theta.cos() + node[1] * theta.sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub threshold: f64,
    pub side: Side,
    /// Target cases on the firing side.
    pub fired_target: usize,
    /// Other cases on the firing side.
    pub fired_other: usize,
    pub n_target: usize,
    pub n_other: usize,
    /// Half the gap around the threshold; 0 for infinite thresholds.
    pub margin: f64,
}

impl ThresholdFit {
    /// Correct two-sided decisions.
    pub fn correct(&self) -> usize {
        self.fired_target + (self.n_other - self.fired_other)
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / (self.n_target + self.n_other) as f64
    }

    pub fn recall(&self) -> f64 {
        if self.n_target == 0 {
            0.0
        } else {
            self.fired_target as f64 / self.n_target as f64
        }
    }

    pub fn precision(&self) -> Option<f64> {
        let fired = self.fired_target + self.fired_other;
        (fired > 0).then(|| self.fired_target as f64 / fired as f64)
    }
}

/// A threshold candidate before it is compared with others.
struct Scored {
    score: usize,
    margin: f64,
    threshold: f64,
    side: Side,
    fired_target: usize,
    fired_other: usize,
}

/// Score descending, margin descending, threshold ascending, `Above` first.
fn better(a: &Scored, b: &Scored) -> Ordering {
    b.score
        .cmp(&a.score)
        .then(b.margin.total_cmp(&a.margin))
        .then(a.threshold.total_cmp(&b.threshold))
        .then(a.side.cmp(&b.side))
}

/// Best threshold over the midpoints between adjacent distinct projections
/// and ±∞, on either side. `projections` pairs a value with whether the case
/// belongs to the target class.
///
/// Two-sided fits maximize correct decisions. One-sided fits maximize target
/// cases fired among thresholds that fire on no other case.
pub fn fit_threshold(projections: &[(f64, bool)], mode: ThresholdMode) -> Result<ThresholdFit> {
    if let Some(i) = projections.iter().position(|(p, _)| !p.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let n_target = projections.iter().filter(|(_, t)| *t).count();
    let n_other = projections.len() - n_target;
    if mode == ThresholdMode::TwoSided && (n_target == 0 || n_other == 0) {
        return Err(Error::SingleClass);
    }
    let mut sorted: Vec<(f64, bool)> = projections.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // distinct values with the counts of target/other cases strictly below
    let mut values: Vec<f64> = Vec::new();
    let mut below: Vec<(usize, usize)> = Vec::new();
    let (mut bt, mut bo) = (0, 0);
    for &(p, t) in &sorted {
        if values.last() != Some(&p) {
            values.push(p);
            below.push((bt, bo));
        }
        if t {
            bt += 1;
        } else {
            bo += 1;
        }
    }
    below.push((bt, bo));

    let mut best: Option<Scored> = None;
    for k in 0..=values.len() {
        let (threshold, margin) = if k == 0 {
            (f64::NEG_INFINITY, 0.0)
        } else if k == values.len() {
            (f64::INFINITY, 0.0)
        } else {
            let (lo, hi) = (values[k - 1], values[k]);
            (lo + (hi - lo) / 2.0, (hi - lo) / 2.0)
        };
        let (ct, co) = below[k];
        for side in [Side::Above, Side::Below] {
            let (fired_target, fired_other) = match side {
                Side::Above => (n_target - ct, n_other - co),
                Side::Below => (ct, co),
            };
            let score = match mode {
                ThresholdMode::TwoSided => fired_target + (n_other - fired_other),
                ThresholdMode::OneSided if fired_other == 0 => fired_target,
                ThresholdMode::OneSided => continue,
            };
            let cand = Scored {
                score,
                margin,
                threshold,
                side,
                fired_target,
                fired_other,
            };
            if best.as_ref().is_none_or(|b| better(&cand, b) == Ordering::Less) {
                best = Some(cand);
            }
        }
    }
    let mut best = best.expect("+∞ above fires nothing and is always feasible");
    if mode == ThresholdMode::OneSided && best.score == 0 {
        best = Scored {
            score: 0,
            margin: 0.0,
            threshold: f64::INFINITY,
            side: Side::Above,
            fired_target: 0,
            fired_other: 0,
        };
    }
    Ok(ThresholdFit {
        threshold: best.threshold,
        side: best.side,
        fired_target: best.fired_target,
        fired_other: best.fired_other,
        n_target,
        n_other,
        margin: best.margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub theta: f64,
    pub selector: NodeSelector,
    pub threshold: f64,
    pub side: Side,
    pub mode: ThresholdMode,
    pub target: String,
    /// Class predicted when the model does not fire (two-sided only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
}

impl LinearModel {
    pub fn fires(&self, g: &PolylineGraph) -> Result<bool> {
        Ok(self.side.holds(project(g, self.theta, self.selector)?, self.threshold))
    }

    pub fn predict(&self, g: &PolylineGraph) -> Result<Option<String>> {
        Ok(if self.fires(g)? {
            Some(self.target.clone())
        } else {
            self.other.clone()
        })
    }
}

impl fmt::Display for LinearModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.side {
            Side::Above => ">",
            Side::Below => "<",
        };
        write!(
            f,
            "M({}; θ={:.4}) {op} {:.4} ⇒ x ∈ {}",
            self.selector, self.theta, self.threshold, self.target
        )?;
        if let Some(o) = &self.other {
            write!(f, " else x ∈ {o}")?;
        }
        Ok(())
    }
}

/// All components must fire for the target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjunctiveModel {
    pub components: Vec<LinearModel>,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
}

impl ConjunctiveModel {
    pub fn fires(&self, g: &PolylineGraph) -> Result<bool> {
        for c in &self.components {
            if !c.fires(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn predict(&self, g: &PolylineGraph) -> Result<Option<String>> {
        Ok(if self.fires(g)? {
            Some(self.target.clone())
        } else {
            self.other.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Single(LinearModel),
    Conjunction(ConjunctiveModel),
}

impl fmt::Display for FittedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Single(m) => write!(f, "{m}"),
            Self::Conjunction(c) => {
                for m in &c.components {
                    writeln!(f, "  {m}")?;
                }
                write!(f, "all of the above ⇒ x ∈ {}", c.target)?;
                if let Some(o) = &c.other {
                    write!(f, " else x ∈ {o}")?;
                }
                Ok(())
            }
        }
    }
}

impl FittedModel {
    pub fn predict(&self, g: &PolylineGraph) -> Result<Option<String>> {
        match self {
            Self::Single(m) => m.predict(g),
            Self::Conjunction(m) => m.predict(g),
        }
    }

    pub fn components(&self) -> usize {
        match self {
            Self::Single(_) => 1,
            Self::Conjunction(c) => c.components.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearConfig {
    /// Angles in the uniform grid over [0, π).
    pub angles: usize,
    pub selectors: Vec<NodeSelector>,
    pub mode: ThresholdMode,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self {
            angles: 180,
            selectors: vec![NodeSelector::Endpoint],
            mode: ThresholdMode::TwoSided,
        }
    }
}

impl LinearConfig {
    pub fn theta(&self, i: usize) -> f64 {
        PI * i as f64 / self.angles as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub model: FittedModel,
    /// Fraction of decided cases predicted correctly.
    pub accuracy: f64,
    pub decided: usize,
    pub total: usize,
}

fn projections(
    graphs: &[PolylineGraph],
    is_target: &[bool],
    theta: f64,
    selector: NodeSelector,
) -> Result<Vec<(f64, bool)>> {
    graphs
        .iter()
        .zip(is_target)
        .map(|(g, &t)| Ok((project(g, theta, selector)?, t)))
        .collect()
}

/// Grid search over angles and selectors; ties go to the smaller angle, then
/// the earlier selector.
fn best_single(
    graphs: &[PolylineGraph],
    is_target: &[bool],
    cfg: &LinearConfig,
) -> Result<(usize, usize, ThresholdFit)> {
    let combos: Vec<(usize, usize)> = (0..cfg.angles)
        .flat_map(|a| (0..cfg.selectors.len()).map(move |s| (a, s)))
        .collect();
    let fits: Vec<(usize, usize, ThresholdFit)> = combos
        .par_iter()
        .map(|&(a, s)| {
            let p = projections(graphs, is_target, cfg.theta(a), cfg.selectors[s])?;
            Ok((a, s, fit_threshold(&p, cfg.mode)?))
        })
        .collect::<Result<_>>()?;
    let score = |f: &ThresholdFit| match cfg.mode {
        ThresholdMode::TwoSided => f.correct(),
        ThresholdMode::OneSided => f.fired_target,
    };
    fits.into_iter()
        .reduce(|best, cur| {
            let ord = score(&cur.2)
                .cmp(&score(&best.2))
                .then(cur.2.margin.total_cmp(&best.2.margin));
            if ord == Ordering::Greater {
                cur
            } else {
                best
            }
        })
        .ok_or_else(|| Error::Config("empty angle grid or selector set".into()))
}

/// Greedy half-plane conjunction keeping every target case: each step adds
/// the half-plane that cuts away the most remaining other cases. Stops when
/// the region is pure or no half-plane cuts anything.
fn greedy_conjunction(
    graphs: &[PolylineGraph],
    is_target: &[bool],
    cfg: &LinearConfig,
) -> Result<Vec<(f64, NodeSelector, f64, Side)>> {
    let mut inside: Vec<usize> = (0..graphs.len()).collect();
    let mut parts = Vec::new();
    loop {
        let others = inside.iter().filter(|&&i| !is_target[i]).count();
        if others == 0 {
            break;
        }
        let mut best: Option<(usize, f64, NodeSelector, f64, Side)> = None;
        for a in 0..cfg.angles {
            let theta = cfg.theta(a);
            for &sel in &cfg.selectors {
                let p: Vec<(f64, bool)> = inside
                    .iter()
                    .map(|&i| Ok((project(&graphs[i], theta, sel)?, is_target[i])))
                    .collect::<Result<_>>()?;
                let lo = p.iter().filter(|x| x.1).map(|x| x.0).fold(f64::INFINITY, f64::min);
                let hi = p.iter().filter(|x| x.1).map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
                // Above: cut everything below the lowest target case
                let below: Vec<f64> = p.iter().filter(|x| !x.1 && x.0 < lo).map(|x| x.0).collect();
                let above: Vec<f64> = p.iter().filter(|x| !x.1 && x.0 > hi).map(|x| x.0).collect();
                let cut_above = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let cut_below = above.iter().copied().fold(f64::INFINITY, f64::min);
                for (n, t, side) in [
                    (below.len(), cut_above + (lo - cut_above) / 2.0, Side::Above),
                    (above.len(), hi + (cut_below - hi) / 2.0, Side::Below),
                ] {
                    if n > 0 && best.as_ref().is_none_or(|b| n > b.0) {
                        best = Some((n, theta, sel, t, side));
                    }
                }
            }
        }
        let Some((_, theta, sel, t, side)) = best else { break };
        inside.retain(|&i| project(&graphs[i], theta, sel).is_ok_and(|p| side.holds(p, t)));
        parts.push((theta, sel, t, side));
    }
    Ok(parts)
}

/// Fits a projection model for `target` against the remaining cases. When the
/// best two-sided line misclassifies something and a conjunction of
/// half-planes separates the training cases exactly, the conjunction is
/// returned instead.
pub fn fit_model(
    graphs: &[PolylineGraph],
    labels: &[usize],
    class_names: &[String],
    target: usize,
    cfg: &LinearConfig,
) -> Result<LinearFit> {
    if cfg.angles == 0 || cfg.selectors.is_empty() {
        return Err(Error::Config("empty angle grid or selector set".into()));
    }
    if target >= class_names.len() {
        return Err(Error::UnknownClass(target.to_string()));
    }
    if cfg.mode == ThresholdMode::TwoSided && class_names.len() != 2 {
        return Err(Error::Invalid("two-sided models need exactly two classes".into()));
    }
    let is_target: Vec<bool> = labels.iter().map(|&l| l == target).collect();
    let other = match cfg.mode {
        ThresholdMode::TwoSided => Some(class_names[1 - target].clone()),
        ThresholdMode::OneSided => None,
    };
    let (a, s, fit) = best_single(graphs, &is_target, cfg)?;
    let single = LinearModel {
        theta: cfg.theta(a),
        selector: cfg.selectors[s],
        threshold: fit.threshold,
        side: fit.side,
        mode: cfg.mode,
        target: class_names[target].clone(),
        other: other.clone(),
    };
    let total = graphs.len();
    if cfg.mode == ThresholdMode::OneSided {
        let decided = fit.fired_target + fit.fired_other;
        return Ok(LinearFit {
            model: FittedModel::Single(single),
            accuracy: if decided == 0 { 0.0 } else { 1.0 },
            decided,
            total,
        });
    }
    if fit.correct() < total {
        let parts = greedy_conjunction(graphs, &is_target, cfg)?;
        let model = ConjunctiveModel {
            components: parts
                .into_iter()
                .map(|(theta, selector, threshold, side)| LinearModel {
                    theta,
                    selector,
                    threshold,
                    side,
                    mode: ThresholdMode::OneSided,
                    target: class_names[target].clone(),
                    other: None,
                })
                .collect(),
            target: class_names[target].clone(),
            other,
        };
        let mut correct = 0;
        for (g, &t) in graphs.iter().zip(&is_target) {
            correct += (model.fires(g)? == t) as usize;
        }
        if model.components.len() > 1 && correct == total {
            return Ok(LinearFit {
                model: FittedModel::Conjunction(model),
                accuracy: 1.0,
                decided: total,
                total,
            });
        }
    }
    Ok(LinearFit {
        model: FittedModel::Single(single),
        accuracy: fit.accuracy(),
        decided: total,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub rmse: f64,
}

/// Ordinary least squares of `targets` on the projection value.
pub fn regress(
    graphs: &[PolylineGraph],
    targets: &[f64],
    theta: f64,
    selector: NodeSelector,
) -> Result<Regression> {
    if graphs.len() != targets.len() {
        return Err(Error::ParameterLength {
            what: "targets",
            expected: graphs.len(),
            found: targets.len(),
        });
    }
    let xs: Vec<f64> = graphs
        .iter()
        .map(|g| project(g, theta, selector))
        .collect::<Result<_>>()?;
    let n = xs.len() as f64;
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return Err(Error::DegenerateProjections);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = targets.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(targets).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(targets)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    Ok(Regression {
        slope,
        intercept,
        rmse: (sse / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> PolylineGraph {
        PolylineGraph {
            nodes: vec![[x, y]],
            padded: false,
            source_dim: 2,
        }
    }

    #[test]
    fn projection_examples() {
        let g = pt(3.0, 4.0);
        assert_eq!(project(&g, 0.0, NodeSelector::Endpoint).unwrap(), 3.0);
        assert!((project(&g, PI / 2.0, NodeSelector::Endpoint).unwrap() - 4.0).abs() < 1e-12);
        let d = project(&g, PI / 4.0, NodeSelector::Node(0)).unwrap();
        assert!((d - 7.0 / 2f64.sqrt()).abs() < 1e-9);
        assert!(matches!(
            project(&g, 0.0, NodeSelector::Node(3)),
            Err(Error::SelectorOutOfRange { index: 3, nodes: 1 })
        ));
    }

    #[test]
    fn separable_two_sided() {
        let p = [(1.0, true), (2.0, true), (3.0, true), (7.0, false), (8.0, false), (9.0, false)];
        let f = fit_threshold(&p, ThresholdMode::TwoSided).unwrap();
        assert_eq!(f.threshold, 5.0);
        assert_eq!(f.side, Side::Below);
        assert_eq!(f.accuracy(), 1.0);
        assert_eq!(f.margin, 2.0);
    }

    #[test]
    fn one_sided_top_gap() {
        let p = [(8.0, true), (9.0, true), (5.0, false), (7.0, false), (6.5, true)];
        let f = fit_threshold(&p, ThresholdMode::OneSided).unwrap();
        assert_eq!(f.threshold, 7.5);
        assert_eq!(f.side, Side::Above);
        assert_eq!(f.fired_target, 2);
        assert_eq!(f.precision(), Some(1.0));
    }

    #[test]
    fn single_class_two_sided_is_an_error() {
        assert!(matches!(
            fit_threshold(&[(1.0, true)], ThresholdMode::TwoSided),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn regression_examples() {
        let graphs: Vec<_> = (0..5).map(|i| pt(i as f64, 0.0)).collect();
        let lin: Vec<f64> = (0..5).map(|i| 2.0 * i as f64 + 1.0).collect();
        let r = regress(&graphs, &lin, 0.0, NodeSelector::Endpoint).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-12 && (r.intercept - 1.0).abs() < 1e-12);
        assert!(r.rmse < 1e-12);
        let flat = regress(&graphs, &[3.0; 5], 0.0, NodeSelector::Endpoint).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.intercept, 3.0);
        let same = vec![pt(1.0, 1.0); 3];
        assert!(matches!(
            regress(&same, &[1.0, 2.0, 3.0], 0.0, NodeSelector::Endpoint),
            Err(Error::DegenerateProjections)
        ));
    }

    #[test]
    fn separated_clusters_single_model() {
        let mut graphs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            let d = i as f64 * 0.1;
            graphs.push(pt(1.0 + d, 1.0 - d));
            labels.push(0);
            graphs.push(pt(6.0 + d, 5.0 + d));
            labels.push(1);
        }
        let names = vec!["G".to_string(), "R".to_string()];
        let fit = fit_model(&graphs, &labels, &names, 1, &LinearConfig::default()).unwrap();
        assert_eq!(fit.accuracy, 1.0);
        assert_eq!(fit.model.components(), 1);
        for (g, &l) in graphs.iter().zip(&labels) {
            assert_eq!(fit.model.predict(g).unwrap().as_deref(), Some(names[l].as_str()));
        }
    }

    #[test]
    fn corner_needs_two_components() {
        let c = [(6.0, 6.0), (9.0, 9.0), (6.0, 9.0), (9.0, 6.0)];
        let q = [(6.0, 1.0), (1.0, 6.0), (9.0, 4.0), (4.0, 9.0), (0.0, 0.0)];
        let graphs: Vec<_> = c.iter().chain(&q).map(|&(x, y)| pt(x, y)).collect();
        let labels: Vec<usize> = (0..9).map(|i| usize::from(i >= 4)).collect();
        let names = vec!["C".to_string(), "Q".to_string()];
        let fit = fit_model(&graphs, &labels, &names, 0, &LinearConfig::default()).unwrap();
        assert_eq!(fit.model.components(), 2);
        assert_eq!(fit.accuracy, 1.0);
        for (g, &l) in graphs.iter().zip(&labels) {
            assert_eq!(fit.model.predict(g).unwrap().as_deref(), Some(names[l].as_str()));
        }
    }

    #[test]
    fn parse_flags() {
        assert_eq!("one_sided".parse::<ThresholdMode>().unwrap(), ThresholdMode::OneSided);
        assert_eq!("endpoint".parse::<NodeSelector>().unwrap(), NodeSelector::Endpoint);
        assert_eq!("3".parse::<NodeSelector>().unwrap(), NodeSelector::Node(3));
        assert!("middle".parse::<NodeSelector>().is_err());
    }
}
