//! Hierarchical box rules.
//!
//! A rule fires on a case when some node lies in one of its positive boxes
//! and no node lies in any of its negated boxes:
//!
//! ```text
//! R5: x ∈ B5 & x ∉ B1 ∪ B3 ⇒ x ∈ malignant
//! ```
//!
//! An optional else branch is tried when the head does not fire. A rule set
//! is evaluated in order; the first rule that fires decides, and a case no
//! rule fires on is refused rather than assigned a default class.
//!
//! Rules refer to boxes by id through the rule set's box table, so joining
//! and pruning never copy geometry.

mod join;
mod prune;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discovery::{covers, DiscoveryTrace, GridBox};
use crate::error::{Error, Result};
use crate::mapping::PolylineGraph;

pub use join::{join, JoinReport, JoinStep, JoinStepKind};
pub use prune::{prune, prune_preview, prune_rule, PruneReport, PruneStrategy, PrunedRule};

/// Error counts recorded when a rule was retargeted by pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reassignment {
    pub from: String,
    /// Per-class counts over all cases in the positive boxes.
    pub counts: Vec<(String, usize)>,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub target: String,
    pub positive: Vec<String>,
    #[serde(default)]
    pub negated: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub else_branch: Option<Box<Rule>>,
    /// Trace step the rule was built from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reassigned: Option<Reassignment>,
}

impl Rule {
    pub fn new(id: impl Into<String>, target: impl Into<String>, positive: Vec<String>) -> Self {
        Self {
            id: id.into(),
            target: target.into(),
            positive,
            negated: Vec::new(),
            else_branch: None,
            provenance: None,
            reassigned: None,
        }
    }

    pub fn with_negated(mut self, negated: Vec<String>) -> Self {
        self.negated = negated;
        self
    }

    pub fn is_plain(&self) -> bool {
        self.else_branch.is_none()
    }

    pub fn depth(&self) -> usize {
        1 + self.else_branch.as_ref().map_or(0, |e| e.depth())
    }

    /// Whether the head (positive and negated boxes, ignoring any else
    /// branch) holds for a membership lookup.
    fn head_holds(&self, member: &impl Fn(&str) -> bool) -> bool {
        self.positive.iter().any(|b| member(b)) && !self.negated.iter().any(|b| member(b))
    }

    /// Target of the head or the first else branch that holds.
    fn decide(&self, member: &impl Fn(&str) -> bool) -> Option<&str> {
        if self.head_holds(member) {
            Some(&self.target)
        } else {
            self.else_branch.as_ref().and_then(|e| e.decide(member))
        }
    }

    fn box_ids<'a>(&'a self, out: &mut Vec<&'a str>) {
        out.extend(self.positive.iter().map(String::as_str));
        out.extend(self.negated.iter().map(String::as_str));
        if let Some(e) = &self.else_branch {
            e.box_ids(out);
        }
    }
}

fn union(ids: &[String]) -> String {
    ids.join(" ∪ ")
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        self.fmt_body(f)
    }
}

impl Rule {
    fn fmt_body(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x ∈ {}", union(&self.positive))?;
        if !self.negated.is_empty() {
            write!(f, " & x ∉ {}", union(&self.negated))?;
        }
        write!(f, " ⇒ x ∈ {}", self.target)?;
        if let Some(e) = &self.else_branch {
            write!(f, " (else ")?;
            e.fmt_body(f)?;
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Class(String),
    Refused,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub outcome: Outcome,
    /// Id of the top-level rule that fired.
    pub fired: Option<String>,
}

impl Prediction {
    pub fn refused() -> Self {
        Self {
            outcome: Outcome::Refused,
            fired: None,
        }
    }

    pub fn class(&self) -> Option<&str> {
        match &self.outcome {
            Outcome::Class(c) => Some(c),
            Outcome::Refused => None,
        }
    }
}

/// Ordered rules over a shared box table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub classes: Vec<String>,
    pub boxes: Vec<GridBox>,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(classes: Vec<String>, boxes: Vec<GridBox>, rules: Vec<Rule>) -> Result<Self> {
        let rs = Self {
            classes,
            boxes,
            rules,
        };
        rs.validate()?;
        Ok(rs)
    }

    pub fn empty(classes: Vec<String>) -> Self {
        Self {
            classes,
            boxes: Vec::new(),
            rules: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ids: HashSet<&str> = self.boxes.iter().map(|b| b.id.as_str()).collect();
        if ids.len() != self.boxes.len() {
            return Err(Error::Invalid("duplicate box id".into()));
        }
        let mut seen = HashSet::new();
        for rule in &self.rules {
            let mut chain = Some(rule);
            while let Some(r) = chain {
                if !seen.insert(r.id.as_str()) {
                    return Err(Error::DuplicateRule(r.id.clone()));
                }
                if r.positive.is_empty() {
                    return Err(Error::Invalid(format!("rule `{}` has no positive box", r.id)));
                }
                if !self.classes.is_empty() && !self.classes.contains(&r.target) {
                    return Err(Error::UnknownClass(r.target.clone()));
                }
                chain = r.else_branch.as_deref();
            }
            let mut used = Vec::new();
            rule.box_ids(&mut used);
            if let Some(missing) = used.into_iter().find(|b| !ids.contains(b)) {
                return Err(Error::DanglingBox {
                    rule: rule.id.clone(),
                    box_id: missing.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn box_by_id(&self, id: &str) -> Option<&GridBox> {
        self.boxes.iter().find(|b| b.id == id)
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Box membership of one graph, indexed like `boxes`.
    fn membership(&self, g: &PolylineGraph) -> Vec<bool> {
        self.boxes.iter().map(|b| covers(b, g)).collect()
    }

    fn index(&self) -> HashMap<&str, usize> {
        self.boxes
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect()
    }

    pub fn classify(&self, g: &PolylineGraph) -> Result<Prediction> {
        let index = self.index();
        self.classify_with(&index, &self.membership(g))
    }

    fn classify_with(&self, index: &HashMap<&str, usize>, member: &[bool]) -> Result<Prediction> {
        for rule in &self.rules {
            let dangling = std::cell::Cell::new(false);
            let lookup = |id: &str| match index.get(id) {
                Some(&i) => member[i],
                None => {
                    dangling.set(true);
                    false
                }
            };
            let decided = rule.decide(&lookup).map(str::to_string);
            if dangling.get() {
                let mut used = Vec::new();
                rule.box_ids(&mut used);
                let box_id = used
                    .into_iter()
                    .find(|b| !index.contains_key(b))
                    .unwrap_or_default()
                    .to_string();
                return Err(Error::DanglingBox {
                    rule: rule.id.clone(),
                    box_id,
                });
            }
            if let Some(class) = decided {
                return Ok(Prediction {
                    outcome: Outcome::Class(class),
                    fired: Some(rule.id.clone()),
                });
            }
        }
        Ok(Prediction::refused())
    }

    pub fn classify_all(&self, graphs: &[PolylineGraph]) -> Result<Vec<Prediction>> {
        let index = self.index();
        graphs
            .iter()
            .map(|g| self.classify_with(&index, &self.membership(g)))
            .collect()
    }

    /// Cases on which `rule`'s head holds when evaluated on its own.
    pub fn head_cases(&self, rule: &Rule, graphs: &[PolylineGraph]) -> Vec<usize> {
        let boxes: HashMap<&str, &GridBox> = self.boxes.iter().map(|b| (b.id.as_str(), b)).collect();
        graphs
            .iter()
            .enumerate()
            .filter(|(_, g)| {
                rule.head_holds(&|id: &str| boxes.get(id).is_some_and(|b| covers(b, g)))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of cases each top-level rule decides under ordered evaluation.
    pub fn coverage(&self, graphs: &[PolylineGraph]) -> Result<HashMap<String, usize>> {
        let mut out: HashMap<String, usize> = self.rules.iter().map(|r| (r.id.clone(), 0)).collect();
        for p in self.classify_all(graphs)? {
            if let Some(id) = p.fired {
                *out.entry(id).or_default() += 1;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.boxes {
            writeln!(f, "{}: [{}, {}] x [{}, {}]", b.id, b.x1, b.x2, b.y1, b.y2)?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// One rule per accepted box, in trace order. A rule negates an earlier box
/// when a case removed by that earlier step also lies in the rule's box, so
/// ordered evaluation and explicit negation agree on the training cases.
pub fn from_trace(trace: &DiscoveryTrace, graphs: &[PolylineGraph]) -> RuleSet {
    let boxes: Vec<GridBox> = trace.boxes().cloned().collect();
    let mut rules = Vec::with_capacity(trace.steps.len());
    for (i, step) in trace.steps.iter().enumerate() {
        let b = &step.grid_box;
        let negated = trace.steps[..i]
            .iter()
            .filter(|earlier| earlier.removed.iter().any(|&c| covers(b, &graphs[c])))
            .map(|earlier| earlier.grid_box.id.clone())
            .collect();
        let mut rule = Rule::new(
            format!("R{}", i + 1),
            trace.class_names[step.class].clone(),
            vec![b.id.clone()],
        )
        .with_negated(negated);
        rule.provenance = Some(i);
        rules.push(rule);
    }
    RuleSet {
        classes: trace.class_names.clone(),
        boxes,
        rules,
    }
}

/// Drops negated boxes that exclude no case beyond the remaining ones, so the
/// head fires on exactly the same cases of `graphs`. Later boxes are tried
/// first. Else branches are simplified the same way.
pub fn simplify(rule: &Rule, rs: &RuleSet, graphs: &[PolylineGraph]) -> Rule {
    let mut out = rule.clone();
    let reference = rs.head_cases(rule, graphs);
    for id in rule.negated.iter().rev() {
        let mut trial = out.clone();
        trial.negated.retain(|n| n != id);
        if rs.head_cases(&trial, graphs) == reference {
            out = trial;
        }
    }
    if let Some(e) = &rule.else_branch {
        out.else_branch = Some(Box::new(simplify(e, rs, graphs)));
    }
    out
}

pub fn simplify_all(rs: &RuleSet, graphs: &[PolylineGraph]) -> RuleSet {
    RuleSet {
        rules: rs.rules.iter().map(|r| simplify(r, rs, graphs)).collect(),
        ..rs.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleStat {
    pub id: String,
    pub target: String,
    pub covered: usize,
    pub correct: usize,
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleMetrics {
    pub rules: Vec<RuleStat>,
    pub total: usize,
    pub decided: usize,
    pub correct: usize,
    /// Accuracy over decided cases; `None` when nothing was decided.
    pub accuracy: Option<f64>,
    pub coverage: f64,
    pub refusal: f64,
}

impl RuleMetrics {
    pub fn errors(&self) -> usize {
        self.decided - self.correct
    }
}

/// Ordered evaluation of `rs` on labeled graphs.
pub fn evaluate(
    rs: &RuleSet,
    graphs: &[PolylineGraph],
    labels: &[usize],
    class_names: &[String],
) -> Result<RuleMetrics> {
    let preds = rs.classify_all(graphs)?;
    metrics_from_predictions(rs, &preds, labels, class_names)
}

pub fn metrics_from_predictions(
    rs: &RuleSet,
    preds: &[Prediction],
    labels: &[usize],
    class_names: &[String],
) -> Result<RuleMetrics> {
    let mut stats: Vec<RuleStat> = rs
        .rules
        .iter()
        .map(|r| RuleStat {
            id: r.id.clone(),
            target: r.target.clone(),
            covered: 0,
            correct: 0,
            precision: None,
        })
        .collect();
    let pos: HashMap<&str, usize> = rs
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    let (mut decided, mut correct) = (0, 0);
    for (p, &label) in preds.iter().zip(labels) {
        let Some(class) = p.class() else { continue };
        decided += 1;
        let ok = class == class_names[label];
        correct += ok as usize;
        if let Some(&i) = p.fired.as_deref().and_then(|id| pos.get(id)) {
            stats[i].covered += 1;
            stats[i].correct += ok as usize;
        }
    }
    for s in &mut stats {
        s.precision = (s.covered > 0).then(|| s.correct as f64 / s.covered as f64);
    }
    let total = preds.len();
    let coverage = if total == 0 { 0.0 } else { decided as f64 / total as f64 };
    Ok(RuleMetrics {
        rules: stats,
        total,
        decided,
        correct,
        accuracy: (decided > 0).then(|| correct as f64 / decided as f64),
        coverage,
        refusal: 1.0 - coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::{discover, DiscoveryConfig, TopSelector};

    fn g(nodes: &[[f64; 2]]) -> PolylineGraph {
        PolylineGraph {
            nodes: nodes.to_vec(),
            padded: false,
            source_dim: 2 * nodes.len(),
        }
    }

    fn bx(id: &str, x1: f64, x2: f64, y1: f64, y2: f64) -> GridBox {
        GridBox::new(id, x1, x2, y1, y2).unwrap()
    }

    fn two_rules() -> RuleSet {
        RuleSet::new(
            vec!["G".into(), "R".into()],
            vec![bx("B1", 0.0, 1.0, 0.0, 1.0), bx("B5", 2.0, 3.0, 0.0, 1.0)],
            vec![
                Rule::new("R1", "G", vec!["B1".into()]),
                Rule::new("R5", "R", vec!["B5".into()]).with_negated(vec!["B1".into()]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn precedence_matches_negation() {
        let rs = two_rules();
        let both = g(&[[0.5, 0.5], [2.5, 0.5]]);
        let p = rs.classify(&both).unwrap();
        assert_eq!(p.class(), Some("G"));
        assert_eq!(p.fired.as_deref(), Some("R1"));
        // R5 alone, without order, would still refuse it through `x ∉ B1`
        let alone = RuleSet {
            rules: vec![rs.rules[1].clone()],
            ..rs.clone()
        };
        assert_eq!(alone.classify(&both).unwrap().outcome, Outcome::Refused);
        assert_eq!(rs.classify(&g(&[[2.5, 0.5]])).unwrap().class(), Some("R"));
        assert_eq!(rs.classify(&g(&[[9.0, 9.0]])).unwrap(), Prediction::refused());
    }

    #[test]
    fn dangling_reference_is_an_error() {
        let err = RuleSet::new(
            vec!["G".into()],
            vec![],
            vec![Rule::new("R1", "G", vec!["B9".into()])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DanglingBox { box_id, .. } if box_id == "B9"));
        let rs = RuleSet {
            classes: vec!["G".into()],
            boxes: vec![bx("B1", 0.0, 1.0, 0.0, 1.0)],
            rules: vec![Rule::new("R1", "G", vec!["B1".into()]).with_negated(vec!["B7".into()])],
        };
        assert!(matches!(
            rs.classify(&g(&[[0.5, 0.5]])),
            Err(Error::DanglingBox { .. })
        ));
    }

    #[test]
    fn rendering_uses_set_notation() {
        let rs = two_rules();
        assert_eq!(rs.rules[0].to_string(), "R1: x ∈ B1 ⇒ x ∈ G");
        assert_eq!(rs.rules[1].to_string(), "R5: x ∈ B5 & x ∉ B1 ⇒ x ∈ R");
        let mut joined = Rule::new("R1,5", "G", vec!["B1".into()]);
        joined.else_branch = Some(Box::new(Rule::new("R5", "R", vec!["B5".into()])));
        assert_eq!(
            joined.to_string(),
            "R1,5: x ∈ B1 ⇒ x ∈ G (else x ∈ B5 ⇒ x ∈ R)"
        );
    }

    #[test]
    fn empty_ruleset_refuses_everything() {
        let rs = RuleSet::empty(vec!["G".into(), "R".into()]);
        let graphs = vec![g(&[[0.0, 0.0]]), g(&[[1.0, 1.0]])];
        let m = evaluate(&rs, &graphs, &[0, 1], &rs.classes.clone()).unwrap();
        assert_eq!(m.coverage, 0.0);
        assert_eq!(m.refusal, 1.0);
        assert_eq!(m.accuracy, None);
    }

    #[test]
    fn simplify_keeps_fired_set() {
        let rs = RuleSet::new(
            vec!["G".into(), "R".into()],
            vec![
                bx("B1", 0.0, 1.0, 0.0, 1.0),
                bx("B3", 0.0, 1.0, 2.0, 3.0),
                bx("B5", 5.0, 6.0, 0.0, 1.0),
            ],
            vec![Rule::new("R5", "R", vec!["B5".into()])
                .with_negated(vec!["B1".into(), "B3".into()])],
        )
        .unwrap();
        // the only case reaching B3 is also in B1
        let graphs = vec![
            g(&[[5.5, 0.5], [0.5, 0.5], [0.5, 2.5]]),
            g(&[[5.5, 0.5], [0.5, 0.5], [9.0, 9.0]]),
            g(&[[5.5, 0.5], [9.0, 9.0], [9.0, 9.0]]),
        ];
        let s = simplify(&rs.rules[0], &rs, &graphs);
        assert_eq!(s.negated, vec!["B1".to_string()]);
        assert_eq!(rs.head_cases(&s, &graphs), rs.head_cases(&rs.rules[0], &graphs));
        let bare = Rule::new("R1", "G", vec!["B1".into()]);
        assert_eq!(simplify(&bare, &rs, &graphs), bare);
    }

    #[test]
    fn trace_rules_agree_with_removal_replay() {
        let graphs = vec![
            g(&[[0.25, 0.25], [3.25, 0.25]]),
            g(&[[0.25, 0.75]]),
            g(&[[3.25, 0.25]]),
            g(&[[3.75, 0.75]]),
            g(&[[1.75, 1.75]]),
        ];
        let labels = [0, 0, 1, 1, 0];
        let names = vec!["G".to_string(), "R".to_string()];
        let cfg = DiscoveryConfig {
            min_pure_support: 1,
            ..DiscoveryConfig::default()
        };
        let trace = discover(&graphs, &labels, &names, &cfg, &mut TopSelector).unwrap();
        let rs = from_trace(&trace, &graphs);
        assert_eq!(rs.rules.len(), trace.steps.len());
        let preds = rs.classify_all(&graphs).unwrap();
        for (step_idx, step) in trace.steps.iter().enumerate() {
            for &c in &step.removed {
                assert_eq!(preds[c].fired.as_deref(), Some(rs.rules[step_idx].id.as_str()));
            }
        }
        let m = evaluate(&rs, &graphs, &labels, &names).unwrap();
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(m.decided, 5);
        assert!(rs.rules[0].negated.is_empty());
    }

    #[test]
    fn empty_trace_gives_empty_ruleset() {
        let trace = DiscoveryTrace {
            pitch: 0.5,
            class_names: vec!["G".into()],
            steps: vec![],
        };
        let rs = from_trace(&trace, &[]);
        assert!(rs.rules.is_empty());
        assert_eq!(rs.classify(&g(&[[0.0, 0.0]])).unwrap(), Prediction::refused());
    }
}
