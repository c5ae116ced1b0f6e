//! The published Wisconsin breast cancer case study.
//!
//! [`published_boxes`] and [`published_rules`] hold the thirteen boxes and
//! rules reported for the data in partial dynamic ILC2, with their reported
//! coverage. Those boxes do not reproduce on the public data under the
//! canonical attribute order, so [`reproduction_report`] measures them
//! instead of assuming them.
//!
//! [`fixture`] builds a synthetic 683-case dataset on which the published
//! rules hold exactly: every rule covers its reported number of cases, the
//! mini rules and joined rules have their reported coverage, and the
//! simplified rules drop exactly the reported negations. B10's published
//! corners repeat B7's, so the fixture moves B10 next to B7.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, LabeledDataset, NDPoint};
use crate::discovery::{box_stats, GridBox};
use crate::error::Result;
use crate::mapping::{decode, MappingMode, PolylineGraph};
use crate::rules::{Rule, RuleSet};

pub const BENIGN: &str = "benign";
pub const MALIGNANT: &str = "malignant";

/// Corners `(x1, x2, y1, y2)` of B1..B13 as published.
pub const PUBLISHED_CORNERS: [(f64, f64, f64, f64); 13] = [
    (15.0, 20.5, 1.0, 1.5),
    (23.5, 39.5, 8.5, 10.0),
    (1.0, 3.5, 0.5, 2.0),
    (20.0, 22.5, 6.0, 6.5),
    (9.5, 10.0, 5.0, 6.5),
    (16.0, 21.0, 0.5, 2.0),
    (17.5, 18.5, 3.0, 3.5),
    (14.5, 17.0, 2.5, 3.0),
    (28.5, 29.0, 2.5, 3.5),
    (17.5, 18.5, 3.0, 3.5),
    (14.5, 15.5, 5.0, 6.0),
    (26.5, 27.0, 7.0, 7.5),
    (28.0, 28.5, 0.5, 9.5),
];

/// Cases per box as published.
pub const PUBLISHED_BOX_CASES: [usize; 13] = [382, 166, 28, 26, 14, 18, 23, 7, 4, 10, 4, 1, 10];

/// Cases decided by R1..R13 as published.
pub const PUBLISHED_RULE_CASES: [usize; 13] = [382, 166, 28, 26, 14, 18, 13, 7, 4, 10, 4, 1, 10];

/// Fixture replacement for B10, whose published corners equal B7's.
pub const FIXTURE_B10: (f64, f64, f64, f64) = (18.5, 19.5, 3.5, 4.0);

/// Class (0 benign, 1 malignant) and negated boxes of R1..R13, by box
/// number. R13's positive box is B13.
const RULES: [(usize, &[usize]); 13] = [
    (0, &[]),
    (1, &[]),
    (0, &[]),
    (1, &[]),
    (1, &[1, 3]),
    (0, &[2, 4, 5]),
    (1, &[1, 3, 6]),
    (0, &[2, 4, 5, 7, 10, 13]),
    (0, &[2, 4, 5, 7, 10, 13]),
    (1, &[3, 6, 8, 9]),
    (0, &[2, 4, 5]),
    (0, &[2, 4, 5, 7, 10]),
    (1, &[1, 3, 6, 8, 9, 11, 12]),
];

/// Negations left after simplification, for the rules whose published
/// simplified form differs.
pub const PUBLISHED_SIMPLIFIED: [(usize, &[usize]); 4] = [
    (5, &[1]),
    (7, &[3, 6]),
    (8, &[2, 4, 5, 7, 10]),
    (9, &[2, 4, 5, 7]),
];

/// A point inside each fixture box and outside every other one.
const PRIVATE: [[f64; 2]; 13] = [
    [15.875, 1.25],
    [31.5, 9.25],
    [2.25, 1.25],
    [21.25, 6.25],
    [9.75, 5.75],
    [18.5, 0.875],
    [18.0, 3.25],
    [15.75, 2.75],
    [28.75, 3.0],
    [19.0, 3.75],
    [15.0, 5.5],
    [26.75, 7.25],
    [28.25, 5.0],
];

/// Outside every box.
const NEUTRAL: [f64; 2] = [45.0, 11.0];

/// Box numbers a fixture case touches, and how many such cases there are.
const SIGNATURES: &[(&[usize], usize)] = &[
    (&[1], 378),
    (&[1, 3, 5], 1),
    (&[1, 5], 1),
    (&[1, 8, 10], 1),
    (&[1, 13], 1),
    (&[2], 45),
    (&[2, 6], 1),
    (&[2, 8], 1),
    (&[2, 8, 13], 1),
    (&[2, 9], 42),
    (&[2, 9, 10], 1),
    (&[2, 9, 13], 1),
    (&[2, 11], 26),
    (&[2, 12], 48),
    (&[3], 25),
    (&[3, 7], 1),
    (&[3, 10], 1),
    (&[3, 13], 1),
    (&[4], 21),
    (&[4, 6], 1),
    (&[4, 8], 1),
    (&[4, 9], 1),
    (&[4, 11], 1),
    (&[4, 12], 1),
    (&[5], 9),
    (&[5, 6], 1),
    (&[5, 8], 1),
    (&[5, 9], 1),
    (&[5, 11], 1),
    (&[5, 12], 1),
    (&[6], 15),
    (&[6, 7], 1),
    (&[6, 10], 1),
    (&[6, 13], 1),
    (&[7], 10),
    (&[7, 8], 1),
    (&[7, 9], 1),
    (&[7, 12], 1),
    (&[8], 7),
    (&[9], 4),
    (&[10], 9),
    (&[10, 12], 1),
    (&[11], 3),
    (&[11, 13], 1),
    (&[12, 13], 1),
    (&[13], 10),
];

const NODES: usize = 5;

fn bid(n: usize) -> String {
    format!("B{n}")
}

fn boxes_from(corners: impl IntoIterator<Item = (f64, f64, f64, f64)>) -> Vec<GridBox> {
    corners
        .into_iter()
        .enumerate()
        .map(|(i, (x1, x2, y1, y2))| GridBox::new(bid(i + 1), x1, x2, y1, y2).expect("valid corners"))
        .collect()
}

pub fn published_boxes() -> Vec<GridBox> {
    boxes_from(PUBLISHED_CORNERS)
}

pub fn fixture_boxes() -> Vec<GridBox> {
    let mut corners = PUBLISHED_CORNERS;
    corners[9] = FIXTURE_B10;
    boxes_from(corners)
}

pub fn class_names() -> Vec<String> {
    vec![BENIGN.to_string(), MALIGNANT.to_string()]
}

/// R1..R13 in discovery order, unsimplified.
pub fn published_rules() -> Vec<Rule> {
    RULES
        .iter()
        .enumerate()
        .map(|(i, (class, neg))| {
            let mut r = Rule::new(format!("R{}", i + 1), class_names()[*class].clone(), vec![bid(i + 1)])
                .with_negated(neg.iter().map(|&n| bid(n)).collect());
            r.provenance = Some(i);
            r
        })
        .collect()
}

pub fn published_ruleset() -> RuleSet {
    RuleSet::new(class_names(), published_boxes(), published_rules()).expect("consistent")
}

/// The published rules over the fixture boxes.
pub fn fixture_ruleset() -> RuleSet {
    RuleSet::new(class_names(), fixture_boxes(), published_rules()).expect("consistent")
}

/// Labeled fixture graphs plus the equivalent 10-D dataset (decoding the
/// graphs under partial dynamic ILC2). Labels follow the first rule that
/// fires on each case.
pub struct Fixture {
    pub ruleset: RuleSet,
    pub graphs: Vec<PolylineGraph>,
    pub labels: Vec<usize>,
    pub dataset: LabeledDataset,
}

pub fn fixture() -> Fixture {
    let ruleset = fixture_ruleset();
    let names = class_names();
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for (sig, count) in SIGNATURES {
        let mut nodes: Vec<[f64; 2]> = sig.iter().map(|&b| PRIVATE[b - 1]).collect();
        nodes.resize(NODES, NEUTRAL);
        let g = PolylineGraph {
            nodes,
            padded: false,
            source_dim: 2 * NODES,
        };
        let class = ruleset
            .classify(&g)
            .expect("fixture boxes exist")
            .class()
            .map(|c| names.iter().position(|n| n == c).expect("known class"))
            .expect("every fixture case is decided");
        for _ in 0..*count {
            graphs.push(g.clone());
            labels.push(class);
        }
    }
    let mode = MappingMode::partial_dynamic();
    let points: Vec<NDPoint> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let p = decode(g, &mode).expect("fixture graphs decode");
            NDPoint::with_id(p.values, Some(format!("f{i}"))).expect("finite")
        })
        .collect();
    let dataset = LabeledDataset::new(
        points,
        labels.clone(),
        vec![ClassLabel::new(BENIGN, "green"), ClassLabel::new(MALIGNANT, "red")],
        (1..=2 * NODES).map(|i| format!("x{i}")).collect(),
    )
    .expect("consistent fixture");
    Fixture {
        ruleset,
        graphs,
        labels,
        dataset,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxComparison {
    pub id: String,
    pub published: usize,
    /// Per-class counts over all cases.
    pub counts: Vec<usize>,
    pub support: usize,
    pub pure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleComparison {
    pub id: String,
    pub published: usize,
    pub decided: usize,
    pub correct: usize,
}

/// Published boxes and rules measured on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub class_names: Vec<String>,
    pub boxes: Vec<BoxComparison>,
    pub rules: Vec<RuleComparison>,
    pub covered: usize,
    pub total: usize,
}

impl ReproductionReport {
    pub fn boxes_matching(&self) -> usize {
        self.boxes
            .iter()
            .filter(|b| b.pure && b.support == b.published)
            .count()
    }

    pub fn rules_matching(&self) -> usize {
        self.rules
            .iter()
            .filter(|r| r.decided == r.published && r.correct == r.decided)
            .count()
    }
}

impl fmt::Display for ReproductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "box\tpublished\tmeasured\t{}", self.class_names.join("/"))?;
        for b in &self.boxes {
            let counts: Vec<String> = b.counts.iter().map(usize::to_string).collect();
            writeln!(f, "{}\t{}\t{}\t{}", b.id, b.published, b.support, counts.join("/"))?;
        }
        writeln!(f, "rule\tpublished\tdecided\tcorrect")?;
        for r in &self.rules {
            writeln!(f, "{}\t{}\t{}\t{}", r.id, r.published, r.decided, r.correct)?;
        }
        writeln!(
            f,
            "published rules decide {} of {} cases; {} of 13 boxes and {} of 13 rules match",
            self.covered,
            self.total,
            self.boxes_matching(),
            self.rules_matching()
        )
    }
}

pub fn reproduction_report(graphs: &[PolylineGraph], labels: &[usize], class_names: &[String]) -> Result<ReproductionReport> {
    let rs = published_ruleset();
    let all = vec![true; graphs.len()];
    let boxes = rs
        .boxes
        .iter()
        .zip(PUBLISHED_BOX_CASES)
        .map(|(b, published)| {
            let s = box_stats(b, graphs, labels, class_names.len(), &all);
            BoxComparison {
                id: b.id.clone(),
                published,
                pure: s.is_pure(),
                support: s.support,
                counts: s.counts,
            }
        })
        .collect();
    let preds = rs.classify_all(graphs)?;
    let rules = rs
        .rules
        .iter()
        .zip(PUBLISHED_RULE_CASES)
        .map(|(r, published)| {
            let mine = preds
                .iter()
                .zip(labels)
                .filter(|(p, _)| p.fired.as_deref() == Some(r.id.as_str()));
            let (mut decided, mut correct) = (0, 0);
            for (p, &l) in mine {
                decided += 1;
                correct += (p.class() == Some(class_names[l].as_str())) as usize;
            }
            RuleComparison {
                id: r.id.clone(),
                published,
                decided,
                correct,
            }
        })
        .collect();
    Ok(ReproductionReport {
        class_names: class_names.to_vec(),
        boxes,
        rules,
        covered: preds.iter().filter(|p| p.class().is_some()).count(),
        total: graphs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::covers;
    use crate::mapping::encode;

    #[test]
    fn private_points_are_private() {
        let boxes = fixture_boxes();
        for (i, p) in PRIVATE.iter().enumerate() {
            for (j, b) in boxes.iter().enumerate() {
                assert_eq!(b.contains(*p), i == j, "B{} vs point of B{}", j + 1, i + 1);
            }
            assert!(!boxes[i].contains(NEUTRAL));
        }
    }

    #[test]
    fn fixture_matches_published_counts() {
        let fx = fixture();
        assert_eq!(fx.graphs.len(), 683);
        assert_eq!(fx.labels.iter().filter(|&&l| l == 0).count(), 444);
        let cov = fx.ruleset.coverage(&fx.graphs).unwrap();
        for (i, &n) in PUBLISHED_RULE_CASES.iter().enumerate() {
            assert_eq!(cov[&format!("R{}", i + 1)], n, "R{}", i + 1);
        }
        let mode = MappingMode::partial_dynamic();
        for (p, g) in fx.dataset.points.iter().zip(&fx.graphs) {
            assert_eq!(encode(p, &mode).unwrap(), *g);
        }
        assert!(fx.graphs.iter().all(|g| g.nodes.iter().any(|&n| {
            fx.ruleset.boxes.iter().any(|b| covers(b, &PolylineGraph {
                nodes: vec![n],
                padded: false,
                source_dim: 2,
            }))
        })));
    }
}
