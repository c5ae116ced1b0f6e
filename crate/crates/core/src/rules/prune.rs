//! Handling of rules that decide only a few cases ("mini" rules).

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Reassignment, Rule, RuleSet};
use crate::discovery::covers;
use crate::error::{Error, Result};
use crate::mapping::PolylineGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneStrategy {
    /// Retarget the raw positive boxes to their dominant class.
    Reassign,
    /// Drop the rule so its cases are refused.
    Refuse,
}

impl FromStr for PruneStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reassign" => Ok(Self::Reassign),
            "refuse" => Ok(Self::Refuse),
            other => Err(Error::Config(format!("unknown prune strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedRule {
    pub id: String,
    /// Cases the rule decided before pruning.
    pub coverage: usize,
    pub strategy: PruneStrategy,
    /// Per-class counts over every case in the rule's positive boxes.
    pub counts: Vec<(String, usize)>,
    /// Replacement rule id under reassign.
    pub replacement: Option<String>,
    pub new_target: Option<String>,
    /// Cases in the positive boxes not of the new target.
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub ruleset: RuleSet,
    pub pruned: Vec<PrunedRule>,
}

/// What pruning `id` would do, without changing the rule set.
pub fn prune_preview(
    rs: &RuleSet,
    id: &str,
    graphs: &[PolylineGraph],
    labels: &[usize],
    class_names: &[String],
) -> Result<PrunedRule> {
    let rule = rs
        .rule(id)
        .ok_or_else(|| Error::Invalid(format!("no rule `{id}`")))?;
    let coverage = rs.coverage(graphs)?.get(id).copied().unwrap_or(0);
    let boxes: Vec<_> = rule
        .positive
        .iter()
        .filter_map(|b| rs.box_by_id(b))
        .collect();
    let mut counts = vec![0usize; class_names.len()];
    for (g, &label) in graphs.iter().zip(labels) {
        if boxes.iter().any(|b| covers(b, g)) {
            counts[label] += 1;
        }
    }
    let support: usize = counts.iter().sum();
    // ties favour the rule's own class, then label order
    let own = class_names.iter().position(|c| *c == rule.target);
    let dominant = (0..counts.len())
        .max_by(|&a, &b| {
            counts[a]
                .cmp(&counts[b])
                .then((Some(a) == own).cmp(&(Some(b) == own)))
                .then(b.cmp(&a))
        })
        .filter(|_| support > 0);
    Ok(PrunedRule {
        id: id.to_string(),
        coverage,
        strategy: PruneStrategy::Reassign,
        counts: class_names.iter().cloned().zip(counts.iter().copied()).collect(),
        replacement: dominant.map(|_| format!("{id}M")),
        new_target: dominant.map(|d| class_names[d].clone()),
        errors: dominant.map_or(0, |d| support - counts[d]),
    })
}

/// Applies `strategy` to the single rule `id`.
pub fn prune_rule(
    rs: &RuleSet,
    id: &str,
    strategy: PruneStrategy,
    graphs: &[PolylineGraph],
    labels: &[usize],
    class_names: &[String],
) -> Result<PruneReport> {
    let mut preview = prune_preview(rs, id, graphs, labels, class_names)?;
    preview.strategy = strategy;
    let mut out = rs.clone();
    let pos = out.rules.iter().position(|r| r.id == id).expect("previewed rule");
    match (strategy, &preview.new_target) {
        (PruneStrategy::Reassign, Some(target)) => {
            let old = &out.rules[pos];
            let mut rule = Rule::new(format!("{id}M"), target.clone(), old.positive.clone());
            rule.provenance = old.provenance;
            rule.reassigned = Some(Reassignment {
                from: id.to_string(),
                counts: preview.counts.clone(),
                errors: preview.errors,
            });
            out.rules[pos] = rule;
        }
        _ => {
            out.rules.remove(pos);
            preview.strategy = PruneStrategy::Refuse;
            preview.replacement = None;
            preview.new_target = None;
            preview.errors = 0;
        }
    }
    out.validate()?;
    Ok(PruneReport {
        ruleset: out,
        pruned: vec![preview],
    })
}

/// Applies `strategy` to every plain rule deciding at most `tau` cases of
/// `graphs`. Coverage is measured once, before any rule changes.
pub fn prune(
    rs: &RuleSet,
    tau: usize,
    strategy: PruneStrategy,
    graphs: &[PolylineGraph],
    labels: &[usize],
    class_names: &[String],
) -> Result<PruneReport> {
    let coverage = rs.coverage(graphs)?;
    let mini: Vec<String> = rs
        .rules
        .iter()
        .filter(|r| r.is_plain() && coverage.get(&r.id).copied().unwrap_or(0) <= tau)
        .map(|r| r.id.clone())
        .collect();
    let mut current = rs.clone();
    let mut pruned = Vec::new();
    for id in mini {
        let mut step = prune_rule(&current, &id, strategy, graphs, labels, class_names)?;
        let mut record = step.pruned.remove(0);
        record.coverage = coverage[&id];
        pruned.push(record);
        current = step.ruleset;
    }
    Ok(PruneReport {
        ruleset: current,
        pruned,
    })
}
