//! Rule joining.
//!
//! Merges are proposed in three passes and each one is kept only if every
//! case of the context set is classified exactly as before:
//!
//! 1. same-class rules without negations become a union rule at the
//!    position of the first member;
//! 2. same-class rules with nested, non-empty negation sets merge with the union of
//!    their negations, then simplified;
//! 3. a later rule of another class that negates one of a union rule's boxes
//!    is folded into that rule's else branch with those negations removed.

use serde::{Deserialize, Serialize};

use super::{simplify, Outcome, Rule, RuleSet};
use crate::error::Result;
use crate::mapping::PolylineGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinStepKind {
    Union,
    NestedUnion,
    Else,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinStep {
    pub kind: JoinStepKind,
    /// Id of the rule produced by this step.
    pub id: String,
    pub members: Vec<String>,
    /// Cases the produced rule decides under ordered evaluation.
    pub coverage: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinReport {
    pub ruleset: RuleSet,
    pub steps: Vec<JoinStep>,
}

impl JoinReport {
    pub fn step(&self, id: &str) -> Option<&JoinStep> {
        self.steps.iter().find(|s| s.id == id)
    }
}

fn suffix(id: &str) -> &str {
    id.strip_prefix('R').unwrap_or(id)
}

fn joined_id(a: &str, b: &str) -> String {
    format!("{a},{}", suffix(b))
}

fn push_unique(into: &mut Vec<String>, from: &[String]) {
    for id in from {
        if !into.contains(id) {
            into.push(id.clone());
        }
    }
}

fn is_subset(a: &[String], b: &[String]) -> bool {
    a.iter().all(|x| b.contains(x))
}

struct Joiner<'a> {
    graphs: &'a [PolylineGraph],
    reference: Vec<Outcome>,
    current: RuleSet,
    steps: Vec<JoinStep>,
}

impl Joiner<'_> {
    fn outcomes(&self, rs: &RuleSet) -> Result<Vec<Outcome>> {
        Ok(rs
            .classify_all(self.graphs)?
            .into_iter()
            .map(|p| p.outcome)
            .collect())
    }

    /// Replaces rule `i` with `merged` and removes rule `j`, keeping the
    /// result only if no outcome changes.
    fn try_merge(
        &mut self,
        i: usize,
        j: usize,
        merged: Rule,
        kind: JoinStepKind,
    ) -> Result<bool> {
        let mut trial = self.current.clone();
        let members = vec![trial.rules[i].id.clone(), trial.rules[j].id.clone()];
        trial.rules[i] = merged;
        trial.rules.remove(j);
        if self.outcomes(&trial)? != self.reference {
            return Ok(false);
        }
        let id = trial.rules[i].id.clone();
        let coverage = trial.coverage(self.graphs)?.get(&id).copied().unwrap_or(0);
        log::debug!("join {members:?} -> {id} ({coverage} cases)");
        self.steps.push(JoinStep {
            kind,
            id,
            members,
            coverage,
        });
        self.current = trial;
        Ok(true)
    }

    fn union_pass(&mut self) -> Result<()> {
        let mut i = 0;
        while i < self.current.rules.len() {
            let mut j = i + 1;
            while j < self.current.rules.len() {
                let (a, b) = (&self.current.rules[i], &self.current.rules[j]);
                if a.is_plain()
                    && b.is_plain()
                    && a.target == b.target
                    && a.negated.is_empty()
                    && b.negated.is_empty()
                {
                    let mut merged = a.clone();
                    merged.id = joined_id(&a.id, &b.id);
                    push_unique(&mut merged.positive, &b.positive);
                    merged.provenance = None;
                    if self.try_merge(i, j, merged, JoinStepKind::Union)? {
                        continue;
                    }
                }
                j += 1;
            }
            i += 1;
        }
        Ok(())
    }

    fn nested_pass(&mut self) -> Result<()> {
        let mut i = 0;
        while i < self.current.rules.len() {
            let mut j = i + 1;
            while j < self.current.rules.len() {
                let (a, b) = (&self.current.rules[i], &self.current.rules[j]);
                if a.is_plain()
                    && b.is_plain()
                    && a.target == b.target
                    && !a.negated.is_empty()
                    && !b.negated.is_empty()
                    && (is_subset(&a.negated, &b.negated) || is_subset(&b.negated, &a.negated))
                {
                    let mut merged = a.clone();
                    merged.id = joined_id(&a.id, &b.id);
                    push_unique(&mut merged.positive, &b.positive);
                    push_unique(&mut merged.negated, &b.negated);
                    merged.provenance = None;
                    let merged = simplify(&merged, &self.current, self.graphs);
                    if self.try_merge(i, j, merged, JoinStepKind::NestedUnion)? {
                        continue;
                    }
                }
                j += 1;
            }
            i += 1;
        }
        Ok(())
    }

    fn else_pass(&mut self) -> Result<()> {
        let mut i = 0;
        while i < self.current.rules.len() {
            let mut j = i + 1;
            while j < self.current.rules.len() {
                let (u, r) = (&self.current.rules[i], &self.current.rules[j]);
                let eligible = u.negated.is_empty()
                    && u.positive.len() > 1
                    && r.is_plain()
                    && r.target != u.target
                    && r.negated.iter().any(|n| u.positive.contains(n));
                let compatible = match &u.else_branch {
                    None => true,
                    Some(e) => e.target == r.target && e.is_plain(),
                };
                if eligible && compatible {
                    let mut folded = r.clone();
                    folded.negated.retain(|n| !u.positive.contains(n));
                    folded.provenance = None;
                    let mut merged = u.clone();
                    merged.id = joined_id(&u.id, &r.id);
                    let branch = match u.else_branch.as_deref() {
                        None => folded,
                        Some(e) => {
                            let mut e = e.clone();
                            e.id = joined_id(&e.id, &r.id);
                            push_unique(&mut e.positive, &folded.positive);
                            push_unique(&mut e.negated, &folded.negated);
                            e
                        }
                    };
                    merged.else_branch = Some(Box::new(simplify(&branch, &self.current, self.graphs)));
                    if self.try_merge(i, j, merged, JoinStepKind::Else)? {
                        continue;
                    }
                }
                j += 1;
            }
            i += 1;
        }
        Ok(())
    }
}

/// Joins rules while keeping every outcome on `graphs` unchanged. The
/// guarantee holds on the context set; on other cases joined rules may
/// decide differently.
pub fn join(rs: &RuleSet, graphs: &[PolylineGraph]) -> Result<JoinReport> {
    rs.validate()?;
    let reference = rs
        .classify_all(graphs)?
        .into_iter()
        .map(|p| p.outcome)
        .collect();
    let mut joiner = Joiner {
        graphs,
        reference,
        current: rs.clone(),
        steps: Vec::new(),
    };
    joiner.union_pass()?;
    joiner.nested_pass()?;
    joiner.else_pass()?;
    Ok(JoinReport {
        ruleset: joiner.current,
        steps: joiner.steps,
    })
}
