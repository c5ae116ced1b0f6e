//! Interactive discovery sessions.
//!
//! A session owns a dataset, its graphs and a discovery state. A person
//! plays the candidate selector: they list ranked candidates, accept one (or
//! a box of their own), undo, and finally join and prune the rules. Every
//! mutation bumps a version number; accepting requires the version the
//! candidate list was produced at, so decisions on stale lists are refused.

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, NDPoint};
use crate::discovery::{
    CandidateList, Discovery, DiscoveryConfig, DiscoveryState, DiscoveryTrace, GridBox, Phase,
    TopSelector, TraceStep,
};
use crate::error::{Error, Result};
use crate::mapping::{encode, encode_all, MappingMode, PolylineGraph};
use crate::render::{render_scene, BoxOverlay, RenderOptions};
use crate::rules::{
    evaluate, from_trace, join, prune, prune_preview, prune_rule, JoinReport, Prediction,
    PruneReport, PruneStrategy, PrunedRule, RuleMetrics, RuleSet,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub mode: MappingMode,
    pub discovery: DiscoveryConfig,
    pub candidate_limit: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            mode: MappingMode::partial_dynamic(),
            discovery: DiscoveryConfig::default(),
            candidate_limit: 50,
        }
    }
}

/// What a person accepts: an entry of the current list or a box of their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Candidate(usize),
    Box(GridBox),
}

/// Everything undo restores.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: DiscoveryState,
    pub edited: Option<RuleSet>,
}

pub struct Session {
    pub id: String,
    pub dataset: LabeledDataset,
    pub config: SessionConfig,
    graphs: Vec<PolylineGraph>,
    class_names: Vec<String>,
    current: Snapshot,
    undo: Vec<Snapshot>,
    version: u64,
    cache: Option<(u64, usize, CandidateList)>,
}

impl Session {
    pub fn new(id: impl Into<String>, dataset: LabeledDataset, config: SessionConfig) -> Result<Self> {
        config.discovery.validate()?;
        let graphs = encode_all(&dataset.points, &config.mode)?;
        let class_names: Vec<String> = dataset.classes.iter().map(|c| c.name.clone()).collect();
        let state = Discovery::new(&graphs, &dataset.labels, &class_names, config.discovery.clone())?.state;
        Ok(Self {
            id: id.into(),
            dataset,
            config,
            graphs,
            class_names,
            current: Snapshot { state, edited: None },
            undo: Vec::new(),
            version: 0,
            cache: None,
        })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn graphs(&self) -> &[PolylineGraph] {
        &self.graphs
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn snapshot(&self) -> Snapshot {
        self.current.clone()
    }

    pub fn trace(&self) -> &DiscoveryTrace {
        &self.current.state.trace
    }

    pub fn active_cases(&self) -> Vec<usize> {
        (0..self.graphs.len())
            .filter(|&i| self.current.state.active[i])
            .collect()
    }

    pub fn is_done(&self) -> bool {
        self.current.state.active.iter().all(|&a| !a)
    }

    pub fn undo_depth(&self) -> usize {
        self.undo.len()
    }

    fn discovery(&self) -> Result<Discovery<'_>> {
        let mut d = Discovery::new(
            &self.graphs,
            &self.dataset.labels,
            &self.class_names,
            self.config.discovery.clone(),
        )?;
        d.state = self.current.state.clone();
        Ok(d)
    }

    fn commit(&mut self, next: Snapshot) {
        let prev = std::mem::replace(&mut self.current, next);
        self.undo.push(prev);
        self.version += 1;
    }

    fn check_token(&self, token: u64) -> Result<()> {
        if token != self.version {
            return Err(Error::StaleState {
                given: token,
                current: self.version,
            });
        }
        Ok(())
    }

    /// Ranked candidates at the current version, at most `limit`
    /// (the configured cap when `None`).
    pub fn candidates(&mut self, limit: Option<usize>) -> Result<CandidateList> {
        let limit = limit.unwrap_or(self.config.candidate_limit).max(1);
        if let Some((v, l, list)) = &self.cache {
            if *v == self.version && *l == limit {
                return Ok(list.clone());
            }
        }
        let list = self.discovery()?.candidates(limit);
        self.cache = Some((self.version, limit, list.clone()));
        Ok(list)
    }

    /// Accepts a choice made on the list produced at version `token`.
    pub fn accept(&mut self, token: u64, choice: Choice) -> Result<TraceStep> {
        self.check_token(token)?;
        let list = self.candidates(None)?;
        let (b, phase) = match choice {
            Choice::Candidate(i) => {
                let c = list.items.get(i).ok_or_else(|| {
                    Error::Invalid(format!("candidate {i} of {}", list.items.len()))
                })?;
                (c.grid_box.clone(), list.phase)
            }
            Choice::Box(b) => {
                let d = self.discovery()?;
                d.check_box(&b)?;
                let stats = crate::discovery::box_stats(
                    &b,
                    &self.graphs,
                    &self.dataset.labels,
                    self.class_names.len(),
                    &self.current.state.active,
                );
                let pure_turn = list.phase == Phase::Pure
                    && stats.is_pure()
                    && stats.support >= self.config.discovery.min_pure_support;
                (b, if pure_turn { Phase::Pure } else { Phase::Ranked })
            }
        };
        let mut d = self.discovery()?;
        let step = d.accept(&b, phase)?.clone();
        let state = d.state;
        self.commit(Snapshot { state, edited: None });
        Ok(step)
    }

    /// Restores the state before the last mutation. Returns false when there
    /// is nothing to undo.
    pub fn undo(&mut self) -> bool {
        match self.undo.pop() {
            Some(prev) => {
                self.current = prev;
                self.version += 1;
                true
            }
            None => false,
        }
    }

    /// Accepts top-ranked candidates until every case is covered.
    pub fn auto_complete(&mut self) -> Result<usize> {
        let mut d = self.discovery()?;
        let before = d.state.trace.steps.len();
        d.run(&mut TopSelector, 1)?;
        let added = d.state.trace.steps.len() - before;
        if added > 0 {
            let state = d.state;
            self.commit(Snapshot { state, edited: None });
        }
        Ok(added)
    }

    /// Joined or pruned rules if any, else rules built from the trace.
    pub fn ruleset(&self) -> RuleSet {
        match &self.current.edited {
            Some(rs) => rs.clone(),
            None => from_trace(&self.current.state.trace, &self.graphs),
        }
    }

    /// Replaces the working rules with an imported rule set over the same
    /// classes. Undo restores the previous rules.
    pub fn load_ruleset(&mut self, rs: RuleSet) -> Result<()> {
        rs.validate()?;
        if rs.classes != self.class_names {
            return Err(Error::Invalid(format!(
                "rule set classes {:?} differ from dataset classes {:?}",
                rs.classes, self.class_names
            )));
        }
        let state = self.current.state.clone();
        self.commit(Snapshot {
            state,
            edited: Some(rs),
        });
        Ok(())
    }

    pub fn metrics(&self) -> Result<RuleMetrics> {
        evaluate(&self.ruleset(), &self.graphs, &self.dataset.labels, &self.class_names)
    }

    pub fn join(&mut self) -> Result<JoinReport> {
        let report = join(&self.ruleset(), &self.graphs)?;
        let state = self.current.state.clone();
        self.commit(Snapshot {
            state,
            edited: Some(report.ruleset.clone()),
        });
        Ok(report)
    }

    pub fn prune_preview(&self, rule: &str) -> Result<PrunedRule> {
        prune_preview(
            &self.ruleset(),
            rule,
            &self.graphs,
            &self.dataset.labels,
            &self.class_names,
        )
    }

    /// Prunes one rule, or every rule deciding at most `tau` cases when
    /// `rule` is `None`.
    pub fn prune(
        &mut self,
        rule: Option<&str>,
        tau: Option<usize>,
        strategy: PruneStrategy,
    ) -> Result<PruneReport> {
        let rs = self.ruleset();
        let (g, l, c) = (&self.graphs, &self.dataset.labels, &self.class_names);
        let report = match rule {
            Some(id) => prune_rule(&rs, id, strategy, g, l, c)?,
            None => prune(&rs, tau.unwrap_or(self.config.discovery.mini_threshold), strategy, g, l, c)?,
        };
        let state = self.current.state.clone();
        self.commit(Snapshot {
            state,
            edited: Some(report.ruleset.clone()),
        });
        Ok(report)
    }

    pub fn classify(&self, points: &[NDPoint]) -> Result<Vec<Prediction>> {
        let rs = self.ruleset();
        points
            .iter()
            .map(|p| rs.classify(&encode(p, &self.config.mode)?))
            .collect()
    }

    /// SVG of the active cases with the accepted boxes and `extra` overlaid.
    pub fn plot(&self, mirrored: bool, extra: &[GridBox], all_cases: bool) -> Result<String> {
        let mut boxes: Vec<BoxOverlay> = self
            .trace()
            .steps
            .iter()
            .map(|s| BoxOverlay {
                color: self.dataset.classes[s.class].color.clone(),
                class: Some(s.class),
                ..BoxOverlay::new(s.grid_box.clone())
            })
            .collect();
        boxes.extend(extra.iter().cloned().map(|b| BoxOverlay {
            color: "blue".into(),
            ..BoxOverlay::new(b)
        }));
        let opts = RenderOptions {
            mode: self.config.mode.clone(),
            mirrored,
            boxes,
            cases: (!all_cases).then(|| self.active_cases()),
            ..RenderOptions::default()
        };
        render_scene(&self.dataset, &opts)
    }
}
