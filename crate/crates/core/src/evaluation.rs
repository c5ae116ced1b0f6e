//! k-fold cross-validation of box rules and scenario estimates.
//!
//! The scenario estimate assumes every fold but one is classified without
//! error and asks what the average would be if the remaining fold lost
//! `misclassified` of its cases.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::discovery::{discover, DiscoveryConfig, TopSelector};
use crate::error::{Error, Result};
use crate::mapping::{encode_all, MappingMode, PolylineGraph};
use crate::rules::{from_trace, prune, PruneStrategy, RuleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversarial {
    None,
    /// All mini-rule cases share one designated validation fold.
    MiniBox,
}

impl FromStr for Adversarial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "mini-box" | "mini_box" | "mini_box_fold" => Ok(Self::MiniBox),
            other => Err(Error::Config(format!("unknown adversarial mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub adversarial: Adversarial,
    /// Fold receiving the mini cases under [`Adversarial::MiniBox`].
    pub designated_fold: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 10,
            seed: 7,
            stratified: true,
            adversarial: Adversarial::None,
            designated_fold: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k > n {
            return Err(Error::Config(format!("k must lie in 2..={n}, got {}", self.k)));
        }
        if self.designated_fold >= self.k {
            return Err(Error::Config("designated fold out of range".into()));
        }
        Ok(())
    }
}

/// Rule post-processing applied to every training fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    pub prune: Option<PruneStrategy>,
    pub tau: usize,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            prune: None,
            tau: 7,
        }
    }
}

/// Deals `cases` round-robin into `folds` starting at `*next`.
fn deal(cases: &[usize], folds: &[usize], next: &mut usize, out: &mut [usize]) {
    for &c in cases {
        out[c] = folds[*next % folds.len()];
        *next += 1;
    }
}

/// Groups `cases` by class (label order), each group shuffled.
fn shuffled_groups(
    cases: &[usize],
    labels: &[usize],
    n_classes: usize,
    stratified: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let mut groups = if stratified {
        let mut g = vec![Vec::new(); n_classes];
        for &c in cases {
            g[labels[c]].push(c);
        }
        g
    } else {
        vec![cases.to_vec()]
    };
    for g in &mut groups {
        g.shuffle(rng);
    }
    groups
}

/// Fold index of every case. Folds differ in size by at most one; the
/// designated fold of a mini-box split has `n / k` cases, padded with
/// randomly drawn non-mini cases.
pub fn make_folds(
    labels: &[usize],
    n_classes: usize,
    cfg: &CvConfig,
    mini: &[usize],
) -> Result<Vec<usize>> {
    let n = labels.len();
    cfg.validate(n)?;
    if cfg.stratified {
        let mut counts = vec![0usize; n_classes];
        for &l in labels {
            counts[l] += 1;
        }
        if let Some(&smallest) = counts.iter().filter(|&&c| c > 0).min() {
            if cfg.k > smallest {
                return Err(Error::Config(format!(
                    "k = {} exceeds the smallest class ({smallest} cases)",
                    cfg.k
                )));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = vec![usize::MAX; n];
    let all_folds: Vec<usize> = (0..cfg.k).collect();
    match cfg.adversarial {
        Adversarial::None => {
            let mut next = 0;
            let all: Vec<usize> = (0..n).collect();
            for g in shuffled_groups(&all, labels, n_classes, cfg.stratified, &mut rng) {
                deal(&g, &all_folds, &mut next, &mut out);
            }
        }
        Adversarial::MiniBox => {
            let size = n / cfg.k;
            let mut is_mini = vec![false; n];
            for &c in mini {
                is_mini[c] = true;
            }
            let mini_count = is_mini.iter().filter(|&&m| m).count();
            if mini_count > size {
                return Err(Error::Config(format!(
                    "{mini_count} mini cases exceed the fold size {size}"
                )));
            }
            let mut rest: Vec<usize> = (0..n).filter(|&c| !is_mini[c]).collect();
            rest.shuffle(&mut rng);
            let (pad, rest) = rest.split_at(size - mini_count);
            for c in (0..n).filter(|&c| is_mini[c]).chain(pad.iter().copied()) {
                out[c] = cfg.designated_fold;
            }
            let others: Vec<usize> = all_folds
                .iter()
                .copied()
                .filter(|&f| f != cfg.designated_fold)
                .collect();
            let mut next = 0;
            for g in shuffled_groups(rest, labels, n_classes, cfg.stratified, &mut rng) {
                deal(&g, &others, &mut next, &mut out);
            }
        }
    }
    Ok(out)
}

/// Cases decided by a rule that decides at most `tau` cases.
pub fn mini_cases(rs: &RuleSet, graphs: &[PolylineGraph], tau: usize) -> Result<Vec<usize>> {
    let coverage = rs.coverage(graphs)?;
    Ok(rs
        .classify_all(graphs)?
        .into_iter()
        .enumerate()
        .filter(|(_, p)| p.fired.as_ref().is_some_and(|id| coverage[id] <= tau))
        .map(|(i, _)| i)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioEstimate {
    pub fold_size: u64,
    pub misclassified: u64,
    pub k: u64,
}

impl ScenarioEstimate {
    pub fn fold_accuracy(&self) -> Ratio<u64> {
        Ratio::new(self.fold_size - self.misclassified, self.fold_size)
    }

    /// The bad fold averaged with `k - 1` perfect folds.
    pub fn average(&self) -> Ratio<u64> {
        (self.fold_accuracy() + Ratio::from_integer(self.k - 1)) / self.k
    }

    pub fn fold_accuracy_pct(&self) -> f64 {
        pct(self.fold_accuracy())
    }

    pub fn average_pct(&self) -> f64 {
        pct(self.average())
    }
}

fn pct(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 * 100.0 / *r.denom() as f64
}

pub fn scenario_estimates(fold_size: u64, misclassified: u64, k: u64) -> Result<ScenarioEstimate> {
    if fold_size == 0 {
        return Err(Error::EmptyFold);
    }
    if misclassified > fold_size {
        return Err(Error::TooManyMisclassified {
            misclassified: misclassified as usize,
            fold_size: fold_size as usize,
        });
    }
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    Ok(ScenarioEstimate {
        fold_size,
        misclassified,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train: usize,
    pub size: usize,
    pub rules: usize,
    pub decided: usize,
    pub correct: usize,
    pub refused: usize,
    /// Accuracy over decided cases.
    pub accuracy: Option<f64>,
    pub refusal_rate: f64,
}

impl FoldResult {
    pub fn errors(&self) -> usize {
        self.decided - self.correct
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub adversarial: Adversarial,
    pub folds: Vec<FoldResult>,
    /// Mean of fold accuracies over folds that decided anything.
    pub mean_accuracy: Option<f64>,
    pub decided: usize,
    pub correct: usize,
    pub refused: usize,
    /// Fold with the most errors plus refusals (lowest index on ties).
    pub worst_fold: usize,
    /// Worst fold's errors only; refusals are not counted against it.
    pub best_case: ScenarioEstimate,
    /// Worst fold's errors and refusals together.
    pub worst_case: ScenarioEstimate,
}

impl CvReport {
    pub fn precision(&self) -> Option<f64> {
        (self.decided > 0).then(|| self.correct as f64 / self.decided as f64)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "fold\ttrain\tsize\trules\tdecided\tcorrect\trefused\taccuracy");
        for f in &self.folds {
            let acc = f.accuracy.map_or("-".to_string(), |a| format!("{:.2}%", a * 100.0));
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                f.fold, f.train, f.size, f.rules, f.decided, f.correct, f.refused, acc
            );
        }
        let mean = self
            .mean_accuracy
            .map_or("-".to_string(), |a| format!("{:.2}%", a * 100.0));
        let precision = self
            .precision()
            .map_or("-".to_string(), |a| format!("{:.2}%", a * 100.0));
        let _ = writeln!(s, "k = {}, seed = {}, adversarial = {:?}", self.k, self.seed, self.adversarial);
        let _ = writeln!(s, "mean fold accuracy: {mean}");
        let _ = writeln!(
            s,
            "decided: {}, correct: {}, refused: {}, precision: {precision}",
            self.decided, self.correct, self.refused
        );
        for (name, e) in [("best case", &self.best_case), ("worst case", &self.worst_case)] {
            let _ = writeln!(
                s,
                "{name} (fold {}, {} of {} lost): fold {:.2}%, average {:.2}%",
                self.worst_fold,
                e.misclassified,
                e.fold_size,
                e.fold_accuracy_pct(),
                e.average_pct()
            );
        }
        s
    }
}

/// Rules learned on `train` cases.
pub fn train_rules(
    graphs: &[PolylineGraph],
    labels: &[usize],
    class_names: &[String],
    train: &[usize],
    dcfg: &DiscoveryConfig,
    rcfg: &RuleConfig,
) -> Result<RuleSet> {
    let g: Vec<PolylineGraph> = train.iter().map(|&i| graphs[i].clone()).collect();
    let l: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let trace = discover(&g, &l, class_names, dcfg, &mut TopSelector)?;
    let rs = from_trace(&trace, &g);
    match rcfg.prune {
        None => Ok(rs),
        Some(strategy) => Ok(prune(&rs, rcfg.tau, strategy, &g, &l, class_names)?.ruleset),
    }
}

/// Cross-validates discovery plus rule building. Mini cases for the
/// adversarial split come from rules learned on the whole dataset.
pub fn run_cv(
    ds: &LabeledDataset,
    mode: &MappingMode,
    dcfg: &DiscoveryConfig,
    rcfg: &RuleConfig,
    cv: &CvConfig,
) -> Result<CvReport> {
    let graphs = encode_all(&ds.points, mode)?;
    let n_classes = ds.classes.len();
    let class_names: Vec<String> = ds.classes.iter().map(|c| c.name.clone()).collect();
    let mini = match cv.adversarial {
        Adversarial::None => Vec::new(),
        Adversarial::MiniBox => {
            let all: Vec<usize> = (0..ds.len()).collect();
            let rs = train_rules(&graphs, &ds.labels, &class_names, &all, dcfg, &RuleConfig::default())?;
            mini_cases(&rs, &graphs, rcfg.tau)?
        }
    };
    let folds = make_folds(&ds.labels, n_classes, cv, &mini)?;
    let results: Vec<FoldResult> = (0..cv.k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] != f).collect();
            let valid: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] == f).collect();
            let rs = train_rules(&graphs, &ds.labels, &class_names, &train, dcfg, rcfg)?;
            let (mut decided, mut correct) = (0, 0);
            for &i in &valid {
                if let Some(c) = rs.classify(&graphs[i])?.class() {
                    decided += 1;
                    correct += (c == class_names[ds.labels[i]]) as usize;
                }
            }
            Ok(FoldResult {
                fold: f,
                train: train.len(),
                size: valid.len(),
                rules: rs.rules.len(),
                decided,
                correct,
                refused: valid.len() - decided,
                accuracy: (decided > 0).then(|| correct as f64 / decided as f64),
                refusal_rate: (valid.len() - decided) as f64 / valid.len() as f64,
            })
        })
        .collect::<Result<_>>()?;
    summarize(cv, results)
}

fn summarize(cv: &CvConfig, folds: Vec<FoldResult>) -> Result<CvReport> {
    let accs: Vec<f64> = folds.iter().filter_map(|f| f.accuracy).collect();
    let worst = folds
        .iter()
        .max_by(|a, b| {
            (a.errors() + a.refused)
                .cmp(&(b.errors() + b.refused))
                .then(b.fold.cmp(&a.fold))
        })
        .ok_or(Error::EmptyFold)?;
    let k = cv.k as u64;
    let best_case = scenario_estimates(worst.size as u64, worst.errors() as u64, k)?;
    let worst_case = scenario_estimates(worst.size as u64, (worst.errors() + worst.refused) as u64, k)?;
    Ok(CvReport {
        k: cv.k,
        seed: cv.seed,
        adversarial: cv.adversarial,
        worst_fold: worst.fold,
        best_case,
        worst_case,
        mean_accuracy: (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64),
        decided: folds.iter().map(|f| f.decided).sum(),
        correct: folds.iter().map(|f| f.correct).sum(),
        refused: folds.iter().map(|f| f.refused).sum(),
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ClassLabel, NDPoint};

    #[test]
    fn scenario_examples() {
        let e = scenario_estimates(68, 16, 10).unwrap();
        assert_eq!(e.fold_accuracy(), Ratio::new(13, 17));
        assert_eq!(format!("{:.2}", e.fold_accuracy_pct()), "76.47");
        assert_eq!(format!("{:.2}", e.average_pct()), "97.65");
        let w = scenario_estimates(68, 68, 10).unwrap();
        assert_eq!(w.fold_accuracy_pct(), 0.0);
        assert_eq!(w.average(), Ratio::new(9, 10));
        let p = scenario_estimates(68, 0, 10).unwrap();
        assert_eq!(p.average(), Ratio::from_integer(1));
        assert!(matches!(scenario_estimates(0, 0, 10), Err(Error::EmptyFold)));
        assert!(matches!(
            scenario_estimates(5, 6, 10),
            Err(Error::TooManyMisclassified { .. })
        ));
    }

    #[test]
    fn folds_are_balanced_and_stratified() {
        let labels: Vec<usize> = (0..683).map(|i| usize::from(i >= 444)).collect();
        let cfg = CvConfig::default();
        let folds = make_folds(&labels, 2, &cfg, &[]).unwrap();
        let mut sizes = [0; 10];
        let mut reds = [0; 10];
        for (i, &f) in folds.iter().enumerate() {
            sizes[f] += 1;
            reds[f] += labels[i];
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert!(reds.iter().max().unwrap() - reds.iter().min().unwrap() <= 1);
        assert_eq!(folds, make_folds(&labels, 2, &cfg, &[]).unwrap());
    }

    #[test]
    fn mini_cases_share_the_designated_fold() {
        let labels: Vec<usize> = (0..683).map(|i| usize::from(i >= 444)).collect();
        let mini: Vec<usize> = (100..116).collect();
        let cfg = CvConfig {
            adversarial: Adversarial::MiniBox,
            designated_fold: 3,
            ..CvConfig::default()
        };
        let folds = make_folds(&labels, 2, &cfg, &mini).unwrap();
        assert!(mini.iter().all(|&c| folds[c] == 3));
        let designated = folds.iter().filter(|&&f| f == 3).count();
        assert_eq!((683 - designated, designated), (615, 68));
        for f in 0..10 {
            let s = folds.iter().filter(|&&x| x == f).count();
            assert!((68..=69).contains(&s), "fold {f} has {s}");
        }
    }

    #[test]
    fn leave_one_out() {
        let labels = vec![0, 1, 0, 1, 0];
        let cfg = CvConfig {
            k: 5,
            stratified: false,
            ..CvConfig::default()
        };
        let mut folds = make_folds(&labels, 2, &cfg, &[]).unwrap();
        folds.sort();
        assert_eq!(folds, vec![0, 1, 2, 3, 4]);
        let strat = CvConfig { k: 5, ..CvConfig::default() };
        assert!(make_folds(&labels, 2, &strat, &[]).is_err());
    }

    #[test]
    fn separable_two_fold() {
        // duplicated points, so each validation case repeats a training case
        let pts = [[1.0, 1.0], [1.0, 1.0], [8.0, 8.0], [8.0, 8.0]];
        let ds = LabeledDataset::new(
            pts.iter().map(|p| NDPoint::new(p.to_vec()).unwrap()).collect(),
            vec![0, 0, 1, 1],
            vec![ClassLabel::new("G", "green"), ClassLabel::new("R", "red")],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let dcfg = DiscoveryConfig {
            min_pure_support: 1,
            ..DiscoveryConfig::default()
        };
        let cv = CvConfig {
            k: 2,
            ..CvConfig::default()
        };
        let report = run_cv(&ds, &MappingMode::partial_dynamic(), &dcfg, &RuleConfig::default(), &cv).unwrap();
        assert_eq!(report.folds.len(), 2);
        for f in &report.folds {
            assert_eq!(f.accuracy, Some(1.0), "{}", report.to_text());
        }
    }
}
