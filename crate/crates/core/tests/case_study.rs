use ilc_core::case_study::{self, fixture, BENIGN, MALIGNANT};
use ilc_core::evaluation::{make_folds, mini_cases, CvConfig, Adversarial};
use ilc_core::rules::{evaluate, prune, prune_preview, PruneStrategy, RuleSet};

fn first_rules(rs: &RuleSet, n: usize) -> RuleSet {
    RuleSet {
        rules: rs.rules[..n].to_vec(),
        ..rs.clone()
    }
}

#[test]
fn first_four_rules_cover_602_with_full_precision() {
    let fx = fixture();
    let names = case_study::class_names();
    let m = evaluate(&first_rules(&fx.ruleset, 4), &fx.graphs, &fx.labels, &names).unwrap();
    assert_eq!(m.decided, 602);
    assert_eq!(m.correct, 602);
    assert_eq!(format!("{:.2}", 100.0 * m.decided as f64 / 683.0), "88.14");
}

#[test]
fn reassign_counts_for_b9_and_b12() {
    let fx = fixture();
    let names = case_study::class_names();
    let count = |p: &ilc_core::rules::PrunedRule, class: &str| p.counts.iter().find(|(c, _)| c == class).unwrap().1;

    let r9 = prune_preview(&fx.ruleset, "R9", &fx.graphs, &fx.labels, &names).unwrap();
    assert_eq!((count(&r9, MALIGNANT), count(&r9, BENIGN)), (47, 4));
    assert_eq!(r9.new_target.as_deref(), Some(MALIGNANT));
    assert_eq!(r9.errors, 4);

    let r12 = prune_preview(&fx.ruleset, "R12", &fx.graphs, &fx.labels, &names).unwrap();
    assert_eq!((count(&r12, MALIGNANT), count(&r12, BENIGN)), (52, 1));
}

#[test]
fn reassign_rewrites_mini_rules() {
    let fx = fixture();
    let names = case_study::class_names();
    let report = prune(&fx.ruleset, 7, PruneStrategy::Reassign, &fx.graphs, &fx.labels, &names).unwrap();
    let ids: Vec<&str> = report.pruned.iter().map(|p| p.id.as_str()).collect();
    assert_eq!(ids, ["R8", "R9", "R11", "R12"]);
    let r9m = report.ruleset.rule("R9M").expect("replacement rule");
    assert_eq!(r9m.target, MALIGNANT);
    assert!(r9m.negated.is_empty());
    assert_eq!(r9m.reassigned.as_ref().unwrap().errors, 4);
    assert_eq!(report.ruleset.to_string().matches("R9M:").count(), 1);
}

#[test]
fn refusing_mini_rules_leaves_16_refused_and_full_precision() {
    let fx = fixture();
    let names = case_study::class_names();
    let report = prune(&fx.ruleset, 7, PruneStrategy::Refuse, &fx.graphs, &fx.labels, &names).unwrap();
    assert_eq!(report.pruned.iter().map(|p| p.coverage).sum::<usize>(), 16);
    let m = evaluate(&report.ruleset, &fx.graphs, &fx.labels, &names).unwrap();
    assert_eq!(m.total - m.decided, 16);
    assert_eq!(m.correct, m.decided);
}

#[test]
fn mini_cases_fill_one_validation_fold() {
    let fx = fixture();
    let mini = mini_cases(&fx.ruleset, &fx.graphs, 7).unwrap();
    assert_eq!(mini.len(), 16);
    let cfg = CvConfig {
        adversarial: Adversarial::MiniBox,
        designated_fold: 2,
        ..CvConfig::default()
    };
    let folds = make_folds(&fx.labels, 2, &cfg, &mini).unwrap();
    assert!(mini.iter().all(|&c| folds[c] == 2));
    let size = folds.iter().filter(|&&f| f == 2).count();
    assert_eq!((683 - size, size), (615, 68));
}

#[test]
fn published_ruleset_on_fixture_decides_everything() {
    let fx = fixture();
    let names = case_study::class_names();
    let m = evaluate(&fx.ruleset, &fx.graphs, &fx.labels, &names).unwrap();
    assert_eq!((m.decided, m.correct), (683, 683));
    let per_rule: Vec<usize> = m.rules.iter().map(|r| r.covered).collect();
    assert_eq!(per_rule, case_study::PUBLISHED_RULE_CASES);
}
