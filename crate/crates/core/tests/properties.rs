use ilc_core::dataset::NDPoint;
use ilc_core::discovery::{discover, DiscoveryConfig, TopSelector};
use ilc_core::evaluation::{make_folds, CvConfig};
use ilc_core::mapping::{decode, encode, encode_all, MappingKind, MappingMode, PolylineGraph};
use ilc_core::rules::{from_trace, join, simplify_all, RuleSet};
use proptest::prelude::*;

fn mode_for(kind: MappingKind, n: usize) -> MappingMode {
    match kind {
        MappingKind::Ilc2Weighted => MappingMode::weighted((0..n).map(|i| [1.0, 2.0, 0.25][i % 3]).collect()),
        MappingKind::IlcSequential => MappingMode::sequential_spaced(n, 8.0),
        MappingKind::IlcGeneric => MappingMode::generic((0..n).map(|i| (i * i) as f64).collect()),
        k => MappingMode::new(k),
    }
}

fn dataset(max_dim: usize) -> impl Strategy<Value = (Vec<PolylineGraph>, Vec<usize>)> {
    (2..=max_dim).prop_flat_map(|n| {
        prop::collection::vec((prop::collection::vec(0u8..=12, n), 0usize..2), 4..40).prop_map(|rows| {
            let points: Vec<NDPoint> = rows
                .iter()
                .map(|(v, _)| NDPoint::new(v.iter().map(|&x| x as f64 * 0.5).collect()).unwrap())
                .collect();
            let labels = rows.iter().map(|r| r.1).collect();
            (encode_all(&points, &MappingMode::partial_dynamic()).unwrap(), labels)
        })
    })
}

fn outcomes(rs: &RuleSet, graphs: &[PolylineGraph]) -> Vec<Option<String>> {
    rs.classify_all(graphs).unwrap().iter().map(|p| p.class().map(str::to_string)).collect()
}

fn names() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

proptest! {
    #[test]
    fn every_mode_round_trips(kind in prop::sample::select(MappingKind::ALL.to_vec()),
                              values in prop::collection::vec(-500i32..500, 2..14)) {
        let n = values.len();
        let p = NDPoint::new(values.iter().map(|&v| v as f64).collect()).unwrap();
        let mode = mode_for(kind, n);
        let g = encode(&p, &mode).unwrap();
        prop_assert_eq!(g.padded, kind.is_paired() && n % 2 == 1);
        prop_assert_eq!(decode(&g, &mode).unwrap().values, p.values);
    }

    #[test]
    fn rules_replay_discovery((graphs, labels) in dataset(4)) {
        let cfg = DiscoveryConfig { min_pure_support: 3, ..DiscoveryConfig::default() };
        let trace = discover(&graphs, &labels, &names(), &cfg, &mut TopSelector).unwrap();
        let rs = from_trace(&trace, &graphs);
        let preds = rs.classify_all(&graphs).unwrap();
        for (i, step) in trace.steps.iter().enumerate() {
            let (rule, class) = (format!("R{}", i + 1), names()[step.class].clone());
            for &c in &step.removed {
                prop_assert_eq!(preds[c].fired.as_deref(), Some(rule.as_str()));
                prop_assert_eq!(preds[c].class(), Some(class.as_str()));
            }
        }
    }

    #[test]
    fn simplify_and_join_keep_outcomes((graphs, labels) in dataset(6)) {
        let cfg = DiscoveryConfig { min_pure_support: 2, ..DiscoveryConfig::default() };
        let trace = discover(&graphs, &labels, &names(), &cfg, &mut TopSelector).unwrap();
        let rs = from_trace(&trace, &graphs);
        let before = outcomes(&rs, &graphs);
        let simplified = simplify_all(&rs, &graphs);
        prop_assert_eq!(&outcomes(&simplified, &graphs), &before);
        let joined = join(&simplified, &graphs).unwrap().ruleset;
        prop_assert_eq!(&outcomes(&joined, &graphs), &before);
        prop_assert!(joined.rules.len() <= rs.rules.len());
    }

    #[test]
    fn folds_partition_the_cases(labels in prop::collection::vec(0usize..3, 30..120), k in 2usize..8, seed in any::<u64>()) {
        for c in 0..3 {
            prop_assume!(labels.iter().filter(|&&l| l == c).count() >= k);
        }
        let cfg = CvConfig { k, seed, ..CvConfig::default() };
        let folds = make_folds(&labels, 3, &cfg, &[]).unwrap();
        prop_assert_eq!(folds.len(), labels.len());
        let sizes: Vec<usize> = (0..k).map(|f| folds.iter().filter(|&&x| x == f).count()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for c in 0..3 {
            let per: Vec<usize> = (0..k)
                .map(|f| folds.iter().zip(&labels).filter(|(&x, &l)| x == f && l == c).count())
                .collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        prop_assert_eq!(make_folds(&labels, 3, &cfg, &[]).unwrap(), folds);
    }
}
