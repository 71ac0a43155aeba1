use proptest::prelude::*;
use tmfusion::fusion::*;
use tmfusion::par::Execution;
use tmfusion::synthgen::{gen_hat_data, hat_dataset};
use tmfusion::tm::{train_model, Clause, ClauseRecord, GlobalDescription, Polarity};
use tmfusion::{BinaryDataset, Error, HyperParams, Stream, TsetlinMachine};

fn xor_data() -> BinaryDataset {
    let rows = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
    BinaryDataset::new(vec!["x1".into(), "x2".into()], rows, vec![0, 1, 1, 0]).unwrap()
}

/// Literal indices for f = 2: x1 = 0, x2 = 1, ¬x1 = 2, ¬x2 = 3.
fn xor_machine() -> TsetlinMachine {
    use Polarity::*;
    let c = |p, l: &[usize], w| Clause::from_literals(p, 2, 10, l, w).unwrap();
    let no = vec![c(Positive, &[0, 1], 2), c(Positive, &[2, 3], 1), c(Negative, &[0, 3], 1), c(Negative, &[2, 1], 1)];
    let yes = vec![c(Positive, &[0, 3], 3), c(Positive, &[2, 1], 1), c(Negative, &[0, 1], 1), c(Negative, &[2, 3], 2)];
    let params = HyperParams { clauses_per_class: 4, threshold: 2, ta_states: 10, ..HyperParams::default() };
    TsetlinMachine::from_pools(params, vec!["x1".into(), "x2".into()], vec![0, 1], vec![no, yes]).unwrap()
}

fn small_params(seed: u64) -> HyperParams {
    HyperParams {
        clauses_per_class: 10,
        threshold: 25,
        specificity: 1.2,
        ta_states: 100,
        boost_true_positives: false,
        epochs: 20,
        seed,
    }
}

#[test]
fn asd_on_a_fixed_machine() {
    let tm = xor_machine();
    // sums per row (class 0, class 1): 00 -> (1,-2), 01 -> (-1,1), 10 -> (-1,3), 11 -> (2,-1)
    let asd = mean_asd(&tm, &xor_data(), Execution::Sequential).unwrap();
    assert!((asd - (3.0 + 2.0 + 4.0 + 3.0) / 4.0).abs() < 1e-12);
}

#[test]
fn compatibility_groups_cover_every_row() {
    let tm = xor_machine();
    let mut d = xor_data();
    d.set_label(0, 1);
    let groups = compatibility_report(&tm, &d, Execution::Sequential).unwrap();
    assert_eq!(groups.iter().map(|g| g.count).sum::<usize>(), 4);
    let wrong = groups.iter().find(|g| g.truth == 1 && g.predicted == 0).unwrap();
    assert_eq!(wrong.count, 1);
    assert!((wrong.asd - 3.0).abs() < 1e-12);
    assert!(render_compatibility(&groups).lines().count() > groups.len());
}

#[test]
fn asd_needs_two_classes() {
    let mut stream = Stream::new(3);
    let params = HyperParams { clauses_per_class: 4, ..HyperParams::default() };
    let tm = TsetlinMachine::new(params, 2, &[0, 1, 2], &mut stream).unwrap();
    assert!(matches!(mean_asd(&tm, &xor_data(), Execution::Sequential), Err(Error::Unsupported(_))));
}

#[test]
fn localization_is_deterministic_across_execution_modes() {
    let root = Stream::new(11);
    let data = hat_dataset(&gen_hat_data(300, 4, 3, &mut root.substream(1)).unwrap(), 4, 3).unwrap();
    let base = train_model(&small_params(0), &data, None, &root.substream(2)).unwrap().global_description();
    let cfg = LocalizeConfig { cuts: 4, remove: 2, fraction: 0.5 };
    let seq = localize_inconsistencies(&base, &data, cfg, &small_params(0), &root.substream(3), Execution::Sequential).unwrap();
    let par = localize_inconsistencies(&base, &data, cfg, &small_params(0), &root.substream(3), Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq.cuts.len(), 4);
    assert_eq!(seq.removal_candidates.len(), 2);
    for w in seq.removal_candidates.windows(2) {
        assert!(w[0].delta >= w[1].delta);
    }
    for c in &seq.removal_candidates {
        assert_eq!(c.flagged, c.delta > 0.0);
        assert!((c.score - seq.baseline_score - c.delta).abs() < 1e-12);
    }
    // cut rows are reported as stable ids
    assert!(seq.cuts.iter().all(|c| c.rows.len() == 150));
    assert!(!seq.render().is_empty());
    let bad = LocalizeConfig { cuts: 2, remove: 3, fraction: 0.5 };
    assert!(localize_inconsistencies(&base, &data, bad, &small_params(0), &root, Execution::Sequential).is_err());
}

fn arb_description() -> impl Strategy<Value = GlobalDescription> {
    let record = (0u32..2, any::<bool>(), prop::collection::btree_set(0usize..8, 0..4), 1u32..20);
    prop::collection::vec(record, 0..10).prop_map(|recs| {
        let mut records: Vec<ClauseRecord> = recs
            .into_iter()
            .map(|(class, pos, lits, weight)| ClauseRecord {
                class,
                polarity: if pos { Polarity::Positive } else { Polarity::Negative },
                empty: lits.is_empty(),
                literals: lits.into_iter().collect(),
                weight,
            })
            .collect();
        records.sort_by(|a, b| (a.class, a.polarity, &a.literals).cmp(&(b.class, b.polarity, &b.literals)));
        GlobalDescription {
            num_features: 4,
            feature_names: (0..4).map(|i| format!("x{i}")).collect(),
            classes: vec![0, 1],
            params_fingerprint: String::new(),
            records,
        }
    })
}

proptest! {
    #[test]
    fn overlap_is_a_symmetric_similarity(a in arb_description(), b in arb_description()) {
        let ab = description_overlap(&a, &b).unwrap().overall;
        let ba = description_overlap(&b, &a).unwrap().overall;
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((description_overlap(&a, &a).unwrap().overall - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_descriptions_never_change(a in arb_description(), theta in 0.01f64..0.99) {
        let r = detect_change(&a, &a, ChangeConfig::new(theta)).unwrap();
        prop_assert!(!r.changed);
        prop_assert!(r.new_literal_patterns.is_empty());
    }

    #[test]
    fn jaccard_bounds(a in prop::collection::btree_set(0usize..12, 0..6), b in prop::collection::btree_set(0usize..12, 0..6)) {
        let a: Vec<usize> = a.into_iter().collect();
        let b: Vec<usize> = b.into_iter().collect();
        let j = clause_jaccard(&a, &b);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, clause_jaccard(&b, &a));
        prop_assert_eq!(j == 1.0, a == b);
    }

    #[test]
    fn cuts_are_sorted_distinct_positions(len in 20usize..400, n in 2usize..12, fraction in 0.05f64..1.0, seed: u64) {
        let cuts = make_cuts(len, n, fraction, &mut Stream::new(seed)).unwrap();
        prop_assert_eq!(cuts.len(), n);
        for c in &cuts {
            prop_assert!(!c.positions.is_empty());
            prop_assert!(c.positions.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(c.positions.iter().all(|&p| p < len));
        }
    }
}
