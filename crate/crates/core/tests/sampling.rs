use std::collections::BTreeSet;

use proptest::prelude::*;
use tmfusion::par::Execution;
use tmfusion::sampling::*;
use tmfusion::synthgen::{gen_prototype_data, PrototypeWorld};
use tmfusion::{BinaryDataset, HyperParams, Stream};

fn imbalanced(major: usize, minor: usize, features: usize, seed: u64) -> BinaryDataset {
    let world = PrototypeWorld { features, counts: vec![major, minor], flip: 0.2, label_noise: 0.0 };
    gen_prototype_data(&world, &mut Stream::new(seed)).unwrap().data
}

fn grade_params() -> HyperParams {
    HyperParams {
        clauses_per_class: 6,
        threshold: 8,
        specificity: 3.0,
        ta_states: 50,
        boost_true_positives: true,
        epochs: 5,
        seed: 0,
    }
}

#[test]
fn grades_are_sorted_and_mode_independent() {
    let d = imbalanced(60, 30, 10, 1);
    let plan = stratified_kfold(&d, 5, 2, &mut Stream::new(2)).unwrap();
    let s = Stream::new(3);
    let seq = grade_splits(&plan, &d, &grade_params(), GradeProtocol::Complement, &s, Execution::Sequential).unwrap();
    let par = grade_splits(&plan, &d, &grade_params(), GradeProtocol::Complement, &s, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq.len(), 10);
    let ids: BTreeSet<usize> = seq.iter().map(|g| g.id).collect();
    assert_eq!(ids, (0..10).collect());
    for w in seq.windows(2) {
        assert!(w[0].asd > w[1].asd || (w[0].asd == w[1].asd && w[0].id < w[1].id));
    }
    let hold = imbalanced(20, 20, 10, 4);
    let h = grade_splits(&plan, &d, &grade_params(), GradeProtocol::Holdout(&hold), &s, Execution::Sequential).unwrap();
    assert_eq!(h.len(), 10);
}

#[test]
fn informed_donors_come_from_selected_subsets() {
    let d = imbalanced(80, 30, 10, 5);
    let strat = OversampleStrategy { kind: StrategyKind::MaxAsd, ratio: 1.0, k_neighbors: 2 };
    let out = informed_oversample(&d, &grade_params(), strat, 5, 1, GradeProtocol::Complement, &Stream::new(6), Execution::Sequential)
        .unwrap();
    let grades = out.grades.as_ref().unwrap();
    assert_eq!(out.donor_subsets, vec![grades[0].id]);
    assert_eq!(out.data.class_counts()[&1], 80);
    assert_eq!(out.synthetic.len(), 50);
    assert_eq!(&out.data.rows()[..d.len()], d.rows());

    // the same donors, replayed through the SMOTE stage, give the same rows
    let plan = stratified_kfold(&d, 5, 1, &mut Stream::new(6).substream(oversample_stage::SPLITS)).unwrap();
    let donors = &plan.subsets[grades[0].id];
    let replay = smote_from_donors(&d, donors, 1.0, 2, &mut Stream::new(6).substream(oversample_stage::SMOTE)).unwrap();
    assert_eq!(replay.data, out.data);
    for &(seed, nb) in &replay.parents {
        assert!(donors.contains(&seed) && donors.contains(&nb));
    }

    let strat = OversampleStrategy { kind: StrategyKind::DropMinAsd, ratio: 1.0, k_neighbors: 2 };
    let out = informed_oversample(&d, &grade_params(), strat, 5, 1, GradeProtocol::Complement, &Stream::new(6), Execution::Sequential)
        .unwrap();
    assert_eq!(out.donor_subsets.len(), 4);
    assert_eq!(out.data.class_counts()[&1], 80);
}

#[test]
fn none_and_random_skip_grading() {
    let d = imbalanced(40, 12, 6, 7);
    for kind in [StrategyKind::None, StrategyKind::RandomSmote] {
        let strat = OversampleStrategy { kind, ratio: 0.5, k_neighbors: 3 };
        let out = informed_oversample(&d, &grade_params(), strat, 4, 1, GradeProtocol::Complement, &Stream::new(8), Execution::Sequential)
            .unwrap();
        assert!(out.grades.is_none());
        let expected_minority = if kind == StrategyKind::None { 12 } else { 20 };
        assert_eq!(out.data.class_counts()[&1], expected_minority);
    }
}

fn arb_binary(max_rows: usize) -> impl Strategy<Value = (BinaryDataset, usize)> {
    (2usize..10, 4usize..max_rows, 0usize..max_rows).prop_flat_map(|(f, major, minor_extra)| {
        let minor = 4 + minor_extra % major.max(5);
        let rows = prop::collection::vec(prop::collection::vec(0u8..2, f), major + minor);
        (rows, Just(major), Just(f))
    })
    .prop_map(|(rows, major, f)| {
        let labels: Vec<u32> = (0..rows.len()).map(|i| u32::from(i >= major)).collect();
        let names = (0..f).map(|i| format!("b{i}")).collect();
        (BinaryDataset::new(names, rows, labels).unwrap(), f)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smote_rows_copy_parent_bits_and_hit_the_target(
        (d, f) in arb_binary(60),
        ratio in 0.1f64..=1.0,
        k in 1usize..4,
        seed: u64,
    ) {
        let counts = d.class_counts();
        let (minority, majority) = if counts[&1] < counts[&0] { (1, 0) } else { (0, 1) };
        let target = ((ratio * counts[&majority] as f64).ceil() as usize).max(counts[&minority]);
        let out = smote_binary(&d, ratio, k, &mut Stream::new(seed)).unwrap();
        let after = out.data.class_counts();
        prop_assert_eq!(after[&minority], target);
        prop_assert_eq!(after[&majority], counts[&majority]);
        prop_assert_eq!(&out.data.rows()[..d.len()], d.rows());
        prop_assert_eq!(out.synthetic.len(), target - counts[&minority]);
        let ids: BTreeSet<u64> = out.data.ids().iter().copied().collect();
        prop_assert_eq!(ids.len(), out.data.len());
        for (&p, &(s, n)) in out.synthetic.iter().zip(&out.parents) {
            prop_assert_eq!(out.data.label(p), minority);
            prop_assert_eq!(d.label(s), minority);
            prop_assert_eq!(d.label(n), minority);
            prop_assert!(s != n);
            for b in 0..f {
                let bit = out.data.row(p)[b];
                prop_assert!(bit == d.row(s)[b] || bit == d.row(n)[b]);
            }
        }
    }

    #[test]
    fn neighbours_are_among_the_k_nearest((d, _) in arb_binary(40), k in 1usize..4, seed: u64) {
        let out = smote_binary(&d, 1.0, k, &mut Stream::new(seed)).unwrap();
        let minority = out.data.label(*out.synthetic.first().unwrap_or(&0));
        let pool: Vec<usize> = (0..d.len()).filter(|&i| d.label(i) == minority).collect();
        let dist = |a: usize, b: usize| d.row(a).iter().zip(d.row(b)).filter(|(x, y)| x != y).count();
        for &(s, n) in &out.parents {
            let closer = pool.iter().filter(|&&q| q != s && (dist(s, q), q) < (dist(s, n), n)).count();
            prop_assert!(closer < k);
        }
    }

    #[test]
    fn folds_partition_each_repeat((d, _) in arb_binary(80), k in 2usize..5, repeats in 1usize..3, seed: u64) {
        let plan = stratified_kfold(&d, k, repeats, &mut Stream::new(seed)).unwrap();
        prop_assert_eq!(plan.subsets.len(), k * repeats);
        let counts = d.class_counts();
        for r in 0..repeats {
            let mut all: Vec<usize> = plan.subsets[r * k..(r + 1) * k].iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..d.len()).collect::<Vec<_>>());
            for s in &plan.subsets[r * k..(r + 1) * k] {
                for (&c, &n) in &counts {
                    let in_fold = s.iter().filter(|&&p| d.label(p) == c).count();
                    prop_assert!(in_fold == n / k || in_fold == n / k + 1);
                }
            }
        }
    }
}

#[test]
fn planted_noise_grades_below_clean_subsets() {
    let params = HyperParams {
        clauses_per_class: 10,
        threshold: 10,
        specificity: 3.9,
        ta_states: 100,
        boost_true_positives: true,
        epochs: 20,
        seed: 0,
    };
    let trials = 20;
    let mut below = 0;
    for trial in 0..trials {
        let root = Stream::new(400 + trial);
        let world = PrototypeWorld { features: 20, counts: vec![300, 200], flip: 0.2, label_noise: 0.0 };
        let mut d = gen_prototype_data(&world, &mut root.substream(1)).unwrap().data;
        let plan = stratified_kfold(&d, 10, 1, &mut root.substream(2)).unwrap();
        let noisy = 0;
        let mut ns = root.substream(3);
        for &p in &plan.subsets[noisy] {
            if ns.unit() < 0.4 {
                d.set_label(p, 1 - d.label(p));
            }
        }
        let grades = grade_splits(&plan, &d, &params, GradeProtocol::Complement, &root.substream(4), Execution::Sequential).unwrap();
        let noisy_asd = grades.iter().find(|g| g.id == noisy).unwrap().asd;
        let clean: Vec<f64> = grades.iter().filter(|g| g.id != noisy).map(|g| g.asd).collect();
        if noisy_asd < clean.iter().sum::<f64>() / clean.len() as f64 {
            below += 1;
        }
    }
    assert!(below * 10 >= trials * 8, "noisy subset graded below the clean mean in {below}/{trials} trials");
}
