use proptest::prelude::*;
use tmfusion::synthgen::*;
use tmfusion::Stream;

fn step(actor: usize, action: Action) -> Step {
    Step { actor, action }
}

#[test]
fn worked_chain_names_its_literals() {
    // B passes right, C passes left, B passes left: A ends with the hat
    let ex = [step(1, Action::Right), step(2, Action::Left), step(1, Action::Left)];
    assert_eq!(simulate_final_owner(&ex, 4).unwrap(), (0, true));
    let names = relational_feature_names(4, 3);
    let example = HatExample { steps: ex.to_vec(), label: 0, consistent: true };
    let bits = encode_relational(&example, 4, 3).unwrap();
    let on: Vec<&str> = bits.iter().zip(&names).filter(|(b, _)| **b == 1).map(|(_, n)| n.as_str()).collect();
    assert_eq!(on, vec!["T0_B,R", "T1_C,L", "T2_B,L"]);
}

#[test]
fn query_feature_space_names() {
    let atoms = query_atoms(QueryKind::NeighbourQuery, 4);
    assert_eq!(atoms.len(), 12 + 6);
    assert_eq!(atom_name(&atoms[0]), "Pass[A,B]");
    assert!(atoms.iter().any(|a| atom_name(a) == "Query_IsNeighbour[C,D]"));
    let atoms = query_atoms(QueryKind::ValidPassQuery, 4);
    assert_eq!(atoms.len(), 6 + 12);
    assert!(atoms.iter().any(|a| atom_name(a) == "Query_IsValidPass[D,C]"));
}

#[test]
fn generation_is_seed_deterministic() {
    let a = gen_hat_data(50, 4, 3, &mut Stream::new(9)).unwrap();
    let b = gen_hat_data(50, 4, 3, &mut Stream::new(9)).unwrap();
    assert_eq!(a, b);
    let cfg = QueryTaskConfig::new(QueryKind::ValidPassQuery, 4, 50, 0.2);
    assert_eq!(gen_query_tasks(&cfg, &mut Stream::new(9)).unwrap(), gen_query_tasks(&cfg, &mut Stream::new(9)).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clean_chains_replay_to_their_label(persons in 2usize..=4, steps in 1usize..=3, seed: u64) {
        let data = gen_hat_data(40, persons, steps, &mut Stream::new(seed)).unwrap();
        for ex in &data {
            prop_assert!(ex.consistent);
            prop_assert_eq!(ex.steps.len(), steps);
            prop_assert_eq!(simulate_final_owner(&ex.steps, persons).unwrap(), (ex.label, true));
            let bits = encode_relational(ex, persons, steps).unwrap();
            prop_assert_eq!(bits.iter().filter(|&&b| b == 1).count(), steps);
        }
    }

    #[test]
    fn injection_marks_exactly_the_chosen_examples(rate in 0.0f64..=0.3, seed: u64) {
        let data = gen_hat_data(200, 4, 3, &mut Stream::new(seed)).unwrap();
        let (noisy, chosen) = inject_nontargeted(&data, 4, rate, &mut Stream::new(seed ^ 1)).unwrap();
        prop_assert_eq!(chosen.len(), (rate * 200.0).ceil() as usize);
        for (i, (before, after)) in data.iter().zip(&noisy).enumerate() {
            prop_assert_eq!(before.label, after.label);
            let touched = chosen.binary_search(&i).is_ok();
            prop_assert_eq!(!after.consistent, touched);
            let diffs: Vec<&Step> = before.steps.iter().zip(&after.steps).filter(|(a, b)| a != b).map(|(_, b)| b).collect();
            prop_assert_eq!(diffs.len(), usize::from(touched));
            for s in diffs {
                prop_assert!((s.actor == 0 && s.action == Action::Left) || (s.actor == 3 && s.action == Action::Right));
            }
        }
    }

    #[test]
    fn query_answers_follow_adjacency(rate in 0.0f64..0.5, seed: u64) {
        let cfg = QueryTaskConfig::new(QueryKind::NeighbourQuery, 4, 100, rate);
        let tasks = gen_query_tasks(&cfg, &mut Stream::new(seed)).unwrap();
        let d = query_dataset(&tasks, QueryKind::NeighbourQuery, 4).unwrap();
        prop_assert_eq!(d.len(), 100);
        for (t, &y) in tasks.iter().zip(d.labels()) {
            prop_assert_eq!(y == 1, t.answer);
            let (a, b) = match t.query {
                Atom::QueryIsNeighbour(a, b) => (a, b),
                _ => unreachable!(),
            };
            if t.contradiction {
                prop_assert_eq!((a, b), (0, 1));
                prop_assert!(t.answer);
            } else if t.answer {
                prop_assert_eq!(a.abs_diff(b), 1);
            }
        }
    }
}
