mod common;

use std::collections::{HashSet, VecDeque};

use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use zrefine::mc::{explore, ExploreOptions};
use zrefine::refine::ConditionKind;
use zrefine::translate::{derive_bounds, translate, Overrides};
use zrefine::zparse::parse_spec;

/// Direct simulation of the bounded set specification: state (max, s, p)
/// with `s` a bitmask over three elements; p = 3 is the bottom input when
/// the carrier has one.
fn set_spec_reachable(nat_hi: u32, bottom: bool) -> usize {
    let np: u8 = if bottom { 4 } else { 3 };
    let inv = |max: u32, s: u8, p: u8| p != 3 && s.count_ones() <= max;
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    for max in 0..=nat_hi {
        for p in 0..np {
            if inv(max, 0, p) && seen.insert((max, 0u8, p)) {
                queue.push_back((max, 0u8, p));
            }
        }
    }
    while let Some((max, s, p)) = queue.pop_front() {
        let mut next = Vec::new();
        if inv(max, s, p) {
            let bit = 1u8 << p;
            let mut after = Vec::new();
            if s.count_ones() < max && s & bit == 0 {
                after.push(s | bit);
            }
            if s & bit != 0 {
                after.push(s & !bit);
            }
            for s2 in after {
                for p2 in 0..np {
                    if inv(max, s2, p2) {
                        next.push((max, s2, p2));
                    }
                }
            }
        }
        if next.is_empty() {
            next.extend((0..np).map(|p2| (max, s, p2)));
        }
        for t in next {
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen.len()
}

#[test]
fn abstract_state_count_matches_direct_simulation() {
    let a = parse_spec(&corpus("setseq/abstract.tex")).unwrap();
    let b = derive_bounds(&[&a], &Overrides::default()).unwrap();
    assert_eq!(b.nat_hi, 4);
    let m = translate(&a, &b).unwrap();
    let space = explore(&m, &ExploreOptions::default()).unwrap();
    let direct = set_spec_reachable(4, false);
    assert_eq!(space.len(), direct);
    // 3 inputs times #{s : #s <= max}, summed over max.
    assert_eq!(direct, 3 * (1 + 4 + 7 + 8 + 8));

    // Under the bounds shared with the sequence spec, T gains a bottom and
    // NAT widens to 5. Bottom inputs are reached only through ELSE.
    let c = parse_spec(&corpus("setseq/concrete.tex")).unwrap();
    let b = derive_bounds(&[&a, &c], &Overrides::default()).unwrap();
    assert_eq!(b.nat_hi, 5);
    let space = explore(&translate(&a, &b).unwrap(), &ExploreOptions::default()).unwrap();
    assert_eq!(space.len(), set_spec_reachable(5, true));
    assert_eq!(space.len(), 4 + 15 + 24 + 24 + 24 + 24);
}

#[test]
fn init_false_gives_empty_space() {
    let src = corpus("setseq/concrete.tex").replace("l' = \\emptyseq]", "\\# l' < 0]");
    let c = parse_spec(&src).unwrap();
    let b = derive_bounds(&[&c], &Overrides::default()).unwrap();
    let space = explore(&translate(&c, &b).unwrap(), &ExploreOptions::default()).unwrap();
    assert!(space.is_empty());
}

#[test]
fn state_cap_is_reported() {
    let a = parse_spec(&corpus("setseq/abstract.tex")).unwrap();
    let b = derive_bounds(&[&a], &Overrides::default()).unwrap();
    let m = translate(&a, &b).unwrap();
    let opts = ExploreOptions {
        max_states: 10,
        ..ExploreOptions::default()
    };
    assert!(matches!(
        explore(&m, &opts),
        Err(zrefine::Error::CapacityExceeded { .. })
    ));
}

fn same_space(m: &zrefine::ir::FiniteModel) {
    let run = |w| {
        explore(
            m,
            &ExploreOptions {
                workers: w,
                ..ExploreOptions::default()
            },
        )
        .unwrap()
    };
    let one = run(1);
    for w in [4, 8] {
        let other = run(w);
        assert_eq!(one.states, other.states, "workers {w}");
        assert_eq!(one.depth_counts, other.depth_counts);
        assert_eq!(one.transition_count(), other.transition_count());
    }
}

#[test]
fn worker_count_does_not_change_the_space() {
    for s in [setseq(), boxoffice()] {
        let p = problem(&s, &Overrides::default()).unwrap();
        for k in ConditionKind::ALL {
            same_space(&p.build(k).unwrap().model);
        }
    }
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        same_space(&random_model(&mut rng));
    }
}

#[test]
fn corpus_models_are_total_and_sound() {
    for s in [setseq(), boxoffice(), identity()] {
        let p = problem(&s, &Overrides::default()).unwrap();
        let mut models = vec![p.abs.clone(), p.conc.clone()];
        models.extend(ConditionKind::ALL.iter().map(|&k| p.build(k).unwrap().model));
        for m in &models {
            let space = explore(m, &ExploreOptions::default()).unwrap();
            assert_eq!(space.check_totality_and_soundness().unwrap(), None, "{}", m.name);
        }
    }
}
