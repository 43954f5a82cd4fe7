use cyclic_caching::delivery::*;
use cyclic_caching::error::Error;
use cyclic_caching::params::SchemeParams;
use cyclic_caching::placement::PlacementMatrix;

fn p(k: usize, t: usize, a: usize) -> SchemeParams {
    SchemeParams::new(k, t, a, a)
}

fn lin_plan(k: usize, t: usize, a: usize) -> TransmissionPlan {
    let params = p(k, t, a).validate().unwrap();
    let v = PlacementMatrix::cyclic(k, t).unwrap();
    build_plan(&params, &v).unwrap()
}

#[test]
fn mod1_examples() {
    assert_eq!(mod1(6, 6), 6);
    assert_eq!(mod1(7, 6), 1);
    assert_eq!(mod1(3, 6), 3);
    assert_eq!(mod1(0, 6), 6);
    assert_eq!(mod1(-5, 6), 1);
    for a in -30..30 {
        assert!((1..=6).contains(&mod1(a, 6)));
        assert_eq!(mod1(a + 6, 6), mod1(a, 6));
    }
}

#[test]
fn index_vectors_small_example() {
    let params = p(6, 2, 3);
    let iv = index_vectors(&params, 1, 1).unwrap();
    assert_eq!(iv.users, [1, 2, 3, 4, 5]);
    assert_eq!(iv.packets, [3, 3, 1, 1, 1]);
    let iv = index_vectors(&params, 4, 1).unwrap();
    assert_eq!(iv.users, [1, 2, 6, 3, 4]);
    assert_eq!(iv.packets, [2, 6, 1, 1, 1]);
    let iv = index_vectors(&params, 1, 2).unwrap();
    assert_eq!(iv.users, [2, 3, 4, 5, 6]);
    assert_eq!(iv.packets, [4, 4, 2, 2, 2]);
}

#[test]
fn index_vectors_eight_users() {
    let iv = index_vectors(&p(8, 2, 4), 1, 1).unwrap();
    assert_eq!(iv.users, [1, 2, 3, 4, 5, 6]);
    assert_eq!(iv.packets, [3, 3, 1, 1, 1, 1]);
}

#[test]
fn index_vectors_reject_out_of_range() {
    let params = p(6, 2, 3);
    assert!(index_vectors(&params, 5, 1).is_err());
    assert!(index_vectors(&params, 0, 1).is_err());
    assert!(index_vectors(&params, 1, 7).is_err());
}

#[test]
fn interference_sets_first_transmission() {
    let v = PlacementMatrix::cyclic(6, 2).unwrap();
    let users = [1, 2, 3, 4, 5];
    let packets = [3, 3, 1, 1, 1];
    let sets: Vec<_> = (1..=5)
        .map(|n| interference_set(&v, &users, &packets, n).unwrap())
        .collect();
    assert_eq!(
        sets,
        [vec![2, 5], vec![1, 5], vec![4, 5], vec![3, 5], vec![3, 4]]
    );
}

#[test]
fn interference_set_detects_broken_vectors() {
    let v = PlacementMatrix::cyclic(6, 2).unwrap();
    // packet 5 is cached by served user 5 only, so position 1 gains a suppression target
    let err = interference_set(&v, &[1, 2, 3, 4, 5], &[5, 3, 1, 1, 1], 1).unwrap_err();
    assert!(matches!(err, Error::Inconsistent(_)));
}

#[test]
fn small_plan_structure() {
    let plan = lin_plan(6, 2, 3);
    assert_eq!(plan.transmissions.len(), 24);
    assert_eq!(plan.subpacketization(), 30);
    let first = &plan.transmissions[0];
    let users: Vec<_> = first.users().collect();
    assert_eq!(users, [1, 2, 3, 4, 5]);
    let sets: Vec<_> = first
        .streams
        .iter()
        .map(|s| s.suppress_at.clone())
        .collect();
    assert_eq!(
        sets,
        [vec![2, 5], vec![1, 5], vec![4, 5], vec![3, 5], vec![3, 4]]
    );

    // user 3's packet 1 shows up in round-1 slots 1, 3, 4 with subpackets 1, 2, 3
    let hits: Vec<_> = plan.transmissions[..4]
        .iter()
        .flat_map(|t| {
            t.streams
                .iter()
                .filter(|s| s.user == 3 && s.packet == 1)
                .map(move |s| (t.slot, s.subpacket))
        })
        .collect();
    assert_eq!(hits, [(1, 1), (3, 2), (4, 3)]);
}

#[test]
fn single_gain_plan_has_two_streams() {
    let plan = lin_plan(4, 1, 1);
    assert_eq!(plan.transmissions.len(), 12);
    assert!(plan.transmissions.iter().all(|t| t.streams.len() == 2));
    assert!(plan
        .transmissions
        .iter()
        .flat_map(|t| &t.streams)
        .all(|s| s.suppress_at.is_empty()));
}

#[test]
fn verify_passes_and_counts() {
    let plan = lin_plan(6, 2, 3);
    let report = verify_plan(&plan);
    assert!(report.passed(), "{:?}", report.violations);
    assert_eq!(report.streams_checked, 120);
    assert_eq!(report.pairs_covered, 24);
    assert!(verify_plan(&lin_plan(8, 2, 4)).passed());
}

#[test]
fn verify_catches_corrupted_packet() {
    let mut plan = lin_plan(6, 2, 3);
    plan.transmissions[5].streams[0].packet = 4;
    let report = verify_plan(&plan);
    assert!(!report.passed());
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::Coverage { found, expected: 5, .. } if *found < 5)));
}

#[test]
fn verify_catches_dichotomy_break() {
    let mut plan = lin_plan(6, 2, 3);
    plan.transmissions[0].streams[0].suppress_at = vec![3, 5];
    let report = verify_plan(&plan);
    assert!(report.violations.iter().any(|v| matches!(
        v,
        Violation::Dichotomy {
            transmission: 0,
            victim: 2,
            interferer: 1
        }
    )));
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::SuppressMember { user: 3, .. })));
}

#[test]
fn verify_catches_repeated_subpacket() {
    let mut plan = lin_plan(6, 2, 3);
    let s = &mut plan.transmissions[2].streams[3];
    s.subpacket = 1;
    let report = verify_plan(&plan);
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::SubpacketIndices { .. })));
}

#[test]
fn shift_structure() {
    assert!(shift_check(&lin_plan(6, 2, 3)));
    assert!(shift_check(&lin_plan(8, 2, 4)));
    let mut plan = lin_plan(6, 2, 3);
    // swap slots 1 and 2 of round 2
    plan.transmissions.swap(4, 5);
    assert!(!shift_check(&plan));
    let mut plan = lin_plan(6, 2, 3);
    let (a, b) = (plan.transmissions[4].slot, plan.transmissions[5].slot);
    plan.transmissions[4].slot = b;
    plan.transmissions[5].slot = a;
    plan.transmissions.swap(4, 5);
    assert!(!shift_check(&plan));
}

#[test]
fn structural_split_of_round_one() {
    let params = p(9, 3, 4);
    for slot in 1..=6 {
        let iv = index_vectors(&params, slot, 1).unwrap();
        assert_eq!(&iv.users[..3], &[1, 2, 3]);
        assert!(iv.packets[3..].iter().all(|&x| x == 1));
    }
}
