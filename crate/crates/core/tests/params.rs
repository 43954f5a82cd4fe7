use cyclic_caching::params::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn report(k: usize, t: usize, l: usize, a: usize, kf: usize, s: Scheme) -> (String, String) {
    let p = SchemeParams::new(k, t, l, a).with_phantoms(kf);
    let r = complexity_report(&p, s);
    (r.subpacketization.to_string(), r.transmissions.to_string())
}

#[test]
fn validate_accepts_small_example() {
    assert!(SchemeParams::new(6, 2, 3, 3).validate().is_ok());
}

#[test]
fn validate_rejects_regime_violations() {
    let err = SchemeParams::new(6, 4, 3, 3).validate().unwrap_err();
    assert!(err.to_string().contains("t <= alpha"), "{err}");
    let err = SchemeParams::new(6, 2, 3, 4).validate().unwrap_err();
    assert!(err.to_string().contains("alpha <= L"), "{err}");
    let err = SchemeParams::new(6, 2, 3, 3)
        .with_library_size(5)
        .validate()
        .unwrap_err();
    assert!(err.to_string().contains("N >= K"), "{err}");
    let err = SchemeParams::new(2, 2, 3, 3).validate().unwrap_err();
    assert!(err.to_string().contains("K + K_f > t"), "{err}");
    let err = SchemeParams::new(4, 2, 3, 3).validate().unwrap_err();
    assert!(err.to_string().contains("t + alpha"), "{err}");
    assert!(SchemeParams::new(4, 2, 3, 3)
        .with_phantoms(1)
        .validate()
        .is_ok());
    assert!(SchemeParams::new(6, 0, 3, 3).validate().is_err());
    assert!(SchemeParams::new(6, 2, 3, 3)
        .with_file_size(0.0)
        .validate()
        .is_err());
}

#[test]
fn phi_examples() {
    assert_eq!(phi(20, 4, 8), 4);
    assert_eq!(phi(6, 2, 3), 1);
    assert_eq!(phi(105, 7, 14), 7);
}

#[test]
fn report_examples() {
    assert_eq!(
        report(8, 2, 5, 2, 0, Scheme::Ms),
        ("140".into(), "70".into())
    );
    assert_eq!(
        report(8, 2, 5, 4, 0, Scheme::Red),
        ("12".into(), "12".into())
    );
    assert_eq!(
        report(30, 4, 8, 4, 0, Scheme::Lin),
        ("240".into(), "780".into())
    );
    assert_eq!(
        report(8, 2, 5, 5, 0, Scheme::Red),
        ("56".into(), "48".into())
    );
    assert_eq!(report(8, 2, 5, 2, 0, Scheme::Le), ("4".into(), "6".into()));
    assert_eq!(report(8, 2, 5, 2, 0, Scheme::Mb), ("-".into(), "-".into()));
    assert_eq!(
        report(8, 2, 5, 4, 0, Scheme::Mb),
        ("28".into(), "28".into())
    );
}

#[test]
fn nominal_mb_ignores_divisibility() {
    let p = SchemeParams::new(20, 4, 8, 8);
    assert_eq!(
        complexity_report(&p, Scheme::Mb).subpacketization,
        Count::Unavailable
    );
    assert_eq!(
        nominal_report(&p, Scheme::Mb).subpacketization.to_u64(),
        Some(4845)
    );
}

#[test]
fn order_labels() {
    assert_eq!(
        complexity_order(Scheme::Lin, false).subpacketization,
        "O(K)"
    );
    assert_eq!(
        complexity_order(Scheme::Red, true).subpacketization,
        "O(K^2)"
    );
    assert_eq!(
        complexity_order(Scheme::Ms, false).subpacketization,
        "O(K^t K^{L-1})"
    );
    assert_eq!(
        complexity_order(Scheme::Ms, true).transmissions,
        "O(2^{K·H(γ)})"
    );
}

#[test]
fn entropy_values() {
    assert_eq!(binary_entropy(0.5), 1.0);
    assert_eq!(binary_entropy(0.0), 0.0);
    assert_eq!(binary_entropy(1.0), 0.0);
    assert!((binary_entropy(0.25) - 0.811_278_124_459_132_9).abs() < 1e-15);
}

#[test]
fn scheme_round_trips_through_label() {
    for s in Scheme::ALL {
        assert_eq!(s.label().parse::<Scheme>().unwrap(), s);
    }
    assert_eq!("no-cc".parse::<Scheme>().unwrap(), Scheme::NoCc);
}

proptest! {
    #[test]
    fn red_times_phi_squared_is_lin(k in 2usize..200, t in 1usize..20, extra in 0usize..20, kf in 0usize..8) {
        let a = t + extra;
        prop_assume!(k + kf > t);
        let p = SchemeParams::new(k, t, a, a).with_phantoms(kf);
        let lin = complexity_report(&p, Scheme::Lin);
        let red = complexity_report(&p, Scheme::Red);
        let phi2 = BigUint::from(p.phi().pow(2));
        prop_assert_eq!(red.subpacketization.exact().unwrap() * &phi2, lin.subpacketization.exact().unwrap().clone());
        prop_assert_eq!(red.transmissions.exact().unwrap() * &phi2, lin.transmissions.exact().unwrap().clone());
        prop_assert!(red.subpacketization.exact().unwrap() > &BigUint::from(0u32));
    }

    #[test]
    fn lin_subpacketization_linear_in_users(t in 1usize..6, extra in 0usize..6, k in 7usize..60) {
        let a = t + extra;
        let s = |k: usize| complexity_report(&SchemeParams::new(k, t, a, a), Scheme::Lin)
            .subpacketization.to_u64().unwrap();
        prop_assert_eq!(s(k) * 2, s(2 * k));
        prop_assert_eq!(s(k) % k as u64, 0);
    }
}
