//! Randomized invariants of the plans, the beamformers and the channel model.

use cyclic_caching::beamforming::{
    downlink_sinrs, inner_power_fixed_point, solve_maxmin, solve_zero_forcing, FixedPoint,
    StreamCoupling,
};
use cyclic_caching::delivery::{shift_check, verify_plan};
use cyclic_caching::grouping::build_unfiltered;
use cyclic_caching::simulator::{channel_stream, draw_channel};
use cyclic_caching::{build_scheme, Scheme, SchemeParams, SolverOptions};
use proptest::prelude::*;

/// `(K, t, alpha)` with `t <= alpha` and `t + alpha <= K`.
fn network(max_users: usize) -> impl Strategy<Value = (usize, usize, usize)> {
    (2..=max_users)
        .prop_flat_map(|k| (Just(k), 1..k))
        .prop_flat_map(|(k, t)| (Just(k), Just(t), t..=k.saturating_sub(t).max(t)))
        .prop_filter("t + alpha <= K", |&(k, t, a)| t + a <= k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lin_plans_verify((k, t, a) in network(14)) {
        let plan = build_scheme(&SchemeParams::new(k, t, a, a), Scheme::Lin).unwrap();
        let report = verify_plan(&plan);
        prop_assert!(report.passed(), "{:?}", report.violations);
        prop_assert_eq!(plan.transmissions.len(), k * (k - t));
        prop_assert_eq!(report.pairs_covered, k * (k - t));
        prop_assert!(shift_check(&plan));
        for tx in &plan.transmissions {
            prop_assert_eq!(tx.streams.len(), t + a);
            for s in &tx.streams {
                prop_assert_eq!(s.suppress_at.len(), a - 1);
            }
        }
    }

    #[test]
    fn red_plans_verify((k, t, a) in network(24), phantoms in 0usize..4) {
        let params = SchemeParams::new(k, t, a, a).with_phantoms(phantoms);
        let plan = build_scheme(&params, Scheme::Red).unwrap();
        let report = verify_plan(&plan);
        prop_assert!(report.passed(), "{:?}", report.violations);
        let phi = params.phi();
        prop_assert_eq!(report.pairs_covered, k * ((k + phantoms - t) / phi));
        prop_assert_eq!(plan.subpacketization(), (k + phantoms) * (t + a) / (phi * phi));
        if phantoms == 0 {
            let virtual_users = k / phi;
            prop_assert_eq!(plan.transmissions.len(), virtual_users * (virtual_users - t / phi));
        }
        for s in plan.transmissions.iter().flat_map(|tx| &tx.streams) {
            prop_assert!(s.user <= k);
            prop_assert!(s.suppress_at.iter().all(|&u| u <= k));
            prop_assert!(s.suppress_at.len() < a);
        }
    }

    #[test]
    fn unfiltered_phantom_plans_serve_every_effective_pair(
        (k, t, a) in network(16),
        phantoms in 1usize..4,
    ) {
        let params = SchemeParams::new(k, t, a, a).with_phantoms(phantoms);
        let plan = build_unfiltered(&params, Scheme::Red).unwrap();
        for tx in &plan.transmissions {
            prop_assert_eq!(tx.streams.len(), t + a);
            for s in &tx.streams {
                prop_assert_eq!(s.suppress_at.len(), a - 1);
            }
        }
        let filtered = build_scheme(&params, Scheme::Red).unwrap();
        prop_assert!(filtered.transmissions.len() <= plan.transmissions.len());
    }

    #[test]
    fn fixed_point_from_zero_increases(seed in any::<u64>(), target in 0.05f64..2.0) {
        let params = SchemeParams::new(6, 2, 3, 3);
        let plan = build_scheme(&params, Scheme::Lin).unwrap();
        let channel = draw_channel::<f64, _>(&params, 10.0, &mut channel_stream(seed, 0));
        let coupling = StreamCoupling::new(&plan.transmissions[0].streams);
        let options = SolverOptions { max_inner_iterations: 1, ..SolverOptions::default() };
        let mut previous = vec![0.0; coupling.len()];
        for _ in 0..30 {
            let next = match inner_power_fixed_point(
                &channel, &coupling, target, Some(&previous), None, &options,
            ).unwrap() {
                FixedPoint::Converged { powers, .. } | FixedPoint::NotConverged { powers, .. } => powers,
                FixedPoint::Exceeded { .. } => unreachable!("no cap given"),
            };
            for (new, old) in next.iter().zip(&previous) {
                prop_assert!(*new >= *old * (1.0 - 1e-12), "{new} < {old}");
            }
            previous = next;
        }
    }

    #[test]
    fn maxmin_meets_budget_and_dominates_zero_forcing(
        seed in any::<u64>(),
        snr_db in -5.0f64..30.0,
        slot in 0usize..24,
    ) {
        let params = SchemeParams::new(6, 2, 3, 3);
        let plan = build_scheme(&params, Scheme::Lin).unwrap();
        let streams = &plan.transmissions[slot].streams;
        let channel = draw_channel::<f64, _>(&params, snr_db, &mut channel_stream(seed, 0));
        let budget = channel.power_budget();
        let mm = solve_maxmin(&channel, streams, &SolverOptions::default()).unwrap();
        let zf = solve_zero_forcing(&channel, streams).unwrap();
        prop_assert!((mm.total_power() - budget).abs() <= 1e-6 * budget);
        prop_assert!((zf.total_power() - budget).abs() <= 1e-9 * budget);
        prop_assert!(mm.balanced_sinr >= zf.balanced_sinr * (1.0 - 1e-5));
        let coupling = StreamCoupling::new(streams);
        let check = downlink_sinrs(&channel, &coupling, &mm.beamformers);
        for (a, b) in check.iter().zip(&mm.sinrs) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
        prop_assert!((mm.min_sinr() - mm.balanced_sinr).abs() <= 1e-4 * mm.balanced_sinr);
    }

    #[test]
    fn balanced_sinr_grows_with_power(seed in any::<u64>(), snr_db in -5.0f64..25.0) {
        let params = SchemeParams::new(6, 2, 3, 3);
        let plan = build_scheme(&params, Scheme::Lin).unwrap();
        let streams = &plan.transmissions[0].streams;
        let low = draw_channel::<f64, _>(&params, snr_db, &mut channel_stream(seed, 0));
        let high = low.with_power_budget(low.power_budget() * 2.0).unwrap();
        let options = SolverOptions::default();
        let a = solve_maxmin(&low, streams, &options).unwrap().balanced_sinr;
        let b = solve_maxmin(&high, streams, &options).unwrap().balanced_sinr;
        prop_assert!(b >= a * (1.0 - 1e-5), "{b} < {a}");
    }
}

#[test]
fn channel_entries_have_unit_variance_and_independent_streams() {
    let params = SchemeParams::new(100, 1, 10, 1);
    let mut samples = Vec::new();
    let mut rng = channel_stream(7, 0);
    for _ in 0..100 {
        let channel = draw_channel::<f64, _>(&params, 0.0, &mut rng);
        for user in 1..=100 {
            samples.extend(channel.channel(user).iter().copied());
        }
    }
    assert_eq!(samples.len(), 100_000);
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<nalgebra::Complex<f64>>() / n;
    let variance = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
    let real_power = samples.iter().map(|z| z.re * z.re).sum::<f64>() / n;
    assert!(mean.norm() < 0.01, "mean {mean}");
    assert!((variance - 1.0).abs() < 0.02, "variance {variance}");
    assert!(
        (real_power - 0.5).abs() < 0.01,
        "real part power {real_power}"
    );

    let draw = |stream: u64| {
        let channel = draw_channel::<f64, _>(&params, 0.0, &mut channel_stream(7, stream));
        (1..=100)
            .flat_map(|u| channel.channel(u).iter().map(|z| z.re).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    let (a, b) = (draw(1), draw(2));
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let norm = (a.iter().map(|x| x * x).sum::<f64>() * b.iter().map(|y| y * y).sum::<f64>()).sqrt();
    assert!((dot / norm).abs() < 0.05, "correlation {}", dot / norm);
}
