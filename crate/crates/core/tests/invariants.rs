use evadesim::analytic;
use evadesim::stochastic::{bernoulli_stream, Purpose, StreamKey};
use evadesim::taxpayer::{run_single, StepOutcome};
use evadesim::TaxpayerParams;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = TaxpayerParams> {
    (
        0.01f64..0.99,
        0.01f64..0.99,
        0.005f64..0.5,
        1.01f64..4.0,
        0.01f64..10.0,
    )
        .prop_map(|(tau, k, p, lambda, pf0)| TaxpayerParams::new(tau, k, p, lambda, pf0).unwrap())
}

fn trajectory(params: &TaxpayerParams, seed: u64, horizon: usize) -> Vec<StepOutcome> {
    let audits = bernoulli_stream(StreamKey::new(seed, 0, 0, Purpose::Audit), params.p).unwrap();
    run_single(params, horizon, audits).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fortune_bounds(p in params(), seed in any::<u64>()) {
        let traj = trajectory(&p, seed, 400);
        for o in &traj {
            let s = o.state;
            prop_assert!(s.f >= 0.0);
            prop_assert!(s.f <= p.k * s.t as f64 + 1e-9);
            prop_assert!(o.repaid >= 0.0);
            if o.audited {
                prop_assert_eq!(s.n, 0);
            } else {
                prop_assert_eq!(o.repaid, 0.0);
            }
        }
    }

    #[test]
    fn repayment_never_exceeds_penalty(p in params(), seed in any::<u64>()) {
        let traj = trajectory(&p, seed, 400);
        let mut n_before = 0u64;
        for o in &traj {
            let n = n_before + u64::from(o.evaded);
            prop_assert!(o.repaid <= p.penalty_per_evasion() * n as f64 + 1e-12);
            n_before = o.state.n;
        }
    }

    #[test]
    fn compliance_is_absorbing(p in params(), seed in any::<u64>()) {
        let traj = trajectory(&p, seed, 400);
        if let Some(i) = traj.iter().position(|o| o.state.pf <= 0.0) {
            for o in &traj[i + 1..] {
                prop_assert!(!o.evaded);
                prop_assert!(o.state.pf <= 0.0);
            }
        }
    }

    #[test]
    fn high_tax_evades_forever(
        k in 0.01f64..0.9,
        gap in 0.001f64..0.09,
        p in 0.005f64..0.5,
        lambda in 1.01f64..4.0,
        pf0 in 0.01f64..5.0,
        seed in any::<u64>(),
    ) {
        let params = TaxpayerParams::new(k + gap, k, p, lambda, pf0).unwrap();
        let traj = trajectory(&params, seed, 500);
        prop_assert!(traj.iter().all(|o| o.evaded));
    }

    #[test]
    fn invariants_while_evading(p in params(), seed in any::<u64>()) {
        let p = p.with_pf0(p.pf0 + 0.01);
        let lt = p.penalty_per_evasion();
        let traj = trajectory(&p, seed, 400);
        for o in traj.iter().take_while(|o| o.evaded) {
            let bound = lt * o.state.n as f64;
            if lt <= p.k {
                prop_assert!(o.state.f >= bound - 1e-9);
            } else {
                prop_assert!(o.state.f <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn drift_between_audits(p in params(), seed in any::<u64>()) {
        let p = p.with_pf0(p.pf0 + 0.01);
        let slope = analytic::drift(&p).drift;
        let traj = trajectory(&p, seed, 400);
        let (mut t0, mut pf_t0) = (0u64, p.pf0);
        for o in traj.iter().take_while(|o| o.evaded) {
            if o.audited {
                let t1 = o.state.t;
                let rate = (o.state.pf - pf_t0) / (t1 - t0) as f64;
                prop_assert!((rate - slope).abs() < 1e-9, "rate {} slope {}", rate, slope);
                t0 = t1;
                pf_t0 = o.state.pf;
            }
        }
    }
}
