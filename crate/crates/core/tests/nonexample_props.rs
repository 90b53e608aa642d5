use proptest::prelude::*;
use quasifold_core::nonexample::FlatFlow;

fn points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![-2.5f64..-0.05, 0.05f64..2.5], 20)
}

fn slack(flow: &FlatFlow<f64>, x: f64) -> f64 {
    2.0 * flow.accuracy() * x.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_group_law(xs in points()) {
        let flow = FlatFlow::<f64>::standard();
        for x in xs {
            let twice = flow.flow_time(flow.flow_time(x, 1.0).unwrap(), 1.0).unwrap();
            let once = flow.flow_time(x, 2.0).unwrap();
            prop_assert!((twice - once).abs() <= slack(&flow, x), "x = {x}: {twice} vs {once}");
        }
    }

    #[test]
    fn psi_inverse_round_trip(xs in points()) {
        let flow = FlatFlow::<f64>::standard();
        for x in xs {
            let y = flow.psi_inv(flow.flow_psi(x).unwrap()).unwrap();
            prop_assert!((y - x).abs() <= slack(&flow, x), "x = {x}: {y}");
            let y = flow.flow_psi(flow.psi_inv(x).unwrap()).unwrap();
            prop_assert!((y - x).abs() <= slack(&flow, x), "x = {x}: {y}");
        }
    }

    #[test]
    fn psi_is_increasing_and_keeps_sign(mut xs in points()) {
        let flow = FlatFlow::<f64>::standard();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let ys: Vec<f64> = xs.iter().map(|&x| flow.flow_psi(x).unwrap()).collect();
        for w in ys.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert_eq!(x.signum(), y.signum());
            // the flow moves right everywhere off zero
            prop_assert!(y >= x);
        }
    }

    // the probes at ±0.4 must lie inside the interval; closer to 0 the flow is
    // within 1e-11 of the identity and the tolerance cannot see it
    #[test]
    fn recovery_demo_never_matches(a in -0.9f64..-0.45, b in 0.45f64..0.9) {
        let flow = FlatFlow::<f64>::standard();
        let demo = flow.recovery_failure_demo(a, b, 3, 40, 1e-9).unwrap();
        prop_assert_eq!(demo.outcome.as_str(), "no_match");
        prop_assert!(demo.best.residual > 1e-9);
    }
}

#[test]
fn flat_zone_is_fixed() {
    let flow = FlatFlow::<f64>::standard();
    for x in [0.0, 1e-4, -5e-4, 0.02, -0.03] {
        assert_eq!(flow.flow_psi(x).unwrap(), x);
    }
}

#[test]
fn single_precision_flow_agrees_with_double() {
    let f32_flow = FlatFlow::<f32>::standard().with_accuracy(1e-6).unwrap();
    let f64_flow = FlatFlow::<f64>::standard();
    for x in [-1.5f32, -0.5, 0.5, 1.0, 2.0] {
        let a = f32_flow.flow_psi(x).unwrap() as f64;
        let b = f64_flow.flow_psi(x as f64).unwrap();
        assert!((a - b).abs() < 1e-5, "{x}: {a} vs {b}");
    }
}
