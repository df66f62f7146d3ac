use fracflux::fractional::{caputo_l1, rl_integral, TimeGrid};
use fracflux::special::gamma;
use proptest::prelude::*;

fn caputo_t2_error(alpha: f64, nt: usize) -> f64 {
    let grid = TimeGrid::new(1.0, nt).unwrap();
    let u: Vec<f64> = grid.nodes().iter().map(|t| t * t).collect();
    let d = caputo_l1(&u, alpha, &grid).unwrap();
    let c = 2.0 / gamma(3.0 - alpha).unwrap();
    grid.nodes()
        .iter()
        .zip(&d)
        .map(|(t, d)| (d - c * t.powf(2.0 - alpha)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn l1_order_on_t_squared() {
    let errs: Vec<f64> = [64, 128, 256, 512].iter().map(|&n| caputo_t2_error(0.5, n)).collect();
    for w in errs.windows(2) {
        let p = (w[0] / w[1]).log2();
        assert!((1.3..=1.8).contains(&p), "{errs:?}");
    }
}

#[test]
fn integral_of_power_matches_closed_form() {
    // I^α t = t^{1+α} / Γ(2+α), exact for the piecewise-linear rule
    let grid = TimeGrid::new(2.0, 40).unwrap();
    let nodes = grid.nodes();
    let out = rl_integral(&nodes, 0.3, &grid).unwrap();
    let g = gamma(2.3).unwrap();
    for (t, v) in nodes.iter().zip(&out) {
        assert!((v - t.powf(1.3) / g).abs() < 1e-13, "{t}: {v}");
    }
}

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn caputo_is_linear(alpha in 0.05f64..1.0, u in samples(30), v in samples(30), c in -3.0f64..3.0) {
        let grid = TimeGrid::new(1.5, 30).unwrap();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + c * b).collect();
        let (du, dv, dw) = (
            caputo_l1(&u, alpha, &grid).unwrap(),
            caputo_l1(&v, alpha, &grid).unwrap(),
            caputo_l1(&w, alpha, &grid).unwrap(),
        );
        for k in 0..w.len() {
            let want = du[k] + c * dv[k];
            prop_assert!((dw[k] - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn caputo_ignores_constant_shift(alpha in 0.05f64..1.0, u in samples(20), s in -10.0f64..10.0) {
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let shifted: Vec<f64> = u.iter().map(|x| x + s).collect();
        let (a, b) = (caputo_l1(&u, alpha, &grid).unwrap(), caputo_l1(&shifted, alpha, &grid).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn integral_preserves_sign(alpha in 0.05f64..1.0, u in prop::collection::vec(0.0f64..5.0, 25)) {
        let grid = TimeGrid::new(1.0, 24).unwrap();
        let out = rl_integral(&u, alpha, &grid).unwrap();
        prop_assert_eq!(out[0], 0.0);
        prop_assert!(out.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn integral_of_constant_is_power(alpha in 0.05f64..1.0, c in -4.0f64..4.0) {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let out = rl_integral(&vec![c; 17], alpha, &grid).unwrap();
        let g = gamma(alpha + 1.0).unwrap();
        for (t, v) in grid.nodes().iter().zip(&out) {
            prop_assert!((v - c * t.powf(alpha) / g).abs() < 1e-12);
        }
    }
}
