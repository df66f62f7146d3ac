use fracflux::direct::{add_noise, analytic_mode_solution, solve_mode, CoefficientSamples, FluxTrace};
use fracflux::fractional::TimeGrid;
use proptest::prelude::*;

const NT: usize = 60;

fn grid() -> TimeGrid {
    TimeGrid::new(1.0, NT).unwrap()
}

fn positive(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, NT + 1)
}

fn coeff(v: Vec<f64>) -> CoefficientSamples {
    CoefficientSamples::new(v, grid()).unwrap()
}

#[test]
fn l1_solution_converges_to_oracle() {
    // D^α u + λ a u = 1 + 2t, u(0) = 0.5
    let err = |nt: usize| {
        let g = TimeGrid::new(1.0, nt).unwrap();
        let src: Vec<f64> = g.nodes().iter().map(|t| 1.0 + 2.0 * t).collect();
        let a = CoefficientSamples::constant(0.7, g).unwrap();
        let u = solve_mode(4.0, &a, &src, 0.5, 0.6).unwrap();
        let exact = analytic_mode_solution(4.0, 0.7, &src, 0.5, 0.6, &g).unwrap();
        (u[nt] - exact[nt]).abs()
    };
    let (e1, e2, e3) = (err(100), err(200), err(400));
    assert!(e1 < 1e-2 && e2 < e1 && e3 < e2, "{e1} {e2} {e3}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nonnegative_data_give_nonnegative_modes(
        alpha in 0.1f64..1.0,
        lambda in 0.5f64..200.0,
        a in positive(0.1, 3.0),
        f in positive(0.0, 5.0),
        b in 0.0f64..2.0,
    ) {
        let u = solve_mode(lambda, &coeff(a), &f, b, alpha).unwrap();
        prop_assert!(u.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn larger_coefficient_gives_smaller_mode(
        alpha in 0.1f64..1.0,
        lambda in 0.5f64..100.0,
        a in positive(0.1, 3.0),
        bump in positive(0.0, 1.0),
        f in positive(0.0, 5.0),
        b in 0.0f64..2.0,
    ) {
        let a2: Vec<f64> = a.iter().zip(&bump).map(|(x, y)| x + y).collect();
        let u1 = solve_mode(lambda, &coeff(a), &f, b, alpha).unwrap();
        let u2 = solve_mode(lambda, &coeff(a2), &f, b, alpha).unwrap();
        for (x, y) in u1.iter().zip(&u2) {
            prop_assert!(*y <= x + 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn solution_is_linear_in_data(
        alpha in 0.1f64..1.0,
        lambda in 0.5f64..100.0,
        a in positive(0.1, 3.0),
        f1 in positive(-5.0, 5.0),
        f2 in positive(-5.0, 5.0),
        b1 in -2.0f64..2.0,
        b2 in -2.0f64..2.0,
        c in -3.0f64..3.0,
    ) {
        let a = coeff(a);
        let f: Vec<f64> = f1.iter().zip(&f2).map(|(x, y)| x + c * y).collect();
        let u1 = solve_mode(lambda, &a, &f1, b1, alpha).unwrap();
        let u2 = solve_mode(lambda, &a, &f2, b2, alpha).unwrap();
        let u = solve_mode(lambda, &a, &f, b1 + c * b2, alpha).unwrap();
        for k in 0..u.len() {
            let want = u1[k] + c * u2[k];
            prop_assert!((u[k] - want).abs() <= 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn noise_is_bounded_and_reproducible(delta in 0.0f64..0.2, seed in any::<u64>(), g in positive(0.1, 10.0)) {
        let exact = FluxTrace::exact(g.clone());
        let n1 = add_noise(&exact, delta, seed).unwrap();
        let n2 = add_noise(&exact, delta, seed).unwrap();
        prop_assert_eq!(&n1, &n2);
        for (v, g) in n1.g.iter().zip(&g) {
            prop_assert!((v - g).abs() <= delta * g * (1.0 + 1e-12));
        }
    }
}
