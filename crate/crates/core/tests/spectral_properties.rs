use fracflux::spectral::{build_interval, build_square, DomainKind, normalize_sign, project_function, EigenSystem, SpatialSpec};
use proptest::prelude::*;

/// Midpoint rule on `n` (or `n × n`) cells; exact for the low trig products used here.
fn inner(es: &EigenSystem, i: usize, j: usize, n: usize) -> f64 {
    let (mi, mj) = (&es.modes[i], &es.modes[j]);
    let h = 1.0 / n as f64;
    let mut s = 0.0;
    if es.kind == DomainKind::Square {
        for a in 0..n {
            for b in 0..n {
                let p = [(a as f64 + 0.5) * h, (b as f64 + 0.5) * h];
                s += es.eigenfunction(mi, &p) * es.eigenfunction(mj, &p);
            }
        }
        s * h * h
    } else {
        for a in 0..n {
            let p = [(a as f64 + 0.5) * h];
            s += es.eigenfunction(mi, &p) * es.eigenfunction(mj, &p);
        }
        s * h
    }
}

#[test]
fn interval_basis_is_orthonormal() {
    for x0 in [0.0, 1.0] {
        let es = build_interval(10, x0).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&es, i, j, 400) - want).abs() < 1e-12, "{i} {j}");
            }
        }
    }
}

#[test]
fn square_basis_is_orthonormal() {
    let es = build_square(12, [0.0, 0.5]).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((inner(&es, i, j, 60) - want).abs() < 1e-12, "{i} {j}");
        }
    }
}

#[test]
fn eigen_relation_by_finite_differences() {
    let h = 1e-4;
    let es = build_interval(6, 0.0).unwrap();
    for m in &es.modes {
        for x in [0.13, 0.5, 0.77] {
            let f = |x: f64| es.eigenfunction(m, &[x]);
            let lap = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            assert!((-lap - m.lambda * f(x)).abs() < 1e-4 * m.lambda, "{}", m.index);
        }
    }
    let es = build_square(8, [0.0, 0.5]).unwrap();
    for m in &es.modes {
        let (x, y) = (0.31, 0.62);
        let f = |x: f64, y: f64| es.eigenfunction(m, &[x, y]);
        let lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
        assert!((-lap - m.lambda * f(x, y)).abs() < 1e-4 * m.lambda, "{}", m.index);
    }
}

#[test]
fn fluxes_are_outward_derivatives_and_nonnegative() {
    let h = 1e-6;
    for (x0, outward) in [(0.0, -1.0), (1.0, 1.0)] {
        let es = build_interval(8, x0).unwrap();
        for m in &es.modes {
            let inside = x0 - outward * h;
            let d = (es.eigenfunction(m, &[x0]) - es.eigenfunction(m, &[inside])) / h;
            assert!(m.flux_at_x0 >= 0.0);
            assert!((d - m.flux_at_x0).abs() < 1e-4 * (1.0 + m.flux_at_x0), "{} {d}", m.index);
        }
    }
    // the lowest interval mode has flux π√2 at either end
    let es = build_interval(1, 0.0).unwrap();
    assert!((es.modes[0].flux_at_x0 - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-12);
    // on the square, the outward derivative at (0, 1/2) of mode (m, n)
    let es = build_square(10, [0.0, 0.5]).unwrap();
    for m in &es.modes {
        let d = -(es.eigenfunction(m, &[h, 0.5]) - es.eigenfunction(m, &[0.0, 0.5])) / h;
        assert!((d - m.flux_at_x0).abs() < 1e-4 * (1.0 + m.flux_at_x0), "{}", m.index);
    }
}

fn table(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sign_normalization_is_idempotent(raw in -1e6f64..1e6) {
        let (s, d) = normalize_sign(raw);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(s * raw, d);
        prop_assert_eq!(normalize_sign(d), (1.0, d));
    }

    #[test]
    fn projection_is_linear(u in table(9), v in table(9), c in -2.0f64..2.0) {
        let es = build_interval(6, 0.0).unwrap();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + c * b).collect();
        let pu = project_function(&es, &SpatialSpec::Table(u)).unwrap();
        let pv = project_function(&es, &SpatialSpec::Table(v)).unwrap();
        let pw = project_function(&es, &SpatialSpec::Table(w)).unwrap();
        for n in 0..6 {
            prop_assert!((pw[n] - pu[n] - c * pv[n]).abs() < 1e-11);
        }
    }

    #[test]
    fn projection_satisfies_bessel(u in table(17)) {
        let es = build_interval(12, 1.0).unwrap();
        let b = project_function(&es, &SpatialSpec::Table(u.clone())).unwrap();
        // squared L² norm of the piecewise-linear interpolant
        let h = 1.0 / 16.0;
        let norm2: f64 = u.windows(2).map(|w| h * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0).sum();
        let energy: f64 = b.iter().map(|x| x * x).sum();
        prop_assert!(energy <= norm2 * (1.0 + 1e-9) + 1e-12, "{} > {}", energy, norm2);
    }
}
