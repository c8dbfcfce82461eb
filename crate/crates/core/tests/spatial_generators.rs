use std::f64::consts::PI;

use fpmr_core::sparse::{expmv, CDense, CSparse};
use fpmr_core::spatial::*;
use fpmr_core::C64;
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn fourier_diff_differentiates_sine() {
    let n = 16;
    let g = PhaseGrid::new(n).unwrap();
    let d = fourier_diff(n).unwrap();
    let f: Vec<C64> = g.points().iter().map(|&p| c(p.sin())).collect();
    let df = d.matvec(&f);
    for (p, v) in g.points().iter().zip(&df) {
        assert!((v - c(p.cos())).norm() < 1e-12);
    }
}

#[test]
fn fourier_diff_antisymmetric_and_annihilates_constants() {
    for n in 2..40 {
        let d = fourier_diff(n).unwrap();
        assert!(d.add(&d.transpose()).unwrap().max_abs() < 1e-14, "n {n}");
        let ones = vec![c(1.0); n];
        assert!(d.matvec(&ones).iter().all(|x| x.norm() < 1e-12), "n {n}");
        assert!(d.diagonal().iter().all(|x| *x == c(0.0)));
    }
    assert!(fourier_diff(1).is_err());
}

#[test]
fn odd_grid_rotor_step_is_cyclic_shift() {
    let n = 15;
    let g = PhaseGrid::new(n).unwrap();
    let omega = 2.0 * PI * 1000.0;
    let gen = rotor_generator(&g, omega).unwrap();
    let t = (2.0 * PI / n as f64) / omega;
    for j in 0..n {
        let e = expmv(&gen, &CSparse::identity(n).to_dense().column(j), t, 1e-12).unwrap();
        // f(phi + omega t): sample k picks up the value from k + 1.
        let want_row = (j + n - 1) % n;
        for (k, v) in e.iter().enumerate() {
            let want = if k == want_row { 1.0 } else { 0.0 };
            assert!((v - c(want)).norm() < 1e-10, "col {j} row {k}");
        }
    }
    assert_eq!(rotor_generator(&g, 0.0).unwrap().nnz(), 0);
}

#[test]
fn even_grid_shift_holds_without_nyquist_content() {
    let n = 16;
    let g = PhaseGrid::new(n).unwrap();
    let gen = rotor_generator(&g, 1.0).unwrap();
    // Band-limited samples with |k| <= 7.
    let f: Vec<C64> = g
        .points()
        .iter()
        .map(|&p| C64::from_polar(1.0, 3.0 * p) + c((7.0 * p).cos()) + c(0.3))
        .collect();
    let m = 5;
    let t = 2.0 * PI * m as f64 / n as f64;
    let e = expmv(&gen, &f, t, 1e-12).unwrap();
    for k in 0..n {
        assert!((e[k] - f[(k + m) % n]).norm() < 1e-10);
    }
}

#[test]
fn fornberg_interior_rows() {
    let g = CoordinateGrid::uniform(0.0, 1.0, 11, Boundary::Reflective).unwrap();
    let h = 0.1;
    let d1 = fd_matrix(&g, 1, 3).unwrap();
    let d2 = fd_matrix(&g, 2, 3).unwrap();
    for (k, w) in [(4, -1.0 / (2.0 * h)), (5, 0.0), (6, 1.0 / (2.0 * h))] {
        assert!((d1.get(5, k).re - w).abs() < 1e-10);
    }
    for (k, w) in [(4, 1.0), (5, -2.0), (6, 1.0)] {
        assert!((d2.get(5, k).re - w / (h * h)).abs() < 1e-8);
    }
}

#[test]
fn fd_rejects_bad_stencils() {
    let g = CoordinateGrid::uniform(0.0, 1.0, 4, Boundary::Reflective).unwrap();
    assert!(fd_matrix(&g, 2, 2).is_err());
    assert!(fd_matrix(&g, 1, 5).is_err());
    assert!(CoordinateGrid::new(vec![0.0, 1.0], Boundary::Reflective).is_err());
    assert!(CoordinateGrid::new(vec![0.0, 2.0, 1.0], Boundary::Reflective).is_err());
}

#[test]
fn diffusion_and_flow_generators() {
    let g = CoordinateGrid::periodic(0.0, 0.015, 500).unwrap();
    let diff = motion_generator(&g, &Motion::Diffusion(2e-9)).unwrap();
    let ones = vec![c(1.0); 500];
    assert!(diff.matvec(&ones).iter().all(|x| x.norm() < 1e-13 * diff.norm1()));
    let flow = motion_generator(&g, &Motion::Flow(1e-3)).unwrap();
    let col_sums = flow.adjoint_matvec(&ones);
    let scale = flow.norm1();
    assert!(col_sums.iter().all(|x| x.norm() < 1e-13 * scale), "{:?}", col_sums.iter().map(|x| x.norm()).fold(0.0, f64::max));
    let field = motion_generator(&g, &Motion::VelocityField(vec![1e-3; 500])).unwrap();
    assert!(field.max_abs_diff(&flow) < 1e-12 * flow.max_abs());
    assert!(motion_generator(&g, &Motion::Diffusion(-1.0)).is_err());
    assert!(motion_generator(&g, &Motion::VelocityField(vec![0.0; 3])).is_err());
}

#[test]
fn periodic_diffusion_is_negative_semidefinite() {
    // Circulant: eigenvalues are the DFT of the first row.
    let n = 64;
    let g = CoordinateGrid::periodic(0.0, 1.0, n).unwrap();
    let d = motion_generator(&g, &Motion::Diffusion(0.3)).unwrap();
    let row: Vec<C64> = (0..n).map(|k| d.get(0, k)).collect();
    for m in 0..n {
        let lam: C64 = row
            .iter()
            .enumerate()
            .map(|(k, v)| v * C64::from_polar(1.0, 2.0 * PI * (m * k) as f64 / n as f64))
            .sum();
        assert!(lam.re <= 1e-12, "mode {m}: {lam}");
    }
}

#[test]
fn fd_converges_to_fourier_on_trig_modes() {
    let mut errs = Vec::new();
    for n in [32usize, 64, 128] {
        let g = CoordinateGrid::periodic(0.0, 2.0 * PI, n).unwrap();
        let fd = fd_matrix(&g, 1, 5).unwrap();
        let sp = fourier_diff(n).unwrap();
        let f: Vec<C64> = g.points().iter().map(|&p| c((2.0 * p).sin() + (3.0 * p).cos())).collect();
        let a = fd.matvec(&f);
        let b = sp.matvec(&f);
        errs.push(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 4.0 - 0.2, "{errs:?}");
    }
}

#[test]
fn absorptive_boundary_uses_zero_ghosts() {
    let g = CoordinateGrid::uniform(0.0, 1.0, 11, Boundary::Absorptive).unwrap();
    let d = fd_matrix(&g, 1, 3).unwrap();
    // First row: (f1 - 0) / 2h.
    assert!((d.get(0, 1).re - 5.0).abs() < 1e-10);
    assert_eq!(d.get(0, 0), c(0.0));
}

#[test]
fn spherical_grids() {
    let g = spherical_grid(&SphericalScheme::TwoAngleSpiral, 1).unwrap();
    assert_eq!(g.orientations, vec![(0.0, 0.0, 0.0)]);
    assert_eq!(g.weights, vec![1.0]);
    for n in [2, 17, 2000] {
        let g = spherical_grid(&SphericalScheme::TwoAngleSpiral, n).unwrap();
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Isotropic observable averages to the same value at any size.
        let avg: f64 = g.weights.iter().map(|w| w * 2.5).sum();
        assert!((avg - 2.5).abs() < 1e-12);
    }
    let user = SphericalScheme::UserList {
        orientations: vec![(0.0, 0.0, 0.0), (1.0, 1.0, 0.0)],
        weights: vec![1.0, 3.0],
    };
    assert_eq!(spherical_grid(&user, 0).unwrap().weights, vec![0.25, 0.75]);
    let bad = SphericalScheme::UserList {
        orientations: vec![(0.0, 0.0, 0.0)],
        weights: vec![0.0],
    };
    assert!(spherical_grid(&bad, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_modes_exact(k in -7i32..=7, which in 0usize..3) {
        let n = [15usize, 16, 32][which];
        prop_assume!((k.unsigned_abs() as usize) <= (n - 1) / 2);
        let g = PhaseGrid::new(n).unwrap();
        let f: Vec<C64> = g.points().iter().map(|&p| C64::from_polar(1.0, k as f64 * p)).collect();
        let df = fourier_diff(n).unwrap().matvec(&f);
        for (v, fv) in df.iter().zip(&f) {
            prop_assert!((v - C64::new(0.0, k as f64) * fv).norm() < 1e-12);
        }
    }

    #[test]
    fn fd_exact_on_polynomials(seed in any::<u64>(), order in 1usize..3) {
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 11) as f64) / ((1u64 << 53) as f64) };
        let mut pts: Vec<f64> = (0..12).map(|k| k as f64 + 0.6 * next()).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let g = CoordinateGrid::new(pts.clone(), Boundary::Reflective).unwrap();
        let stencil = 5;
        let d = fd_matrix(&g, order, stencil).unwrap();
        let coeffs: Vec<f64> = (0..stencil).map(|_| next() - 0.5).collect();
        let f: Vec<C64> = pts.iter().map(|&x| c(coeffs.iter().enumerate().map(|(p, a)| a * x.powi(p as i32)).sum())).collect();
        let exact = |x: f64| -> f64 {
            coeffs.iter().enumerate().skip(order).map(|(p, a)| {
                let fall: f64 = (0..order).map(|j| (p - j) as f64).product();
                a * fall * x.powi((p - order) as i32)
            }).sum()
        };
        let df = d.matvec(&f);
        for (x, v) in pts.iter().zip(&df) {
            prop_assert!((v.re - exact(*x)).abs() < 1e-10 * (1.0 + exact(*x).abs()) * 100.0, "{} vs {}", v.re, exact(*x));
        }
    }

    #[test]
    fn periodic_diffusion_rayleigh_quotient(seed in any::<u64>()) {
        let mut s = seed;
        let g = CoordinateGrid::periodic(-1.0, 3.0, 40).unwrap();
        let d = motion_generator(&g, &Motion::Diffusion(1.0)).unwrap();
        let v: Vec<C64> = (0..40).map(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1); c(((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5) }).collect();
        let q: C64 = v.iter().zip(d.matvec(&v)).map(|(a, b)| a.conj() * b).sum();
        prop_assert!(q.re <= 1e-12);
    }
}

#[allow(dead_code)]
fn dense(m: &CSparse) -> CDense {
    m.to_dense()
}
