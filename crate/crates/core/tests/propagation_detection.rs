use std::f64::consts::PI;

use fpmr_core::assembly::*;
use fpmr_core::propagation::*;
use fpmr_core::sparse::{dot, expm, CSparse};
use fpmr_core::spatial::{crystal_rotation, spherical_grid, Boundary, CoordinateGrid, PhaseGrid, SphericalScheme};
use fpmr_core::spin::*;
use fpmr_core::{Error, C64};
use rustfft::FftPlanner;

const MI: C64 = C64::new(0.0, -1.0);

fn proton(shift_ppm: f64) -> SpinSystem {
    let mut sys = SpinSystem::new(9.4);
    let h = sys.add_spin(Spin::isotope("1H").unwrap());
    sys.set_isotropic_shift(h, shift_ppm).unwrap();
    sys
}

fn op_vec(sys: &SpinSystem, kind: OpKind) -> Vec<C64> {
    vec_op(&sys.total_op(&sys.spins[0].label.clone(), kind).unwrap()).unwrap().into_inner()
}

fn static_gen(sys: &SpinSystem, rk: &RelaxKin) -> Generator {
    let ic = build_components(sys).unwrap();
    let l = ic.h0.scale(MI).add(&rk.total().unwrap()).unwrap();
    Generator::new(l, vec![], FPLayout::spin_only(ic.dim()).unwrap()).unwrap()
}

#[test]
fn distribute_and_average_round_trip() {
    let sys = proton(1.0);
    let rho = op_vec(&sys, OpKind::X);
    let single = FPLayout::spin_only(4).unwrap();
    assert_eq!(distribute_state(&rho, &single, None).unwrap().vector.as_slice(), &rho[..]);

    let layout = FPLayout::new(vec![Factor::phase("rotor", 7), Factor::coordinate("z", 3), Factor::spin(4)]).unwrap();
    let st = distribute_state(&rho, &layout, None).unwrap();
    let back = spatial_average(&st);
    assert!(back.max_abs_diff(&rho) < 1e-15);

    let w = BlockWeights::uniform(&layout)
        .with_factor("z", vec![0.5, 0.25, 0.25])
        .unwrap()
        .locked("rotor", 2)
        .unwrap();
    let st = distribute_state(&rho, &layout, Some(&w)).unwrap();
    assert!(spatial_average(&st).max_abs_diff(&rho) < 1e-15);
    assert_eq!(st.block(2 * 3)[0], rho[0] * 0.5);
    assert_eq!(st.block(0)[0], C64::new(0.0, 0.0));
    assert!(BlockWeights::uniform(&layout).with_factor("z", vec![0.5, 0.5, 0.5]).is_err());
    assert!(BlockWeights::uniform(&layout).with_factor("spin", vec![1.0; 4]).is_err());
    assert!(distribute_state(&rho[..3], &layout, None).is_err());
}

#[test]
fn spatial_average_is_linear() {
    let layout = FPLayout::new(vec![Factor::phase("p", 5), Factor::spin(3)]).unwrap();
    let x: Vec<C64> = (0..15).map(|k| C64::new(k as f64, 1.0 / (k as f64 + 1.0))).collect();
    let y: Vec<C64> = (0..15).map(|k| C64::new((k * k) as f64 * 0.1, -2.0)).collect();
    let (a, b) = (C64::new(0.3, -1.2), C64::new(2.0, 0.5));
    let mk = |v: Vec<C64>| FPState::new(fpmr_core::CVector::new(v).unwrap(), layout.clone()).unwrap();
    let comb: Vec<C64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let lhs = spatial_average(&mk(comb));
    let ax = spatial_average(&mk(x));
    let by = spatial_average(&mk(y));
    for k in 0..3 {
        assert!((lhs[k] - (a * ax[k] + b * by[k])).norm() < 1e-12);
    }
}

fn deer_setup() -> (SpinSystem, Generator) {
    let mut sys = SpinSystem::new(0.34518);
    let a = sys.add_spin(Spin::electron());
    let b = sys.add_spin(Spin::electron());
    sys.set_g_principal(a, [2.01, 2.006, 2.002], Rotation::identity()).unwrap();
    sys.set_g_principal(b, [2.004, 2.003, 2.0], Rotation::euler(0.5, 0.5, 0.5)).unwrap();
    sys.add_point_dipole(a, b, 2e-9, [1.0, 0.0, 0.0]).unwrap();
    let ic = build_components(&sys).unwrap();
    let rf = RfOperators::for_label(&sys, "E").unwrap();
    let rk = relax_kin(&sys, &RelaxSpec::Phenomenological(vec![(1e-6, 5e-7); 2])).unwrap();
    let pulse = MwPulse {
        amplitude: 2.0 * PI * 8e6,
        offset: 2.0 * PI * 20e6,
        phase: 0.0,
    };
    let gen = assemble_deer(&ic, &Rotation::identity(), &pulse, &PhaseGrid::new(8).unwrap(), &rk, &rf).unwrap();
    (sys, gen)
}

#[test]
fn evolve_identity_and_semigroup() {
    let (sys, gen) = deer_setup();
    let rho = vec_op(&sys.total_op("E", OpKind::Z).unwrap()).unwrap();
    let w = BlockWeights::uniform(&gen.layout).locked("mw", 0).unwrap();
    let s0 = distribute_state(&rho, &gen.layout, Some(&w)).unwrap();
    assert_eq!(evolve(&gen, &s0, 0.0).unwrap(), s0);
    let t = 30e-9;
    let full = evolve(&gen, &s0, t).unwrap();
    let half = evolve(&gen, &evolve(&gen, &s0, 0.4 * t).unwrap(), 0.6 * t).unwrap();
    assert!(full.vector.max_abs_diff(&half.vector) < 1e-9 * s0.vector.norm());
    assert!(evolve(&gen, &s0, -1.0).is_err());
}

#[test]
fn channels_require_a_schedule() {
    let sys = proton(2.0);
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(4);
    let rf = RfOperators::for_label(&sys, "1H").unwrap();
    let z = CoordinateGrid::uniform(0.0, 1e-3, 3, Boundary::Reflective).unwrap();
    let gen = assemble_spatiotemporal(&ic, &Rotation::identity(), &z, None, 0.0, &Velocity::Uniform(0.0), &rk, Some(&rf), None)
        .unwrap();
    let rho = op_vec(&sys, OpKind::Z);
    let s0 = distribute_state(&rho, &gen.layout, None).unwrap();
    assert!(evolve(&gen, &s0, 1e-3).is_err());
    assert!(acquire_fid(&gen, &s0, &rho, 1e-3, 4).is_err());
    let zero = Waveform::new(vec![Slice {
        duration: 1e-3,
        coefficients: vec![("rf_amplitude_x".into(), 0.0)],
    }])
    .unwrap();
    let a = evolve_schedule(&gen, &zero, &s0).unwrap();
    let b = evolve(&gen.without_channels(), &s0, 1e-3).unwrap();
    assert!(a.vector.max_abs_diff(&b.vector) < 1e-12);
    let bad = Waveform::new(vec![Slice {
        duration: 1e-3,
        coefficients: vec![("gradient".into(), 1.0)],
    }])
    .unwrap();
    assert!(matches!(evolve_schedule(&gen, &bad, &s0), Err(Error::UnknownChannel(_))));
}

#[test]
fn hard_pulse_through_phase_grid_channels() {
    let sys = proton(0.0);
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(4);
    let rf = RfOperators::for_label(&sys, "1H").unwrap();
    let z = CoordinateGrid::uniform(0.0, 1e-3, 3, Boundary::Reflective).unwrap();
    let phase = PhaseGrid::new(32).unwrap();
    let gen = assemble_spatiotemporal(&ic, &Rotation::identity(), &z, Some(&phase), 0.0, &Velocity::Uniform(0.0), &rk, Some(&rf), None)
        .unwrap();
    let rho = op_vec(&sys, OpKind::Z);
    let w = BlockWeights::uniform(&gen.layout).locked("rf_phase", 0).unwrap();
    let s0 = distribute_state(&rho, &gen.layout, Some(&w)).unwrap();
    let a = 2.0 * PI * 25e3;
    let phi0: f64 = 0.7;
    let theta: f64 = 1.1;
    let wf = Waveform::new(vec![Slice {
        duration: theta / a,
        coefficients: vec![("rf_amplitude_x".into(), a * phi0.cos()), ("rf_amplitude_y".into(), a * phi0.sin())],
    }])
    .unwrap();
    let out = spatial_average(&evolve_schedule(&gen, &wf, &s0).unwrap());
    let norm = dot(&rho, &rho).re;
    let mx = dot(&op_vec(&sys, OpKind::X), &out).re / norm;
    let my = dot(&op_vec(&sys, OpKind::Y), &out).re / norm;
    let mz = dot(&rho, &out).re / norm;
    // Rotation of z about (cos phi0, sin phi0, 0) by theta.
    let want = [theta.sin() * phi0.sin(), -theta.sin() * phi0.cos(), theta.cos()];
    for (got, w) in [mx, my, mz].iter().zip(want) {
        assert!((got - w).abs() < 1e-3, "{got} vs {w}");
    }
}

#[test]
fn wurst_sweep_converges_under_slice_refinement() {
    let sys = proton(0.0);
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(4);
    let rf = RfOperators::for_label(&sys, "1H").unwrap();
    let z = CoordinateGrid::uniform(-1e-3, 1e-3, 5, Boundary::Reflective).unwrap();
    let gen = assemble_spatiotemporal(&ic, &Rotation::identity(), &z, None, 0.0, &Velocity::Uniform(0.0), &rk, Some(&rf), None)
        .unwrap();
    let s0 = distribute_state(&op_vec(&sys, OpKind::Z), &gen.layout, None).unwrap();
    let tp = 1e-3;
    let sweep = 2.0 * PI * 20e3;
    let amp = 2.0 * PI * 2e3;
    let run = |n: usize| {
        let mut wf = Waveform::default();
        let dt = tp / n as f64;
        for k in 0..n {
            let t = (k as f64 + 0.5) * dt;
            let x = 2.0 * t / tp - 1.0;
            let a = amp * (1.0 - x.abs().powi(20));
            let phase = sweep / 2.0 * (t * t / tp - t);
            wf.push(dt, vec![("rf_amplitude_x".into(), a * phase.cos()), ("rf_amplitude_y".into(), a * phase.sin())])
                .unwrap();
        }
        evolve_schedule(&gen, &wf, &s0).unwrap()
    };
    let coarse = run(4000);
    let fine = run(8000);
    let finer = run(16000);
    let d1 = coarse.vector.max_abs_diff(&fine.vector);
    let d2 = fine.vector.max_abs_diff(&finer.vector);
    assert!(d2 < 1e-6, "{d1} {d2}");
    assert!(d2 < d1);
}

#[test]
fn oracle_matches_evolve_for_constant_hamiltonian() {
    let (sys, _) = deer_setup();
    let ic = build_components(&sys).unwrap();
    let h = rotate_components(&ic, &[Rotation::euler(0.1, 0.2, 0.3)]).unwrap();
    let rho = vec_op(&sys.total_op("E", OpKind::X).unwrap()).unwrap();
    let traj = lvn_oracle(|_| Ok(h.clone()), &rho, 1e-9, 20).unwrap();
    let gen = Generator::new(h.scale(MI), vec![], FPLayout::spin_only(16).unwrap()).unwrap();
    let s0 = FPState::new(rho.clone(), gen.layout.clone()).unwrap();
    let want = evolve(&gen, &s0, 20e-9).unwrap();
    assert!(traj.states[20].max_abs_diff(&want.vector) < 1e-9);
    assert_eq!(traj.times.len(), 21);
    assert!(lvn_oracle(|_| Ok(h.clone()), &rho, 0.0, 2).is_err());
}

#[test]
fn fid_of_single_offset_and_trace_conservation() {
    let sys = proton(10.0);
    let rk = RelaxKin::zero(4);
    let gen = static_gen(&sys, &rk);
    let w0 = -sys.spins[0].gamma * sys.field_t * 10e-6;
    let plus = op_vec(&sys, OpKind::Plus);
    let s0 = distribute_state(&plus, &gen.layout, None).unwrap();
    let dwell = 1e-5;
    let fid = acquire_fid(&gen, &s0, &plus, dwell, 64).unwrap();
    for (k, s) in fid.signal.iter().enumerate() {
        let want = C64::from_polar(1.0, -w0 * k as f64 * dwell);
        assert!((s - want).norm() < 1e-10);
    }
    let id = vec_op(&CSparse::identity(2)).unwrap();
    let rho = op_vec(&sys, OpKind::X).iter().zip(id.iter()).map(|(a, b)| a + b * 0.5).collect::<Vec<_>>();
    let fid = acquire_fid(&gen, &distribute_state(&rho, &gen.layout, None).unwrap(), &id, dwell, 32).unwrap();
    assert!(fid.signal.iter().all(|s| (s - fid.signal[0]).norm() < 1e-10));
}

fn damped_pair() -> (SpinSystem, Generator, Vec<C64>, Vec<C64>) {
    let mut sys = SpinSystem::new(9.4);
    let a = sys.add_spin(Spin::isotope("1H").unwrap());
    let b = sys.add_spin(Spin::isotope("1H").unwrap());
    let mhz = 9.4 * sys.spins[0].gamma / (2.0 * PI) / 1e6;
    sys.set_isotropic_shift(a, 500.0 / mhz).unwrap();
    sys.set_isotropic_shift(b, 1200.0 / mhz).unwrap();
    sys.add_j(a, b, 10.0).unwrap();
    let rk = relax_kin(&sys, &RelaxSpec::Phenomenological(vec![(f64::INFINITY, 0.05); 2])).unwrap();
    let gen = static_gen(&sys, &rk);
    let rho = vec_op(&sys.total_op("1H", OpKind::X).unwrap()).unwrap().into_inner();
    let coil = vec_op(&sys.total_op("1H", OpKind::Plus).unwrap()).unwrap().into_inner();
    (sys, gen, rho, coil)
}

#[test]
fn frequency_domain_matches_fft_of_fid() {
    let (_, gen, rho, coil) = damped_pair();
    let s0 = distribute_state(&rho, &gen.layout, None).unwrap();
    let n = 4096;
    let dwell = 1.0 / 8192.0;
    let fid = acquire_fid(&gen, &s0, &coil, dwell, n).unwrap();
    let mut buf = fid.signal.clone();
    buf[0] *= 0.5;
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // Positive shifts give negative offsets, so the lines sit at positive frequencies.
    let dw = 2.0 * PI / (n as f64 * dwell);
    let bins: Vec<usize> = (1..=400).map(|k| 4 * k).collect();
    let omegas: Vec<f64> = bins.iter().map(|&j| j as f64 * dw).collect();
    let spec = detect_fd(&gen, &s0, &coil, &omegas).unwrap();
    let fft: Vec<C64> = bins.iter().map(|&j| buf[j] * dwell).collect();
    let peak = fft.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let rms = (spec.values.iter().zip(&fft).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 400.0).sqrt();
    assert!(rms < 0.02 * peak, "rms {rms} peak {peak}");
    let imax = spec.values.iter().enumerate().max_by(|a, b| a.1.re.partial_cmp(&b.1.re).unwrap()).unwrap().0;
    assert!((spec.hz()[imax] - 1200.0).abs() < 10.0 || (spec.hz()[imax] - 500.0).abs() < 10.0);
}

#[test]
fn undamped_resolvent_is_singular() {
    let sys = proton(0.0);
    let gen = static_gen(&sys, &RelaxKin::zero(4));
    let rho = op_vec(&sys, OpKind::X);
    let s0 = distribute_state(&rho, &gen.layout, None).unwrap();
    let e = detect_fd(&gen, &s0, &rho, &[0.0]).unwrap_err();
    assert!(matches!(e, Error::Singular { .. }), "{e:?}");
}

#[test]
fn uniform_rotor_phase_realises_gamma_average() {
    let mut sys = SpinSystem::new(9.4);
    let h = sys.add_spin(Spin::isotope("1H").unwrap());
    sys.set_shift_principal(h, [-4.0, -2.0, 6.0], Rotation::euler(0.3, 0.9, 0.4)).unwrap();
    let ic = build_components(&sys).unwrap();
    let rk = relax_kin(&sys, &RelaxSpec::Phenomenological(vec![(f64::INFINITY, 2e-3)])).unwrap();
    let axis = lab2rot(MAGIC_AXIS).unwrap();
    let rate = 2.0 * PI * 1500.0;
    let grid = PhaseGrid::new(32).unwrap();
    let rho = op_vec(&sys, OpKind::X);
    let coil = op_vec(&sys, OpKind::Plus);
    let (alpha, beta) = (0.8, 1.0);
    let fid = |gamma: f64, locked: bool| {
        let g = assemble_singlerot(&ic, &axis, rate, &grid, &crystal_rotation((alpha, beta, gamma)), &rk, None).unwrap();
        let w = if locked { Some(BlockWeights::uniform(&g.layout).locked("rotor", 0).unwrap()) } else { None };
        let s0 = distribute_state(&rho, &g.layout, w.as_ref()).unwrap();
        acquire_fid(&g, &s0, &coil, 2e-5, 200).unwrap().signal
    };
    let fp = fid(0.0, false);
    let ng = 40;
    let mut explicit = vec![C64::new(0.0, 0.0); 200];
    for k in 0..ng {
        let s = fid(2.0 * PI * k as f64 / ng as f64, true);
        for (e, v) in explicit.iter_mut().zip(s) {
            *e += v / ng as f64;
        }
    }
    let peak = explicit.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let rms = (fp.iter().zip(&explicit).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 200.0).sqrt();
    assert!(rms < 0.01 * peak, "rms {rms}");
}

#[test]
fn powder_average_identity_and_isotropic_invariance() {
    let (sys, _, rho, coil) = damped_pair();
    let ic = build_components(&sys).unwrap();
    let rk = relax_kin(&sys, &RelaxSpec::Phenomenological(vec![(f64::INFINITY, 0.05); 2])).unwrap();
    let omegas: Vec<f64> = (0..50).map(|k| -2.0 * PI * (400.0 + 20.0 * k as f64)).rev().collect();
    let runner = |o: (f64, f64, f64)| {
        let h = rotate_components(&ic, &[crystal_rotation(o)]).unwrap();
        let g = Generator::new(h.scale(MI).add(&rk.total().unwrap()).unwrap(), vec![], FPLayout::spin_only(16).unwrap()).unwrap();
        let s0 = distribute_state(&rho, &g.layout, None).unwrap();
        detect_fd(&g, &s0, &coil, &omegas)
    };
    let one = spherical_grid(&SphericalScheme::TwoAngleSpiral, 1).unwrap();
    let single = runner((0.0, 0.0, 0.0)).unwrap();
    assert_eq!(powder_average(runner, &one).unwrap(), single);
    let many = spherical_grid(&SphericalScheme::TwoAngleSpiral, 25).unwrap();
    let avg = powder_average(runner, &many).unwrap();
    let scale = single.values.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for (a, b) in avg.values.iter().zip(&single.values) {
        assert!((a - b).norm() < 1e-12 * scale);
    }
}

#[test]
fn static_powder_second_moment_of_axial_csa() {
    let delta_ppm = 60.0;
    let mut sys = SpinSystem::new(9.4);
    let c = sys.add_spin(Spin::isotope("13C").unwrap());
    sys.set_shift_principal(c, [-delta_ppm / 3.0, -delta_ppm / 3.0, 2.0 * delta_ppm / 3.0], Rotation::euler(0.2, 0.3, 0.0))
        .unwrap();
    let ic = build_components(&sys).unwrap();
    let w0 = sys.spins[0].gamma * sys.field_t;
    let sigma = w0 * delta_ppm * 1e-6;
    // Stick spectrum per orientation, binned on a common axis.
    let nb = 201;
    let edge = 1.2 * sigma;
    let width = 2.0 * edge / nb as f64;
    let omegas: Vec<f64> = (0..nb).map(|k| -edge + (k as f64 + 0.5) * width).collect();
    let coil = op_vec(&sys, OpKind::Plus);
    let runner = |o: (f64, f64, f64)| {
        let h = rotate_components(&ic, &[crystal_rotation(o)]).unwrap();
        // Frequency of the detected coherence: <coil|H|coil> / <coil|coil>.
        let hc = h.matvec(&coil);
        let w = (dot(&coil, &hc) / dot(&coil, &coil)).re;
        let mut v = vec![C64::new(0.0, 0.0); nb];
        let k = (((w + edge) / width).floor() as isize).clamp(0, nb as isize - 1) as usize;
        v[k] = C64::new(1.0, 0.0);
        fpmr_core::propagation::Spectrum::new(omegas.clone(), v)
    };
    let grid = spherical_grid(&SphericalScheme::TwoAngleSpiral, 2000).unwrap();
    let spec = powder_average(runner, &grid).unwrap();
    let m0: f64 = spec.values.iter().map(|v| v.re).sum();
    let m1: f64 = spec.values.iter().zip(&omegas).map(|(v, w)| v.re * w).sum::<f64>() / m0;
    let m2: f64 = spec.values.iter().zip(&omegas).map(|(v, w)| v.re * (w - m1).powi(2)).sum::<f64>() / m0;
    let want = 4.0 / 45.0 * (delta_ppm * 1e-6 * w0).powi(2);
    assert!((m2 - want).abs() < 0.02 * want, "{m2} vs {want}");
}

#[test]
fn explicit_propagator_matches_expm() {
    let (_, gen, rho, _) = damped_pair();
    let p = expm(&gen.constant.scale_real(1e-3)).unwrap();
    let s0 = distribute_state(&rho, &gen.layout, None).unwrap();
    let e = evolve(&gen, &s0, 1e-3).unwrap();
    let want = p.matvec(&rho);
    assert!(e.vector.max_abs_diff(&want) < 1e-9);
}

#[test]
fn partial_trace_sums_one_factor() {
    use fpmr_core::CVector;
    let layout = FPLayout::new(vec![Factor::phase("a", 3), Factor::phase("b", 4), Factor::spin(2)]).unwrap();
    let v: Vec<C64> = (0..24).map(|k| C64::new(k as f64, -(k as f64) * 0.5)).collect();
    let state = FPState::new(CVector::new(v.clone()).unwrap(), layout).unwrap();
    let tb = partial_trace(&state, "b").unwrap();
    assert_eq!(tb.layout.factors().len(), 2);
    for a in 0..3 {
        for s in 0..2 {
            let want: C64 = (0..4).map(|b| v[(a * 4 + b) * 2 + s]).sum();
            assert_eq!(tb.vector[a * 2 + s], want);
        }
    }
    let ta = partial_trace(&state, "a").unwrap();
    assert_eq!(spatial_average(&ta).as_slice(), spatial_average(&state).as_slice());
    assert!(partial_trace(&state, "spin").is_err());
}
