use std::f64::consts::PI;

use fpmr_core::assembly::*;
use fpmr_core::sparse::CSparse;
use fpmr_core::spatial::{fourier_diff, Boundary, CoordinateGrid, PhaseGrid};
use fpmr_core::spin::*;
use fpmr_core::{Error, C64};
use proptest::prelude::*;

const MI: C64 = C64::new(0.0, -1.0);

fn csa_proton() -> SpinSystem {
    let mut sys = SpinSystem::new(9.4);
    let h = sys.add_spin(Spin::isotope("1H").unwrap());
    sys.set_shift_principal(h, [-4.0, -4.0, 8.0], Rotation::euler(0.2, 0.7, 0.0)).unwrap();
    sys
}

fn nh_pair() -> SpinSystem {
    let mut sys = SpinSystem::new(14.1);
    let h = sys.add_spin(Spin::isotope("1H").unwrap());
    let n = sys.add_spin(Spin::isotope("14N").unwrap().in_lab_frame());
    sys.set_isotropic_shift(n, 32.4).unwrap();
    sys.set_quadrupolar(n, 1.18e6, 0.53, Rotation::euler(0.3, 0.8, 1.2)).unwrap();
    sys.add_point_dipole(h, n, 1.04e-10, [0.3, 0.1, 1.0]).unwrap();
    sys
}

fn two_electrons() -> SpinSystem {
    let mut sys = SpinSystem::new(0.34518);
    let a = sys.add_spin(Spin::electron());
    let b = sys.add_spin(Spin::electron());
    sys.set_g_principal(a, [2.284, 2.123, 2.075], Rotation::euler(PI / 4.0, PI / 2.0, 3.0 * PI / 4.0)).unwrap();
    sys.set_g_principal(b, [2.035, 2.013, 1.975], Rotation::euler(2.0 * PI / 3.0, PI / 3.0, PI / 6.0)).unwrap();
    sys.add_point_dipole(a, b, 2e-9, [1.0, 0.0, 0.0]).unwrap();
    sys
}

fn unit_state(layout: &FPLayout, sys: &SpinSystem) -> Vec<C64> {
    let id = vec_op(&CSparse::identity(sys.hilbert_dim())).unwrap();
    let nb = layout.spatial_dim() as f64;
    (0..layout.spatial_dim()).flat_map(|_| id.iter().map(|x| x / nb).collect::<Vec<_>>()).collect()
}

fn rand_sparse(n: usize, seed: u64) -> CSparse {
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    };
    let trips = (0..3 * n).map(|_| {
        let i = ((next() + 0.5) * n as f64) as usize % n;
        let j = ((next() + 0.5) * n as f64) as usize % n;
        (i, j, C64::new(next(), next()))
    });
    CSparse::from_triplets(n, n, trips.collect()).unwrap()
}

#[test]
fn lift_two_factor_embedding() {
    let layout = FPLayout::new(vec![Factor::phase("a", 2), Factor::spin(3)]).unwrap();
    let a = rand_sparse(2, 3);
    let lifted = lift(&a, &layout, "a").unwrap();
    assert_eq!(lifted, CSparse::kron(&a, &CSparse::identity(3)).unwrap());
    assert_eq!(lift(&CSparse::identity(3), &layout, "spin").unwrap(), CSparse::identity(6));
    assert!(matches!(lift(&a, &layout, "b"), Err(Error::UnknownSlot(_))));
    assert!(matches!(lift(&a, &layout, "spin"), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn layout_ordering_and_size_guards() {
    assert!(FPLayout::new(vec![Factor::coordinate("z", 3), Factor::phase("p", 3), Factor::spin(4)]).is_err());
    assert!(FPLayout::new(vec![Factor::spin(4), Factor::phase("p", 3)]).is_err());
    assert!(FPLayout::new(vec![Factor::phase("p", 3)]).is_err());
    assert!(FPLayout::new(vec![Factor::phase("p", 3), Factor::phase("p", 3), Factor::spin(4)]).is_err());
    let ok = FPLayout::new(vec![Factor::phase("rf", 10), Factor::coordinate("z", 100), Factor::spin(1024)]).unwrap();
    assert_eq!(ok.total_dim(), 1_024_000);
    let err = FPLayout::new(vec![Factor::phase("rf", 1000), Factor::coordinate("z", 1000), Factor::spin(1024)])
        .unwrap_err();
    assert!(err.to_string().contains("reduce grid sizes"), "{err}");
    let big = usize::MAX / 2;
    assert!(matches!(
        FPLayout::new(vec![Factor::phase("a", big), Factor::phase("b", big), Factor::spin(4)]),
        Err(Error::Overflow { .. })
    ));
}

#[test]
fn singlerot_blocks_match_direct_liouvillians() {
    let sys = csa_proton();
    let ic = build_components(&sys).unwrap();
    let rk = relax_kin(&sys, &RelaxSpec::Phenomenological(vec![(2.0, 0.05)])).unwrap();
    let axis = lab2rot(MAGIC_AXIS).unwrap();
    let grid = PhaseGrid::new(8).unwrap();
    let crystal = Rotation::euler(0.4, 1.2, 2.2);
    let gen = assemble_singlerot(&ic, &axis, 0.0, &grid, &crystal, &rk, None).unwrap();
    assert!(gen.is_time_independent());
    let ns = ic.dim();
    for (j, &phi) in grid.points().iter().enumerate() {
        let h = rotate_components(&ic, &[crystal, Rotation::about_z(phi), axis]).unwrap();
        let want = h.scale(MI).add(&rk.total().unwrap()).unwrap();
        assert!(gen.constant.diagonal_block(j * ns, ns).max_abs_diff(&want) < 1e-12 * want.max_abs());
    }
    // Spinning adds exactly rate * D_phi.
    let spinning = assemble_singlerot(&ic, &axis, 2.0 * PI * 2000.0, &grid, &crystal, &rk, None).unwrap();
    let d = lift(&fourier_diff(8).unwrap(), &gen.layout, "rotor").unwrap().scale_real(2.0 * PI * 2000.0);
    assert!(spinning.constant.sub(&gen.constant).unwrap().max_abs_diff(&d) < 1e-9);
    assert!(assemble_singlerot(&ic, &axis, 1.0, &PhaseGrid::new(2).unwrap(), &crystal, &rk, None)
        .unwrap_err()
        .to_string()
        .contains("converges"));
}

#[test]
fn singlerot_rf_channels_are_replicated() {
    let sys = csa_proton();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let rf = RfOperators::for_label(&sys, "1H").unwrap();
    let grid = PhaseGrid::new(5).unwrap();
    let gen =
        assemble_singlerot(&ic, &lab2rot(MAGIC_AXIS).unwrap(), 1e4, &grid, &Rotation::identity(), &rk, Some(&rf))
            .unwrap();
    let x = gen.channel("rf_amplitude_x").unwrap();
    assert_eq!(*x, CSparse::kron(&CSparse::identity(5), &rf.sx.scale(MI)).unwrap());
    assert!(gen.channel("nope").is_err());
}

#[test]
fn doublerot_degenerate_inner_rotor_is_singlerot() {
    let sys = csa_proton();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let axis = lab2rot(MAGIC_AXIS).unwrap();
    let grid = PhaseGrid::new(6).unwrap();
    let crystal = Rotation::euler(1.0, 0.5, -0.3);
    let single = assemble_singlerot(&ic, &axis, 3000.0, &grid, &crystal, &rk, None).unwrap();
    let double = assemble_doublerot(
        &ic,
        &axis,
        &Rotation::identity(),
        3000.0,
        0.0,
        &grid,
        &PhaseGrid::new(1).unwrap(),
        &crystal,
        &rk,
    )
    .unwrap();
    assert_eq!(double.layout.total_dim(), single.layout.total_dim());
    assert!(double.constant.max_abs_diff(&single.constant) < 1e-9);
    assert!(assemble_doublerot(
        &ic,
        &axis,
        &Rotation::identity(),
        3000.0,
        5.0,
        &grid,
        &PhaseGrid::new(1).unwrap(),
        &crystal,
        &rk
    )
    .is_err());
}

#[test]
fn doublerot_block_order_and_commuting_rotors() {
    let mut sys = SpinSystem::new(9.4);
    let n = sys.add_spin(Spin::isotope("2H").unwrap());
    sys.set_quadrupolar(n, 1e5, 0.2, Rotation::euler(0.1, 0.4, 0.0)).unwrap();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let (g0, g1) = (PhaseGrid::new(3).unwrap(), PhaseGrid::new(4).unwrap());
    let n0 = lab2rot([0.0, (2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()]).unwrap();
    let n1 = lab2rot([0.3, 0.0, 0.95]).unwrap();
    let crystal = Rotation::euler(0.2, 0.9, 0.5);
    let gen = assemble_doublerot(&ic, &n0, &n1, 0.0, 0.0, &g0, &g1, &crystal, &rk).unwrap();
    let ns = ic.dim();
    for (a, &p0) in g0.points().iter().enumerate() {
        for (b, &p1) in g1.points().iter().enumerate() {
            let h = rotate_components(&ic, &[crystal, Rotation::about_z(p1), n1, Rotation::about_z(p0), n0]).unwrap();
            let blk = gen.constant.diagonal_block((a * 4 + b) * ns, ns);
            assert!(blk.max_abs_diff(&h.scale(MI)) < 1e-12 * h.max_abs());
        }
    }
    let d0 = lift(&fourier_diff(3).unwrap(), &gen.layout, "outer").unwrap();
    let d1 = lift(&fourier_diff(4).unwrap(), &gen.layout, "inner").unwrap();
    let c = d0.matmul(&d1).unwrap().sub(&d1.matmul(&d0).unwrap()).unwrap();
    assert!(c.max_abs() < 1e-12);
    let fig3 = assemble_doublerot(&ic, &n0, &n1, 2.0 * PI * 1425.0, 2.0 * PI * 6950.0, &g0, &g1, &crystal, &rk);
    assert!(fig3.is_ok());
}

#[test]
fn overtone_cp_dimension_and_free_form() {
    let sys = nh_pair();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let mas = MasSpec {
        axis: R_MAS,
        rate: 2.0 * PI * 10e3,
        grid: PhaseGrid::new(15).unwrap(),
    };
    let crystal = Rotation::euler(0.7, 1.1, 0.3);
    let n_larmor = -sys.spins[1].gamma * sys.field_t;
    let rf = OvertoneRf::new(&sys, 1, 2.0 * PI * 50e3, 2.0 * n_larmor, PhaseGrid::new(5).unwrap(), Some(("1H", 2.0 * PI * 50e3)))
        .unwrap();
    let cp = assemble_overtone(&ic, &mas, &crystal, Some(&rf), &rk).unwrap();
    assert_eq!(cp.layout.total_dim(), 2700);
    assert!(cp.is_time_independent());
    assert!(OvertoneRf::new(&sys, 0, 1.0, 1.0, PhaseGrid::new(5).unwrap(), None).is_err());

    let free = assemble_overtone(&ic, &mas, &crystal, None, &rk).unwrap();
    let frame = lab2rot(R_MAS).unwrap();
    let single =
        assemble_singlerot(&ic, &frame, mas.rate, &mas.grid, &frame.inverse().compose(&crystal), &rk, None).unwrap();
    assert!(free.constant.max_abs_diff(&single.constant) < 1e-9 * single.constant.max_abs());
}

#[test]
fn overtone_cp_blocks_follow_rf_phase() {
    let sys = nh_pair();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let mas = MasSpec {
        axis: R_MAS,
        rate: 0.0,
        grid: PhaseGrid::new(3).unwrap(),
    };
    let rf = OvertoneRf::new(&sys, 1, 1e5, 0.0, PhaseGrid::new(4).unwrap(), Some(("1H", 3e4))).unwrap();
    let gen = assemble_overtone(&ic, &mas, &Rotation::identity(), Some(&rf), &rk).unwrap();
    let ns = ic.dim();
    let (c, s) = (MAGIC_COS, (2.0f64 / 3.0).sqrt());
    let src = &rf.source.as_ref().unwrap().0;
    for (i, &pm) in mas.grid.points().iter().enumerate() {
        let h = rotate_components(&ic, &[Rotation::angle_axis(R_MAS, pm).unwrap()]).unwrap();
        for (j, &pr) in rf.grid.points().iter().enumerate() {
            let want = h
                .add(&rf.nucleus.sz.scale_real(1e5 * c))
                .unwrap()
                .add(&rf.nucleus.sx.scale_real(1e5 * s * pr.cos()))
                .unwrap()
                .add(&rf.nucleus.sy.scale_real(1e5 * s * pr.sin()))
                .unwrap()
                .add(&src.sz.scale_real(3e4 * c))
                .unwrap()
                .add(&src.sx.scale_real(3e4 * s))
                .unwrap()
                .scale(MI);
            let blk = gen.constant.diagonal_block((i * 4 + j) * ns, ns);
            assert!(blk.max_abs_diff(&want) < 1e-12 * want.max_abs());
        }
    }
}

#[test]
fn deer_generator_structure() {
    let sys = two_electrons();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let rf = RfOperators::for_label(&sys, "E").unwrap();
    let grid = PhaseGrid::new(7).unwrap();
    let orient = Rotation::euler(0.3, 0.6, 0.9);
    let off = -2.0 * PI * 50e6;
    let free = assemble_deer(&ic, &orient, &MwPulse { amplitude: 0.0, offset: off, phase: 0.0 }, &grid, &rk, &rf).unwrap();
    let h0 = rotate_components(&ic, &[orient]).unwrap();
    let repl = CSparse::kron(&CSparse::identity(7), &h0.scale(MI)).unwrap();
    let d = lift(&fourier_diff(7).unwrap(), &free.layout, "mw").unwrap().scale_real(-off);
    assert!(free.constant.max_abs_diff(&repl.add(&d).unwrap()) < 1e-12 * repl.max_abs());

    // Cross-check against the frequency-amplitude control operators.
    let a = 2.0 * PI * 8e6;
    let pulse = MwPulse { amplitude: a, offset: off, phase: 0.0 };
    let gen = assemble_deer(&ic, &orient, &pulse, &grid, &rk, &rf).unwrap();
    let ctl = build_fa_controls(&gen.layout, &[("mw", &rf)]).unwrap();
    let rebuilt = repl
        .add(&ctl[0].0.scale(MI * a))
        .unwrap()
        .add(&ctl[0].1.scale_real(-off))
        .unwrap();
    assert!(gen.constant.max_abs_diff(&rebuilt) < 1e-9 * gen.constant.max_abs());
}

#[test]
fn fa_controls_degenerate_grid_and_null_vector() {
    let sys = two_electrons();
    let rf = RfOperators::for_label(&sys, "E").unwrap();
    let ns = sys.liouville_dim();
    let one = FPLayout::new(vec![Factor::phase("mw", 1), Factor::spin(ns)]).unwrap();
    let ctl = build_fa_controls(&one, &[("mw", &rf)]).unwrap();
    assert_eq!(ctl[0].0, lift(&rf.sx, &one, "spin").unwrap());
    assert_eq!(ctl[0].1.nnz(), 0);

    let layout = FPLayout::new(vec![Factor::phase("mw", 6), Factor::coordinate("z", 3), Factor::spin(ns)]).unwrap();
    let ctl = build_fa_controls(&layout, &[("mw", &rf)]).unwrap();
    let u = unit_state(&layout, &sys);
    assert!(ctl[0].0.matvec(&u).iter().all(|x| x.norm() < 1e-12));
    assert!(ctl[0].1.matvec(&u).iter().all(|x| x.norm() < 1e-12));
    assert!(build_fa_controls(&layout, &[("z", &rf)]).is_err());
    assert!(build_fa_controls(&layout, &[("mw", &rf), ("mw", &rf)]).is_err());
}

#[test]
fn spatiotemporal_channels_and_static_limit() {
    let mut sys = SpinSystem::new(9.4);
    let a = sys.add_spin(Spin::isotope("1H").unwrap());
    let b = sys.add_spin(Spin::isotope("1H").unwrap());
    sys.set_isotropic_shift(a, 3.7).unwrap();
    sys.set_isotropic_shift(b, 4.5).unwrap();
    sys.add_j(a, b, 10.0).unwrap();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let z = CoordinateGrid::uniform(-5e-3, 5e-3, 11, Boundary::Absorptive).unwrap();
    let rf = RfOperators::for_label(&sys, "1H").unwrap();
    let grad = gradient_superop(&sys).unwrap();

    let plain = assemble_spatiotemporal(&ic, &Rotation::identity(), &z, None, 0.0, &Velocity::Uniform(0.0), &rk, None, None)
        .unwrap();
    assert!(plain.is_time_independent());
    let repl = CSparse::kron(&CSparse::identity(11), &ic.h0.scale(MI)).unwrap();
    assert!(plain.constant.max_abs_diff(&repl) < 1e-12 * repl.max_abs());

    let phase = PhaseGrid::new(8).unwrap();
    let gen = assemble_spatiotemporal(
        &ic,
        &Rotation::identity(),
        &z,
        Some(&phase),
        2e-9,
        &Velocity::Uniform(1e-3),
        &rk,
        Some(&rf),
        Some(&grad),
    )
    .unwrap();
    let labels: Vec<&str> = gen.channels.iter().map(|(l, _)| l.as_str()).collect();
    assert_eq!(labels, ["rf_amplitude_x", "rf_amplitude_y", "rf_frequency", "gradient"]);
    assert_eq!(gen.layout.total_dim(), 8 * 11 * 16);
    // Gradient block at slice k is -i z_k sum gamma S_Z.
    let g = gen.channel("gradient").unwrap();
    let ns = 16;
    let k = 7;
    let want = grad.scale(MI * z.points()[k]);
    assert!(g.diagonal_block((3 * 11 + k) * ns, ns).max_abs_diff(&want) < 1e-12 * want.max_abs());
    // The y channel is the x channel a quarter turn later.
    let y = gen.channel("rf_amplitude_y").unwrap();
    let blk = y.diagonal_block(2 * 11 * ns, ns);
    let phi = phase.point(2) + PI / 2.0;
    let want = rf.sx.scale_real(phi.cos()).add(&rf.sy.scale_real(phi.sin())).unwrap().scale(MI);
    assert!(blk.max_abs_diff(&want) < 1e-12);

    let cart = assemble_spatiotemporal(&ic, &Rotation::identity(), &z, None, 0.0, &Velocity::Uniform(0.0), &rk, Some(&rf), None)
        .unwrap();
    assert_eq!(*cart.channel("rf_amplitude_y").unwrap(), lift(&rf.sy, &cart.layout, "spin").unwrap().scale(MI));
}

#[test]
fn every_assembler_annihilates_uniform_identity() {
    let check = |g: &Generator, sys: &SpinSystem| {
        let u = unit_state(&g.layout, sys);
        let scale = g.constant.max_abs();
        assert!(g.constant.matvec(&u).iter().all(|x| x.norm() < 1e-12 * scale.max(1.0)));
        for (l, m) in &g.channels {
            assert!(m.matvec(&u).iter().all(|x| x.norm() < 1e-12 * m.max_abs().max(1.0)), "{l}");
        }
    };
    let sys = csa_proton();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let axis = lab2rot(MAGIC_AXIS).unwrap();
    let g = PhaseGrid::new(9).unwrap();
    let rf = RfOperators::for_label(&sys, "1H").unwrap();
    check(&assemble_singlerot(&ic, &axis, 1e4, &g, &Rotation::identity(), &rk, Some(&rf)).unwrap(), &sys);
    check(&assemble_doublerot(&ic, &axis, &axis, 1e4, 5e4, &g, &g, &Rotation::identity(), &rk).unwrap(), &sys);
    let z = CoordinateGrid::periodic(0.0, 1e-2, 20).unwrap();
    check(
        &assemble_spatiotemporal(&ic, &Rotation::identity(), &z, Some(&g), 1e-9, &Velocity::Uniform(1e-3), &rk, Some(&rf), Some(&gradient_superop(&sys).unwrap())).unwrap(),
        &sys,
    );
    check(&assemble_deer(&ic, &Rotation::identity(), &MwPulse { amplitude: 1e6, offset: 1e6, phase: 0.3 }, &g, &rk, &rf).unwrap(), &sys);
    let nh = nh_pair();
    let icn = build_components(&nh).unwrap();
    let rkn = RelaxKin::zero(icn.dim());
    let mas = MasSpec { axis: R_MAS, rate: 1e4, grid: PhaseGrid::new(5).unwrap() };
    let rfo = OvertoneRf::new(&nh, 1, 1e5, 1e8, PhaseGrid::new(3).unwrap(), Some(("1H", 1e5))).unwrap();
    check(&assemble_overtone(&icn, &mas, &Rotation::identity(), Some(&rfo), &rkn).unwrap(), &nh);
}

#[test]
fn frozen_generator_and_waveform_validation() {
    let sys = csa_proton();
    let ic = build_components(&sys).unwrap();
    let rk = RelaxKin::zero(ic.dim());
    let rf = RfOperators::for_label(&sys, "1H").unwrap();
    let gen = assemble_singlerot(&ic, &lab2rot(MAGIC_AXIS).unwrap(), 1e4, &PhaseGrid::new(4).unwrap(), &Rotation::identity(), &rk, Some(&rf))
        .unwrap();
    assert_eq!(gen.frozen(&[]).unwrap(), gen.constant);
    let f = gen.frozen(&[("rf_amplitude_x".into(), 2.0)]).unwrap();
    let want = gen.constant.add_scaled(gen.channel("rf_amplitude_x").unwrap(), C64::new(2.0, 0.0)).unwrap();
    assert_eq!(f, want);
    assert!(matches!(gen.frozen(&[("gradient".into(), 1.0)]), Err(Error::UnknownChannel(_))));
    assert!(Waveform::new(vec![Slice { duration: 0.0, coefficients: vec![] }]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn disjoint_lifts_commute(seed in any::<u64>(), na in 1usize..4, nb in 1usize..4, ns in 1usize..4) {
        let layout = FPLayout::new(vec![Factor::phase("a", na), Factor::coordinate("b", nb), Factor::spin(ns)]).unwrap();
        let slots = [("a", na), ("b", nb), ("spin", ns)];
        for (i, &(s, n)) in slots.iter().enumerate() {
            for &(t, m) in &slots[i + 1..] {
                let x = lift(&rand_sparse(n, seed), &layout, s).unwrap();
                let y = lift(&rand_sparse(m, seed ^ 0xabc), &layout, t).unwrap();
                let c = x.matmul(&y).unwrap().sub(&y.matmul(&x).unwrap()).unwrap();
                prop_assert!(c.max_abs() < 1e-12);
            }
        }
    }
}
