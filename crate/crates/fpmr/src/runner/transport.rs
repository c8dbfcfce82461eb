use std::f64::consts::PI;

use fpmr_core::assembly::{
    assemble_spatiotemporal, gradient_superop, FPState, Generator, RfOperators, Velocity, Waveform,
};
use fpmr_core::propagation::{distribute_state, evolve_schedule, partial_trace, spatial_average, BlockWeights};
use fpmr_core::sparse::dot;
use fpmr_core::spatial::{Boundary, CoordinateGrid, PhaseGrid};
use fpmr_core::spin::Rotation;
use fpmr_core::{CVector, C64};

use super::{powder, Context};
use crate::config::{BoundaryKind, Experiment, Segment};
use crate::error::{Error, Stage};
use crate::output::Table;
use crate::system::carrier_rate;

fn z_grid(ctx: &Context) -> Result<CoordinateGrid, Error> {
    let z = ctx.cfg.grids.z.as_ref().expect("validated");
    let len = z.end_m - z.start_m;
    match z.boundary {
        BoundaryKind::Periodic => CoordinateGrid::periodic(z.start_m, len, z.points),
        BoundaryKind::Absorptive => CoordinateGrid::uniform(z.start_m, z.end_m, z.points, Boundary::Absorptive),
        BoundaryKind::Reflective => CoordinateGrid::uniform(z.start_m, z.end_m, z.points, Boundary::Reflective),
    }
    .stage("building the coordinate grid")
}

fn observe(state: &FPState, coil: &[C64]) -> C64 {
    dot(coil, &spatial_average(state))
}

fn gradient(g: f64) -> Vec<(String, f64)> {
    vec![("gradient".into(), g)]
}

/// Echo amplitude after `+g` for `delta`, a free `big_delta - delta` and
/// `-g` for `delta`, starting from the detection initial state.
pub(super) fn pgse(ctx: &Context) -> Result<Vec<Table>, Error> {
    let Experiment::Pgse {
        gradient_t_per_m,
        delta_s,
        big_delta_s,
        diffusion_m2_per_s,
    } = &ctx.cfg.experiment
    else {
        unreachable!()
    };
    let z = z_grid(ctx)?;
    let grad = gradient_superop(&ctx.sys).stage("building the gradient operator")?;
    let mut strengths = vec![0.0];
    strengths.extend_from_slice(gradient_t_per_m);
    let echoes = powder(&ctx.orientations, |r| {
        let gen = assemble_spatiotemporal(
            &ctx.ic,
            r,
            &z,
            None,
            *diffusion_m2_per_s,
            &Velocity::Uniform(0.0),
            &ctx.rk,
            None,
            Some(&grad),
        )
        .stage("assembling the diffusion generator")?;
        let s0 = distribute_state(&ctx.rho0, &gen.layout, None).stage("distributing the initial state")?;
        strengths
            .iter()
            .map(|&g| {
                let mut wf = Waveform::default();
                let stage = "building the gradient waveform";
                wf.push(*delta_s, gradient(g)).stage(stage)?;
                if big_delta_s > delta_s {
                    wf.push(big_delta_s - delta_s, Vec::new()).stage(stage)?;
                }
                wf.push(*delta_s, gradient(-g)).stage(stage)?;
                let s = evolve_schedule(&gen, &wf, &s0).stage("gradient echo")?;
                Ok(observe(&s, &ctx.coil))
            })
            .collect()
    })?;
    let reference = echoes[0].norm();
    let attenuation = echoes[1..]
        .iter()
        .map(|e| if reference > 0.0 { e.norm() / reference } else { f64::NAN })
        .collect();
    Ok(vec![Table::complex("echo", "gradient_t_per_m", gradient_t_per_m.clone(), &echoes[1..])
        .with_column("attenuation", attenuation)])
}

/// Sums out the RF phase slot and puts the result back at phase index 0, so
/// the next pulse starts from a definite carrier phase.
fn relock(state: &FPState, slot: &str) -> Result<FPState, Error> {
    let traced = partial_trace(state, slot).stage("tracing out the RF phase")?;
    let mut v = vec![C64::new(0.0, 0.0); state.layout.total_dim()];
    let k = state.layout.slot(slot).stage("locating the RF phase slot")?;
    let factors = state.layout.factors();
    let inner: usize = factors[k + 1..].iter().map(|f| f.dim).product();
    let n = factors[k].dim;
    for (o, chunk) in traced.vector.chunks(inner).enumerate() {
        v[o * n * inner..o * n * inner + inner].copy_from_slice(chunk);
    }
    FPState::new(CVector::new(v).stage("relocking the RF phase")?, state.layout.clone())
        .stage("relocking the RF phase")
}

/// Segments on the RF phase grid, then acquisition under a (possibly
/// alternating) gradient. Each RF segment ends with a partial trace over the
/// carrier phase; chirp slices within one segment share a continuous phase.
pub(super) fn spatiotemporal(ctx: &Context) -> Result<Vec<Table>, Error> {
    let Experiment::Spatiotemporal {
        diffusion_m2_per_s,
        velocity_m_per_s,
        rf_label,
        segments,
        acquisition,
    } = &ctx.cfg.experiment
    else {
        unreachable!()
    };
    let z = z_grid(ctx)?;
    let label = rf_label.clone().unwrap_or_else(|| ctx.sys.spins[0].label.clone());
    let rf = RfOperators::for_label(&ctx.sys, &label).stage("building RF operators")?;
    let grad = gradient_superop(&ctx.sys).stage("building the gradient operator")?;
    let phase = if segments.iter().any(Segment::has_rf) {
        Some(PhaseGrid::new(ctx.cfg.grids.rf_points).stage("building the RF phase grid")?)
    } else {
        None
    };
    let dwell = ctx.cfg.detection.dwell_s.expect("validated");
    let points = ctx.cfg.detection.points;
    let velocity = Velocity::Uniform(*velocity_m_per_s);
    let assemble = |r: &Rotation, phase: Option<&PhaseGrid>| -> Result<Generator, Error> {
        assemble_spatiotemporal(
            &ctx.ic,
            r,
            &z,
            phase,
            *diffusion_m2_per_s,
            &velocity,
            &ctx.rk,
            phase.map(|_| &rf),
            Some(&grad),
        )
        .stage("assembling the spatiotemporal generator")
    };
    let signal = powder(&ctx.orientations, |r| {
        let acq = assemble(r, None)?;
        let mut state = match &phase {
            Some(p) => {
                let gen = assemble(r, Some(p))?;
                let w = BlockWeights::uniform(&gen.layout)
                    .locked("rf_phase", 0)
                    .stage("locking the RF phase")?;
                let mut s = distribute_state(&ctx.rho0, &gen.layout, Some(&w)).stage("distributing the initial state")?;
                for seg in segments {
                    let wf = segment_waveform(ctx, &label, seg, true)?;
                    s = evolve_schedule(&gen, &wf, &s).stage("spatiotemporal segment")?;
                    if seg.has_rf() {
                        s = relock(&s, "rf_phase")?;
                    }
                }
                partial_trace(&s, "rf_phase").stage("tracing out the RF phase")?
            }
            None => {
                let mut s = distribute_state(&ctx.rho0, &acq.layout, None).stage("distributing the initial state")?;
                for seg in segments {
                    let wf = segment_waveform(ctx, &label, seg, false)?;
                    s = evolve_schedule(&acq, &wf, &s).stage("spatiotemporal segment")?;
                }
                s
            }
        };
        let mut out = Vec::with_capacity(points);
        for k in 0..points {
            out.push(observe(&state, &ctx.coil));
            if k + 1 == points {
                break;
            }
            let sign = match acquisition.alternate_every {
                Some(m) if (k / m) % 2 == 1 => -1.0,
                _ => 1.0,
            };
            let mut wf = Waveform::default();
            wf.push(dwell, gradient(sign * acquisition.gradient_t_per_m))
                .stage("building the acquisition waveform")?;
            state = evolve_schedule(&acq, &wf, &state).stage("acquisition")?;
        }
        Ok(out)
    })?;
    let t = (0..points).map(|k| k as f64 * dwell).collect();
    Ok(vec![Table::complex("fid", "time_s", t, &signal)])
}

fn segment_waveform(ctx: &Context, label: &str, seg: &Segment, phased: bool) -> Result<Waveform, Error> {
    let stage = "building a segment waveform";
    let rf = |a_hz: f64, phase_deg: f64, offset_hz: f64, g: f64| {
        let a = 2.0 * PI * a_hz;
        let p = phase_deg.to_radians();
        let mut c = vec![
            ("rf_amplitude_x".to_string(), a * p.cos()),
            ("rf_amplitude_y".to_string(), a * p.sin()),
            ("gradient".to_string(), g),
        ];
        if phased {
            // The carrier phase must advance at the carrier rate; the
            // frequency channel shifts grid populations the other way.
            c.push(("rf_frequency".to_string(), -carrier_rate(&ctx.sys, label, offset_hz)));
        }
        c
    };
    let mut wf = Waveform::default();
    match seg {
        Segment::Delay {
            duration_s,
            gradient_t_per_m,
        } => wf.push(*duration_s, gradient(*gradient_t_per_m)).stage(stage)?,
        Segment::Pulse {
            duration_s,
            amplitude_hz,
            phase_deg,
            offset_hz,
            gradient_t_per_m,
        } => wf
            .push(*duration_s, rf(*amplitude_hz, *phase_deg, *offset_hz, *gradient_t_per_m))
            .stage(stage)?,
        Segment::Chirp {
            duration_s,
            amplitude_hz,
            start_hz,
            end_hz,
            phase_deg,
            gradient_t_per_m,
            slices,
        } => {
            let dt = duration_s / *slices as f64;
            for k in 0..*slices {
                let f = start_hz + (end_hz - start_hz) * (k as f64 + 0.5) / *slices as f64;
                wf.push(dt, rf(*amplitude_hz, *phase_deg, f, *gradient_t_per_m)).stage(stage)?;
            }
        }
    }
    Ok(wf)
}
