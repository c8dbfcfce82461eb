use std::f64::consts::PI;

use fpmr_core::assembly::{assemble_doublerot, assemble_overtone, assemble_singlerot, MasSpec, OvertoneRf};
use fpmr_core::propagation::{distribute_state, evolve, partial_trace, BlockWeights};
use fpmr_core::spatial::PhaseGrid;
use fpmr_core::spin::{lab2rot, Rotation};

use super::{powder, Context};
use crate::config::Experiment;
use crate::error::{Error, Stage};
use crate::output::Table;
use crate::system::carrier_rate;

pub(super) fn static_kind(ctx: &Context) -> Result<Vec<Table>, Error> {
    let det = ctx.detection();
    let signal = powder(&ctx.orientations, |r| {
        let gen = ctx.static_generator(r)?;
        let state = distribute_state(&ctx.rho0, &gen.layout, None).stage("distributing the initial state")?;
        det.signal(&gen, &state, &ctx.coil)
    })?;
    Ok(det.tables(&signal))
}

fn grid(n: usize) -> Result<PhaseGrid, Error> {
    PhaseGrid::new(n).stage("building a phase grid")
}

pub(super) fn mas(ctx: &Context, rate_hz: f64, axis: &[f64; 3]) -> Result<Vec<Table>, Error> {
    let det = ctx.detection();
    let rotor = lab2rot(*axis).stage("orienting the rotor")?;
    let g = grid(ctx.cfg.grids.rotor_points)?;
    let signal = powder(&ctx.orientations, |r| {
        let gen = assemble_singlerot(&ctx.ic, &rotor, 2.0 * PI * rate_hz, &g, r, &ctx.rk, None)
            .stage("assembling the MAS generator")?;
        let state = distribute_state(&ctx.rho0, &gen.layout, None).stage("distributing the initial state")?;
        det.signal(&gen, &state, &ctx.coil)
    })?;
    Ok(det.tables(&signal))
}

/// Outer axis in the lab frame and inner axis in the outer rotor frame.
pub(super) fn dor_axes(outer_axis: &[f64; 3], inner_angle_deg: f64) -> Result<(Rotation, Rotation), Error> {
    let b = inner_angle_deg.to_radians();
    Ok((
        lab2rot(*outer_axis).stage("orienting the outer rotor")?,
        lab2rot([b.sin(), 0.0, b.cos()]).stage("orienting the inner rotor")?,
    ))
}

pub(super) fn dor(ctx: &Context) -> Result<Vec<Table>, Error> {
    let Experiment::Dor {
        outer_rate_hz,
        inner_rate_hz,
        outer_axis,
        inner_angle_deg,
    } = &ctx.cfg.experiment
    else {
        unreachable!()
    };
    let det = ctx.detection();
    let (n0, n1) = dor_axes(outer_axis, *inner_angle_deg)?;
    let g0 = grid(ctx.cfg.grids.rotor_points)?;
    let g1 = grid(if *inner_rate_hz == 0.0 { 1 } else { ctx.cfg.grids.inner_rotor_points })?;
    let signal = powder(&ctx.orientations, |r| {
        let gen = assemble_doublerot(
            &ctx.ic,
            &n0,
            &n1,
            2.0 * PI * outer_rate_hz,
            2.0 * PI * inner_rate_hz,
            &g0,
            &g1,
            r,
            &ctx.rk,
        )
        .stage("assembling the DOR generator")?;
        let state = distribute_state(&ctx.rho0, &gen.layout, None).stage("distributing the initial state")?;
        det.signal(&gen, &state, &ctx.coil)
    })?;
    Ok(det.tables(&signal))
}

/// Optional cross-polarisation on the rotor x RF grid, a partial trace over
/// the RF phase, then free evolution under spinning.
pub(super) fn overtone(ctx: &Context) -> Result<Vec<Table>, Error> {
    let Experiment::OvertoneCp {
        rate_hz,
        axis,
        overtone_spin,
        cp,
    } = &ctx.cfg.experiment
    else {
        unreachable!()
    };
    let det = ctx.detection();
    let mas = MasSpec {
        axis: *axis,
        rate: 2.0 * PI * rate_hz,
        grid: grid(ctx.cfg.grids.rotor_points)?,
    };
    let rf = match cp {
        Some(cp) => {
            let label = &ctx.sys.spins[*overtone_spin].label;
            Some(
                OvertoneRf::new(
                    &ctx.sys,
                    *overtone_spin,
                    2.0 * PI * cp.overtone_amplitude_hz,
                    carrier_rate(&ctx.sys, label, cp.overtone_frequency_hz),
                    grid(ctx.cfg.grids.rf_points)?,
                    Some((cp.source_label.as_str(), 2.0 * PI * cp.source_amplitude_hz)),
                )
                .stage("setting up overtone irradiation")?,
            )
        }
        None => None,
    };
    let signal = powder(&ctx.orientations, |r| {
        let free = assemble_overtone(&ctx.ic, &mas, r, None, &ctx.rk).stage("assembling the overtone generator")?;
        let state = match (&rf, cp) {
            (Some(rf), Some(cp)) => {
                let gen = assemble_overtone(&ctx.ic, &mas, r, Some(rf), &ctx.rk)
                    .stage("assembling the overtone CP generator")?;
                let w = BlockWeights::uniform(&gen.layout)
                    .locked("rf", 0)
                    .stage("locking the RF phase")?;
                let s0 = distribute_state(&ctx.rho0, &gen.layout, Some(&w)).stage("distributing the initial state")?;
                let s = evolve(&gen, &s0, cp.contact_s).stage("cross-polarisation")?;
                partial_trace(&s, "rf").stage("tracing out the RF phase")?
            }
            _ => distribute_state(&ctx.rho0, &free.layout, None).stage("distributing the initial state")?,
        };
        det.signal(&free, &state, &ctx.coil)
    })?;
    Ok(det.tables(&signal))
}
