use std::f64::consts::PI;

use fpmr_core::assembly::{assemble_deer, FPState, Generator, MwPulse, RfOperators};
use fpmr_core::propagation::{acquire_fid, distribute_state, evolve, lvn_oracle, partial_trace, BlockWeights};
use fpmr_core::spatial::PhaseGrid;
use fpmr_core::spin::Rotation;
use fpmr_core::{CVector, C64};
use rayon::prelude::*;

use super::{powder, Context};
use crate::config::{Experiment, MwPulseConfig};
use crate::error::{Error, Stage};
use crate::output::Table;
use crate::system::carrier_rate;

/// How the soft pulses are propagated; free evolution is always exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Pulses {
    /// Time-independent generator on the microwave phase grid.
    FokkerPlanck,
    /// Piecewise-constant rotating-frame Liouvillian with the carrier phase
    /// evaluated at each slice midpoint.
    Oracle { step: f64 },
}

/// A pulse with its carrier expressed relative to the electron frame.
struct Pulse {
    duration: f64,
    amplitude: f64,
    rate: f64,
    phase0: f64,
}

impl Pulse {
    fn new(ctx: &Context, cfg: &MwPulseConfig, frame_hz: f64) -> Self {
        Self {
            duration: cfg.duration_s,
            amplitude: 2.0 * PI * cfg.amplitude_hz,
            rate: carrier_rate(&ctx.sys, "E", cfg.frequency_hz - frame_hz),
            phase0: cfg.phase_deg.to_radians(),
        }
    }

    /// Carrier phase at absolute time `t`.
    fn phase_at(&self, t: f64) -> f64 {
        self.phase0 + self.rate * t
    }
}

fn electron_frame_hz(ctx: &Context) -> Result<f64, Error> {
    let n = ctx.sys.spins.iter().position(|s| s.is_electron()).ok_or_else(|| Error::Invalid {
        path: "spin_system.spins".into(),
        message: "DEER needs at least one electron".into(),
    })?;
    Ok(ctx.sys.reference_frequency(n) / (2.0 * PI))
}

struct Orientation<'a> {
    ctx: &'a Context<'a>,
    rot: Rotation,
    free: Generator,
    rf: &'a RfOperators,
    mode: Pulses,
    grid: Option<PhaseGrid>,
}

impl Orientation<'_> {
    fn free(&self, s: &FPState, t: f64) -> Result<FPState, Error> {
        evolve(&self.free, s, t.max(0.0)).stage("DEER free evolution")
    }

    /// Applies `p` starting at absolute time `t0`; returns a spin-only state.
    fn pulse(&self, s: &FPState, p: &Pulse, t0: f64) -> Result<FPState, Error> {
        match self.mode {
            Pulses::FokkerPlanck => {
                let grid = self.grid.as_ref().expect("grid exists in Fokker-Planck mode");
                let mw = MwPulse {
                    amplitude: p.amplitude,
                    offset: p.rate,
                    phase: p.phase_at(t0),
                };
                let gen = assemble_deer(&self.ctx.ic, &self.rot, &mw, grid, &self.ctx.rk, self.rf)
                    .stage("assembling the microwave pulse generator")?;
                let w = BlockWeights::uniform(&gen.layout)
                    .locked("mw", 0)
                    .stage("locking the microwave phase")?;
                let lifted = distribute_state(&s.vector, &gen.layout, Some(&w)).stage("lifting onto the phase grid")?;
                let after = evolve(&gen, &lifted, p.duration).stage("microwave pulse")?;
                partial_trace(&after, "mw").stage("tracing out the microwave phase")
            }
            Pulses::Oracle { step } => {
                let n = (p.duration / step).ceil().max(1.0) as usize;
                let dt = p.duration / n as f64;
                let stage = "time-sliced microwave pulse";
                let h0 = self.ctx.liouvillian(std::slice::from_ref(&self.rot))?;
                let traj = lvn_oracle(
                    |t| h0.add(&self.rf.transverse(p.phase_at(t0 + t))?.scale_real(p.amplitude)),
                    &s.vector,
                    dt,
                    n,
                )
                .stage(stage)?;
                let last: CVector = traj.states.into_iter().last().expect("oracle returns states");
                FPState::new(last, s.layout.clone()).stage(stage)
            }
        }
    }
}

/// Three-pulse DEER: observer, pump at a variable delay, observer, then a
/// window around the refocused echo. Each trace point is the window mean.
pub(super) fn run(ctx: &Context, mode: Pulses) -> Result<Vec<Table>, Error> {
    let Experiment::Deer {
        pulses,
        gap_s,
        steps,
        echo_points,
        echo_window_s,
    } = &ctx.cfg.experiment
    else {
        unreachable!()
    };
    let frame = electron_frame_hz(ctx)?;
    let [p1, p2, p3] = [0, 1, 2].map(|k| Pulse::new(ctx, &pulses[k], frame));
    let rf = RfOperators::for_label(&ctx.sys, "E").stage("building microwave operators")?;
    let grid = match mode {
        Pulses::FokkerPlanck => Some(PhaseGrid::new(ctx.cfg.grids.mw_points).stage("building the microwave phase grid")?),
        Pulses::Oracle { .. } => None,
    };
    let delays = pump_delays(*gap_s, p2.duration, *steps);
    let t3 = p1.duration + gap_s;
    let echo = t3 + p3.duration + p1.duration / 2.0 + gap_s;
    let window_start = echo - echo_window_s / 2.0;
    let dwell = if *echo_points > 1 {
        echo_window_s / (*echo_points - 1) as f64
    } else {
        1.0
    };

    let trace = powder(&ctx.orientations, |r| {
        let o = Orientation {
            ctx,
            rot: *r,
            free: ctx.static_generator(r)?,
            rf: &rf,
            mode,
            grid,
        };
        let s0 = distribute_state(&ctx.rho0, &o.free.layout, None).stage("distributing the initial state")?;
        let s1 = o.pulse(&s0, &p1, 0.0)?;
        delays
            .par_iter()
            .map(|&d| {
                let t2 = p1.duration + d;
                let s = o.free(&s1, d)?;
                let s = o.pulse(&s, &p2, t2)?;
                let s = o.free(&s, t3 - t2 - p2.duration)?;
                let s = o.pulse(&s, &p3, t3)?;
                let s = o.free(&s, window_start - t3 - p3.duration)?;
                let w = acquire_fid(&o.free, &s, &ctx.coil, dwell, *echo_points).stage("echo acquisition")?;
                Ok(w.signal.iter().sum::<C64>() / *echo_points as f64)
            })
            .collect()
    })?;
    let abs = trace.iter().map(|z| z.norm()).collect();
    Ok(vec![Table::complex("deer_trace", "pump_delay_s", delays, &trace).with_column("abs", abs)])
}

/// Pump start times after the end of the first pulse, from zero until the
/// pump ends where the last observer pulse begins.
fn pump_delays(gap: f64, pump: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![0.0];
    }
    (0..steps).map(|k| k as f64 * (gap - pump) / (steps - 1) as f64).collect()
}
