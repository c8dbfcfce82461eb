//! Time-sliced Liouville-von Neumann references for the experiments that
//! have one. Rotor phases are averaged explicitly instead of living on a grid.

use std::f64::consts::PI;

use fpmr_core::propagation::lvn_oracle;
use fpmr_core::sparse::dot;
use fpmr_core::spin::{lab2rot, rotate_components, Rotation};
use fpmr_core::C64;
use rayon::prelude::*;

use super::{deer, powder, rotors, Context, Detection};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Stage};
use crate::output::Table;

fn unsupported(message: String) -> Error {
    Error::Invalid {
        path: "experiment.kind".into(),
        message,
    }
}

pub(super) fn simulate(cfg: &ExperimentConfig) -> Result<Vec<Table>, Error> {
    let ctx = Context::new(cfg)?;
    let step = cfg.oracle.step_s;
    if let Experiment::Deer { .. } = cfg.experiment {
        return deer::run(&ctx, deer::Pulses::Oracle { step });
    }
    let (dwell, points) = match ctx.detection() {
        Detection::Time { dwell, points } => (dwell, points),
        Detection::Frequency { .. } => {
            return Err(Error::Invalid {
                path: "detection.domain".into(),
                message: "the oracle only runs in the time domain".into(),
            })
        }
    };
    let per = (dwell / step).round();
    if per < 1.0 || (per * step - dwell).abs() > 1e-9 * dwell {
        return Err(Error::Invalid {
            path: "oracle.step_s".into(),
            message: format!("dwell {dwell} s is not a whole number of oracle steps of {step} s"),
        });
    }
    let sampler = Sampler {
        ctx: &ctx,
        step,
        per: per as usize,
        points,
    };
    let g = &cfg.grids;
    let signal = match &cfg.experiment {
        Experiment::Static {} => sampler.average(&[vec![]], |r, _, _| vec![*r])?,
        Experiment::Mas { rate_hz, axis } => {
            let axis = lab2rot(*axis).stage("orienting the rotor")?;
            let w = 2.0 * PI * rate_hz;
            let n = if *rate_hz == 0.0 { 1 } else { g.rotor_points };
            sampler.average(&phases(n).into_iter().map(|p| vec![p]).collect::<Vec<_>>(), |r, phi, t| vec![*r, Rotation::about_z(phi[0] - w * t), axis])?
        }
        Experiment::Dor {
            outer_rate_hz,
            inner_rate_hz,
            outer_axis,
            inner_angle_deg,
        } => {
            let (n0, n1) = rotors::dor_axes(outer_axis, *inner_angle_deg)?;
            let (w0, w1) = (2.0 * PI * outer_rate_hz, 2.0 * PI * inner_rate_hz);
            let inner = if *inner_rate_hz == 0.0 { 1 } else { g.inner_rotor_points };
            let sets: Vec<Vec<f64>> = phases(g.rotor_points)
                .iter()
                .flat_map(|&a| phases(inner).into_iter().map(move |b| vec![a, b]))
                .collect();
            sampler.average(&sets, |r, phi, t| {
                vec![
                    *r,
                    Rotation::about_z(phi[1] - w1 * t),
                    n1,
                    Rotation::about_z(phi[0] - w0 * t),
                    n0,
                ]
            })?
        }
        other => return Err(unsupported(format!("no time-sliced reference for `{}`", other.kind()))),
    };
    Ok(ctx.detection().tables(&signal))
}

fn phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

struct Sampler<'a> {
    ctx: &'a Context<'a>,
    step: f64,
    per: usize,
    points: usize,
}

impl Sampler<'_> {
    /// Powder sum of the mean signal over sets of initial rotor phases.
    fn average<F>(&self, sets: &[Vec<f64>], rots: F) -> Result<Vec<C64>, Error>
    where
        F: Fn(&Rotation, &[f64], f64) -> Vec<Rotation> + Sync,
    {
        powder(&self.ctx.orientations, |r| {
            let parts = sets
                .par_iter()
                .map(|phi| self.trace(|t| rots(r, phi, t)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = vec![C64::new(0.0, 0.0); self.points];
            for p in &parts {
                for (o, x) in out.iter_mut().zip(p) {
                    *o += x / sets.len() as f64;
                }
            }
            Ok(out)
        })
    }

    fn trace<F>(&self, rots: F) -> Result<Vec<C64>, Error>
    where
        F: Fn(f64) -> Vec<Rotation>,
    {
        let stage = "time-sliced propagation";
        let ir = self.ctx.rk.total().stage(stage)?.scale(C64::new(0.0, 1.0));
        let dwell = self.per as f64 * self.step;
        let mut rho = self.ctx.rho0.clone();
        let mut out = Vec::with_capacity(self.points);
        for k in 0..self.points {
            out.push(dot(&self.ctx.coil, &rho));
            if k + 1 == self.points {
                break;
            }
            let t0 = k as f64 * dwell;
            let traj = lvn_oracle(
                |t| rotate_components(&self.ctx.ic, &rots(t0 + t))?.add(&ir),
                &rho,
                self.step,
                self.per,
            )
            .stage(stage)?;
            rho = traj.states.last().expect("oracle returns states").to_vec();
        }
        Ok(out)
    }
}
