//! Experiment dispatch, powder averaging and convergence looping.

mod deer;
mod oracle;
mod rotors;
mod transport;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use fpmr_core::assembly::{FPLayout, FPState, Generator};
use fpmr_core::propagation::{acquire_fid, detect_fd};
use fpmr_core::spatial::{crystal_rotation, spherical_grid, SphericalScheme};
use fpmr_core::spin::{build_components, wigner_d2, IrreducibleComponents, RelaxKin, Rotation, SpinSystem};
use fpmr_core::{CSparse, C64};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::config::{Domain, Experiment, ExperimentConfig, SphericalConfig};
use crate::error::{Error, Stage};
use crate::output::Table;
use crate::system::{build_relaxation, build_system, state_vector};

/// Largest number of grid doublings in convergence mode.
pub const MAX_DOUBLINGS: usize = 6;

/// Default relative tolerance of convergence mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    /// Double the active grids until the outputs change by less than this
    /// (relative to their largest magnitude).
    pub converge: Option<f64>,
    /// Run the time-sliced reference instead of the Fokker-Planck path.
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStep {
    /// Active grid sizes of this attempt.
    pub grids: Vec<(String, usize)>,
    /// Largest output change relative to the previous attempt.
    pub max_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub convergence: Vec<ConvergenceStep>,
    /// `None` outside convergence mode.
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub tables: Vec<Table>,
    pub report: RunReport,
}

/// Runs the Fokker-Planck pipeline once with the configured grids.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult, Error> {
    run_with(cfg, &RunOptions::default())
}

pub fn run_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunResult, Error> {
    cfg.validate()?;
    let start = Instant::now();
    let once = |c: &ExperimentConfig| {
        if opts.oracle {
            oracle::simulate(c)
        } else {
            simulate(c)
        }
    };
    let mut history = Vec::new();
    let mut converged = None;
    let mut tables = once(cfg)?;
    if let Some(tol) = opts.converge {
        let mut current = cfg.clone();
        history.push(ConvergenceStep {
            grids: active_grids(&current),
            max_change: None,
        });
        if active_grids(&current).is_empty() {
            converged = Some(true);
        } else {
            converged = Some(false);
            for _ in 0..MAX_DOUBLINGS {
                double_grids(&mut current);
                let next = once(&current)?;
                let change = max_relative_change(&tables, &next);
                history.push(ConvergenceStep {
                    grids: active_grids(&current),
                    max_change: Some(change),
                });
                tables = next;
                if change < tol {
                    converged = Some(true);
                    break;
                }
            }
        }
    }
    Ok(RunResult {
        tables,
        report: RunReport {
            experiment: cfg.experiment.kind().into(),
            outputs: Vec::new(),
            wall_time_s: start.elapsed().as_secs_f64(),
            convergence: history,
            converged,
        },
    })
}

/// Grids that influence the output of this experiment.
pub fn active_grids(cfg: &ExperimentConfig) -> Vec<(String, usize)> {
    let g = &cfg.grids;
    let mut out = Vec::new();
    match &cfg.experiment {
        Experiment::Static {} => {}
        Experiment::Mas { rate_hz, .. } => {
            if *rate_hz != 0.0 {
                out.push(("rotor_points".into(), g.rotor_points));
            }
        }
        Experiment::Dor { inner_rate_hz, .. } => {
            out.push(("rotor_points".into(), g.rotor_points));
            if *inner_rate_hz != 0.0 {
                out.push(("inner_rotor_points".into(), g.inner_rotor_points));
            }
        }
        Experiment::Pgse { .. } => out.push(("z.points".into(), g.z.as_ref().map_or(0, |z| z.points))),
        Experiment::Spatiotemporal { segments, .. } => {
            out.push(("z.points".into(), g.z.as_ref().map_or(0, |z| z.points)));
            if segments.iter().any(|s| s.has_rf()) {
                out.push(("rf_points".into(), g.rf_points));
            }
        }
        Experiment::Deer { .. } => out.push(("mw_points".into(), g.mw_points)),
        Experiment::OvertoneCp { cp, .. } => {
            out.push(("rotor_points".into(), g.rotor_points));
            if cp.is_some() {
                out.push(("rf_points".into(), g.rf_points));
            }
        }
    }
    out
}

fn double_grids(cfg: &mut ExperimentConfig) {
    for (name, _) in active_grids(cfg) {
        let g = &mut cfg.grids;
        match name.as_str() {
            "rotor_points" => g.rotor_points *= 2,
            "inner_rotor_points" => g.inner_rotor_points *= 2,
            "rf_points" => g.rf_points *= 2,
            "mw_points" => g.mw_points *= 2,
            "z.points" => {
                if let Some(z) = g.z.as_mut() {
                    z.points *= 2;
                }
            }
            _ => unreachable!("unknown grid {name}"),
        }
    }
}

/// `max |new - old| / max |new|` over every non-abscissa column.
pub fn max_relative_change(old: &[Table], new: &[Table]) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in old.iter().zip(new) {
        for (ca, cb) in a.columns.iter().zip(&b.columns).skip(1) {
            for (x, y) in ca.values.iter().zip(&cb.values) {
                diff = diff.max((x - y).abs());
                scale = scale.max(y.abs());
            }
        }
    }
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Fokker-Planck pipeline for one set of grids.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<Table>, Error> {
    let ctx = Context::new(cfg)?;
    match &cfg.experiment {
        Experiment::Static {} => rotors::static_kind(&ctx),
        Experiment::Mas { rate_hz, .. } if *rate_hz == 0.0 => rotors::static_kind(&ctx),
        Experiment::Mas { rate_hz, axis } => rotors::mas(&ctx, *rate_hz, axis),
        Experiment::Dor { .. } => rotors::dor(&ctx),
        Experiment::OvertoneCp { .. } => rotors::overtone(&ctx),
        Experiment::Pgse { .. } => transport::pgse(&ctx),
        Experiment::Spatiotemporal { .. } => transport::spatiotemporal(&ctx),
        Experiment::Deer { .. } => deer::run(&ctx, deer::Pulses::FokkerPlanck),
    }
}

/// Everything derived once from a validated config.
pub(crate) struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub sys: SpinSystem,
    pub ic: IrreducibleComponents,
    pub rk: RelaxKin,
    pub rho0: Vec<C64>,
    pub coil: Vec<C64>,
    pub orientations: Vec<(Rotation, f64)>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self, Error> {
        let sys = build_system(&cfg.spin_system)?;
        let ic = build_components(&sys).stage("building interaction components")?;
        let rk = build_relaxation(&cfg.spin_system, &sys)?;
        let rho0 = state_vector(&sys, &cfg.detection.initial)?;
        let coil = state_vector(&sys, &cfg.detection.coil)?;
        let orientations = orientations(&cfg.grids.spherical)?;
        Ok(Self {
            cfg,
            sys,
            ic,
            rk,
            rho0,
            coil,
            orientations,
        })
    }

    /// `-i H(orientation) + R + K` on the spin space alone.
    pub fn static_generator(&self, orientation: &Rotation) -> Result<Generator, Error> {
        let stage = "assembling the static Liouvillian";
        let h = self.ic.at(&wigner_d2(orientation)).stage(stage)?;
        let g = h.scale(C64::new(0.0, -1.0)).add(&self.rk.total().stage(stage)?).stage(stage)?;
        let layout = FPLayout::spin_only(g.nrows()).stage(stage)?;
        Generator::new(g, Vec::new(), layout).stage(stage)
    }

    /// Spin Hamiltonian superoperator at one orientation plus `i R`.
    pub fn liouvillian(&self, rots: &[Rotation]) -> Result<CSparse, Error> {
        let stage = "assembling the oracle Liouvillian";
        let h = fpmr_core::spin::rotate_components(&self.ic, rots).stage(stage)?;
        h.add(&self.rk.total().stage(stage)?.scale(C64::new(0.0, 1.0))).stage(stage)
    }

    pub fn detection(&self) -> Detection {
        let d = &self.cfg.detection;
        match d.domain {
            Domain::Time => Detection::Time {
                dwell: d.dwell_s.expect("validated"),
                points: d.points,
            },
            Domain::Frequency => {
                let c = d.center_hz.expect("validated");
                let w = d.sweep_hz.expect("validated");
                let n = d.points;
                let hz = (0..n)
                    .map(|k| if n == 1 { c } else { c + w * (k as f64 / (n - 1) as f64 - 0.5) })
                    .collect();
                Detection::Frequency { hz }
            }
        }
    }
}

fn orientations(cfg: &SphericalConfig) -> Result<Vec<(Rotation, f64)>, Error> {
    let rad = |e: &[f64; 3]| (e[0].to_radians(), e[1].to_radians(), e[2].to_radians());
    let grid = match cfg {
        SphericalConfig::Single { euler_deg } => return Ok(vec![(crystal_rotation(rad(euler_deg)), 1.0)]),
        SphericalConfig::Spiral { points } => spherical_grid(&SphericalScheme::TwoAngleSpiral, *points),
        SphericalConfig::List { euler_deg, weights } => spherical_grid(
            &SphericalScheme::UserList {
                orientations: euler_deg.iter().map(rad).collect(),
                weights: weights.clone(),
            },
            euler_deg.len(),
        ),
    }
    .stage("building the spherical grid")?;
    Ok(grid.rotations().into_iter().zip(grid.weights).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Detection {
    Time { dwell: f64, points: usize },
    Frequency { hz: Vec<f64> },
}

impl Detection {
    pub fn signal(&self, gen: &Generator, state: &FPState, coil: &[C64]) -> Result<Vec<C64>, Error> {
        match self {
            Detection::Time { dwell, points } => Ok(acquire_fid(gen, state, coil, *dwell, *points)
                .stage("time-domain acquisition")?
                .signal),
            Detection::Frequency { hz } => hz
                .par_iter()
                .map(|f| {
                    detect_fd(gen, state, coil, &[2.0 * PI * f])
                        .map(|s| s.values[0])
                        .stage("frequency-domain detection")
                })
                .collect(),
        }
    }

    /// `fid` and its FFT `spectrum` for time-domain detection, `spectrum`
    /// alone for frequency-domain detection.
    pub fn tables(&self, signal: &[C64]) -> Vec<Table> {
        match self {
            Detection::Time { dwell, points } => {
                let t = (0..*points).map(|k| k as f64 * dwell).collect();
                let (hz, spec) = fft_spectrum(signal, *dwell);
                vec![
                    Table::complex("fid", "time_s", t, signal),
                    Table::complex("spectrum", "frequency_hz", hz, &spec),
                ]
            }
            Detection::Frequency { hz } => vec![Table::complex("spectrum", "frequency_hz", hz.clone(), signal)],
        }
    }
}

/// FFT with the first point halved, ordered from negative to positive
/// frequency. A signal `exp(-i 2 pi f t)` gives a line at `-f`, matching
/// frequency-domain detection.
pub fn fft_spectrum(signal: &[C64], dwell: f64) -> (Vec<f64>, Vec<C64>) {
    let n = signal.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut buf = signal.to_vec();
    buf[0] *= 0.5;
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    buf.rotate_right(half);
    let hz = (0..n).map(|k| (k as f64 - half as f64) / (n as f64 * dwell)).collect();
    (hz, buf)
}

/// Weighted powder sum. Orientations run in parallel; the sum is taken in
/// grid order so results do not depend on scheduling.
pub(crate) fn powder<F>(orientations: &[(Rotation, f64)], run: F) -> Result<Vec<C64>, Error>
where
    F: Fn(&Rotation) -> Result<Vec<C64>, Error> + Sync,
{
    let parts: Vec<Vec<C64>> = orientations.par_iter().map(|(r, _)| run(r)).collect::<Result<_, _>>()?;
    let mut total = vec![C64::new(0.0, 0.0); parts.first().map_or(0, Vec::len)];
    for (p, (_, w)) in parts.iter().zip(orientations) {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x * *w;
        }
    }
    Ok(total)
}
