use alloc::vec::Vec;

use super::spatial_average;
use crate::assembly::{FPState, Generator, Waveform};
use crate::error::invalid;
use crate::sparse::{dot, expm_with, expmv_with, CSparse, CVector, ExpmvMethod, SparseConfig};
use crate::{Error, Result, C64};

/// Largest dimension for which FID acquisition and the oracle form an
/// explicit one-step propagator instead of repeated Krylov actions.
pub const PROPAGATOR_CACHE_DIM: usize = 256;

/// Sampled times with states and/or a detected observable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    pub signal: Vec<C64>,
}

impl Trajectory {
    /// `<coil, state_k>` for every stored state.
    pub fn observe(&self, coil: &[C64]) -> Vec<C64> {
        self.states.iter().map(|s| dot(coil, s)).collect()
    }
}

fn no_channels(gen: &Generator) -> Result<()> {
    if !gen.is_time_independent() {
        return Err(invalid(
            "generator has time-dependent channels; use evolve_schedule with a waveform",
        ));
    }
    Ok(())
}

fn check_state(gen: &Generator, state: &FPState) -> Result<()> {
    if state.layout != gen.layout {
        return Err(Error::DimensionMismatch {
            context: "state layout versus generator layout",
            expected: gen.dim(),
            found: state.vector.dim(),
        });
    }
    Ok(())
}

pub fn evolve(gen: &Generator, state: &FPState, t: f64) -> Result<FPState> {
    evolve_with(gen, state, t, &SparseConfig::default())
}

/// `exp(G t) state` for a generator without channels.
pub fn evolve_with(gen: &Generator, state: &FPState, t: f64, cfg: &SparseConfig) -> Result<FPState> {
    no_channels(gen)?;
    check_state(gen, state)?;
    if !(t >= 0.0) {
        return Err(invalid("evolution time must be non-negative"));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let v = expmv_with(&gen.constant, &state.vector, t, cfg, ExpmvMethod::Krylov)?;
    FPState::new(v, state.layout.clone())
}

pub fn evolve_schedule(gen: &Generator, wf: &Waveform, state: &FPState) -> Result<FPState> {
    evolve_schedule_with(gen, wf, state, &SparseConfig::default())
}

/// Sequential propagation over waveform slices, each with the channel
/// coefficients frozen.
pub fn evolve_schedule_with(gen: &Generator, wf: &Waveform, state: &FPState, cfg: &SparseConfig) -> Result<FPState> {
    check_state(gen, state)?;
    let mut v = state.vector.clone();
    for s in &wf.slices {
        let g = gen.frozen(&s.coefficients)?;
        v = expmv_with(&g, &v, s.duration, cfg, ExpmvMethod::Krylov)?;
    }
    FPState::new(v, state.layout.clone())
}

/// One-step propagator `exp(G dt)`: explicit for small generators, a Krylov
/// action otherwise.
enum Stepper<'a> {
    Explicit(CSparse),
    Krylov(&'a CSparse, f64, &'a SparseConfig),
}

impl<'a> Stepper<'a> {
    fn new(g: &'a CSparse, dt: f64, cfg: &'a SparseConfig) -> Result<Self> {
        if g.nrows() <= PROPAGATOR_CACHE_DIM {
            let p = expm_with(&g.scale_real(dt), cfg)?;
            Ok(Stepper::Explicit(CSparse::from_dense(&p)))
        } else {
            Ok(Stepper::Krylov(g, dt, cfg))
        }
    }

    fn apply(&self, v: &[C64]) -> Result<CVector> {
        match self {
            Stepper::Explicit(p) => CVector::new(p.matvec(v)),
            Stepper::Krylov(g, dt, cfg) => expmv_with(g, v, *dt, cfg, ExpmvMethod::Krylov),
        }
    }
}

pub fn acquire_fid(gen: &Generator, state: &FPState, coil: &[C64], dwell: f64, n: usize) -> Result<Trajectory> {
    acquire_fid_with(gen, state, coil, dwell, n, &SparseConfig::default())
}

/// `s_k = <coil, spatial_average(exp(G k dwell) state)>` for `k = 0..n`,
/// stepping with one cached propagator.
pub fn acquire_fid_with(
    gen: &Generator,
    state: &FPState,
    coil: &[C64],
    dwell: f64,
    n: usize,
    cfg: &SparseConfig,
) -> Result<Trajectory> {
    no_channels(gen)?;
    check_state(gen, state)?;
    if !(dwell > 0.0 && dwell.is_finite()) {
        return Err(invalid("dwell time must be positive"));
    }
    if coil.len() != gen.layout.spin_dim() {
        return Err(Error::DimensionMismatch {
            context: "coil vector",
            expected: gen.layout.spin_dim(),
            found: coil.len(),
        });
    }
    let step = Stepper::new(&gen.constant, dwell, cfg)?;
    let mut times = Vec::with_capacity(n);
    let mut signal = Vec::with_capacity(n);
    let mut cur = state.clone();
    for k in 0..n {
        if k > 0 {
            cur.vector = step.apply(&cur.vector)?;
        }
        times.push(k as f64 * dwell);
        signal.push(dot(coil, &spatial_average(&cur)));
    }
    Ok(Trajectory {
        times,
        states: Vec::new(),
        signal,
    })
}

/// Time-sliced Liouville-von Neumann reference: `rho_{k+1} =
/// exp(-i L(t_k + dt/2) dt) rho_k` with `L` the spin Liouvillian returned by
/// `liouvillian(t)` (relaxation enters as `H + i R`). Returns `n + 1` states
/// at `t = 0, dt, .., n dt`.
pub fn lvn_oracle<F>(mut liouvillian: F, rho0: &[C64], dt: f64, n: usize) -> Result<Trajectory>
where
    F: FnMut(f64) -> Result<CSparse>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("oracle time step must be positive"));
    }
    let cfg = SparseConfig::default();
    let mut rho = CVector::new(rho0.to_vec())?;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(rho.clone());
    for k in 0..n {
        let t = k as f64 * dt;
        let l = liouvillian(t + 0.5 * dt)?;
        if l.nrows() != rho.dim() || l.ncols() != rho.dim() {
            return Err(Error::DimensionMismatch {
                context: "oracle Liouvillian",
                expected: rho.dim(),
                found: l.nrows(),
            });
        }
        let g = l.scale(C64::new(0.0, -1.0));
        rho = Stepper::new(&g, dt, &cfg)?.apply(&rho)?;
        times.push(t + dt);
        states.push(rho.clone());
    }
    Ok(Trajectory {
        times,
        states,
        signal: Vec::new(),
    })
}
