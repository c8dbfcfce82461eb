use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::ops::spin_operators;
use super::wigner::{mat3_mul, mat3_transpose, Mat3, Rotation};
use crate::error::invalid;
use crate::sparse::CSparse;
use crate::{math, Result};

/// Physical constants (SI).
pub mod constants {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
    pub const MU0_OVER_4PI: f64 = 1.000_000_000_55e-7;
    /// Free-electron gyromagnetic ratio (negative: magnetic moment opposes spin).
    pub const GAMMA_ELECTRON: f64 = -1.760_859_630_23e11;
    pub const G_FREE: f64 = 2.002_319_304_36;
}

/// Reference frame in which a spin's Zeeman interaction is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    /// Rotating at the reference frequency; couplings are secular.
    #[default]
    Rotating,
    /// Laboratory frame; no truncation is applied to this spin.
    Lab,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spin {
    pub label: String,
    pub multiplicity: usize,
    /// Gyromagnetic ratio, rad/(s T).
    pub gamma: f64,
    pub frame: Frame,
}

const ISOTOPES: &[(&str, usize, f64)] = &[
    ("1H", 2, 2.675_221_874_4e8),
    ("2H", 3, 4.106_627_91e7),
    ("13C", 2, 6.728_284e7),
    ("14N", 3, 1.933_779_2e7),
    ("15N", 2, -2.712_618_04e7),
    ("17O", 6, -3.628_08e7),
    ("19F", 2, 2.518_148e8),
    ("23Na", 4, 7.080_849_3e7),
    ("27Al", 6, 6.976_28e7),
    ("29Si", 2, -5.319_0e7),
    ("31P", 2, 1.083_94e8),
];

impl Spin {
    pub fn new(label: &str, multiplicity: usize, gamma: f64) -> Result<Self> {
        if multiplicity < 2 {
            return Err(invalid("spin multiplicity must be at least 2"));
        }
        Ok(Self {
            label: label.to_string(),
            multiplicity,
            gamma,
            frame: Frame::Rotating,
        })
    }

    /// Known nucleus by isotope label (`"1H"`, `"14N"`, ...) or `"E"` for an
    /// electron.
    pub fn isotope(label: &str) -> Result<Self> {
        if label == "E" || label == "e" {
            return Ok(Self::electron());
        }
        ISOTOPES
            .iter()
            .find(|(l, _, _)| *l == label)
            .map(|&(l, m, g)| Self {
                label: l.to_string(),
                multiplicity: m,
                gamma: g,
                frame: Frame::Rotating,
            })
            .ok_or_else(|| invalid(alloc::format!("unknown isotope `{label}`")))
    }

    pub fn electron() -> Self {
        Self {
            label: "E".to_string(),
            multiplicity: 2,
            gamma: constants::GAMMA_ELECTRON,
            frame: Frame::Rotating,
        }
    }

    pub fn in_lab_frame(mut self) -> Self {
        self.frame = Frame::Lab;
        self
    }

    pub fn is_electron(&self) -> bool {
        self.label == "E"
    }
}

/// Zeeman interaction tensor of one spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Zeeman {
    /// Chemical shift tensor in ppm (nuclei).
    ShiftPpm(Mat3),
    /// g-tensor (electrons).
    GTensor(Mat3),
}

/// Bilinear coupling between two spins: anisotropic tensor in rad/s plus an
/// isotropic scalar coupling in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub tensor: Mat3,
    pub j_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrupolar {
    pub cq_hz: f64,
    pub eta: f64,
    pub orientation: Rotation,
}

impl Quadrupolar {
    /// Interaction tensor (rad/s) in the molecular frame, to be contracted as
    /// `sum_ab Q_ab S_a S_b`.
    pub fn tensor(&self, multiplicity: usize) -> Mat3 {
        let i = (multiplicity as f64 - 1.0) / 2.0;
        let c = 2.0 * core::f64::consts::PI * self.cq_hz / (4.0 * i * (2.0 * i - 1.0));
        let pas = diag3([-(1.0 - self.eta) * c, -(1.0 + self.eta) * c, 2.0 * c]);
        rotate_tensor(&pas, &self.orientation)
    }
}

/// Selector for single-spin operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

pub(crate) fn diag3(d: [f64; 3]) -> Mat3 {
    [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]
}

/// `R A R^T`.
pub fn rotate_tensor(a: &Mat3, rot: &Rotation) -> Mat3 {
    let r = rot.matrix();
    mat3_mul(&mat3_mul(&r, a), &mat3_transpose(&r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    /// Magnet induction, T.
    pub field_t: f64,
    pub spins: Vec<Spin>,
    pub zeeman: Vec<Option<Zeeman>>,
    pub couplings: Vec<Coupling>,
    pub quadrupolar: Vec<Option<Quadrupolar>>,
    /// Rotating-frame reference of electron spins, Hz. Defaults to the
    /// free-electron Larmor frequency.
    pub electron_frame_hz: Option<f64>,
}

impl SpinSystem {
    pub fn new(field_t: f64) -> Self {
        Self {
            field_t,
            spins: Vec::new(),
            zeeman: Vec::new(),
            couplings: Vec::new(),
            quadrupolar: Vec::new(),
            electron_frame_hz: None,
        }
    }

    pub fn add_spin(&mut self, spin: Spin) -> usize {
        self.spins.push(spin);
        self.zeeman.push(None);
        self.quadrupolar.push(None);
        self.spins.len() - 1
    }

    fn check_spin(&self, n: usize) -> Result<()> {
        if n >= self.spins.len() {
            return Err(invalid(alloc::format!("spin index {n} out of range")));
        }
        Ok(())
    }

    pub fn set_shift_ppm(&mut self, n: usize, tensor: Mat3) -> Result<()> {
        self.check_spin(n)?;
        self.zeeman[n] = Some(Zeeman::ShiftPpm(tensor));
        Ok(())
    }

    /// Isotropic chemical shift in ppm.
    pub fn set_isotropic_shift(&mut self, n: usize, ppm: f64) -> Result<()> {
        self.set_shift_ppm(n, diag3([ppm; 3]))
    }

    /// Shift tensor from principal values (ppm) and the orientation of its
    /// principal axis frame in the molecular frame.
    pub fn set_shift_principal(&mut self, n: usize, principal: [f64; 3], orientation: Rotation) -> Result<()> {
        self.set_shift_ppm(n, rotate_tensor(&diag3(principal), &orientation))
    }

    pub fn set_g(&mut self, n: usize, tensor: Mat3) -> Result<()> {
        self.check_spin(n)?;
        self.zeeman[n] = Some(Zeeman::GTensor(tensor));
        Ok(())
    }

    pub fn set_g_principal(&mut self, n: usize, principal: [f64; 3], orientation: Rotation) -> Result<()> {
        self.set_g(n, rotate_tensor(&diag3(principal), &orientation))
    }

    fn coupling_mut(&mut self, i: usize, j: usize) -> Result<&mut Coupling> {
        self.check_spin(i)?;
        self.check_spin(j)?;
        if i == j {
            return Err(invalid("a coupling needs two distinct spins"));
        }
        let (i, j) = (i.min(j), i.max(j));
        if let Some(k) = self.couplings.iter().position(|c| c.i == i && c.j == j) {
            return Ok(&mut self.couplings[k]);
        }
        self.couplings.push(Coupling {
            i,
            j,
            tensor: [[0.0; 3]; 3],
            j_hz: 0.0,
        });
        Ok(self.couplings.last_mut().unwrap())
    }

    pub fn add_j(&mut self, i: usize, j: usize, hz: f64) -> Result<()> {
        self.coupling_mut(i, j)?.j_hz += hz;
        Ok(())
    }

    /// Adds a coupling tensor in rad/s.
    pub fn add_coupling_tensor(&mut self, i: usize, j: usize, tensor: Mat3) -> Result<()> {
        let c = self.coupling_mut(i, j)?;
        for a in 0..3 {
            for b in 0..3 {
                c.tensor[a][b] += tensor[a][b];
            }
        }
        Ok(())
    }

    /// Point-dipole coupling for spins `distance_m` apart along `direction`
    /// (molecular frame).
    pub fn add_point_dipole(&mut self, i: usize, j: usize, distance_m: f64, direction: [f64; 3]) -> Result<()> {
        self.check_spin(i)?;
        self.check_spin(j)?;
        if !(distance_m > 0.0) {
            return Err(invalid("dipolar distance must be positive"));
        }
        let len = math::sqrt(direction.iter().map(|x| x * x).sum());
        if !(len > 0.0) {
            return Err(invalid("dipolar direction must be nonzero"));
        }
        let n = direction.map(|x| x / len);
        let d = self.dipolar_constant(i, j, distance_m);
        let mut t = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let delta = if a == b { 1.0 } else { 0.0 };
                t[a][b] = -d * (3.0 * n[a] * n[b] - delta);
            }
        }
        self.add_coupling_tensor(i, j, t)
    }

    /// `mu0/(4 pi) * gamma_i gamma_j hbar / r^3` in rad/s.
    pub fn dipolar_constant(&self, i: usize, j: usize, distance_m: f64) -> f64 {
        constants::MU0_OVER_4PI * self.spins[i].gamma * self.spins[j].gamma * constants::HBAR
            / (distance_m * distance_m * distance_m)
    }

    pub fn set_quadrupolar(&mut self, n: usize, cq_hz: f64, eta: f64, orientation: Rotation) -> Result<()> {
        self.check_spin(n)?;
        if self.spins[n].multiplicity < 3 {
            return Err(invalid(alloc::format!(
                "quadrupolar interaction on spin {n} which has multiplicity {}",
                self.spins[n].multiplicity
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("quadrupolar asymmetry must lie in [0, 1]"));
        }
        self.quadrupolar[n] = Some(Quadrupolar {
            cq_hz,
            eta,
            orientation,
        });
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.spins.is_empty() {
            return Err(invalid("spin system has no spins"));
        }
        if !(self.field_t.is_finite()) || self.field_t < 0.0 {
            return Err(invalid("magnet induction must be finite and non-negative"));
        }
        for c in &self.couplings {
            self.check_spin(c.i)?;
            self.check_spin(c.j)?;
            if c.i == c.j {
                return Err(invalid("coupling on a single spin"));
            }
        }
        for (n, q) in self.quadrupolar.iter().enumerate() {
            if q.is_some() && self.spins[n].multiplicity < 3 {
                return Err(invalid(alloc::format!(
                    "quadrupolar interaction on spin-1/2 (spin {n})"
                )));
            }
        }
        if self.zeeman.len() != self.spins.len() || self.quadrupolar.len() != self.spins.len() {
            return Err(invalid("per-spin interaction lists do not match the spin list"));
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spins.iter().map(|s| s.multiplicity).collect()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.spins.iter().map(|s| s.multiplicity).product()
    }

    pub fn liouville_dim(&self) -> usize {
        let n = self.hilbert_dim();
        n * n
    }

    /// Single-spin operator embedded in the full Hilbert space.
    pub fn op(&self, n: usize, kind: OpKind) -> Result<CSparse> {
        self.check_spin(n)?;
        let s = spin_operators(self.spins[n].multiplicity)?;
        let single = match kind {
            OpKind::X => s.x,
            OpKind::Y => s.y,
            OpKind::Z => s.z,
            OpKind::Plus => s.plus,
            OpKind::Minus => s.minus,
        };
        let mut out = CSparse::identity(1);
        for (k, spin) in self.spins.iter().enumerate() {
            let f = if k == n {
                single.clone()
            } else {
                CSparse::identity(spin.multiplicity)
            };
            out = CSparse::kron(&out, &f)?;
        }
        Ok(out)
    }

    /// Sum of `op(n, kind)` over the spins carrying `label`.
    pub fn total_op(&self, label: &str, kind: OpKind) -> Result<CSparse> {
        let n = self.hilbert_dim();
        let mut out = CSparse::zeros(n, n);
        let mut found = false;
        for (k, s) in self.spins.iter().enumerate() {
            if s.label == label {
                out = out.add(&self.op(k, kind)?)?;
                found = true;
            }
        }
        if !found {
            return Err(invalid(alloc::format!("no spins labelled `{label}`")));
        }
        Ok(out)
    }

    /// Magnetic quantum numbers of every spin for each product basis state.
    pub(crate) fn basis_m(&self) -> Vec<Vec<f64>> {
        let dims = self.dims();
        let total = self.hilbert_dim();
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut ms = vec![0.0; dims.len()];
            for (k, &d) in dims.iter().enumerate().rev() {
                let i = idx % d;
                idx /= d;
                ms[k] = (d as f64 - 1.0) / 2.0 - i as f64;
            }
            out.push(ms);
        }
        out
    }

    /// Total magnetic quantum number of each rotating-frame isotope class per
    /// basis state. Lab-frame spins are left out, so they are unconstrained.
    fn class_m(&self) -> Vec<Vec<f64>> {
        let mut classes: Vec<&str> = Vec::new();
        for s in &self.spins {
            if s.frame == Frame::Rotating && !classes.contains(&s.label.as_str()) {
                classes.push(&s.label);
            }
        }
        self.basis_m()
            .into_iter()
            .map(|ms| {
                classes
                    .iter()
                    .map(|c| {
                        self.spins
                            .iter()
                            .zip(&ms)
                            .filter(|(s, _)| s.frame == Frame::Rotating && s.label == *c)
                            .map(|(_, m)| m)
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Drops matrix elements that change the total magnetic quantum number
    /// of any rotating-frame isotope class.
    pub fn secular_truncate(&self, op: &CSparse) -> Result<CSparse> {
        let cm = self.class_m();
        let trips = op
            .iter()
            .filter(|&(i, j, _)| {
                cm[i]
                    .iter()
                    .zip(&cm[j])
                    .all(|(a, b)| (a - b).abs() < 1e-9)
            })
            .collect();
        CSparse::from_triplets(op.nrows(), op.ncols(), trips)
    }

    /// Reference (rotating-frame) angular frequency subtracted from the
    /// Zeeman term of spin `n`. Zero for lab-frame spins.
    pub fn reference_frequency(&self, n: usize) -> f64 {
        let s = &self.spins[n];
        if s.frame == Frame::Lab {
            return 0.0;
        }
        if s.is_electron() {
            let hz = self.electron_frame_hz.unwrap_or(
                constants::G_FREE * constants::BOHR_MAGNETON * self.field_t
                    / (2.0 * core::f64::consts::PI * constants::HBAR),
            );
            2.0 * core::f64::consts::PI * hz
        } else {
            -s.gamma * self.field_t
        }
    }

    /// Zeeman interaction of spin `n` as `(bare, tensor, prefactor)`: the
    /// lab-frame Hamiltonian is `prefactor * sum_a (bare delta_az + tensor[a][z]) S_a`.
    /// Splitting off `bare` keeps rotating-frame offsets free of cancellation.
    pub(crate) fn zeeman_parts(&self, n: usize) -> (f64, Mat3, f64) {
        let s = &self.spins[n];
        let electron = constants::BOHR_MAGNETON * self.field_t / constants::HBAR;
        let nuclear = -s.gamma * self.field_t;
        match (&self.zeeman[n], s.is_electron()) {
            (Some(Zeeman::GTensor(g)), _) => (0.0, *g, electron),
            (Some(Zeeman::ShiftPpm(d)), _) => (1.0, d.map(|row| row.map(|x| x * 1e-6)), nuclear),
            (None, true) => (0.0, diag3([constants::G_FREE; 3]), electron),
            (None, false) => (1.0, [[0.0; 3]; 3], nuclear),
        }
    }
}
