//! Spin systems, relaxation and operators built from a validated config.

use std::f64::consts::PI;

use fpmr_core::spin::{relax_kin, vec_op, OpKind, RelaxKin, RelaxSpec, Rotation, Spin, SpinSystem};
use fpmr_core::{CSparse, C64};

use crate::config::{OperatorKind, OperatorTerm, SpinSystemConfig};
use crate::error::{Error, Stage};

pub(crate) fn euler_deg(e: &[f64; 3]) -> Rotation {
    Rotation::euler(e[0].to_radians(), e[1].to_radians(), e[2].to_radians())
}

pub fn build_system(cfg: &SpinSystemConfig) -> Result<SpinSystem, Error> {
    let stage = "building the spin system";
    let mut sys = SpinSystem::new(cfg.field_t);
    sys.electron_frame_hz = cfg.electron_frame_hz;
    for s in &cfg.spins {
        let mut spin = Spin::isotope(&s.isotope).stage(stage)?;
        if s.lab_frame {
            spin = spin.in_lab_frame();
        }
        let n = sys.add_spin(spin);
        if let Some(p) = s.shift_principal_ppm {
            sys.set_shift_principal(n, p, euler_deg(&s.shift_euler_deg)).stage(stage)?;
        } else if let Some(iso) = s.shift_ppm {
            sys.set_isotropic_shift(n, iso).stage(stage)?;
        }
        if let Some(g) = s.g_principal {
            sys.set_g_principal(n, g, euler_deg(&s.g_euler_deg)).stage(stage)?;
        }
        if let Some(q) = &s.quadrupolar {
            sys.set_quadrupolar(n, q.cq_hz, q.eta, euler_deg(&q.euler_deg)).stage(stage)?;
        }
    }
    for c in &cfg.couplings {
        let [i, j] = c.spins;
        if let Some(hz) = c.j_hz {
            sys.add_j(i, j, hz).stage(stage)?;
        }
        if let (Some(r), Some(d)) = (c.dipole_distance_m, c.dipole_direction) {
            sys.add_point_dipole(i, j, r, d).stage(stage)?;
        }
        if let Some(t) = c.tensor_hz {
            sys.add_coupling_tensor(i, j, t.map(|row| row.map(|x| 2.0 * PI * x))).stage(stage)?;
        }
    }
    sys.validate().stage(stage)?;
    Ok(sys)
}

pub fn build_relaxation(cfg: &SpinSystemConfig, sys: &SpinSystem) -> Result<RelaxKin, Error> {
    let spec = match &cfg.relaxation {
        None => RelaxSpec::None,
        Some(r) => RelaxSpec::Phenomenological(
            r.t1_s
                .iter()
                .zip(&r.t2_s)
                .map(|(t1, t2)| (t1.unwrap_or(f64::INFINITY), t2.unwrap_or(f64::INFINITY)))
                .collect(),
        ),
    };
    relax_kin(sys, &spec).stage("building relaxation superoperator")
}

fn op_kind(k: OperatorKind) -> OpKind {
    match k {
        OperatorKind::X => OpKind::X,
        OperatorKind::Y => OpKind::Y,
        OperatorKind::Z => OpKind::Z,
        OperatorKind::Plus => OpKind::Plus,
        OperatorKind::Minus => OpKind::Minus,
    }
}

/// Hilbert-space operator `sum_k c_k S_k`.
pub fn operator(sys: &SpinSystem, terms: &[OperatorTerm]) -> Result<CSparse, Error> {
    let stage = "building detection operators";
    let n = sys.hilbert_dim();
    let mut out = CSparse::zeros(n, n);
    for t in terms {
        let op = match (&t.label, t.spin) {
            (Some(l), _) => sys.total_op(l, op_kind(t.operator)),
            (None, Some(k)) => sys.op(k, op_kind(t.operator)),
            (None, None) => unreachable!("validated config selects spins"),
        }
        .stage(stage)?;
        out = out.add_scaled(&op, C64::new(t.coefficient, 0.0)).stage(stage)?;
    }
    Ok(out)
}

/// Liouville-space vector of [`operator`].
pub fn state_vector(sys: &SpinSystem, terms: &[OperatorTerm]) -> Result<Vec<C64>, Error> {
    let v = vec_op(&operator(sys, terms)?).stage("vectorising detection operators")?;
    Ok(v.as_slice().to_vec())
}

/// Phase-advance rate of a carrier at physical offset `offset_hz` from the
/// reference of the spins labelled `label`. The sign follows the sense in
/// which those spins precess: positive for electrons, negative for nuclei
/// with positive gyromagnetic ratio.
pub fn carrier_rate(sys: &SpinSystem, label: &str, offset_hz: f64) -> f64 {
    let spin = sys.spins.iter().find(|s| s.label == label);
    let sense = match spin {
        Some(s) if s.is_electron() => 1.0,
        Some(s) => -s.gamma.signum(),
        None => 1.0,
    };
    sense * 2.0 * PI * offset_hz
}
