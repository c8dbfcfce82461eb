//! Action of the matrix exponential on a vector.
//!
//! The default path is an adaptive Krylov (Arnoldi) integrator in the style
//! of Sidje's Expokit `expv`. A sub-stepped truncated Taylor series is kept as
//! an independent cross-check. Neither forms `exp(tA)` densely.

use alloc::vec;
use alloc::vec::Vec;

use super::{dot, expm_dense, norm2, CDense, CSparse, CVector, SparseConfig};
use crate::error::invalid;
use crate::{math, Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Integrator used by [`expmv_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpmvMethod {
    #[default]
    Krylov,
    Taylor,
}

/// `exp(t A) v` to relative 2-norm tolerance `tol`, using the Krylov path and
/// default budgets.
pub fn expmv(a: &CSparse, v: &[C64], t: f64, tol: f64) -> Result<CVector> {
    let cfg = SparseConfig {
        expmv_tol: tol,
        ..SparseConfig::default()
    };
    expmv_with(a, v, t, &cfg, ExpmvMethod::Krylov)
}

/// `exp(t A) v` with explicit configuration and method.
pub fn expmv_with(
    a: &CSparse,
    v: &[C64],
    t: f64,
    cfg: &SparseConfig,
    method: ExpmvMethod,
) -> Result<CVector> {
    match method {
        ExpmvMethod::Krylov => expmv_krylov(a, v, t, cfg),
        ExpmvMethod::Taylor => expmv_taylor(a, v, t, cfg),
    }
}

fn check(a: &CSparse, v: &[C64], t: f64, tol: f64) -> Result<()> {
    let n = a.ensure_square()?;
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            context: "expmv",
            expected: n,
            found: v.len(),
        });
    }
    if v.is_empty() {
        return Err(invalid("expmv on an empty vector"));
    }
    if !(tol > 0.0) {
        return Err(invalid("expmv tolerance must be positive"));
    }
    if !t.is_finite() {
        return Err(invalid("expmv time must be finite"));
    }
    Ok(())
}

/// Round up to two significant digits, as Expokit does for step sizes.
fn round_step(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return x;
    }
    let s = math::pow(10.0, math::floor(math::log10(x)) - 1.0);
    math::ceil(x / s) * s
}

/// Adaptive Krylov integrator.
pub fn expmv_krylov(a: &CSparse, v: &[C64], t: f64, cfg: &SparseConfig) -> Result<CVector> {
    let tol = cfg.expmv_tol;
    check(a, v, t, tol)?;
    let n = v.len();
    let anorm = a.norm_inf();
    let beta0 = norm2(v);
    if t == 0.0 || anorm == 0.0 || beta0 == 0.0 {
        return CVector::new(v.to_vec());
    }

    let m = cfg.krylov_dim.max(2).min(n);
    let t_out = t.abs();
    let sgn = t.signum();
    let gamma = 0.9;
    let delta = 1.2;
    let btol = 1e-12 * anorm;
    let max_reject = 40;

    let mf = m as f64;
    let fact = math::pow((mf + 1.0) / core::f64::consts::E, mf + 1.0)
        * math::sqrt(2.0 * core::f64::consts::PI * (mf + 1.0));
    let mut t_new =
        round_step((1.0 / anorm) * math::pow((fact * tol) / (4.0 * anorm), 1.0 / mf));
    if !(t_new > 0.0) || !t_new.is_finite() {
        t_new = t_out;
    }

    let mut w = v.to_vec();
    let mut beta = beta0;
    let mut t_now = 0.0;
    let mut steps = 0usize;
    let mut s_error: f64 = 0.0;
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
    let mut p = vec![ZERO; n];

    while t_now < t_out {
        steps += 1;
        if steps > cfg.max_substeps {
            return Err(Error::ExpmvNoConvergence {
                estimate: s_error.max(tol),
            });
        }
        let mut t_step = (t_out - t_now).min(t_new);

        basis.clear();
        basis.push(w.iter().map(|x| x / beta).collect());
        let mut h = CDense::zeros(m + 2, m + 2);
        let mut breakdown = false;
        let mut mb = m;
        for j in 0..m {
            a.matvec_into(&basis[j], &mut p);
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(vi, &p);
                h[(i, j)] = hij;
                for (pk, vk) in p.iter_mut().zip(vi) {
                    *pk -= hij * vk;
                }
            }
            // One reorthogonalisation pass keeps the basis orthonormal for
            // the strongly non-normal Fokker-Planck generators.
            for (i, vi) in basis.iter().enumerate() {
                let c = dot(vi, &p);
                h[(i, j)] += c;
                for (pk, vk) in p.iter_mut().zip(vi) {
                    *pk -= c * vk;
                }
            }
            let s = norm2(&p);
            if s < btol {
                breakdown = true;
                mb = j + 1;
                t_step = t_out - t_now;
                break;
            }
            h[(j + 1, j)] = C64::new(s, 0.0);
            basis.push(p.iter().map(|x| x / s).collect());
        }

        let mut avnorm = 0.0;
        if !breakdown {
            h[(m + 1, m)] = C64::new(1.0, 0.0);
            a.matvec_into(&basis[m], &mut p);
            avnorm = norm2(&p);
        }

        let mut rejects = 0;
        let (f, err_loc, xm) = loop {
            let mx = if breakdown { mb } else { m + 2 };
            let hs = CDense::from_fn(mx, mx, |i, j| h[(i, j)] * (sgn * t_step));
            let f = expm_dense(&hs)?;
            if breakdown {
                break (f, 0.0, 1.0 / mf);
            }
            let phi1 = (f[(m, 0)] * beta).norm();
            let phi2 = (f[(m + 1, 0)] * beta).norm() * avnorm;
            let (err, xm) = if phi1 > 10.0 * phi2 {
                (phi2, 1.0 / mf)
            } else if phi1 > phi2 {
                (phi1 * phi2 / (phi1 - phi2), 1.0 / mf)
            } else {
                (phi1, 1.0 / (mf - 1.0).max(1.0))
            };
            if err <= delta * (t_step / t_out) * tol * beta0 {
                break (f, err, xm);
            }
            rejects += 1;
            if rejects > max_reject {
                return Err(Error::ExpmvNoConvergence { estimate: err / beta0 });
            }
            let shrink = gamma * math::pow((t_step / t_out) * tol * beta0 / err, xm);
            t_step = round_step(t_step * shrink.clamp(0.01, 0.95));
        };

        let mx = if breakdown { mb } else { m + 1 };
        for x in w.iter_mut() {
            *x = ZERO;
        }
        for (i, vi) in basis.iter().enumerate().take(mx) {
            let c = f[(i, 0)] * beta;
            for (wk, vk) in w.iter_mut().zip(vi) {
                *wk += c * vk;
            }
        }
        beta = norm2(&w);
        t_now += t_step;
        s_error += err_loc;
        if beta == 0.0 {
            break;
        }
        if err_loc > 0.0 {
            let grow = gamma * math::pow((t_step / t_out) * tol * beta0 / err_loc, xm);
            t_new = round_step(t_step * grow.min(10.0));
        } else {
            t_new = round_step(t_step * 10.0);
        }
        if !(t_new > 0.0) || !t_new.is_finite() {
            t_new = t_out - t_now;
        }
    }
    CVector::new(w)
}

/// Sub-stepped truncated Taylor series. Each sub-step has `|t| ||A||_1 / s`
/// at most one, and the series is cut once a term drops below the per-step
/// share of the tolerance.
pub fn expmv_taylor(a: &CSparse, v: &[C64], t: f64, cfg: &SparseConfig) -> Result<CVector> {
    let tol = cfg.expmv_tol;
    check(a, v, t, tol)?;
    let anorm = a.norm1();
    if t == 0.0 || anorm == 0.0 {
        return CVector::new(v.to_vec());
    }
    let steps_f = math::ceil(anorm * t.abs()).max(1.0);
    if steps_f > cfg.max_substeps as f64 {
        return Err(Error::ExpmvNoConvergence {
            estimate: f64::INFINITY,
        });
    }
    let steps = steps_f as usize;
    let h = t / steps_f;
    let step_tol = tol / steps_f;
    let max_terms = 80;
    let mut w = v.to_vec();
    let mut term = vec![ZERO; v.len()];
    let mut next = vec![ZERO; v.len()];
    for _ in 0..steps {
        term.copy_from_slice(&w);
        let wnorm = norm2(&w);
        let mut converged = false;
        for k in 1..=max_terms {
            a.matvec_into(&term, &mut next);
            let c = h / k as f64;
            for (tk, nk) in term.iter_mut().zip(&next) {
                *tk = nk * c;
            }
            for (wk, tk) in w.iter_mut().zip(&term) {
                *wk += tk;
            }
            if norm2(&term) <= step_tol * wnorm * 1e-2 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ExpmvNoConvergence {
                estimate: norm2(&term) / wnorm.max(f64::MIN_POSITIVE),
            });
        }
    }
    CVector::new(w)
}
