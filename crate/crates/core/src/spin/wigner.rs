//! Rotations and rank-2 Wigner matrices.
//!
//! Rotations are active. Euler angles follow the z-y-z convention,
//! `R = Rz(alpha) Ry(beta) Rz(gamma)`, and the Wigner matrix obeys
//! `D_km = exp(-i k alpha) d_km(beta) exp(-i m gamma)` with indices ordered
//! `k, m = -2..=2`. The Wigner matrix is obtained from the 3x3 rotation by
//! projecting the rotated spherical rank-2 basis tensors onto themselves, so
//! it is an exact group homomorphism for any parameterisation.

use crate::error::invalid;
use crate::{math, Result, C64};

pub type Mat3 = [[f64; 3]; 3];

/// Unit vector of the magic-angle spinning axis.
pub const MAGIC_AXIS: [f64; 3] = [
    0.577_350_269_189_625_8,
    0.577_350_269_189_625_8,
    0.577_350_269_189_625_8,
];

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat3_transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rotation {
    Euler { alpha: f64, beta: f64, gamma: f64 },
    AngleAxis { axis: [f64; 3], angle: f64 },
}

impl Rotation {
    pub fn identity() -> Self {
        Self::Euler {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    pub fn euler(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self::Euler { alpha, beta, gamma }
    }

    /// Rotation by `angle` about `axis`; the axis is normalised here.
    pub fn angle_axis(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = math::sqrt(axis.iter().map(|x| x * x).sum());
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("rotation axis must be a nonzero finite vector"));
        }
        Ok(Self::AngleAxis {
            axis: [axis[0] / n, axis[1] / n, axis[2] / n],
            angle,
        })
    }

    /// Rotation about the z axis.
    pub fn about_z(angle: f64) -> Self {
        Self::AngleAxis {
            axis: [0.0, 0.0, 1.0],
            angle,
        }
    }

    pub fn matrix(&self) -> Mat3 {
        match *self {
            Self::Euler { alpha, beta, gamma } => {
                mat3_mul(&mat3_mul(&rot_z(alpha), &rot_y(beta)), &rot_z(gamma))
            }
            Self::AngleAxis { axis, angle } => {
                let [x, y, z] = axis;
                let (s, c) = (math::sin(angle), math::cos(angle));
                let t = 1.0 - c;
                [
                    [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
                    [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
                    [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
                ]
            }
        }
    }

    /// Euler angles of an arbitrary rotation (z-y-z).
    pub fn to_euler(&self) -> (f64, f64, f64) {
        if let Self::Euler { alpha, beta, gamma } = *self {
            return (alpha, beta, gamma);
        }
        euler_from_matrix(&self.matrix())
    }

    pub fn inverse(&self) -> Rotation {
        match *self {
            Self::Euler { alpha, beta, gamma } => Rotation::euler(-gamma, -beta, -alpha),
            Self::AngleAxis { axis, angle } => Self::AngleAxis { axis, angle: -angle },
        }
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Rotation) -> Rotation {
        let (a, b, g) = euler_from_matrix(&mat3_mul(&self.matrix(), &first.matrix()));
        Rotation::euler(a, b, g)
    }
}

fn rot_z(a: f64) -> Mat3 {
    let (s, c) = (math::sin(a), math::cos(a));
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(b: f64) -> Mat3 {
    let (s, c) = (math::sin(b), math::cos(b));
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub(crate) fn euler_from_matrix(r: &Mat3) -> (f64, f64, f64) {
    let beta = math::acos(r[2][2]);
    let sb = math::hypot(r[0][2], r[1][2]);
    if sb > 1e-12 {
        let alpha = math::atan2(r[1][2], r[0][2]);
        let gamma = math::atan2(r[2][1], -r[2][0]);
        (alpha, beta, gamma)
    } else if r[2][2] > 0.0 {
        (math::atan2(r[1][0], r[0][0]), 0.0, 0.0)
    } else {
        (math::atan2(-r[1][0], -r[0][0]), core::f64::consts::PI, 0.0)
    }
}

/// Rotation taking the lab z axis onto the unit vector `n`.
pub fn lab2rot(n: [f64; 3]) -> Result<Rotation> {
    let len = math::sqrt(n.iter().map(|x| x * x).sum());
    if !(len > 0.0) {
        return Err(invalid("rotor axis must be nonzero"));
    }
    let n = [n[0] / len, n[1] / len, n[2] / len];
    let axis = [-n[1], n[0], 0.0];
    let s = math::hypot(axis[0], axis[1]);
    if s < 1e-15 {
        return Ok(if n[2] > 0.0 {
            Rotation::identity()
        } else {
            Rotation::AngleAxis {
                axis: [1.0, 0.0, 0.0],
                angle: core::f64::consts::PI,
            }
        });
    }
    Rotation::angle_axis(axis, math::acos(n[2]))
}

/// 5x5 rank-2 Wigner matrix, rows and columns indexed `-2..=2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wigner2(pub [[C64; 5]; 5]);

impl Wigner2 {
    pub fn identity() -> Self {
        let mut m = [[C64::new(0.0, 0.0); 5]; 5];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = C64::new(1.0, 0.0);
        }
        Self(m)
    }

    /// Element `D_km` with `k, m` in `-2..=2`.
    pub fn get(&self, k: i32, m: i32) -> C64 {
        self.0[(k + 2) as usize][(m + 2) as usize]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut c = [[C64::new(0.0, 0.0); 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                c[i][j] = (0..5).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Self(c)
    }

    pub fn adjoint(&self) -> Self {
        let mut c = [[C64::new(0.0, 0.0); 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                c[i][j] = self.0[j][i].conj();
            }
        }
        Self(c)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }
}

/// Spherical unit vectors `e_{-1}, e_0, e_{+1}`.
fn spherical_vectors() -> [[C64; 3]; 3] {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    [
        [C64::new(r, 0.0), C64::new(0.0, -r), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(-r, 0.0), C64::new(0.0, -r), C64::new(0.0, 0.0)],
    ]
}

/// Orthonormal spherical rank-2 basis tensors `E_m`, `m = -2..=2`.
pub(crate) fn rank2_basis() -> [[[C64; 3]; 3]; 5] {
    let e = spherical_vectors();
    let outer = |a: &[C64; 3], b: &[C64; 3]| {
        let mut t = [[C64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = a[i] * b[j];
            }
        }
        t
    };
    let comb = |terms: &[(f64, [[C64; 3]; 3])]| {
        let mut t = [[C64::new(0.0, 0.0); 3]; 3];
        for (c, m) in terms {
            for i in 0..3 {
                for j in 0..3 {
                    t[i][j] += m[i][j] * *c;
                }
            }
        }
        t
    };
    let (em, e0, ep) = (&e[0], &e[1], &e[2]);
    let r2 = core::f64::consts::FRAC_1_SQRT_2;
    let r6 = 1.0 / math::sqrt(6.0);
    [
        outer(em, em),
        comb(&[(r2, outer(em, e0)), (r2, outer(e0, em))]),
        comb(&[
            (r6, outer(ep, em)),
            (2.0 * r6, outer(e0, e0)),
            (r6, outer(em, ep)),
        ]),
        comb(&[(r2, outer(ep, e0)), (r2, outer(e0, ep))]),
        outer(ep, ep),
    ]
}

/// Frobenius inner product conjugating the first argument.
pub(crate) fn frob(a: &[[C64; 3]; 3], b: &[[C64; 3]; 3]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j].conj() * b[i][j];
        }
    }
    s
}

/// Rank-2 Wigner matrix of a rotation.
pub fn wigner_d2(rot: &Rotation) -> Wigner2 {
    let r = rot.matrix();
    let basis = rank2_basis();
    let mut d = [[C64::new(0.0, 0.0); 5]; 5];
    for (m, em) in basis.iter().enumerate() {
        // R E_m R^T
        let mut rot_e = [[C64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..3 {
                    for b in 0..3 {
                        acc += em[a][b] * (r[i][a] * r[j][b]);
                    }
                }
                rot_e[i][j] = acc;
            }
        }
        for (k, ek) in basis.iter().enumerate() {
            d[k][m] = frob(ek, &rot_e);
        }
    }
    Wigner2(d)
}

/// Reduced Wigner matrix `d^2_km(beta)` from the closed-form sum.
pub fn small_d2(beta: f64) -> [[f64; 5]; 5] {
    let j = 2i32;
    let (c, s) = (math::cos(beta / 2.0), math::sin(beta / 2.0));
    let f = |n: i32| math::factorial(n as u32);
    let mut d = [[0.0; 5]; 5];
    for k in -j..=j {
        for m in -j..=j {
            let pre = math::sqrt(f(j + k) * f(j - k) * f(j + m) * f(j - m));
            let mut sum = 0.0;
            for t in 0..=2 * j {
                let (a, b, cc, dd) = (j + m - t, t, k - m + t, j - k - t);
                if a < 0 || cc < 0 || dd < 0 {
                    continue;
                }
                let sign = if (k - m + t) % 2 == 0 { 1.0 } else { -1.0 };
                let num = math::pow(c, (2 * j + m - k - 2 * t) as f64)
                    * math::pow(s, (k - m + 2 * t) as f64);
                sum += sign * num / (f(a) * f(b) * f(cc) * f(dd));
            }
            d[(k + 2) as usize][(m + 2) as usize] = pre * sum;
        }
    }
    d
}

/// Closed-form `exp(-i k alpha) d_km(beta) exp(-i m gamma)`.
pub fn wigner_d2_euler(alpha: f64, beta: f64, gamma: f64) -> Wigner2 {
    let d = small_d2(beta);
    let mut out = [[C64::new(0.0, 0.0); 5]; 5];
    for k in -2i32..=2 {
        for m in -2i32..=2 {
            let phase = -(k as f64) * alpha - (m as f64) * gamma;
            out[(k + 2) as usize][(m + 2) as usize] =
                C64::from_polar(d[(k + 2) as usize][(m + 2) as usize], phase);
        }
    }
    Wigner2(out)
}

impl Default for Wigner2 {
    fn default() -> Self {
        Self::identity()
    }
}
