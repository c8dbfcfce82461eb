//! Isotropic plus rank-2 irreducible decomposition of the spin Hamiltonian.
//!
//! Every interaction is written as `sum_ab A_ab X_ab` with a real 3x3 tensor
//! `A` in the molecular frame and Hilbert-space operators `X_ab`. Rotating
//! the molecule by `R` replaces `A` with `R A R^T`. Expanding the traceless
//! symmetric part of `A` over the spherical rank-2 basis `E_m` gives
//! `R A R^T = sum_km D_km(R) c_m E_k`, hence the components
//! `Q_km = c_m sum_ab (E_k)_ab X_ab` with `c_m = <E_m, A>`. The rank-1
//! (antisymmetric) part is dropped.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::ops::comm_superop;
use super::system::{OpKind, SpinSystem};
use super::wigner::{mat3_mul, mat3_transpose, rank2_basis, wigner_d2, Mat3, Rotation, Wigner2};
use crate::sparse::CSparse;
use crate::{Error, Result, C64};

/// `h0 + sum_km D_km q[k][m]` decomposition of a spin Hamiltonian
/// commutation superoperator, indices `k, m = -2..=2` stored at `+2`.
#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibleComponents {
    pub h0: CSparse,
    pub q: [[CSparse; 5]; 5],
}

impl IrreducibleComponents {
    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn q(&self, k: i32, m: i32) -> &CSparse {
        &self.q[(k + 2) as usize][(m + 2) as usize]
    }

    pub fn is_isotropic(&self) -> bool {
        self.q.iter().flatten().all(|c| c.nnz() == 0)
    }

    fn check(&self) -> Result<()> {
        let n = self.h0.ensure_square()?;
        for c in self.q.iter().flatten() {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "irreducible components",
                    expected: n,
                    found: c.nrows(),
                });
            }
        }
        Ok(())
    }

    /// Superoperator for a precomputed composite Wigner matrix.
    pub fn at(&self, d: &Wigner2) -> Result<CSparse> {
        self.check()?;
        let n = self.dim();
        let mut trips: Vec<(usize, usize, C64)> = self.h0.iter().collect();
        for k in 0..5 {
            for m in 0..5 {
                let c = d.0[k][m];
                if c.norm() == 0.0 {
                    continue;
                }
                trips.extend(self.q[k][m].iter().map(|(i, j, v)| (i, j, v * c)));
            }
        }
        CSparse::from_triplets(n, n, trips).map(|h| h.pruned(0.0))
    }
}

/// One Cartesian interaction: tensor (rad/s) and its operator matrix.
struct Term {
    tensor: Mat3,
    ops: [[Option<CSparse>; 3]; 3],
}

const KINDS: [OpKind; 3] = [OpKind::X, OpKind::Y, OpKind::Z];

/// Cartesian terms and the isotropic-only Hilbert operator.
fn cartesian(sys: &SpinSystem) -> Result<(Vec<Term>, CSparse)> {
    sys.validate()?;
    let n = sys.hilbert_dim();
    let mut iso = CSparse::zeros(n, n);
    let mut terms = Vec::new();
    let ops: Vec<[CSparse; 3]> = (0..sys.spins.len())
        .map(|k| Ok([sys.op(k, KINDS[0])?, sys.op(k, KINDS[1])?, sys.op(k, KINDS[2])?]))
        .collect::<Result<_>>()?;

    for (k, s) in ops.iter().enumerate() {
        let (bare, tensor, pref) = sys.zeeman_parts(k);
        let carrier = pref * bare - sys.reference_frequency(k);
        if carrier != 0.0 {
            iso = iso.add(&s[2].scale_real(carrier))?;
        }
        let tensor = tensor.map(|row| row.map(|x| x * pref));
        let mut x: [[Option<CSparse>; 3]; 3] = Default::default();
        for a in 0..3 {
            x[a][2] = Some(s[a].clone());
        }
        terms.push(Term { tensor, ops: x });
    }
    for c in &sys.couplings {
        let (si, sj) = (&ops[c.i], &ops[c.j]);
        let mut x: [[Option<CSparse>; 3]; 3] = Default::default();
        for a in 0..3 {
            for b in 0..3 {
                x[a][b] = Some(si[a].matmul(&sj[b])?);
            }
        }
        if c.j_hz != 0.0 {
            for a in 0..3 {
                iso = iso.add(&x[a][a].as_ref().unwrap().scale_real(2.0 * PI * c.j_hz))?;
            }
        }
        terms.push(Term {
            tensor: c.tensor,
            ops: x,
        });
    }
    for (k, q) in sys.quadrupolar.iter().enumerate() {
        if let Some(q) = q {
            let s = &ops[k];
            let mut x: [[Option<CSparse>; 3]; 3] = Default::default();
            for a in 0..3 {
                for b in 0..3 {
                    x[a][b] = Some(s[a].matmul(&s[b])?);
                }
            }
            terms.push(Term {
                tensor: q.tensor(sys.spins[k].multiplicity),
                ops: x,
            });
        }
    }
    Ok((terms, iso))
}

fn symmetrise(a: &Mat3) -> Mat3 {
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = 0.5 * (a[i][j] + a[j][i]);
        }
    }
    s
}

fn contract(tensor: &[[C64; 3]; 3], ops: &[[Option<CSparse>; 3]; 3], n: usize) -> Result<CSparse> {
    let mut trips = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let c = tensor[a][b];
            if c.norm() == 0.0 {
                continue;
            }
            if let Some(x) = &ops[a][b] {
                trips.extend(x.iter().map(|(i, j, v)| (i, j, v * c)));
            }
        }
    }
    CSparse::from_triplets(n, n, trips)
}

fn real_tensor(a: &Mat3) -> [[C64; 3]; 3] {
    a.map(|row| row.map(|x| C64::new(x, 0.0)))
}

/// Decomposes the system Hamiltonian into `h0` and the 25 rank-2 components.
pub fn build_components(sys: &SpinSystem) -> Result<IrreducibleComponents> {
    let (terms, mut iso) = cartesian(sys)?;
    let n = sys.hilbert_dim();
    let basis = rank2_basis();
    let mut q: [[CSparse; 5]; 5] = core::array::from_fn(|_| core::array::from_fn(|_| CSparse::zeros(n, n)));
    for t in &terms {
        let a = symmetrise(&t.tensor);
        let tr = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        if tr != 0.0 {
            let mut id = [[0.0; 3]; 3];
            for (i, row) in id.iter_mut().enumerate() {
                row[i] = tr;
            }
            iso = iso.add(&contract(&real_tensor(&id), &t.ops, n)?)?;
        }
        let mut aniso = a;
        for (i, row) in aniso.iter_mut().enumerate() {
            row[i] -= tr;
        }
        let a_c = real_tensor(&aniso);
        let coeffs: Vec<C64> = basis.iter().map(|e| super::wigner::frob(e, &a_c)).collect();
        if coeffs.iter().all(|c| c.norm() < 1e-300) {
            continue;
        }
        let y: Vec<CSparse> = basis
            .iter()
            .map(|e| contract(e, &t.ops, n))
            .collect::<Result<_>>()?;
        for k in 0..5 {
            for m in 0..5 {
                if coeffs[m].norm() == 0.0 {
                    continue;
                }
                q[k][m] = q[k][m].add_scaled(&y[k], coeffs[m])?;
            }
        }
    }
    let h0 = comm_superop(&sys.secular_truncate(&iso)?)?;
    let mut qs: [[CSparse; 5]; 5] = core::array::from_fn(|_| core::array::from_fn(|_| CSparse::zeros(0, 0)));
    for k in 0..5 {
        for m in 0..5 {
            let t = sys.secular_truncate(&q[k][m])?.pruned(0.0);
            qs[k][m] = comm_superop(&t)?;
        }
    }
    Ok(IrreducibleComponents { h0, q: qs })
}

/// Composite Wigner matrix of rotations listed in application order.
pub fn composite_wigner(rots: &[Rotation]) -> Wigner2 {
    rots.iter()
        .fold(Wigner2::identity(), |acc, r| wigner_d2(r).mul(&acc))
}

/// Superoperator at the orientation reached by applying `rots` in order
/// (first element first, e.g. crystal, rotor, lab).
pub fn rotate_components(ic: &IrreducibleComponents, rots: &[Rotation]) -> Result<CSparse> {
    if rots.is_empty() {
        return Err(crate::error::invalid("rotation list must not be empty"));
    }
    ic.at(&composite_wigner(rots))
}

/// Independent construction: rotates every Cartesian tensor with the
/// composite 3x3 matrix and contracts it directly.
pub fn hamiltonian_at(sys: &SpinSystem, rots: &[Rotation]) -> Result<CSparse> {
    let (terms, iso) = cartesian(sys)?;
    let n = sys.hilbert_dim();
    let r = rots.iter().fold([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], |acc, rot| {
        mat3_mul(&rot.matrix(), &acc)
    });
    let mut h = iso;
    for t in &terms {
        let a = mat3_mul(&mat3_mul(&r, &symmetrise(&t.tensor)), &mat3_transpose(&r));
        h = h.add(&contract(&real_tensor(&a), &t.ops, n)?)?;
    }
    comm_superop(&sys.secular_truncate(&h)?)
}
