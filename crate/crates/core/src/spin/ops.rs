use alloc::vec::Vec;

use crate::error::invalid;
use crate::sparse::{CDense, CSparse, CVector};
use crate::{math, Error, Result, C64};

/// Angular momentum matrices of a single spin in the `|S>, |S-1>, ... |-S>`
/// basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOps {
    pub x: CSparse,
    pub y: CSparse,
    pub z: CSparse,
    pub plus: CSparse,
    pub minus: CSparse,
}

pub fn spin_operators(multiplicity: usize) -> Result<SpinOps> {
    if multiplicity < 2 {
        return Err(invalid("spin multiplicity must be at least 2"));
    }
    let d = multiplicity;
    let s = (d as f64 - 1.0) / 2.0;
    let mut zt = Vec::with_capacity(d);
    let mut pt = Vec::with_capacity(d);
    for i in 0..d {
        let m = s - i as f64;
        zt.push((i, i, C64::new(m, 0.0)));
        if i > 0 {
            // <m+1| S+ |m>
            let c = math::sqrt(s * (s + 1.0) - m * (m + 1.0));
            pt.push((i - 1, i, C64::new(c, 0.0)));
        }
    }
    let z = CSparse::from_triplets(d, d, zt)?;
    let plus = CSparse::from_triplets(d, d, pt)?;
    let minus = plus.adjoint();
    let x = plus.add(&minus)?.scale_real(0.5);
    let y = plus.sub(&minus)?.scale(C64::new(0.0, -0.5));
    Ok(SpinOps {
        x,
        y,
        z,
        plus,
        minus,
    })
}

/// Superoperator of `rho -> A rho`.
pub fn left_superop(a: &CSparse) -> Result<CSparse> {
    let n = a.ensure_square()?;
    CSparse::kron(a, &CSparse::identity(n))
}

/// Superoperator of `rho -> rho A`.
pub fn right_superop(a: &CSparse) -> Result<CSparse> {
    let n = a.ensure_square()?;
    CSparse::kron(&CSparse::identity(n), &a.transpose())
}

/// Commutation superoperator `H (x) 1 - 1 (x) H^T`.
pub fn comm_superop(h: &CSparse) -> Result<CSparse> {
    left_superop(h)?.sub(&right_superop(h)?)
}

/// Row-major vectorisation of an operator.
pub fn vec_op(a: &CSparse) -> Result<CVector> {
    let n = a.ensure_square()?;
    let mut v = alloc::vec![C64::new(0.0, 0.0); n * n];
    for (i, j, x) in a.iter() {
        v[i * n + j] = x;
    }
    CVector::new(v)
}

/// Inverse of [`vec_op`] into a dense matrix.
pub fn unvec(v: &[C64]) -> Result<CDense> {
    let n = math::round(math::sqrt(v.len() as f64)) as usize;
    if n * n != v.len() {
        return Err(Error::DimensionMismatch {
            context: "unvec",
            expected: n * n,
            found: v.len(),
        });
    }
    CDense::from_row_major(n, n, v.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_and_spin_one() {
        let s = spin_operators(2).unwrap();
        assert_eq!(s.z.diagonal(), [C64::new(0.5, 0.0), C64::new(-0.5, 0.0)]);
        let s = spin_operators(3).unwrap();
        let d: Vec<f64> = s.z.diagonal().iter().map(|c| c.re).collect();
        assert_eq!(d, [1.0, 0.0, -1.0]);
    }

    #[test]
    fn multiplicity_one_rejected() {
        assert!(spin_operators(1).is_err());
    }

    #[test]
    fn commutation_relations() {
        for mult in 2..=6 {
            let s = spin_operators(mult).unwrap();
            let xy = s.x.matmul(&s.y).unwrap();
            let yx = s.y.matmul(&s.x).unwrap();
            let c = xy.sub(&yx).unwrap().sub(&s.z.scale(C64::new(0.0, 1.0))).unwrap();
            assert!(c.max_abs() < 1e-14, "mult {mult}");
            let yz = s.y.matmul(&s.z).unwrap().sub(&s.z.matmul(&s.y).unwrap()).unwrap();
            assert!(yz.sub(&s.x.scale(C64::new(0.0, 1.0))).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn raising_operator_is_eigenvector_of_sz_commutator() {
        let s = spin_operators(2).unwrap();
        let c = comm_superop(&s.z).unwrap();
        let v = vec_op(&s.plus).unwrap();
        let cv = c.matvec(&v);
        assert!(v.max_abs_diff(&cv) < 1e-15);
        let id = vec_op(&CSparse::identity(2)).unwrap();
        assert!(c.matvec(&id).iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn vec_round_trip() {
        let s = spin_operators(3).unwrap();
        let v = vec_op(&s.x).unwrap();
        assert_eq!(unvec(&v).unwrap(), s.x.to_dense());
    }
}
