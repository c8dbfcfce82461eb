//! Spin operators, Liouville-space superoperators, rank-2 Wigner rotations and
//! the irreducible decomposition of the spin Hamiltonian.
//!
//! All Hamiltonians are in angular frequency units (rad/s). Superoperators act
//! on row-major vectorised density matrices.

mod components;
mod ops;
mod relax;
mod system;
mod wigner;

pub use components::{
    build_components, composite_wigner, hamiltonian_at, rotate_components, IrreducibleComponents,
};
pub use ops::{
    comm_superop, left_superop, right_superop, spin_operators, unvec, vec_op, SpinOps,
};
pub use relax::{relax_kin, RelaxKin, RelaxSpec};
pub use system::{
    constants, rotate_tensor, Coupling, Frame, OpKind, Quadrupolar, Spin, SpinSystem, Zeeman,
};
pub use wigner::{
    lab2rot, mat3_mul, mat3_transpose, small_d2, wigner_d2, wigner_d2_euler, Mat3, Rotation,
    Wigner2, MAGIC_AXIS,
};
