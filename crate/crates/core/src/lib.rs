//! Orientation-state Wigner functions of rigid rotors.
//!
//! The crate covers the rotor Hilbert space (momentum and symmetric-top bases,
//! Wigner D-matrices, dense operators), the phase-space machinery built on the
//! Stratonovich–Weyl kernel (Weyl symbols, Wigner functions in the angle and
//! momentum representations, marginals, inverse map), representative coherent
//! states, and kicked symmetric-top alignment dynamics with classical
//! trajectories.
//!
//! Units are reduced throughout with ħ = 1.

pub mod basis;
pub mod dmatrix;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod ode;
pub mod operator;
pub mod phase_space;
pub mod quadrature;
pub mod special;
pub mod state;
pub mod states;
pub mod verify;

pub use basis::{Axis, BasisTag, EulerAngles, JKMBasisSpec, Jkm, MBasisSpec, MomentumTriple};
pub use error::{Error, Result};
pub use operator::OperatorMatrix;
pub use state::RotorState;
