//! Phase space of the rigid rotor: kernel, Weyl symbols and Wigner functions.

pub mod grid;
pub mod kernel;
pub mod modes;
pub mod weyl;
pub mod wigner;

pub use grid::{
    negativity_volume, phase_space_expectation, GridKind, GridMeta, GridSpec, Marginals, MomentumWindow,
    Negativity, PhaseSpaceGrid,
};
pub use kernel::{displacement_matrix, kernel, kernel_origin, weyl_symbol, DisplacementSpec};
pub use modes::Execution;
pub use weyl::{inverse_weyl, weyl_ordered_product};
pub use wigner::{symbol_grid, wigner_from_angle_basis, wigner_from_m_basis};
