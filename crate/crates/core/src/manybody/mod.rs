//! Orbitals, determinant spaces, Slater–Condon assembly and CI states.

mod orbitals;
mod slater_condon;
mod space;
mod state;

pub use orbitals::{eigensolve, lowdin, rhf, MoKind, MoSet, ScfOptions};
pub use slater_condon::{determinant_matrix, hamiltonian, matrix_element, operator_matrix, Kernel};
pub use space::{build_space, spin_orbital, spin_squared, spin_squared_determinants, Determinant, DeterminantSpace, Scheme};
pub use state::{project_product_state, singlet_eigenpairs, CiState, Eigenpairs, Projection, SpinCoupling};
