//! Subsystem energies of small hydrogenic systems from region-partitioned
//! Hamiltonians: Gaussian integrals, real-space partitions, few-electron
//! wavefunctions, site-energy dynamics and ensemble dephasing.

pub mod basis;
pub mod boys;
pub mod coupling;
pub mod decoherence;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod halfspace;
pub mod integrals;
pub mod manybody;
pub mod partition;
pub mod partitioned;
pub mod pipeline;
pub mod quadrature;
pub mod scenario;
pub mod subsystem;
