//! Simulation library for spin-state amplification on driven Ising lattices.
//!
//! A single excited "test" spin at the corner of a two-dimensional lattice can
//! be amplified into a macroscopic domain of flipped spins by resonant driving.
//! The collective dynamics reduces to a one-dimensional tight-binding chain over
//! integer partitions; this crate implements that reduction and the tooling
//! around it:
//!
//! - [`partition`] / [`young`]: integer partitions, the Young lattice of
//!   add-a-box moves, exact path-count weights, and the coupled states built
//!   from them.
//! - [`chain`] / [`fit`]: effective one-dimensional chain Hamiltonians for 1D,
//!   2D and 3D geometries, coherent Schrodinger propagation, and power-law
//!   exponent fits of the polarisation growth.
//! - [`dephasing`]: open-system dynamics under collective dephasing - a dense
//!   Lindblad solver and its heavy-dephasing classical (hopping-rate) reduction.
//! - [`lattice`] / [`oracle`]: the microscopic flip rules on the 2D lattice,
//!   breadth-first enumeration of reachable configurations, Lanczos
//!   tridiagonalisation of the rule Hamiltonian, and brute-force validation of
//!   the rotating-wave picture against full spin-register dynamics.
//! - [`thermal`]: finite-temperature Monte Carlo - Gillespie trajectories over
//!   thermally seeded lattices, false-positive and detection sweeps, and the
//!   Boltzmann initialisation model.

pub mod chain;
pub mod dephasing;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod ode;
pub mod oracle;
pub mod partition;
pub mod thermal;
pub mod young;

pub use error::{Error, Result};
