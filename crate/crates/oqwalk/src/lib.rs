//! # oqwalk
//!
//! Discrete-time open-quantum-walk simulation of reaction kinetics on small
//! node graphs.
//!
//! A reaction network is modelled as a graph whose nodes carry a quantum
//! state `|psi_k>`. Each kind of edge becomes a completely positive
//! trace-preserving (CPTP) map acting on the system density matrix over one
//! time step `dt`:
//!
//! * *damping* edges move population irreversibly from a source node to a
//!   target node (amplitude damping),
//! * *dephasing* edges decay the coherences attached to a node while leaving
//!   all populations untouched,
//! * *coherent* edges evolve a two-node subspace unitarily under a detuned
//!   Rabi Hamiltonian.
//!
//! Composing the per-edge maps yields one evolution superoperator per step;
//! iterating it propagates the density matrix. On top of that the crate
//! computes first-hitting statistics for an absorbing node: the full hitting
//! distribution by repeated null measurement, the exact mean hitting time by
//! a resolvent formula, threshold-crossing times, classical (fully dephased)
//! reference dynamics, and parameter sweeps.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] — dense complex matrices, vectorisation, superoperators;
//! * [`channels`] — Kraus representations of the three edge channels;
//! * [`reaction`] — reaction graphs and their compiled one-step maps;
//! * [`config`] — the text format for describing graphs and sweeps;
//! * [`dynamics`] — trajectory propagation, threshold crossing, classical
//!   reference evolution and Monte Carlo sampling;
//! * [`hitting`] — hitting distributions, exact means, generating function;
//! * [`scenarios`] — named parameter-sweep presets and the sweep driver.

pub mod channels;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hitting;
pub mod linalg;
pub mod reaction;
pub mod scenarios;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
