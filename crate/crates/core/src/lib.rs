//! Squeezed-state generation in a transistor-coupled pair of resonators.
//!
//! The circuit model turns small-signal transistor parameters into
//! Hamiltonian coefficients, which drive a truncated Fock-space simulation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod observables;
pub mod oracle;
pub mod response;
pub mod selfcheck;
pub mod sweep;

pub use error::{Error, Result};
