//! Stationary determinantal processes `P^f` on `Z^d` given by a symbol
//! `f: T^d -> [0,1]`.
//!
//! The crate is organised bottom-up: [`symbol`] parses and evaluates symbols,
//! [`spectral`] turns them into Fourier data, [`kernel`] computes cylinder
//! probabilities from that data, and [`sampling`], [`entropy`], [`phase`] and
//! [`ust`] build on top.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod phase;
pub mod sampling;
pub mod spectral;
pub mod symbol;
pub mod ust;

pub use error::{Error, Result};
