//! Canonical partition functions of interacting bosons and fermions on a
//! periodic box, evaluated as a Fourier series over permutation cycle types
//! and interaction orders.

pub mod cycles;
pub mod error;
pub mod graph;
pub mod ideal;
pub mod numeric;
pub mod oracles;
pub mod potential;
pub mod series;
pub mod shift;
pub mod thermal;

pub use error::{Error, Result};
