//! Reference computations the series is checked against.

pub mod discrete;
pub mod exact_diag;
pub mod ideal_gas;
pub mod matrix_a;

pub use discrete::{discrete_g2, e_hat_m, trotter_q2, DiscretePolicy, EHatMode, TwoBodyPartition};
pub use exact_diag::{exact_q2, ExactDiagResult};
pub use ideal_gas::ideal_gas_q;
pub use matrix_a::{matrix_a_check, MatrixAReport};
