//! Quantum Fisher information and measurement precision for magnetometry
//! with atoms coupled dispersively to a cavity mode (Tavis-Cummings model).
//!
//! Layers, bottom up:
//! - [`hilbert`]: truncated Fock and Dicke spaces, dense operators, eigh.
//! - [`states`]: displaced squeezed thermal light and collective spin states.
//! - [`model`]: full and effective Hamiltonians, the sensing generator.
//! - [`qfi`]: spectral and closed-form quantum Fisher information.
//! - [`measurement`]: error-propagation precision of a spin quadrature.

pub mod error;
pub mod hilbert;
pub mod measurement;
pub mod model;
pub mod numerics;
pub mod qfi;
pub mod states;

pub use error::{Error, Result};
pub use hilbert::{c64, DickeSpace, FockSpace, OperatorMatrix, Space};
pub use measurement::{MeasurementSpec, PrecisionMethod, PrecisionReport};
pub use model::{ModelKind, SystemParams};
pub use qfi::{QfiMethod, QfiReport};
pub use states::{GaussianSpec, MixedStateEigen, SpinStateSpec};
