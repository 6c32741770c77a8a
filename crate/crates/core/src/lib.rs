//! Process-theory engine for compositional resource theories of coherence.
//!
//! The crate models finite-dimensional quantum theory as a process theory —
//! systems, CPTNI maps held as Choi matrices, sequential and parallel
//! wiring, discarding — and builds on it:
//!
//! * decoherence processes and mechanisms, with family-level composition
//!   rules and executable closure checks ([`decoherence`]);
//! * membership oracles for the free sets MIO, DIO, cDIO, TIO, cTIO and
//!   mechanism-invariant processes ([`free_sets`]);
//! * resource convertibility for states, effects, measurements and
//!   processes via an alternating-projection feasibility solver, preorder
//!   construction and monotone evaluation ([`convert`]);
//! * idempotent-labeled theories: the Karoubi envelope and the
//!   decoherence-labeled theory with its commuting subtheory ([`envelope`]).
//!
//! All numerics are generic over the real scalar through [`scalar::Scalar`];
//! the aliases below pin `f64` for ordinary use.

pub mod choi;
pub mod convert;
pub mod decoherence;
pub mod envelope;
pub mod error;
pub mod free_sets;
pub mod linalg;
pub mod process;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{approx_eq, is_psd, psd_project, tensor_product, ComplexMatrix, Tolerance};
pub use process::{EffectOp, QuantumProcess, State};
pub use scalar::Scalar;
pub use system::{AtomicSystem, SystemLabel};

/// Dense complex matrix over `f64`.
pub type Matrix = ComplexMatrix<f64>;
/// Default-precision tolerance bundle.
pub type Tol = Tolerance<f64>;
/// Default-precision process.
pub type Process = QuantumProcess<f64>;
/// Default-precision state.
pub type DensityState = State<f64>;
/// Default-precision effect.
pub type Effect = EffectOp<f64>;
