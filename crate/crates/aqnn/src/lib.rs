//! Numerical toolkit for attractor quantum neural networks modeled as CPTP maps.
//!
//! The crate is organized around the Choi representation of quantum channels:
//!
//! * [`linalg`] — dense complex matrices, Hermitian/general eigensolvers,
//!   seeded random ensembles, and state utilities.
//! * [`channel`] — CPTP maps as Choi operators: verification, application,
//!   Kraus extraction, iteration, and fixed-point analysis.
//! * [`attractor`] — channels with prescribed stationary states, coherence
//!   decay, triviality checks, and classical (simultaneously diagonalizable)
//!   ensembles of mixed states.
//! * [`gardner`] — Hilbert–Schmidt sampling of random channels and Monte
//!   Carlo estimation of the relative volume of maps storing a pattern set,
//!   plus the corresponding analytic volume formulas.
//! * [`feedforward`] — two-outcome perceptron channels and composite
//!   classifiers built from attractors on a doubled input space.
//! * [`io`] — JSON/CSV file formats and run manifests used by the CLI.
//!
//! All randomness flows through explicit [`linalg::SeedStream`] values, so
//! every computation is bit-reproducible, including under parallel execution.
//!
//! ```
//! use aqnn::attractor::{build_canonical, CorrelationMatrix};
//! use aqnn::linalg::{DensityMatrix, PureState, SeedStream, Tolerances};
//!
//! let tol = Tolerances::default();
//! // Random valid coefficient matrix; the channel it defines keeps every
//! // computational basis projector fixed and damps all coherences.
//! let mut stream = SeedStream::new(7, 0);
//! let b = CorrelationMatrix::random(3, 3, &mut stream).unwrap();
//! let channel = build_canonical(&b);
//! assert!(channel.verify(&tol).is_cptp());
//!
//! let pattern = DensityMatrix::from_pure(&PureState::basis(3, 1));
//! let image = channel.apply(&pattern, &tol).unwrap();
//! let residual = image.matrix().sub(pattern.matrix()).frobenius_norm();
//! assert!(residual < 1e-12);
//! ```

pub mod attractor;
pub mod channel;
pub mod error;
pub mod feedforward;
pub mod gardner;
pub mod io;
pub mod linalg;

pub use error::Error;
pub use linalg::{
    BipartiteDims, Complex64, ComplexMatrix, DensityMatrix, PureState, SeedStream, Subsystem,
    Tolerances,
};
