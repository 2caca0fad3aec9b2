//! Numerics for the free Schrödinger equation on a moving interval `[0, ℓ(t)]`.
//!
//! The crate is organised around the fixed-domain transform `y = x/ℓ(t)`:
//!
//! * [`curves`] — wall trajectories ℓ(t) and the structural window checks on them.
//! * [`spectral`] — initial data as finite chirped sine spectra, with L₂/H¹₀ norms.
//! * [`exact`] — the closed-form mode expansion for a linearly moving wall and its traces.
//! * [`pde`] — Crank–Nicolson time stepping of the transformed non-autonomous problem.
//! * [`energy`] — first/second energies and the identities they satisfy.
//! * [`observability`] — admissibility constants, multiplier identity, observation Gramians.
//! * [`control`] — adjoint operator, duality pairing and Gramian steering.
//! * [`verify`] — a self-contained invariant suite used by the command line front end.

pub mod control;
pub mod curves;
pub mod energy;
pub mod error;
pub mod exact;
pub mod io;
pub mod observability;
pub mod pde;
pub mod quadrature;
pub mod spectral;
pub mod stats;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use crate::curves::{BoundaryCurve, CurveKind, CurvePoint, WindowReport};
pub use crate::error::{Error, Result};
pub use crate::exact::ExactSolution;
pub use crate::observability::{GramianMatrix, MultiplierFunction, ObservationKind};
pub use crate::pde::{FixedState, Trajectory};
pub use crate::spectral::SineSpectrum;

/// The imaginary unit.
pub(crate) const I: C64 = C64::new(0.0, 1.0);
