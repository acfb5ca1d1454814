//! One-dimensional strong-field quantum dynamics in the laboratory and
//! Kramers-Henneberger (KH) frames.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only computation:
//! grids and spectral transforms, the model binding potential and its KH
//! time average, the pulsed field, bound-state solvers, split-operator
//! propagation, the lab/KH frame transformation, scalar observables, and
//! Wigner quasiprobability distributions with classical phase portraits.
//! File formats, configuration and the command line live in the `khps` crate.
//!
//! All quantities are in atomic units.

#![no_std]
// Builds that link std (tests, dev-dependencies that enable `num-traits/std`)
// resolve float methods inherently, leaving the `num_traits::Float` imports unused.
#![allow(unused_imports)]
// `!(x > 0.0)` is the NaN-rejecting parameter check used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod fft;
pub mod frame;
pub mod grid;
pub mod laser;
pub mod observables;
pub mod phasespace;
pub mod potential;
pub mod propagator;
pub mod tridiag;
pub mod wavefunction;

pub use error::{Error, Result};
pub use grid::{SpatialGrid, TimeGrid};
pub use wavefunction::{Frame, Spectral, WaveFunction};

/// Complex scalar used for all amplitudes.
pub type Complex = num_complex::Complex64;
