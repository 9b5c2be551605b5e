//! Near-field hybrid-NOMA simulator and solver library.
//!
//! A base station with an `N`-element uniform linear array serves `M` legacy
//! users that sit close to the array through preconfigured near-field beams.
//! An additional far user is served opportunistically: it superimposes its
//! signal on the legacy beams during the `M` legacy slots and, if needed,
//! transmits in a dedicated final slot. This crate models the spherical
//! wavefront channels, builds the legacy beams, evaluates every rate
//! expression and computes minimum-energy power allocations for the far user
//! under both SIC decoding approaches.
//!
//! Module map:
//! - [`geometry`]: array layout, steering vectors, path loss, resolution maps.
//! - [`beamforming`]: zero-forcing / beamfocusing beams and the scalar
//!   [`EffectiveParams`] consumed by every optimization problem.
//! - [`rates`]: exact and orthogonality-simplified achievable rates.
//! - [`allocator`]: numerical solvers, closed forms, OMA baseline, beam
//!   selection and a brute-force oracle.
//! - [`scenarios`]: deterministic and randomized experiment setups, sweeps,
//!   configuration files and the table reproduction harness.
//! - [`csv`]: the fixed CSV formats shared with the command-line tool.

pub mod allocator;
pub mod beamforming;
pub mod csv;
mod error;
pub mod geometry;
pub mod rates;
pub mod scenarios;
pub mod units;

pub use allocator::{AllocationProblem, AllocationResult, Approach, Mode, PowerProfile, ThresholdRule};
pub use beamforming::{BeamKind, BeamSet, ChannelSet, EffectiveParams, FarSnrForm, InterferenceModel, LinkBudget};
pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, ChannelVector, PolarGrid, PolarPoint, ResolutionMap};
pub use nalgebra::Complex;
pub use rates::{RateForm, RateReport};

/// Complex baseband sample type used throughout.
pub type C64 = Complex<f64>;
