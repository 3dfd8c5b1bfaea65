//! Contrast loss of a massive object split into a spatial superposition.
//!
//! Two channels are modelled. Internal phonons are excited whenever the
//! splitting force is not perfectly homogeneous across the atoms of the
//! object; each excited normal mode leaves the two interferometer arms in
//! displaced thermal states whose overlap shrinks the fringe contrast.
//! Blackbody photons absorbed and emitted by the object diffuse its
//! momentum and wash out the fringes over the time the arms are separated.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectrum`]: elastic eigenmodes of a free sphere.
//! * [`pulses`]: the three splitting-force protocols in time and frequency.
//! * [`response`]: driven-oscillator kinematics and per-mode overlaps.
//! * [`contrast`]: mode sums, closed-form estimates and regime selection.
//! * [`bbr`]: blackbody momentum diffusion.
//! * [`lattice`]: a small explicit harmonic lattice used as a brute-force oracle.
//! * [`sweep`]: configuration, 1/e contour tracing and dataset emission.

pub mod bbr;
pub mod config;
pub mod constants;
pub mod contrast;
pub mod error;
pub mod lattice;
pub mod material;
pub mod pulses;
pub mod quad;
pub mod response;
pub mod spectrum;
pub mod sweep;

pub use bbr::{BbrModel, BbrParams};
pub use contrast::{ContrastModel, ContrastReport, ExperimentConfig, Regime};
pub use error::{Error, Result};
pub use lattice::{Lattice, NormalModes};
pub use material::Material;
pub use pulses::{Protocol, PulseProtocol};
pub use response::{PhaseSpacePoint, ThermalVariances};
pub use spectrum::{DimensionlessSpectrum, Family, Mode, ModeSpectrum};
pub use sweep::{Channel, ContourPoint, SweepDataset, SweepSpec};
