//! Selberg zeta functions and twisted L-functions of Schottky surfaces via
//! transfer operators.
//!
//! * [`geometry`]: Möbius maps, Schottky data, validation and the funnel builder.
//! * [`symbolic`]: reduced words, characters and orbit tables.
//! * [`numerics`]: dense complex linear algebra and FFT Taylor extraction.
//! * [`transfer`]: the twisted transfer operator and its determinant.
//! * [`spectra`]: δ, zero counting and location, cover experiments.
//! * [`expander`]: Cayley-graph spectra and Cheeger constants.

pub mod error;
pub mod expander;
pub mod geometry;
pub mod numerics;
pub mod spectra;
pub mod symbolic;
pub mod transfer;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use expander::{CayleyGraphSpec, CheegerReport};
pub use geometry::{build_funnel_group, validate_schottky, Disk, MoebiusMap, SchottkyGroup, ValidationReport};
pub use numerics::ComplexMatrix;
pub use spectra::{GapReport, Rect, ResonanceSet, ScanSettings, Zero};
pub use symbolic::{Character, OrbitCatalog, Word, WordCache};
pub use transfer::{Discretization, TransferOperator};
