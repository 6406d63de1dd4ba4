//! Geodesic and horocycle flow machinery on Z^d Abelian covers of a compact
//! genus-2 hyperbolic surface: renormalization, winding cycles, twisted
//! transfer operators, and the covariance/spectral experiments built on them.

pub mod complex;
pub mod cover;
pub mod ergodic;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod jacobi;
pub mod par;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use complex::C64;
pub use cover::{deck_character, xi_cocycle, CoverLattice, CoverPoint, Twist, Winding};
pub use error::{Error, Result};
pub use fourier::{Bump, CoverObservable};
pub use geometry::{geodesic_step, horocycle_step, FuchsianGroup, Isometry, Letter};
pub use jacobi::CurvatureModel;
pub use spectral::CovarianceMatrix;
