//! Navier-slip Poiseuille flow on smooth pipe cross-sections.
//!
//! The crate builds boundary-fitted P1 discretisations of star-shaped
//! sections, solves the unit-flux Robin problem for the axial profile and
//! checks the quantitative estimates around it: the friction-uniform
//! gradient bound, the expansion in powers of the friction ratio, the
//! no-slip limit, the disk critical flux and the growth dichotomy used to
//! close uniqueness arguments.

pub mod error;
pub mod fem;
pub mod field;
pub mod fmt;
pub mod geometry;
pub mod growth;
pub mod mesh;
pub mod poiseuille;
pub mod saddle;
pub mod sparse;

pub use error::{FemError, GeometryError, GrowthError, MeshError, PoiseuilleError};
pub use field::ScalarField;
pub use geometry::{CrossSection, Harmonic, SectionKind};
pub use mesh::TriMesh;
pub use saddle::{SolverMethod, SolverOptions};
