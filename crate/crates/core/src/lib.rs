//! Principal frequency of the p-Laplacian on raster domains, the geometric and
//! capacitary quantities that bound it, and a checker for those bounds.

pub mod bounds;
pub mod capacity;
pub mod cheeger;
pub mod contour;
pub mod edt;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod nodal;
pub mod runner;
pub mod shapes;

pub use error::{Error, Result};
pub use grid::{GridDomain, ScalarField};
pub use shapes::{rasterize_shape, NamedShape, ShapeSpec};
