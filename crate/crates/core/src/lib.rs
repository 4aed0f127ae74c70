pub mod error;
pub mod field;
pub mod frame;
pub mod fuzz;
pub mod json;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod roots;
pub mod surfaces;
pub mod verify;
pub mod sparse;

pub use error::{Error, Result};
pub use field::{CalibrationField, FieldDiagnostics};
pub use frame::TangentFrame;
pub use linalg::{point, Point};
pub use mesh::TriMesh;
