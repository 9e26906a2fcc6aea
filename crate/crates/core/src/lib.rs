//! Fit a triangle with prescribed interior angles onto three concurrent
//! lines in 3-space, and the equivalent problem of a great circle cutting
//! three given great circles at prescribed arc spacings.

pub mod cli;
pub mod geom;
pub mod json;
pub mod roots;
pub mod solver;
pub mod spherical;
pub mod sullivan;
pub mod sweep;
pub mod tol;

pub use geom::{LineConfig, LineThroughOrigin, LineTriple, TriangleShape, Vec3};
