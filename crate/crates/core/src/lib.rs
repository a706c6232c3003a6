//! Parabolic geometry of type C: root data, graded sp(n), Kostant cohomology,
//! flat models and path-geometry ODEs.

pub mod coeff;
pub mod contact_path;
pub mod field;
pub mod flat_model;
pub mod graded_sp;
pub mod kostant;
pub mod lie_core;
pub mod linalg;
pub mod poly;
pub mod split_quaternion;
