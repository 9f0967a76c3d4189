#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod checkpoint;
pub mod diagnostics;
pub mod exec;
pub mod integrator;
pub mod limits;
pub mod linalg;
pub mod model;
pub mod spectral;
