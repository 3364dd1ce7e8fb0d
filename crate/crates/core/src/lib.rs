pub mod eval;
pub mod geometry;
pub mod postproc;
pub mod rng;
pub mod raster;
pub mod solver;
