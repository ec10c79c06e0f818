pub mod adapt;
pub mod cases;
pub mod dfn;
pub mod estimator;
pub mod field;
pub mod geometry;
pub mod mesh;
pub mod problem;
pub mod refine;
pub mod report;
pub mod vem;
