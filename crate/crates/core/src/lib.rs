pub mod analysis;
pub mod backend;
pub mod circuit;
pub mod harness;
pub mod lattice;
pub mod linalg;
pub mod noise;
