//! Exact combinatorial engine for an SFT computation on a five-dimensional
//! contact model: index calculus, the SFT differential and torsion solver,
//! holomorphic building enumeration with twin cancellation, string topology
//! on surfaces and branched-cover rigidity arithmetic.

pub mod algebra;
pub mod covers;
pub mod index;
pub mod ratio;
pub mod surface;
pub mod topology;
pub mod building;
pub mod model;
pub mod cli;
