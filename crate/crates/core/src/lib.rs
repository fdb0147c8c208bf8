pub mod lattice;
pub mod mc;
pub mod billiard;
pub mod spectral;
pub mod stats;
pub mod toy;
