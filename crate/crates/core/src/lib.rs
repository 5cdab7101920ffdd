pub mod config;
pub mod corpus;
pub mod duality;
pub mod dyadic;
pub mod error;
pub mod json;
pub mod matrix;
pub mod norms;
pub mod rng;
pub mod square;
pub mod verify;
pub mod wavelet;
