//! Decoding algebraic-geometric codes on smooth plane curves.

pub mod agcode;
pub mod cli;
pub mod config;
pub mod curve;
pub mod decoder;
pub mod funcspace;
pub mod gf;
pub mod keyeq;
pub mod linalg;
pub mod mcd;
pub mod poly;
pub mod repro;
pub mod series;
pub mod sim;
