//! File formats and the command-line front end for the near-lossless codec in
//! [`nlc_core`].

pub mod cli;
pub mod lsdw;
pub mod pgm;

pub use lsdw::{load_weights, save_weights, LsdwError};
pub use pgm::{read_pgm, write_pgm, PgmError};
