//! Library surface of the `cbp` binary: command implementations, run
//! configuration, published-value reproduction and output formatting.
//! The acceptance suite drives these directly.

pub mod commands;
pub mod config;
pub mod fmt;
pub mod out;
pub mod published;

use cbp_core::Error;

/// Process exit code per error class: 2 configuration, 3 data,
/// 4 numerical degeneracy.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) => 2,
        Error::Data(_) | Error::Estimation(_) => 3,
        Error::Degenerate(_) | Error::PosteriorUndefined(_) => 4,
    }
}
