//! Command implementations behind the `convexreg` binary, exposed as a
//! library so integration tests can drive them directly.

pub mod commands;
pub mod csv_io;
pub mod error;
pub mod manifest;

pub use error::CliError;

/// Cap the global thread pool from `CONVEXREG_THREADS`, when set.
pub fn configure_threads() {
    if let Ok(value) = std::env::var("CONVEXREG_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .ok();
            }
        }
    }
}
