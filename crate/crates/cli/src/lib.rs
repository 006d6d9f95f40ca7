//! Command implementations behind the `zipfkit` binary.

pub mod args;
mod commands;
mod input;
mod output;
mod repro;

pub use args::Cli;
pub use commands::run;
pub use input::{load_input, pool, LoadedInput};
pub use output::{InputDigest, Provenance};

use zipfkit::ErrorFamily;

/// Process exit code for an error family. Usage errors exit with 2 from
/// argument parsing.
pub fn exit_code(err: &zipfkit::Error) -> i32 {
    match err.family() {
        ErrorFamily::Io => 3,
        ErrorFamily::Validation => 4,
        ErrorFamily::Statistics => 5,
    }
}
