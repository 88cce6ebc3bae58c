//! File formats, a parallel driver and the `tagstack` command line for
//! [`tagstack_core`].

pub mod io;
pub mod manifest;
pub mod report;
pub mod runner;

pub use io::{load_dataset, InputError};
pub use manifest::{FileDigest, RunManifest};
pub use runner::Runner;
