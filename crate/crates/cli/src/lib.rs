//! Command-line companion to the recursive marginal quantization library:
//! tree serialization, run configuration, parallel Monte Carlo, benchmark
//! tables, and CSV emission.
//!
//! The `rmq` binary wires these modules to subcommands; everything here is
//! also usable as a library, and the integration tests drive it directly.

pub mod config;
pub mod csvio;
pub mod document;
pub mod parallel;
pub mod runs;
