//! File formats, reports and the command-line driver for [`martineq_core`].
//!
//! - [`formats`]: JSON tree, integrand and search-config files.
//! - [`run`]: the subcommands as data ([`run::Command`]) and their execution,
//!   including multi-threaded Monte Carlo sampling.
//! - [`report`]: run manifests, structured reports and the CSV table.

pub mod error;
pub mod formats;
pub mod report;
pub mod run;

pub use error::{Error, Result};
pub use report::{Report, Status};
pub use run::{execute, replay, Command, RunOptions};
