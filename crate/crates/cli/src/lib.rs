//! File formats, reporting and command-line plumbing around
//! [`causalfair_core`].

pub mod adult;
pub mod bundle;
pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod llm;
pub mod pipeline;
pub mod prompt;
pub mod sankey;
pub mod table;

pub use bundle::{Num, ReportBundle};
pub use config::Config;
pub use error::{Error, Result};
pub use prompt::{assemble_prompts, PromptPair};
pub use sankey::{sankey_export, Sankey};
