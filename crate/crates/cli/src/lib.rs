//! Subcommand implementations for the `owse` binary and the fixture web
//! server used by the end-to-end tests.

pub mod commands;
pub mod fixture;

pub use commands::{cmd_crawl, cmd_index, cmd_query, cmd_stats, CliError, CrawlArgs, Stats};
pub use fixture::{FixtureServer, RequestLine};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
