//! File formats, command-line frontend and oracle suites for `mwaring-core`.

pub mod cli;
pub mod format;
pub mod selftest;
