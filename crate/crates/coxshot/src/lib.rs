//! IO, configuration, statistical campaigns and the command-line front end
//! for `coxshot-core`.

pub mod config;
pub mod figure1;
pub mod io;
pub mod stat_verify;
pub mod stats;
