//! Model language, file formats, parallel ensembles and the command-line
//! driver for `rulealg-core`.

pub mod check;
pub mod cli;
pub mod dsl;
pub mod ensemble;
pub mod io;
