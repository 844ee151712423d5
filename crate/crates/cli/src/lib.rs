//! Scan, scaling, convergence and diagnostic harness around `floquet-core`.

pub mod app;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod scan;
pub mod study;
pub mod table;

pub use error::{CliError, Result};
pub use scan::{run_scan, ScanPoint, ScanResult, ScanSpec};
pub use table::{Cell, Format, Table};
