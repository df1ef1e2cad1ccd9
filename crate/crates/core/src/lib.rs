//! Meta-regression of wetland ecosystem-service values: record ingestion and
//! screening, quality coding, design encoding, OLS with inference, benefit
//! transfer and report rendering.

pub mod cli;
pub mod design;
pub mod error;
pub mod linalg;
pub mod model;
pub mod ols;
pub mod quality;
pub mod records;
pub mod report;
pub mod screening;
pub mod special;
pub mod transfer;

pub use error::Error;
