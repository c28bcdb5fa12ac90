//! One module per experiment family; each runner takes resolved parameters
//! plus a [`crate::output::RunContext`] and emits its artifacts there.

pub mod annulus;
pub mod blprofile;
pub mod channel;
pub mod heat;
pub mod reporting;
