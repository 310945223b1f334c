//! Sessioned JSON API over the seqcompare engine.

pub mod api;
pub mod error;
pub mod session;

pub use api::{router, AppState};
pub use error::ServiceError;
