//! Chern–Simons forms, eta invariants and spectral flow for twisted odd
//! signature operators on flat tori.

pub mod error;
pub mod eta;
pub mod flow;
pub mod forms;
pub mod geometry;
pub mod samples;
pub mod scenario;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use forms::{Branch, CMat, SubTorus, TermKey, TrigPolyForm};
pub use geometry::{Connection, GaugeMap, Metric};
