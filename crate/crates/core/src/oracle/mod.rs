//! Ground truth and verification: exact coreness, invariant audits, and
//! history checking.

pub mod audit;
pub mod history;
pub mod linearize;
pub mod peel;
pub mod schedule;

pub use audit::{audit_levels, audit_lds, check_bound, BoundReport, InvariantViolation};
pub use history::{check_history, read_history, write_history, BatchRecord, HistoryError, HistoryViolation, MoverRecord, ReadMode, ReadRecord};
pub use linearize::linearize;
pub use peel::exact_coreness;
