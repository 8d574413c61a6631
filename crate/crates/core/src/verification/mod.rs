//! Manufactured solutions, error norms, convergence rates and stability diagnostics.

pub mod convergence;
pub mod eoc;
pub mod errors;
pub mod infsup;
pub mod invariants;
pub mod manufactured;

pub use eoc::eoc;
pub use errors::{compute_errors, exact_distance, ErrorReport};
pub use infsup::{infsup_constants, infsup_diagnostic, InfSupReport};
pub use invariants::{structural_checks, StructuralReport};
pub use manufactured::{manufactured_eval, ExactFields, ManufacturedCase, Quantity};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceStudy};
