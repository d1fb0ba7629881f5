//! Numerical checks of the analytic estimates.

pub mod bounds;
pub mod commutator;
pub mod critical;
pub mod dtn;
pub mod inequalities;
pub mod nonrel;
pub mod scaling;

pub use bounds::{algebra_scan, bound_scan, AlgebraScan, BoundScan};
pub use commutator::{commutator_decay, commutator_matrix, operator_norm_h12, CommutatorDecayReport};
pub use critical::{critical_point, critical_scan, CriticalRow, CriticalScanSettings};
pub use dtn::{dtn_check, DtnReport, DtnSettings};
pub use inequalities::{hardy_check, inequality_suite, kato_check, tix_check, InequalityReport, InequalitySettings};
pub use nonrel::{nonrel_limit, NonrelReport, NonrelSettings};
pub use scaling::{scaling_limit, ScalingLimitReport, TestFunction};
