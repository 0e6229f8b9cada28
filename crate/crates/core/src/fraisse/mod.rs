//! Finite approximations of the Fraïssé limit, quantifier-free types and
//! realisation of types with independence constraints.

mod audit;
mod tower;
mod types;

pub use audit::{homogeneity_audit, Direction, ExtensionFailure, HomogeneityReport};
pub use tower::{ApproximationTower, SaturationBudget, SaturationStatus, Side};
pub use types::{one_point_extensions, tp, Colored, Slot, TypeDescriptor};
