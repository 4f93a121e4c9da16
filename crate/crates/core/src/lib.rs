//! Popular arborescences and popular common bases in the intersection of a
//! partition matroid with an arbitrary matroid, together with the
//! reductions (colorful forests, size windows, categories), dual-certificate
//! verification, brute-force oracles, and instance generators.

pub mod elements;
pub mod error;
pub mod instance;
pub mod intersection;
pub mod matroid;
pub mod oracle;
pub mod reductions;
pub mod solver;

pub use elements::{ElemSet, ElementId};
pub use error::Error;
pub use instance::{
    parse_instance, serialize_instance, Comparison, Cost, CostMap, Instance, InstanceKind,
    Solution,
};
pub use matroid::Matroid;
pub use solver::{solve, DualCertificate, SolveOutcome, SolveTrace};
