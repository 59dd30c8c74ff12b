//! Learning under distribution shift: Forster transforms, a margin learner,
//! a membership-query PQ learner for halfspaces, weak distinguishers and the
//! boosting construction that turns a TDS learner into a selective classifier.

pub mod domain;
pub mod estimate;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod forster;
pub mod margin;
pub mod pq_halfspace;
pub mod weak_distinguisher;
pub mod toy;
pub mod tds_boost;
