pub mod adversary;
pub mod bitcommit;
pub mod bits;
pub mod bounds;
pub mod cli;
pub mod linalg;
pub mod protocol;
pub mod qstate;
pub mod report;
pub mod seed;
pub mod spacetime;
pub mod stats;
