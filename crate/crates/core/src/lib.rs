pub mod cycles;
pub mod embed;
pub mod error;
pub mod graph;
pub mod haar;
pub mod lfnorm;
pub mod linalg;
pub mod lp;
pub mod metric;
pub mod numeric;
pub mod projection;
pub mod random;
pub mod report;
pub mod recursive;
pub mod transport;
pub mod witness;

/// Schema tag written into every JSON document.
pub const SCHEMA: &str = "freelip/1";
