//! Closure membership, expressiveness, recall, schema precision and the
//! synthetic OLAP workload.

pub mod closure;
pub mod olap;
pub mod schema;

pub use closure::{enumerate_closure, expressiveness, in_closure, Closure, EnumOptions};
pub use olap::{gen_olap_log, gen_olap_walk, Step};
pub use schema::{filtered_precision, schema_filter, Precision, SchemaMap};
pub mod recall;
pub use recall::{evaluate, recall, recall_curve, EvalConfig, EvalReport, Split};
