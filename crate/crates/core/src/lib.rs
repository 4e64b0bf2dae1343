pub mod ast;
pub mod error;
pub mod grammar;
pub mod parser;
pub mod serialize;
pub mod diff;
pub mod graph;
pub mod widget;
pub mod mapper;
pub mod log;
pub mod evaluator;
pub mod pipeline;
pub mod spec_io;
pub mod serve;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/queries.md")]
    mod queries {}
    #[doc = include_str!("../../../book/src/diffs.md")]
    mod diffs {}
    #[doc = include_str!("../../../book/src/graph.md")]
    mod graph {}
    #[doc = include_str!("../../../book/src/widgets.md")]
    mod widgets {}
    #[doc = include_str!("../../../book/src/mapping.md")]
    mod mapping {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/spec-format.md")]
    mod spec_format {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
