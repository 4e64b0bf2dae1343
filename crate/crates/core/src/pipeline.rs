//! Log → graph → interface in one call.

use std::time::{Duration, Instant};

use crate::ast::AstNode;
use crate::error::GraphError;
use crate::grammar::GrammarAnnotations;
use crate::graph::{BuildOptions, InteractionGraph};
use crate::mapper::{InterfaceModel, Mapper};
use crate::widget::WidgetLibrary;

#[derive(Debug, Clone, Default)]
pub struct Miner {
    pub build: BuildOptions,
    pub library: WidgetLibrary,
    pub grammar: GrammarAnnotations,
}

/// Wall-clock split of one mining run.
#[derive(Debug, Clone, Copy, Default)]
pub struct MineTimings {
    pub graph: Duration,
    pub map: Duration,
}

impl Miner {
    pub fn mine(&self, log: &[AstNode]) -> Result<InterfaceModel, GraphError> {
        self.mine_timed(log).map(|(m, _)| m)
    }

    pub fn mine_timed(&self, log: &[AstNode]) -> Result<(InterfaceModel, MineTimings), GraphError> {
        let t0 = Instant::now();
        let graph = InteractionGraph::build(log, self.build, &self.grammar)?;
        let t1 = Instant::now();
        let (model, _) = Mapper::new(&graph, &self.library, &self.grammar).run();
        Ok((model, MineTimings { graph: t1 - t0, map: t1.elapsed() }))
    }
}
