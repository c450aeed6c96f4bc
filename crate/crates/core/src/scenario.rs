//! Ready-made networks and worlds used by the examples, figures and tests.

use crate::error::Result;
use crate::network::{Adjacency, CombinationMatrix, CombinationRule};
use crate::world::WorldModel;

/// Edge list of the 11-agent benchmark network.
pub const BENCHMARK_EDGES: &str = include_str!("../data/benchmark11.edges");

/// Alternative-hypothesis means of the benchmark world; the true state has
/// mean 0 and all observations have unit variance.
pub const BENCHMARK_MEANS: [f64; 11] = [0.8, 0.6, 0.2, 0.6, 0.0, 0.0, 0.4, 0.4, 0.2, 0.6, 0.8];

/// A network with its combination matrix and an observation model.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub adjacency: Adjacency,
    pub combination: CombinationMatrix,
    pub world: WorldModel,
}

impl Scenario {
    pub fn new(adjacency: Adjacency, rule: CombinationRule, world: WorldModel) -> Result<Self> {
        let combination = CombinationMatrix::from_rule(&adjacency, rule)?;
        Ok(Scenario {
            adjacency,
            combination,
            world,
        })
    }

    /// The 11-agent benchmark: averaging rule, binary hypotheses, truth first.
    pub fn benchmark() -> Self {
        let adjacency = Adjacency::read_edge_list(BENCHMARK_EDGES.as_bytes()).expect("embedded edge list is valid");
        let world = WorldModel::binary(&BENCHMARK_MEANS).expect("embedded means are valid");
        Self::new(adjacency, CombinationRule::Averaging, world).expect("benchmark network is strongly connected")
    }

    pub fn agents(&self) -> usize {
        self.world.agents()
    }
}
