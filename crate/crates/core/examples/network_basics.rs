//! Build a combination matrix from an edge list and inspect it.

use socialcause::network::{Adjacency, CombinationMatrix, CombinationRule};
use socialcause::scenario::Scenario;

fn main() -> socialcause::Result<()> {
    let edges = "# three agents in a directed cycle\n1,1\n2,2\n3,3\n1,2\n2,3\n3,1\n";
    let adj = Adjacency::read_edge_list(edges.as_bytes())?;
    for rule in [CombinationRule::Averaging, CombinationRule::Metropolis] {
        let a = CombinationMatrix::from_rule(&adj, rule)?;
        println!("{rule:?}:{}", a.matrix());
        println!("centrality: {:?}", a.perron_vector()?.as_slice());
    }

    let bench = Scenario::benchmark();
    let v = bench.combination.perron_vector()?;
    println!("benchmark centrality:");
    for (k, x) in v.iter().enumerate() {
        println!("  agent {:>2}: {x:.4}", k + 1);
    }
    let d = bench.combination.effective_decomposition(0)?;
    println!("residual block radius when agent 1 is fixed: {:.4}", d.radius);
    Ok(())
}
