//! Rank the benchmark agents by CausalRank, average influence and network
//! centrality.

use socialcause::causal::{dose_independent_matrix, CausalModel};
use socialcause::dynamics::LearningParams;
use socialcause::ranking::RankingResult;
use socialcause::scenario::Scenario;

fn main() -> socialcause::Result<()> {
    let sc = Scenario::benchmark();
    let info = sc.world.informativeness();
    let model = CausalModel::new(&sc.combination, &info, LearningParams::nbsl())?;
    let c = dose_independent_matrix(&model)?;
    let r = RankingResult::compute(&c.matrix, Some(&sc.combination))?;
    let centrality = r.centrality.clone().unwrap_or_default();
    println!("agent  causal_rank  air     centrality");
    for (k, c) in centrality.iter().enumerate() {
        println!(
            "{:>5}  {:.4}       {:.4}  {c:.4}",
            k + 1,
            r.causal_rank[k],
            r.air_normalized[k]
        );
    }
    let labels = |o: &[usize]| o.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(" ");
    println!("causal rank order: {}", labels(&r.causal_rank_order));
    println!("air order:         {}", labels(&r.air_order));
    println!(
        "spectral ratio {:.4}, residual {:.1e}",
        r.second_eigenvalue_ratio, r.residual
    );
    Ok(())
}
