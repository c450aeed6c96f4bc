//! Fix one agent's belief and measure how every other agent responds, both
//! from the steady-state solution and from simulation.

use socialcause::causal::{post_intervention_log_ratios, CausalModel};
use socialcause::dynamics::{Intervention, LearningParams, Simulation};
use socialcause::experiment::montecarlo::summarize;
use socialcause::scenario::Scenario;
use socialcause::world::ObservationSource;

fn main() -> socialcause::Result<()> {
    let sc = Scenario::benchmark();
    let info = sc.world.informativeness();
    let params = LearningParams::asl(0.1, 1.0)?;
    let dose = Intervention::new(10, vec![0.2, 0.8])?;

    let model = CausalModel::new(&sc.combination, &info, params)?;
    let effects = model.effects(&dose)?;
    let expected = post_intervention_log_ratios(&sc.combination, &info, &params, &dose)?;

    let finals: Vec<_> = (0..50)
        .map(|r| {
            let mut sim = Simulation::new(
                &sc.world,
                &sc.combination,
                params,
                Some(&dose),
                ObservationSource::Sampled { seed: 1, replica: r },
                None,
            )?;
            sim.advance_by(2000);
            Ok(sim.mu().log_ratios(0))
        })
        .collect::<socialcause::Result<_>>()?;

    println!("agent  effect   expected ratio  simulated (mean +- se)");
    for k in 0..sc.agents() {
        let s = summarize(&finals.iter().map(|l| l[(k, 1)]).collect::<Vec<_>>());
        println!(
            "{:>5}  {:.4}  {:>14.4}  {:.4} +- {:.4}",
            k + 1,
            effects[k],
            expected[(k, 1)],
            s.mean,
            s.stderr
        );
    }
    Ok(())
}
