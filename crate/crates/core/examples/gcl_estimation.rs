//! Recover the influence matrix from shared beliefs alone.

use socialcause::causal::{CausalModel, Dose, InfluenceMatrix};
use socialcause::dynamics::{run, LearningParams, RunSpec};
use socialcause::experiment::figures::mean_abs_error;
use socialcause::gcl::{estimate_causal_effects, GclSettings, ObservedTrace};
use socialcause::scenario::Scenario;

fn main() -> socialcause::Result<()> {
    let sc = Scenario::benchmark();
    let params = LearningParams::asl(0.1, 1.0)?;
    let info = sc.world.informativeness();
    let truth = InfluenceMatrix::compute(&CausalModel::new(&sc.combination, &info, params)?, &Dose::Uniform)?;
    let settings = GclSettings::new(params);
    for steps in [100, 1000, 10000] {
        let trace = run(&sc.world, &sc.combination, params, &RunSpec::sampled(steps, 3, 0), None)?;
        let observed = ObservedTrace::from_trace(&trace)?;
        let est = estimate_causal_effects(&observed, &sc.adjacency, &settings)?;
        println!(
            "M = {steps:>5}: true state {}, mean |error| {:.2e}",
            est.true_state + 1,
            mean_abs_error(&truth, &est.influence)
        );
    }
    Ok(())
}
