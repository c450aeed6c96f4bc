//! Run adaptive social learning on the benchmark network and watch the
//! belief in the true state.

use socialcause::dynamics::{run, LearningParams, RunSpec};
use socialcause::scenario::Scenario;

fn main() -> socialcause::Result<()> {
    let sc = Scenario::benchmark();
    for params in [LearningParams::nbsl(), LearningParams::asl(0.1, 1.0)?] {
        let trace = run(&sc.world, &sc.combination, params, &RunSpec::sampled(300, 7, 0), None)?;
        println!("delta = {}, beta = {}", params.delta, params.beta);
        for t in [0, 10, 50, 100, 300] {
            let mu = trace.mu[t].beliefs();
            let truth: Vec<String> = (0..sc.agents()).map(|k| format!("{:.3}", mu[(k, 0)])).collect();
            println!("  t={t:>3}  {}", truth.join(" "));
        }
    }
    Ok(())
}
