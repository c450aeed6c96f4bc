//! Compare the general post-intervention solver with the closed forms for
//! a fully connected network and a directed ring.

use socialcause::causal::{post_intervention_log_ratios, special};
use socialcause::dynamics::{Intervention, LearningParams};
use socialcause::network::CombinationMatrix;
use socialcause::world::Informativeness;

fn main() -> socialcause::Result<()> {
    let d = [0.3, 0.1, 0.0, 0.2, 0.25];
    let info = Informativeness::binary(&d)?;
    let params = LearningParams::asl(0.2, 1.5)?;
    let dose = Intervention::new(1, vec![0.4, 0.6])?;
    let c = (0.4f64 / 0.6).ln();

    let v = [0.3, 0.25, 0.2, 0.15, 0.1];
    let full = CombinationMatrix::fully_connected(&v)?;
    let general = post_intervention_log_ratios(&full, &info, &params, &dose)?;
    let closed = special::fully_connected_asl(&v, &d, 1, c, params.delta, params.beta);
    report(
        "fully connected",
        &general.column(1).iter().copied().collect::<Vec<_>>(),
        &closed,
    );

    let ring = CombinationMatrix::ring(5, 0.6)?;
    let general = post_intervention_log_ratios(&ring, &info, &params, &dose)?;
    let closed = special::ring_asl(0.6, &d, 1, c, params.delta, params.beta);
    report("ring", &general.column(1).iter().copied().collect::<Vec<_>>(), &closed);
    Ok(())
}

fn report(name: &str, general: &[f64], closed: &[f64]) {
    println!("{name}");
    for (k, (g, c)) in general.iter().zip(closed).enumerate() {
        println!("  agent {}: {g:>10.6} {c:>10.6}  diff {:.1e}", k + 1, (g - c).abs());
    }
}
