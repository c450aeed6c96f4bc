//! Drive the experiment runner from an in-memory config and print the
//! report.

use std::path::Path;

use socialcause::experiment::{ExperimentConfig, FigureName, Runner, Task};

fn main() -> socialcause::Result<()> {
    let out = std::env::temp_dir().join("socialcause-figures");
    let text = format!(
        "seed = 11\nreplicas = 4\nout = {:?}\n[network]\nbuiltin = \"benchmark\"\n[world]\nbuiltin = \"benchmark\"\n[learning]\ndelta = 0.1\n",
        out.display().to_string()
    );
    let runner = Runner::from_config(ExperimentConfig::parse(&text, Path::new("."))?);
    for name in [FigureName::DeltaHops, FigureName::GclError] {
        let report = runner.run(Task::Figure(name))?;
        println!("{name}: {:?}", report.outputs);
        println!("{}", serde_json::to_string_pretty(&report.summary)?);
    }
    println!("written to {}", out.display());
    Ok(())
}
