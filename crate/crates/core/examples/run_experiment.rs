//! The experiment runner as a library call: moments first, then a
//! pair-sticky run reading its scaling constants. At eps = 0.05 the drift and
//! together-correlation checks usually fail; the README explains why.

use sticky_op::experiment::{run_and_write, Experiment, ExperimentConfig};

fn main() -> sticky_op::Result<()> {
    let root = std::env::temp_dir().join("sticky-op-example");
    let moments = ExperimentConfig { seed: 5, replicates: Some(256), out: root.join("moments"), ..ExperimentConfig::for_experiment(Experiment::Moments) };
    let m = run_and_write(&moments)?;
    println!("{}", m.summary());

    let pair = ExperimentConfig {
        seed: 6,
        moments_from: Some(moments.out.clone()),
        out: root.join("pair"),
        ..ExperimentConfig::for_experiment(Experiment::PairSticky)
    };
    let out = run_and_write(&pair)?;
    println!("{}", out.summary());
    println!("outputs in {}", root.display());
    Ok(())
}
