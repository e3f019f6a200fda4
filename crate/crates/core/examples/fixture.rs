//! Capture a window of a random configuration as an edge list, reload it
//! and trace on the fixture.

use sticky_op::fixture::FixtureConfig;
use sticky_op::lattice::{NoiseField, PercConfig, Site};
use sticky_op::paths::trace_rho;

fn main() -> sticky_op::Result<()> {
    let cfg = PercConfig::new(NoiseField::new(21), 0.75)?;
    let fx = FixtureConfig::capture(&cfg, -12..=12, 0..12);
    let text = fx.to_text();
    println!("{} edges; first lines:", fx.len());
    for line in text.lines().take(5) {
        println!("  {line}");
    }

    let back = FixtureConfig::parse(&text)?;
    let a = trace_rho(&back, Site::origin(), 10, 10)?;
    let b = trace_rho(&cfg, Site::origin(), 10, 10)?;
    println!("rho on fixture {:?}", a.path.positions);
    println!("rho on source  {:?}", b.path.positions);

    let committed = FixtureConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/small.edges"))?;
    println!("fixtures/small.edges: {:?}", trace_rho(&committed, Site::origin(), 6, 20)?.path.positions);
    Ok(())
}
