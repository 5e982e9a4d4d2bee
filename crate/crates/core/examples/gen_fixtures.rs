//! Regenerates the shipped ansatz fixtures under `fixtures/`.
//!
//! cargo run --release -p pecshadow --example gen_fixtures

use std::path::Path;

use pecshadow::experiment::{optimize_hva, HamiltonianSpec, OptimizerOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let jobs = [
        (HamiltonianSpec::spin_ring(6, 11), 5),
        (HamiltonianSpec::heisenberg_chain(6, 12), 8),
    ];
    for (spec, layers) in jobs {
        let f = optimize_hva(&spec, layers, &OptimizerOptions { restarts: 8, steps: 2500, ..Default::default() })?;
        println!(
            "{}: energy {:.6}, ground {:.6} ({:.2}%)",
            f.name,
            f.energy,
            f.ground_energy,
            100.0 * (f.energy - f.ground_energy) / f.ground_energy.abs()
        );
        std::fs::write(dir.join(format!("{}.json", f.name)), serde_json::to_string_pretty(&f)? + "\n")?;
    }
    Ok(())
}
