//! Run a catalogued experiment from library code and print its manifest.

use perclab::harness::{list_experiments, run_experiment, ExperimentSpec};

fn main() -> perclab::Result<()> {
    for (name, anchor) in list_experiments() {
        println!("{name:<24} {anchor}");
    }
    let dir = std::env::temp_dir().join("perclab-example-run");
    let over = [("n_max".to_string(), "8".to_string())];
    let spec = ExperimentSpec::new("gadget-table", Some("solve_up_to = 5\n"), &over, &dir)?;
    let m = run_experiment(&spec)?;
    println!("\n{}", serde_json::to_string_pretty(&m).expect("manifest serializes"));
    Ok(())
}
