//! Runs an experiment from a JSON config through the runner, as the `slfv`
//! binary does.

use slfv::runner::{parse_config_str, run_experiment};

const CONFIG: &str = r#"{
    "seed": 42,
    "replicates": 4,
    "experiment": {
        "kind": "forward",
        "model": {"d": 1, "radius": {"kind": "fixed", "radius": 1.0}, "u": 0.5, "sigma": 1.0, "n": 1000, "side": 4.0},
        "initial": {"shape": "half_torus"},
        "observables": [{"family": "gaussian_bump", "center": [1.0], "width": 0.2}],
        "horizon": 0.1
    }
}"#;

fn main() -> slfv::Result<()> {
    let mut config = parse_config_str(CONFIG)?;
    config.output = std::env::temp_dir().join("slfv_run_config");
    let outcome = run_experiment(&config, 2)?;
    println!("config hash {}", outcome.manifest.config_hash);
    println!("replicate seeds {:?}", outcome.manifest.replicate_seeds);
    for f in &outcome.manifest.files {
        println!("wrote {}", outcome.dir.join(f).display());
    }
    let csv = std::fs::read_to_string(outcome.dir.join("observables.csv"))?;
    for line in csv.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
