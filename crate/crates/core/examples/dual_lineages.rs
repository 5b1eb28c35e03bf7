//! Follows the branching-coalescing dual of three sampled points backwards
//! in time.

use slfv::dual::{run_dual, DualState};
use slfv::{stream_rng, EventModel, Point, TorusDomain};

fn main() -> slfv::Result<()> {
    let domain = TorusDomain::new(2, 10.0)?;
    let model = EventModel::fixed(2, 1.0, 0.5, 0.3)?;
    let start = [Point::new(&[2.0, 2.0]), Point::new(&[2.5, 2.0]), Point::new(&[7.0, 6.0])];
    let times: Vec<f64> = (1..=8).map(|i| 5.0 * i as f64).collect();
    for replicate in 0..3 {
        let mut dual = DualState::new(domain, &start)?;
        let records = run_dual(&mut dual, &model, 40.0, &times, false, &mut stream_rng(4, replicate))?;
        let counts: Vec<String> = records.iter().map(|r| r.n.to_string()).collect();
        let last = records.last().unwrap();
        println!(
            "replicate {replicate}: N(t) = {} ({} branches, {} coalescences)",
            counts.join(" "),
            last.branches,
            last.coalescences
        );
    }
    Ok(())
}
