//! Runs the forward allele-frequency field from a half-torus start and
//! tracks two observables; writes the final field as a snapshot.

use slfv::forward::snapshot::{write_binary, SnapshotHeader};
use slfv::forward::{run_forward, ForwardState, InitialField, ObservableSpec, Observer};
use slfv::{stream_rng, EventModel, TorusDomain};

fn main() -> slfv::Result<()> {
    let domain = TorusDomain::new(1, 20.0)?;
    let model = EventModel::fixed(1, 1.0, 0.2, 0.05)?;
    let mut state = ForwardState::new(domain, 0.05, 0.0)?;
    state.set_values(InitialField::HalfTorus.on_grid(&state, 1.0)?)?;
    let observers = vec![
        Observer::new(ObservableSpec::ball(&[10.0], 2.0), &state, 1.0)?.normalised()?,
        Observer::new(ObservableSpec::CosineMode { wavenumbers: vec![1] }, &state, 1.0)?,
    ];
    let times: Vec<f64> = (1..=5).map(|i| 4.0 * i as f64).collect();
    let traj = run_forward(&mut state, &model, 20.0, &observers, &times, false, &mut stream_rng(3, 0))?;
    println!("t      interface-mean  cos-mode");
    for (t, v) in traj.times.iter().zip(&traj.values) {
        println!("{t:<6} {:<15.4} {:.4}", v[0], v[1]);
    }
    println!("{} events", traj.events);
    let path = std::env::temp_dir().join("slfv_forward_field.bin");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write_binary(&mut file, &SnapshotHeader::for_state(&state, 20.0, 3), state.values())?;
    println!("final field written to {}", path.display());
    Ok(())
}
