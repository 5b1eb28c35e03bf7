//! Draws reproduction events on a torus for a fixed and a heavy-tailed
//! radius law and summarises them.

use slfv::event_stream::{total_event_rate, EventKind, EventStream};
use slfv::{stream_rng, EventModel, TorusDomain};

fn main() -> slfv::Result<()> {
    let domain = TorusDomain::new(2, 20.0)?;
    let models = [
        ("fixed R=1", EventModel::fixed(2, 1.0, 0.3, 0.2)?),
        ("stable α=1.5", EventModel::stable(2, 1.5, Some(4.0), 0.3, 0.2)?),
    ];
    for (name, model) in models {
        let mut stream = EventStream::new(model, domain, 0.0)?;
        let mut rng = stream_rng(1, 0);
        let (mut count, mut selective, mut max_r) = (0, 0, 0.0f64);
        while let Some(e) = stream.next_before(10.0, &mut rng) {
            count += 1;
            if e.kind == EventKind::Selective {
                selective += 1;
            }
            max_r = max_r.max(e.radius);
        }
        println!(
            "{name}: rate {:.1}/unit time, {count} events by t=10, {selective} selective, largest radius {max_r:.3}",
            total_event_rate(&model, &domain)
        );
    }
    Ok(())
}
