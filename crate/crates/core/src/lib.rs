//! Simulation toolkit for the spatial Λ-Fleming-Viot process with selection.
//!
//! The crate has two exact simulators (the forward allele-frequency field
//! and the backward branching-coalescing lineage system), reference solvers
//! for their scaling limits, and statistics that compare them.
//!
//! ```
//! use slfv::geometry::{ball_volume, TorusDomain};
//! use slfv::event_stream::{total_event_rate, EventModel};
//!
//! let domain = TorusDomain::new(1, 10.0).unwrap();
//! let model = EventModel::fixed(1, 1.0, 0.3, 0.0).unwrap();
//! assert_eq!(total_event_rate(&model, &domain), 10.0);
//! assert_eq!(ball_volume(1, 1.0).unwrap(), 2.0);
//! ```

pub mod analysis;
pub mod dual;
pub mod error;
pub mod event_stream;
pub mod forward;
pub mod geometry;
pub mod limit;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod scaling;

pub use error::{Result, SlfvError};
pub use event_stream::{EventKind, EventModel, RadiusLaw, ReproductionEvent};
pub use geometry::{Point, TorusDomain};
pub use rng::{derive_seed, stream_rng, SimRng};
