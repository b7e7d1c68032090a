//! Lumped-parameter models of twisted cantilever beams on a vibrating base.
//!
//! A beam is reduced to a short chain of spring-damper revolute joints
//! ([`chain`]), compiled into a multibody tree ([`model`]) and integrated under
//! a sinusoidal base drive ([`dynamics`], [`simulation`]), optionally pressing
//! a foot against a compliant ground ([`contact`]). Joint parameters can be
//! identified from drop-test marker data ([`sysid`]), and tip orbits are
//! summarized by shape descriptors ([`analysis`]). [`experiments`] runs whole
//! parameter sweeps and [`walker`] couples two mirrored beams into a
//! vibration-driven walker.

pub mod analysis;
pub mod chain;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod simulation;
pub mod spatial;
pub mod svg;
pub mod sysid;
pub mod trajectory;
pub mod walker;

pub use chain::{build_twisted_beam, mirror_chirality, paper_fit_beam, BeamChainSpec, BeamGeometry, FootSpec};
pub use contact::{contact_force, detect_contact_events, ContactConfig, ContactRecord};
pub use dynamics::{DriveSignal, SimConfig};
pub use error::{Error, Result};
pub use model::BeamModel;
pub use simulation::{simulate, SimOutput};
pub use trajectory::Trajectory;
