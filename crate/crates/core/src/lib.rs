//! Cyclic multi-antenna coded caching: placement, delivery planning, user
//! grouping, max-min beamforming and rate simulation.
//!
//! The combinatorial modules work on plain indices. The beamforming and
//! simulation code is generic over the real scalar type; the aliases below
//! fix it to `f64` or `f32`.

pub mod beamforming;
pub mod delivery;
pub mod error;
pub mod grouping;
pub mod params;
pub mod placement;
pub mod scalar;
pub mod simulator;

pub use beamforming::{SolverError, SolverOptions, StreamCoupling};
pub use delivery::{build_plan, verify_plan, StreamDescriptor, Transmission, TransmissionPlan};
pub use error::{Error, Result};
pub use grouping::{build_scheme, GroupingMap};
pub use params::{complexity_report, Scheme, SchemeParams};
pub use placement::PlacementMatrix;
pub use scalar::Real;
pub use simulator::{BeamformerKind, Fading, PhantomSlotPolicy, SimConfig, SimError};

pub type ChannelRealization = beamforming::ChannelRealization<f64>;
pub type BeamformerSolution = beamforming::BeamformerSolution<f64>;
pub type RatePoint = simulator::RatePoint<f64>;

pub type ChannelRealizationF32 = beamforming::ChannelRealization<f32>;
pub type BeamformerSolutionF32 = beamforming::BeamformerSolution<f32>;
pub type RatePointF32 = simulator::RatePoint<f32>;
