//! Behavioural preorders and logics for weighted transition systems and
//! semi-Markov decision processes: the WLWB logic with its tableau decision
//! procedure, generalized weighted bisimulation, the trace-based faster-than
//! preorder, ε-simulation and the simulation distance, CSP-style parallel
//! composition with timing-anomaly detection, and timed Markovian logic.
//!
//! The CDF and acceleration calculus is generic over the floating-point
//! scalar through [`Real`]; exact quantities (transition weights,
//! probabilities, logic constants) are `BigRational` throughout.

pub mod accel;
pub mod anomaly;
pub mod cdf;
pub mod coupling;
pub mod fasterthan;
pub mod fixtures;
pub mod ratio;
pub mod real;
pub mod simdist;
pub mod smp;
pub mod tml;
pub mod wlwb;
pub mod wts;

pub use accel::{c_clamped, eps_faster, least_acceleration, Acceleration, GridSpec};
pub use cdf::{parse_cdf, Cdf, CompositionKind};
pub use ratio::Rat;
pub use real::Real;
pub use simdist::{bisimilar, eps_simulates, simulates, simulation_distance};
pub use smp::{Scheduler, Smp, SmpKind, TimeBoundedCylinder};
pub use tml::{parse_tml, Tml};
pub use wlwb::{parse_wlwb, satisfiable_wlwb, SatResult, Wlwb};
pub use wts::Wts;

/// Concrete aliases for the common double-precision instantiation.
pub type Cdf64 = Cdf<f64>;
pub type Accel64 = Acceleration<f64>;
pub type Grid64 = GridSpec<f64>;
