//! Entanglement dynamics of two giant atoms, each coupled to a 1D waveguide
//! at two points, in separate, braided and nested arrangements.
//!
//! Units: frequencies and rates are in multiples of the single-point decay
//! rate γ unless a `gamma` argument says otherwise; phases are in radians.

// `!(x > y)` guards reject NaN on purpose; index loops suit the small fixed matrices
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod collective;
pub mod entanglement;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod lindblad;
pub mod output;
pub mod rates;
pub mod scenarios;
pub mod single_excitation;
pub mod validation;

pub use collective::{collective_basis, transition_rates, CollectiveBasis, CollectivePopulations, TransitionRates};
pub use entanglement::concurrence;
pub use error::{Error, Result};
pub use lindblad::{evolve, DensityMatrix, EvolveOptions, InitialState, Preset, Trajectory};
pub use rates::{derive_rates_closed_form, derive_rates_from_geometry, rates_for, ConfigKind, DerivedRates, PhysicalParams};
pub use single_excitation::{amplitudes, concurrence_closed_form, AmplitudePair};
pub use scenarios::{run_sweep, Channel, Settings, SweepResult, SweepSpec};
