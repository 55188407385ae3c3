//! Pump-probe and pump-probe-difference signals of a vibronic
//! energy-transfer dimer, built from closed-form Gaussian pulse propagators.

pub mod error;
pub mod model;
pub mod propagators;
pub mod selftest;
pub mod signal;
pub mod special;

pub use error::{Error, Result};
pub use model::{
    fc_matrix, fc_overlap, ground_propagator, manifold_energies, one_exciton_propagator, DimerModel, DisplacedModes,
    ElectronicState, Manifold, ModelParams, PathwayState, Polarization, PulseParams, Site, VibronicBasis,
};
pub use propagators::{BlockKind, PropagatorBlock, PulseId};
pub use signal::{duration_sweep, Delays, Experiment, OverlapTable, PathwaySpec, Pulses, SweepMode, SweepRow, SweepSetup};
pub use special::{complex_erf, nested_gaussian_integral, quadrature_oracle, NestedIntegralArgs};
