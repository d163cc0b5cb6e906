//! Simulation and resource optimization of counterfactual quantum
//! communication over nested (chained quantum Zeno) interferometers.
//!
//! * [`quantum`]: path-mode states, beam splitters and shutter measurements.
//! * [`protocol`]: the semi-counterfactual chain and the nested protocol, run
//!   exactly or as seeded single-photon Monte Carlo trials.
//! * [`analytic`]: closed-form success probabilities, trial counts and costs.
//! * [`optimizer`]: grid search over `(M, N)`, sweeps, bit-string planning.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod analytic;
pub mod error;
pub mod optimizer;
pub mod protocol;
pub mod quantum;
pub mod scalar;

pub use analytic::{
    derived_resources, is_feasible, lambda0, lambda1, lambda_avg, min_trials, zeta, Reach,
};
pub use error::{Error, Result};
pub use optimizer::{argmax_rate, optimize, plan_bitstring, sweep_n, sweep_q};
pub use protocol::{
    correct_detector, decode, run_ensemble, run_exact, run_nested_exact, run_semi_exact,
    run_trial_mc, Bit, ErasureKnowledge, EventLabel, ProtocolKind, ProtocolParams, TerminalEvent,
    TrialOutcome, Variant,
};
pub use quantum::{
    apply, make_rotation, project_out, sample_shutter, trial_rng, MeasurementRecord,
};
pub use scalar::Scalar;

pub type Amplitude = quantum::Amplitude<f64>;
pub type PathState = quantum::PathState<f64>;
pub type Unitary = quantum::Unitary<f64>;
pub type AnalyticPoint = analytic::AnalyticPoint<f64>;
pub type Resources = analytic::Resources<f64>;
pub type OutcomeDistribution = protocol::OutcomeDistribution<f64>;
pub type EnsembleStats = protocol::EnsembleStats<f64>;
pub type Interferometer = protocol::Interferometer<f64>;
pub type GridSpec = optimizer::GridSpec<f64>;
pub type OptimizationResult = optimizer::OptimizationResult<f64>;
pub type SweepNRow = optimizer::SweepNRow<f64>;
pub type SweepQRow = optimizer::SweepQRow<f64>;
pub type BitSchedule = optimizer::BitSchedule<f64>;
pub type BitPlan = optimizer::BitPlan<f64>;
