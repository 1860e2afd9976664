//! Numerics for entropy production of scalar balance laws
//! d_t u + div_x f(t,x,u) = g(t,x,u): the production distribution of an
//! entropy, the Kruzkov family, representation formulas over the
//! Kruzkov family, the Fourier side, and approximation of general test
//! entropies by tensor products.

pub mod domain;
pub mod entropy;
pub mod error;
pub mod fields;
pub mod flux;
pub mod fourier;
pub mod ks;
pub mod production;
pub mod quad;
pub mod represent;
pub mod scalar;
pub mod scenario;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};

/// Working real scalar for every interface in the crate.
pub type Real = f64;
/// Complex scalar used on the Fourier side.
pub type Complex = num_complex::Complex64;

pub use domain::{chi, sign, Domain, SpaceTimeTest, TestFunction};
pub use entropy::{Entropy1D, EntropyTX};
pub use fields::{AnalyticPiecewiseField, Field, GridField, InitialDatum};
pub use flux::{FluxFunction, SourceFunction};
pub use ks::{ks_integrate, RegulatedBV};
pub use production::{kruzkov, kruzkov_curve, production, production_tx, solution_residual, ProductionResult};
pub use quad::QuadratureSpec;
pub use scenario::{
    builtin_scenario, emit, run_scenario, CheckRecord, ReportFormat, RunReport, ScenarioConfig,
    BUILTIN_SCENARIOS,
};
