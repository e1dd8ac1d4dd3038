//! Inter-rater agreement coefficients built on the unbiased estimator of the
//! expected index of agreement, with their asymptotic variances.
//!
//! * [`coefficients`]: Cohen's kappa, Scott's pi, Krippendorff's alpha and
//!   Fleiss' kappa from data, and the linear-fractional maps to their
//!   unbiased-expected-index variants (`κ_XU`).
//! * [`variance`]: the Fleiss–Cohen–Everitt closed form, a multivariate
//!   delta-method engine, the `V_A` transformation, plug-in and bootstrap
//!   estimates.
//! * [`model`]: population models, scenario construction, sampling and
//!   exhaustive enumeration.
//! * [`simulation`]: the Monte Carlo study comparing those variances to the
//!   empirical variance of `κ̂_CU`.
//! * [`oracle`]: exhaustive-enumeration checks of unbiasedness.

pub mod coefficients;
pub mod error;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod simulation;
pub mod table;
pub mod variance;

pub use coefficients::{CoefficientEstimate, Family};
pub use error::{Error, Result};
pub use model::{MultinomialModel, SampleStream, Scenario};
pub use simulation::{SimConfig, SimulationCell, SimulationReport};
pub use table::{ContingencyTable, MultiRaterTable};
pub use variance::{VarianceEstimate, VarianceMethod};
