//! Record indicators of sequences in R^d under the strict all-coordinate
//! order, with tools to check whether they are mutually independent.
//!
//! - [`record`]: chain and dominance record semantics, batch and streaming.
//! - [`events`]: record patterns, their defining events, and the
//!   decomposition of `E ∏ h_j(ζ_j)` over them.
//! - [`oracle`]: exact rational joint laws for iid data by rank enumeration.
//! - [`quadrature`]: joint laws for independent non-identical data on the line.
//! - [`simulator`]: reproducible Monte Carlo with counter-keyed streams.
//! - [`stats`]: TV distance to the marginal product, G-test, covariances.

pub mod distribution;
pub mod error;
pub mod events;
pub mod observation;
pub mod oracle;
pub mod pmf;
pub mod quadrature;
pub mod record;
pub mod simulator;
pub mod stats;

pub use distribution::{ContinuousLaw, DistributionSpec, LawTemplate, Marginal, Param};
pub use error::{Error, Result};
pub use events::{
    enumerate_patterns, expectation_direct, expectation_via_decomposition, pattern_event_holds,
    product_of_marginal_expectations, v_products, HTable, RecordPattern, VProducts,
};
pub use observation::{dominates, Observation, Path};
pub use oracle::{joint_pmf_iid, marginal_record_prob, RankTuple, DEFAULT_STATE_CAP};
pub use pmf::{ExactPmf, FloatPmf, JointPmf, PmfSource, Probability};
pub use quadrature::{factorization_check, joint_pmf_quadrature_1d, FactorizationCheck, QuadraturePmf};
pub use record::{count_records, indicators, record_pattern, Detector, IndicatorVector, SemanticsMode};
pub use simulator::{
    empirical_tv_report, run_experiment, sample_path, EmpiricalJointPmf, ExperimentConfig, ExperimentResult,
    LSummary, ModeResult, TvReport,
};
pub use stats::{g_test, pairwise_covariances, product_of_marginals, tv_distance, GTest, IndependenceReport};
