//! Software-diversity based network topology adaptation, with an epidemic
//! attack simulator and Monte Carlo experiment harness.

pub mod adaptation;
pub mod epidemic;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod node;
pub mod paths;

pub use adaptation::{sda, Scheme, SdaParams};
pub use epidemic::{run_epidemic, EpidemicOutcome, FpMode};
pub use error::{Error, Result};
pub use experiment::{run_once, run_sweep, Axis, ExperimentConfig, NetworkSource, ResultRow};
pub use graph::Graph;
pub use metrics::MetricReport;
pub use node::{NodeState, PackageId, SoftwareCatalog};
