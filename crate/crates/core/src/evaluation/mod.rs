//! Scoring an embedding against an external deprivation index.

mod classify;
mod correlation;
mod diagnostics;
mod table;

pub use classify::{classify_deprived, confusion, threshold_for_count, Confusion};
pub use correlation::{
    combine_domains, correlation_matrix, default_weights, orient_to, pearson, top_domain_mean,
    CorrelationMatrix,
    DomainWeights,
};
pub use diagnostics::{
    fn_domain_diagnostics, fn_oa_drilldown, DiagnosticOptions, Drilldown, FnDomainRecord,
    LsoaDrilldown, OaValue,
};
pub use table::{DeprivationTable, Domain};

use serde::Serialize;

/// Everything the evaluation stage produces for one map variant.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub correlations: CorrelationMatrix,
    /// Eigenvectors whose sign was flipped to correlate non-negatively with IMD.
    pub flipped: Vec<String>,
    pub threshold: f64,
    pub confusion: Option<Confusion>,
    pub fn_diagnostics: Vec<FnDomainRecord>,
    pub drilldown: Option<Drilldown>,
}
