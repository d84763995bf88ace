//! Files, configuration, synthetic data and the end-to-end pipeline.

mod config;
mod csv_io;
mod geojson;
mod pipeline;
mod synth;

pub use config::PipelineConfig;
pub use csv_io::{
    load_code_list, load_deprivation, load_features, load_hierarchy, write_area_table,
    write_atomic, write_fn_diagnostics, write_json,
};
pub use geojson::{export_choropleth, BoundaryFile, ChoroplethSummary};
pub use pipeline::{embed_features, evaluate_vectors, run_pipeline, MapSummary, PipelineInputs, PipelineReport};
pub use synth::{generate_synthetic, SyntheticData, SyntheticKind, AMBIENT_DIM};
