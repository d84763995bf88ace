use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use super::config::PipelineConfig;
use super::csv_io::{
    load_code_list, load_deprivation, load_features, load_hierarchy, write_area_table,
    write_fn_diagnostics, write_json,
};
use super::geojson::{export_choropleth, BoundaryFile};
use crate::area::AreaVector;
use crate::error::{Error, Result};
use crate::evaluation::{
    classify_deprived, combine_domains, confusion, correlation_matrix, fn_domain_diagnostics,
    fn_oa_drilldown, orient_to, top_domain_mean, DeprivationTable, EvaluationReport,
};
use crate::geo::{aggregate_features, aggregate_vector, AreaHierarchy};
use crate::graph::{build_similarity_graph, pairwise_distances, standardize, FeatureMatrix, SimilarityOptions};
use crate::spectral::{build_laplacian, compute_embedding, select_eigenvector, SpectralEmbedding};

/// Number of domains averaged in the top-domain correlation summary.
const TOP_DOMAINS: usize = 4;

/// In-memory inputs of a full run. Only the features are mandatory.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub features: FeatureMatrix,
    pub hierarchy: AreaHierarchy,
    pub deprivation: Option<DeprivationTable>,
    pub boundaries: Option<BoundaryFile>,
    /// Explicit deprived LSOA codes; overrides `deprived_rank_cutoff`.
    pub ground_truth: Option<BTreeSet<String>>,
}

impl PipelineInputs {
    /// Reads every input from disk. Without a hierarchy file each area is
    /// its own LSOA.
    pub fn load(
        config: &PipelineConfig,
        features: &Path,
        hierarchy: Option<&Path>,
        deprivation: Option<&Path>,
        boundaries: Option<&Path>,
        ground_truth: Option<&Path>,
    ) -> Result<Self> {
        let features = load_features(features, &config.id_column).map_err(|e| e.in_stage("load_features"))?;
        let hierarchy = match hierarchy {
            Some(p) => load_hierarchy(p).map_err(|e| e.in_stage("load_hierarchy"))?,
            None => AreaHierarchy::identity(features.area_ids()),
        };
        let deprivation = deprivation
            .map(load_deprivation)
            .transpose()
            .map_err(|e| e.in_stage("load_deprivation"))?;
        let boundaries = boundaries
            .map(|p| BoundaryFile::load(p, &config.code_property))
            .transpose()
            .map_err(|e| e.in_stage("load_boundaries"))?;
        let ground_truth = ground_truth
            .map(load_code_list)
            .transpose()
            .map_err(|e| e.in_stage("load_ground_truth"))?;
        Ok(Self {
            features,
            hierarchy,
            deprivation,
            boundaries,
            ground_truth,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapSummary {
    pub name: String,
    pub n_areas: usize,
    pub n_components: usize,
    pub eigenvalues: Vec<f64>,
    pub evaluation: Option<EvaluationReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub oa_areas: usize,
    pub lsoa_areas: usize,
    /// The OA map at OA level, before aggregation.
    pub oa_map: MapSummary,
    /// Maps evaluated at LSOA level: native LSOA, then OA aggregated.
    pub lsoa_maps: Vec<MapSummary>,
    /// Output files relative to the output directory, in write order.
    pub files: Vec<String>,
}

impl PipelineReport {
    pub fn lsoa_map(&self, name: &str) -> Option<&MapSummary> {
        self.lsoa_maps.iter().find(|m| m.name == name)
    }
}

/// Raw features to spectral embedding: standardize, distances, similarity
/// graph, Laplacian, eigenvectors.
pub fn embed_features(raw: &FeatureMatrix, config: &PipelineConfig) -> Result<SpectralEmbedding> {
    let standardized = standardize(raw).map_err(|e| e.in_stage("standardize"))?;
    if !standardized.dropped_columns.is_empty() {
        info!("dropped {} constant column(s)", standardized.dropped_columns.len());
    }
    let distances = pairwise_distances(&standardized.matrix).map_err(|e| e.in_stage("distances"))?;
    let graph = build_similarity_graph(
        &distances,
        config.k_neighbors,
        SimilarityOptions {
            clamp_coincident: config.clamp_coincident,
        },
    )
    .map_err(|e| e.in_stage("similarity_graph"))?;
    let laplacian = build_laplacian(&graph).map_err(|e| e.in_stage("laplacian"))?;
    compute_embedding(&laplacian, &config.embedding_options()).map_err(|e| e.in_stage("embedding"))
}

fn eigenvectors(embedding: &SpectralEmbedding) -> Result<Vec<AreaVector>> {
    (1..=embedding.n_nonzero())
        .map(|i| select_eigenvector(embedding, i))
        .collect()
}

fn ev_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("ev{i}")).collect()
}

fn summary(name: &str, embedding: &SpectralEmbedding) -> MapSummary {
    MapSummary {
        name: name.into(),
        n_areas: embedding.area_ids().len(),
        n_components: embedding.n_components(),
        eigenvalues: embedding.nonzero_eigenvalues().to_vec(),
        evaluation: None,
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn path(&mut self, name: String) -> PathBuf {
        let p = self.dir.join(&name);
        self.files.push(name);
        p
    }

    fn vectors(&mut self, name: &str, vectors: &[AreaVector]) -> Result<()> {
        let Some(first) = vectors.first() else {
            return Ok(());
        };
        let columns: Vec<Vec<f64>> = vectors.iter().map(|v| v.values.clone()).collect();
        let path = self.path(format!("embedding_{name}.csv"));
        write_area_table(path, &first.area_ids, &ev_names(vectors.len()), &columns)
    }
}

/// Scores LSOA-level eigenvectors (`ev1`, `ev2`, ...) against `table`:
/// orientation toward IMD, correlations, and, when a ground truth is
/// available, the confusion counts and false-negative diagnostics.
pub fn evaluate_vectors(
    vectors: &[AreaVector],
    table: &DeprivationTable,
    ground_truth: Option<&BTreeSet<String>>,
    config: &PipelineConfig,
) -> Result<EvaluationReport> {
    config.validate()?;
    if vectors.len() < config.classify_eigenvector {
        return Err(Error::IndexOutOfRange {
            index: config.classify_eigenvector,
            max: vectors.len(),
        });
    }
    evaluate_map(vectors, table, ground_truth, config).map(|(report, _, _)| report)
}

/// LSOA-level evaluation of one map. Returns the report and the oriented
/// eigenvectors restricted to the evaluated LSOAs.
fn evaluate_map(
    vectors: &[AreaVector],
    table: &DeprivationTable,
    ground_truth: Option<&BTreeSet<String>>,
    config: &PipelineConfig,
) -> Result<(EvaluationReport, Vec<AreaVector>, BTreeSet<String>)> {
    let ids = &vectors[0].area_ids;
    let covered: Vec<&String> = ids.iter().filter(|id| table.position(id).is_some()).collect();
    if covered.len() < ids.len() {
        warn!("{} LSOA(s) have no deprivation record and are not evaluated", ids.len() - covered.len());
    }
    let table = table.restrict_to(&covered)?;

    let mut oriented = Vec::with_capacity(vectors.len());
    let mut flipped = Vec::new();
    let mut extra = Vec::with_capacity(vectors.len() + 1);
    for (name, v) in ev_names(vectors.len()).into_iter().zip(vectors) {
        let aligned = AreaVector::new(table.lsoa_ids().to_vec(), table.align(v)?)?;
        let (v, was_flipped) = orient_to(&aligned, table.imd_score())?;
        if was_flipped {
            flipped.push(name.clone());
        }
        extra.push((name, v.values.clone()));
        oriented.push(v);
    }
    extra.push(("IMD_weighted".into(), combine_domains(&table, &config.domain_weights)?));
    let correlations = correlation_matrix(&table, &extra)?;

    let universe: BTreeSet<String> = table.lsoa_ids().iter().cloned().collect();
    let truth: Option<BTreeSet<String>> = match (ground_truth, config.deprived_rank_cutoff, table.imd_rank()) {
        (Some(codes), _, _) => Some(codes.intersection(&universe).cloned().collect()),
        (None, Some(cutoff), Some(ranks)) => Some(
            table
                .lsoa_ids()
                .iter()
                .zip(ranks)
                .filter(|(_, r)| **r <= cutoff)
                .map(|(id, _)| id.clone())
                .collect(),
        ),
        (None, Some(_), None) => {
            warn!("deprived_rank_cutoff set but the deprivation file has no imd_rank column");
            None
        }
        (None, None, _) => None,
    };

    let threshold = config.classification_threshold;
    let predicted = classify_deprived(&oriented[config.classify_eigenvector - 1], threshold);
    let mut false_negatives = BTreeSet::new();
    let mut fn_diagnostics = Vec::new();
    let confusion = match &truth {
        Some(truth) => {
            false_negatives = truth.difference(&predicted).cloned().collect();
            let options = config.diagnostic_options();
            match fn_domain_diagnostics(&false_negatives, &table, &options) {
                Ok(records) => fn_diagnostics = records,
                Err(Error::RanksMissing(d)) => warn!("no {d} ranks; skipping false-negative diagnostics"),
                Err(e) => return Err(e),
            }
            Some(confusion(&predicted, truth, &universe)?)
        }
        None => None,
    };

    let report = EvaluationReport {
        correlations,
        flipped,
        threshold,
        confusion,
        fn_diagnostics,
        drilldown: None,
    };
    Ok((report, oriented, false_negatives))
}

/// Runs both map variants and writes every artifact into `out_dir`:
/// the native LSOA map (features averaged to LSOAs, then embedded) and the
/// OA map (OAs embedded, eigenvectors averaged to LSOAs).
pub fn run_pipeline(config: &PipelineConfig, inputs: &PipelineInputs, out_dir: &Path) -> Result<PipelineReport> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut out = Output {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    let hierarchy = &inputs.hierarchy;

    let lsoa_features = aggregate_features(&inputs.features, hierarchy).map_err(|e| e.in_stage("aggregate_features"))?;
    let lsoa_embedding = embed_features(&lsoa_features, config).map_err(|e| e.in_stage("lsoa_map"))?;
    let oa_embedding = embed_features(&inputs.features, config).map_err(|e| e.in_stage("oa_map"))?;

    let oa_vectors = eigenvectors(&oa_embedding)?;
    let lsoa_vectors = eigenvectors(&lsoa_embedding)?;
    let oa_lsoa_vectors = oa_vectors
        .iter()
        .map(|v| aggregate_vector(v, hierarchy))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("aggregate_vector"))?;

    out.vectors("oa", &oa_vectors).map_err(|e| e.in_stage("export"))?;
    out.vectors("lsoa", &lsoa_vectors).map_err(|e| e.in_stage("export"))?;
    out.vectors("oa_lsoa", &oa_lsoa_vectors).map_err(|e| e.in_stage("export"))?;

    let mut oa_map = summary("oa", &oa_embedding);
    let mut maps = vec![
        (summary("lsoa", &lsoa_embedding), lsoa_vectors),
        (summary("oa_lsoa", &oa_embedding), oa_lsoa_vectors),
    ];

    let mut oa_for_maps = oa_vectors.clone();
    match &inputs.deprivation {
        None => info!("no deprivation table; evaluation skipped, embeddings only"),
        Some(table) => {
            let mut correlations = serde_json::Map::new();
            let mut confusions = serde_json::Map::new();
            let mut fn_rows = Vec::new();
            for (map, vectors) in maps.iter_mut() {
                let (mut report, oriented, fns) = evaluate_map(vectors, table, inputs.ground_truth.as_ref(), config)
                    .map_err(|e| e.in_stage("evaluation"))?;
                let ev = format!("ev{}", config.classify_eigenvector);
                correlations.insert(
                    map.name.clone(),
                    json!({
                        "names": report.correlations.names,
                        "values": report.correlations.values,
                        "flipped": report.flipped,
                        "classify_eigenvector": ev,
                        "imd": report.correlations.get(&ev, "IMD"),
                        "top_domain_mean": top_domain_mean(&report.correlations, &ev, TOP_DOMAINS),
                    }),
                );
                if let Some(c) = report.confusion {
                    confusions.insert(map.name.clone(), json!({ "threshold": report.threshold, "counts": c }));
                }
                fn_rows.extend(report.fn_diagnostics.iter().map(|r| (map.name.clone(), r.clone())));

                if map.name == "oa_lsoa" {
                    // OA values share the orientation of their aggregated map
                    for (oa, name) in oa_for_maps.iter_mut().zip(ev_names(oriented.len())) {
                        if report.flipped.contains(&name) {
                            *oa = oa.negated();
                        }
                    }
                    if report.confusion.is_some() {
                        let oa_classify = &oa_for_maps[config.classify_eigenvector - 1];
                        report.drilldown = Some(
                            fn_oa_drilldown(&fns, oa_classify, hierarchy, report.threshold)
                                .map_err(|e| e.in_stage("drilldown"))?,
                        );
                    }
                }
                *vectors = oriented;
                map.evaluation = Some(report);
            }
            write_json(out.path("correlations.json".into()), &correlations)?;
            if !confusions.is_empty() {
                write_json(out.path("confusion.json".into()), &confusions)?;
                write_fn_diagnostics(out.path("fn_diagnostics.csv".into()), &fn_rows)?;
            }
        }
    }

    if let Some(boundaries) = &inputs.boundaries {
        for (map, vectors) in &maps {
            for (name, v) in ev_names(vectors.len()).iter().zip(vectors) {
                export_choropleth(v, boundaries, out.path(format!("choropleth_{}_{name}.geojson", map.name)))
                    .map_err(|e| e.in_stage("export"))?;
            }
        }
        if oa_for_maps[0].area_ids.iter().any(|id| boundaries.contains(id)) {
            for (name, v) in ev_names(oa_for_maps.len()).iter().zip(&oa_for_maps) {
                export_choropleth(v, boundaries, out.path(format!("choropleth_oa_{name}.geojson")))
                    .map_err(|e| e.in_stage("export"))?;
            }
        }
    }
    oa_map.evaluation = None;

    let mut report = PipelineReport {
        config: config.clone(),
        oa_areas: inputs.features.n_rows(),
        lsoa_areas: hierarchy.n_lsoas(),
        oa_map,
        lsoa_maps: maps.into_iter().map(|(m, _)| m).collect(),
        files: Vec::new(),
    };
    let summary_path = out.path("summary.json".into());
    report.files = out.files;
    write_json(summary_path, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::synth::{generate_synthetic, SyntheticKind};

    #[test]
    fn identity_hierarchy_gives_identical_maps() {
        let data = generate_synthetic(SyntheticKind::Line1d, 60, 0.05, 1).unwrap();
        let inputs = PipelineInputs {
            hierarchy: AreaHierarchy::identity(data.features.area_ids()),
            features: data.features,
            deprivation: None,
            boundaries: None,
            ground_truth: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let report = run_pipeline(&PipelineConfig::default(), &inputs, dir.path()).unwrap();
        assert!(report.lsoa_maps.iter().all(|m| m.evaluation.is_none()));
        let a = std::fs::read_to_string(dir.path().join("embedding_lsoa.csv")).unwrap();
        let b = std::fs::read_to_string(dir.path().join("embedding_oa_lsoa.csv")).unwrap();
        assert_eq!(a, b);
        assert!(!dir.path().join("correlations.json").exists());
        assert!(dir.path().join("summary.json").exists());
    }
}
