use std::collections::HashMap;
use std::path::Path;

use log::warn;
use serde_json::{json, Map, Value};

use super::csv_io::write_atomic;
use crate::area::AreaVector;
use crate::error::{Error, Result};

/// A GeoJSON FeatureCollection of area polygons keyed by a code property.
#[derive(Debug, Clone)]
pub struct BoundaryFile {
    features: Vec<Value>,
    index: HashMap<String, usize>,
    code_property: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoroplethSummary {
    pub written: usize,
    /// Vector ids that had no boundary.
    pub skipped: Vec<String>,
}

fn code_of(feature: &Value, property: &str) -> Option<String> {
    match feature.get("properties")?.get(property)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl BoundaryFile {
    pub fn parse(text: &str, code_property: &str) -> Result<Self> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| Error::InvalidGeoJson(e.to_string()))?;
        if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
            return Err(Error::InvalidGeoJson("top level is not a FeatureCollection".into()));
        }
        let features = root
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidGeoJson("missing `features` array".into()))?
            .clone();
        let mut index = HashMap::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            if f.get("type").and_then(Value::as_str) != Some("Feature") {
                return Err(Error::InvalidGeoJson(format!("feature {i} is not a Feature")));
            }
            let geometry = f.get("geometry").and_then(|g| g.get("type")).and_then(Value::as_str);
            if !matches!(geometry, Some("Polygon") | Some("MultiPolygon")) {
                return Err(Error::InvalidGeoJson(format!(
                    "feature {i} geometry is {geometry:?}, expected Polygon or MultiPolygon"
                )));
            }
            let code = code_of(f, code_property).ok_or_else(|| {
                Error::InvalidGeoJson(format!("feature {i} lacks property `{code_property}`"))
            })?;
            if index.insert(code.clone(), i).is_some() {
                return Err(Error::InvalidGeoJson(format!("duplicate area code `{code}`")));
            }
        }
        Ok(Self {
            features,
            index,
            code_property: code_property.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>, code_property: &str) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, code_property)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn code_property(&self) -> &str {
        &self.code_property
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }
}

/// Copies the boundary of every area in `vector` with a `value` property
/// added, in vector order. Areas without a boundary are skipped and listed.
pub fn choropleth_value(vector: &AreaVector, boundaries: &BoundaryFile) -> (Value, ChoroplethSummary) {
    let mut features = Vec::with_capacity(vector.len());
    let mut skipped = Vec::new();
    for (id, value) in vector.iter() {
        let Some(&i) = boundaries.index.get(id) else {
            skipped.push(id.to_string());
            continue;
        };
        let mut feature = boundaries.features[i].clone();
        let props = feature
            .as_object_mut()
            .expect("validated feature")
            .entry("properties")
            .or_insert_with(|| Value::Object(Map::new()));
        if let Some(obj) = props.as_object_mut() {
            obj.insert("value".into(), json!(value));
        }
        features.push(feature);
    }
    let summary = ChoroplethSummary {
        written: features.len(),
        skipped,
    };
    (json!({ "type": "FeatureCollection", "features": features }), summary)
}

pub fn export_choropleth(
    vector: &AreaVector,
    boundaries: &BoundaryFile,
    out_path: impl AsRef<Path>,
) -> Result<ChoroplethSummary> {
    if vector.is_empty() {
        warn!("empty vector; writing an empty feature collection");
    }
    let (collection, summary) = choropleth_value(vector, boundaries);
    if !summary.skipped.is_empty() {
        warn!("{} area(s) have no boundary and were skipped", summary.skipped.len());
    }
    let text = serde_json::to_string(&collection)?;
    write_atomic(out_path, |w| w.write_all(text.as_bytes()))?;
    Ok(summary)
}
