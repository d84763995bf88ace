use rayon::prelude::*;

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Dense symmetric matrix of Euclidean distances between rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    area_ids: Vec<String>,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a row-major M×M matrix. The caller guarantees symmetry and a zero
    /// diagonal; only the shape and sign are checked.
    pub fn from_dense(area_ids: Vec<String>, data: Vec<f64>) -> Result<Self> {
        let m = area_ids.len();
        if data.len() != m * m {
            return Err(Error::Shape(format!("{} entries for {m}×{m} distances", data.len())));
        }
        if data.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::Shape("distances must be finite and non-negative".into()));
        }
        Ok(Self { area_ids, data })
    }

    pub fn size(&self) -> usize {
        self.area_ids.len()
    }

    pub fn area_ids(&self) -> &[String] {
        &self.area_ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.size();
        &self.data[i * m..(i + 1) * m]
    }
}

/// All pairwise Euclidean distances between the rows of a standardized
/// matrix. Rows are processed in parallel; each entry is computed by the same
/// sequential sum regardless of scheduling.
pub fn pairwise_distances(b: &FeatureMatrix) -> Result<DistanceMatrix> {
    if !b.is_standardized() {
        return Err(Error::NotStandardized);
    }
    let m = b.n_rows();
    let mut data = vec![0.0; m * m];
    data.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
        let ri = b.row(i);
        for (j, slot) in out.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            // evaluate each unordered pair in a fixed orientation so D is exactly symmetric
            let (p, q) = if i < j { (ri, b.row(j)) } else { (b.row(j), ri) };
            *slot = p
                .iter()
                .zip(q)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
        }
    });
    Ok(DistanceMatrix {
        area_ids: b.area_ids().to_vec(),
        data,
    })
}
