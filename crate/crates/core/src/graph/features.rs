use std::collections::HashSet;

use log::warn;

use crate::error::{Error, Result};

/// Dense area × variable table, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    area_ids: Vec<String>,
    column_names: Vec<String>,
    values: Vec<f64>,
    standardized: bool,
    column_means: Vec<f64>,
    column_stds: Vec<f64>,
}

impl FeatureMatrix {
    /// Builds a raw (unstandardized) matrix from row-major values.
    pub fn new(area_ids: Vec<String>, column_names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n_cols = column_names.len();
        if values.len() != area_ids.len() * n_cols {
            return Err(Error::Shape(format!(
                "{} values for {} rows × {} columns",
                values.len(),
                area_ids.len(),
                n_cols
            )));
        }
        let mut seen = HashSet::with_capacity(area_ids.len());
        for id in &area_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateAreaId(id.clone()));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                row: pos / n_cols.max(1),
                column: pos % n_cols.max(1),
            });
        }
        Ok(Self {
            area_ids,
            column_names,
            values,
            standardized: false,
            column_means: Vec::new(),
            column_stds: Vec::new(),
        })
    }

    /// Builds a raw matrix from a slice of rows.
    pub fn from_rows(area_ids: Vec<String>, column_names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != column_names.len()) {
            return Err(Error::Shape(format!(
                "row of length {} for {} columns",
                bad.len(),
                column_names.len()
            )));
        }
        Self::new(area_ids, column_names, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.area_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn area_ids(&self) -> &[String] {
        &self.area_ids
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_cols();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, col)).collect()
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Means of the retained raw columns; empty unless standardized.
    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    /// Population standard deviations of the retained raw columns; empty
    /// unless standardized.
    pub fn column_stds(&self) -> &[f64] {
        &self.column_stds
    }

    /// Treats the values as already standardized (precomputed z-scores, for
    /// instance). Column means and stds stay empty.
    pub fn mark_standardized(mut self) -> Self {
        self.standardized = true;
        self
    }

    /// Reorders rows; `order[i]` is the source row of output row `i`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let mut out = self.clone();
        out.area_ids = order.iter().map(|&i| self.area_ids[i].clone()).collect();
        out.values = order.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        out
    }
}

/// Output of [`standardize`]: the standardized matrix and the names of any
/// constant columns that were dropped.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub matrix: FeatureMatrix,
    pub dropped_columns: Vec<String>,
}

/// Centers every column and divides by its population standard deviation
/// (denominator M). Constant columns are dropped and reported.
pub fn standardize(raw: &FeatureMatrix) -> Result<Standardized> {
    let m = raw.n_rows();
    let n = raw.n_cols();
    if m < 2 {
        return Err(Error::TooFewRows { required: 2, got: m });
    }
    if let Some(pos) = raw.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput {
            row: pos / n,
            column: pos % n,
        });
    }

    let mut keep = Vec::with_capacity(n);
    let mut means = Vec::with_capacity(n);
    let mut stds = Vec::with_capacity(n);
    let mut dropped = Vec::new();
    for j in 0..n {
        let mean = (0..m).map(|i| raw.get(i, j)).sum::<f64>() / m as f64;
        let var = (0..m).map(|i| (raw.get(i, j) - mean).powi(2)).sum::<f64>() / m as f64;
        let std = var.sqrt();
        // A column whose spread is at rounding level of its magnitude is constant.
        let constant = (0..m).all(|i| raw.get(i, j) == raw.get(0, j))
            || std <= 8.0 * f64::EPSILON * mean.abs();
        if constant {
            dropped.push(raw.column_names[j].clone());
        } else {
            keep.push(j);
            means.push(mean);
            stds.push(std);
        }
    }
    if keep.is_empty() {
        return Err(Error::AllColumnsConstant);
    }
    if !dropped.is_empty() {
        warn!("dropping {} constant column(s): {}", dropped.len(), dropped.join(", "));
    }

    let mut values = Vec::with_capacity(m * keep.len());
    for i in 0..m {
        for (c, &j) in keep.iter().enumerate() {
            values.push((raw.get(i, j) - means[c]) / stds[c]);
        }
    }
    let matrix = FeatureMatrix {
        area_ids: raw.area_ids.clone(),
        column_names: keep.iter().map(|&j| raw.column_names[j].clone()).collect(),
        values,
        standardized: true,
        column_means: means,
        column_stds: stds,
    };
    Ok(Standardized {
        matrix,
        dropped_columns: dropped,
    })
}
