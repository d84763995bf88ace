use std::collections::BTreeMap;

use serde::Serialize;

use super::{DeprivationTable, Domain};
use crate::area::AreaVector;
use crate::error::{Error, Result};

/// Within this distance of ±1 the coefficient is indistinguishable from
/// exact collinearity and is reported as ±1.
const UNIT_SNAP: f64 = 16.0 * f64::EPSILON;

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort);
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mean_x, b - mean_y);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || x.iter().all(|v| *v == x[0]) {
        return Err(Error::ConstantSeries("x".into()));
    }
    if syy == 0.0 || y.iter().all(|v| *v == y[0]) {
        return Err(Error::ConstantSeries("y".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    if 1.0 - r.abs() <= UNIT_SNAP {
        return Ok(r.signum());
    }
    Ok(r)
}

/// Symmetric matrix of pairwise correlations between named series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn from_series(series: &[(String, Vec<f64>)]) -> Result<Self> {
        let k = series.len();
        let mut values = vec![vec![1.0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let r = pearson(&series[i].1, &series[j].1).map_err(|e| match e {
                    Error::ConstantSeries(which) => {
                        let name = if which == "x" { &series[i].0 } else { &series[j].0 };
                        Error::ConstantSeries(name.clone())
                    }
                    other => other,
                })?;
                values[i][j] = r;
                values[j][i] = r;
            }
        }
        Ok(Self {
            names: series.iter().map(|(n, _)| n.clone()).collect(),
            values,
        })
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }
}

/// Correlations among IMD, the seven domains and any extra series, all
/// aligned with the table's LSOA order.
pub fn correlation_matrix(table: &DeprivationTable, extra: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix> {
    let mut series = Vec::with_capacity(8 + extra.len());
    series.push(("IMD".to_string(), table.imd_score().to_vec()));
    for d in Domain::ALL {
        series.push((d.name().to_string(), table.domain_score(d).to_vec()));
    }
    for (name, values) in extra {
        if values.len() != table.len() {
            return Err(Error::LengthMismatch {
                left: table.len(),
                right: values.len(),
            });
        }
        series.push((name.clone(), values.clone()));
    }
    CorrelationMatrix::from_series(&series)
}

/// Mean of the `count` largest domain correlations with `series`.
pub fn top_domain_mean(matrix: &CorrelationMatrix, series: &str, count: usize) -> Option<f64> {
    let mut rs: Vec<f64> = Domain::ALL
        .iter()
        .map(|d| matrix.get(series, d.name()))
        .collect::<Option<_>>()?;
    rs.sort_by(|a, b| b.total_cmp(a));
    rs.truncate(count);
    if rs.is_empty() {
        return None;
    }
    Some(rs.iter().sum::<f64>() / rs.len() as f64)
}

pub type DomainWeights = BTreeMap<Domain, f64>;

/// Per-LSOA weighted sum of domain scores, with the weights rescaled to sum
/// to one.
pub fn combine_domains(table: &DeprivationTable, weights: &DomainWeights) -> Result<Vec<f64>> {
    for d in Domain::ALL {
        match weights.get(&d) {
            None => return Err(Error::MissingDomain(d.name().into())),
            Some(w) if !w.is_finite() || *w < 0.0 => return Err(Error::InvalidWeight(d.name().into())),
            Some(_) => {}
        }
    }
    let total: f64 = Domain::ALL.iter().map(|d| weights[d]).sum();
    if total <= 0.0 {
        return Err(Error::InvalidWeight("all domains".into()));
    }
    Ok((0..table.len())
        .map(|i| {
            Domain::ALL
                .iter()
                .map(|d| weights[d] / total * table.domain_score(*d)[i])
                .sum()
        })
        .collect())
}

pub fn default_weights() -> DomainWeights {
    Domain::ALL.iter().map(|d| (*d, d.default_weight())).collect()
}

/// Flips `v` when needed so that it correlates non-negatively with
/// `reference`. Returns the oriented vector and whether it was flipped.
pub fn orient_to(v: &AreaVector, reference: &[f64]) -> Result<(AreaVector, bool)> {
    let r = pearson(&v.values, reference)?;
    if r < 0.0 {
        Ok((v.negated(), true))
    } else {
        Ok((v.clone(), false))
    }
}
