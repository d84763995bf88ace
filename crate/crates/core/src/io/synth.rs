use std::f64::consts::TAU;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;

/// Dimension of the ambient space synthetic manifolds are rotated into.
pub const AMBIENT_DIM: usize = 20;

/// Distance between the two cluster centres, in units of the cluster spread.
const CLUSTER_SEPARATION: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Unit segment; parameter is the arc position in [0, 1].
    Line1d,
    /// Unit circle; parameter is the angle in [0, 2π).
    Circle,
    /// Two unit-spread planar Gaussian blobs; parameter is the label 0 or 1.
    TwoClusters,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line1d" => Ok(Self::Line1d),
            "circle" => Ok(Self::Circle),
            "two_clusters" => Ok(Self::TwoClusters),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub features: FeatureMatrix,
    /// Ground-truth manifold parameter of each row.
    pub parameter: Vec<f64>,
}

/// Points on a low-dimensional manifold, rotated into `AMBIENT_DIM`
/// dimensions by a seeded random orthogonal matrix, plus isotropic Gaussian
/// noise of standard deviation `noise`.
pub fn generate_synthetic(kind: SyntheticKind, size: usize, noise: f64, seed: u64) -> Result<SyntheticData> {
    if size < 10 {
        return Err(Error::Config(format!("synthetic size must be at least 10, got {size}")));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::Config("noise must be a non-negative number".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = DMatrix::from_fn(AMBIENT_DIM, AMBIENT_DIM, |_, _| rng.sample::<f64, _>(StandardNormal));
    let rotation = gaussian.qr().q();

    let mut parameter = Vec::with_capacity(size);
    let mut values = Vec::with_capacity(size * AMBIENT_DIM);
    for _ in 0..size {
        let (a, b, p) = match kind {
            SyntheticKind::Line1d => {
                let t: f64 = rng.random();
                (t, 0.0, t)
            }
            SyntheticKind::Circle => {
                let theta = rng.random::<f64>() * TAU;
                (theta.cos(), theta.sin(), theta)
            }
            SyntheticKind::TwoClusters => {
                let label = if rng.random::<bool>() { 1.0 } else { 0.0 };
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                (label * CLUSTER_SEPARATION + dx, dy, label)
            }
        };
        parameter.push(p);
        for r in 0..AMBIENT_DIM {
            let jitter: f64 = rng.sample(StandardNormal);
            values.push(rotation[(r, 0)] * a + rotation[(r, 1)] * b + noise * jitter);
        }
    }
    let ids = (0..size).map(|i| format!("S{i:05}")).collect();
    let names = (1..=AMBIENT_DIM).map(|j| format!("x{j:02}")).collect();
    Ok(SyntheticData {
        features: FeatureMatrix::new(ids, names, values)?,
        parameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_line_is_one_dimensional() {
        let data = generate_synthetic(SyntheticKind::Line1d, 50, 0.0, 7).unwrap();
        let f = &data.features;
        let mut m = DMatrix::from_row_slice(f.n_rows(), f.n_cols(), f.values());
        for j in 0..m.ncols() {
            let mean = m.column(j).mean();
            m.column_mut(j).add_scalar_mut(-mean);
        }
        let sv = m.singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!(s[0] > 0.1);
        for v in &s[1..] {
            assert!(v.abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn seeded_and_validated() {
        let a = generate_synthetic(SyntheticKind::Circle, 30, 0.1, 3).unwrap();
        let b = generate_synthetic(SyntheticKind::Circle, 30, 0.1, 3).unwrap();
        assert_eq!(a.features, b.features);
        assert_eq!(a.parameter, b.parameter);
        assert_eq!(a.features.n_cols(), AMBIENT_DIM);
        assert!(matches!("torus".parse::<SyntheticKind>(), Err(Error::UnknownKind(_))));
        assert!(generate_synthetic(SyntheticKind::Line1d, 5, 0.0, 1).is_err());
    }
}
