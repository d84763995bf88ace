//! Smallest eigenpairs of symmetric operators.
//!
//! Two routes: a dense full decomposition for small problems and a restarted
//! block Chebyshev-Davidson iteration for large sparse ones. Each outer step
//! pushes the current Ritz vectors through a Chebyshev polynomial that damps
//! the unwanted upper part of the spectrum, then re-solves the projected
//! problem. The block width exceeds the number of wanted pairs so that
//! repeated eigenvalues, such as the zero modes of a disconnected graph, are
//! all captured.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// An upper bound on the spectrum.
    fn spectrum_upper_bound(&self) -> f64;
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn spectrum_upper_bound(&self) -> f64 {
        // Gershgorin
        (0..self.nrows())
            .map(|i| {
                self[(i, i)]
                    + (0..self.ncols())
                        .filter(|&j| j != i)
                        .map(|j| self[(i, j)].abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Eigenvalues in ascending order with their unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct IterativeOptions {
    /// Target residual norm `‖A y - θ y‖` for every wanted pair.
    pub tolerance: f64,
    /// Largest search space before a restart; 0 picks a size from the request.
    pub max_basis: usize,
    /// Degree of the Chebyshev filter applied each outer iteration.
    pub filter_degree: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_basis: 0,
            filter_degree: 24,
            max_iterations: 2000,
            seed: 0x5eed,
        }
    }
}

/// The `count` smallest eigenpairs from a dense symmetric decomposition.
pub fn lowest_dense(matrix: &DMatrix<f64>, count: usize) -> EigenPairs {
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    order.truncate(count);
    EigenPairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect(),
    }
}

struct Subspace {
    basis: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    // projected matrix Vᵀ A V
    projected: Vec<Vec<f64>>,
}

impl Subspace {
    fn new() -> Self {
        Self {
            basis: Vec::new(),
            images: Vec::new(),
            projected: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonalizes `v` against the basis by repeated Gram-Schmidt passes
    /// and appends it unless it is numerically dependent.
    fn push<O: SymmetricOperator>(&mut self, op: &O, mut v: Vec<f64>) -> bool {
        let start = norm(&v);
        if start == 0.0 {
            return false;
        }
        let mut len = start;
        for _ in 0..4 {
            for b in &self.basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
            let after = norm(&v);
            let settled = after > 0.5 * len;
            len = after;
            if settled || len <= 1e-13 * start {
                break;
            }
        }
        if len <= 1e-12 * start {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= len);
        let mut image = vec![0.0; v.len()];
        op.apply(&v, &mut image);
        let row: Vec<f64> = self.basis.iter().map(|b| dot(b, &image)).collect();
        for (r, &h) in self.projected.iter_mut().zip(&row) {
            r.push(h);
        }
        let mut last = row;
        last.push(dot(&v, &image));
        self.projected.push(last);
        self.basis.push(v);
        self.images.push(image);
        true
    }

    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let k = self.len();
        let h = DMatrix::from_fn(k, k, |i, j| {
            // symmetrize the rounding in the projected matrix
            0.5 * (self.projected[i][j] + self.projected[j][i])
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    fn combine(&self, from: &[Vec<f64>], coeffs: &DMatrix<f64>, col: usize) -> Vec<f64> {
        let mut out = vec![0.0; from[0].len()];
        for (i, v) in from.iter().enumerate() {
            axpy(coeffs[(i, col)], v, &mut out);
        }
        out
    }
}

/// The `count` smallest eigenpairs of a symmetric operator by restarted
/// block Davidson iteration.
pub fn lowest_iterative<O: SymmetricOperator>(
    op: &O,
    count: usize,
    options: IterativeOptions,
) -> Result<EigenPairs> {
    let n = op.dim();
    if count == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    if count > n {
        return Err(Error::SpectrumExhausted {
            requested: count,
            available: n,
        });
    }
    let block = (count + (count / 2).max(2)).min(n);
    let max_basis = if options.max_basis == 0 {
        (6 * block).max(80)
    } else {
        options.max_basis.max(2 * block)
    }
    .min(n);
    // only used when max_basis < n, where max_basis >= 2 * block >= block + count
    let keep_on_restart = (max_basis / 2).max(count + block).min(max_basis.saturating_sub(block));

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let random_vector = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    };

    let upper = op.spectrum_upper_bound();
    let mut space = Subspace::new();
    while space.len() < block {
        let v = random_vector(&mut rng);
        space.push(op, v);
    }

    let mut worst = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let (theta, coeffs) = space.ritz();
        let k = space.len();
        let tracked = block.min(k);

        let mut residuals = Vec::with_capacity(tracked);
        let mut ritz_vectors = Vec::with_capacity(tracked);
        worst = 0.0;
        for (c, &t) in theta.iter().enumerate().take(tracked) {
            let y = space.combine(&space.basis, &coeffs, c);
            let mut r = space.combine(&space.images, &coeffs, c);
            axpy(-t, &y, &mut r);
            let rn = norm(&r);
            if c < count {
                worst = worst.max(rn);
            }
            residuals.push((rn, r));
            ritz_vectors.push(y);
        }

        log::trace!("iteration: basis {k}, worst residual {worst:e}, theta {:?}", &theta[..tracked]);
        if worst <= options.tolerance || k == n {
            let vectors = ritz_vectors
                .into_iter()
                .take(count)
                .map(|mut y| {
                    let len = norm(&y);
                    y.iter_mut().for_each(|x| *x /= len);
                    y
                })
                .collect();
            return Ok(EigenPairs {
                values: theta[..count].to_vec(),
                vectors,
            });
        }

        // damp everything above the first untracked Ritz value
        let lower = theta[tracked.min(k - 1)];
        let directions: Vec<Vec<f64>> = residuals
            .iter()
            .zip(&ritz_vectors)
            .filter(|((rn, _), _)| *rn > options.tolerance)
            .map(|(_, y)| chebyshev_filter(op, y, options.filter_degree, lower, upper))
            .collect();

        if max_basis < n && k + directions.len() > max_basis {
            let keep = keep_on_restart.min(k);
            let mut restarted = Subspace::new();
            for c in 0..keep {
                let y = match ritz_vectors.get(c) {
                    Some(v) => v.clone(),
                    None => space.combine(&space.basis, &coeffs, c),
                };
                restarted.push(op, y);
            }
            space = restarted;
        }

        let mut added = 0;
        for d in directions {
            if space.len() >= n {
                break;
            }
            if space.push(op, d) {
                added += 1;
            }
        }
        if added == 0 && space.len() < n {
            let v = random_vector(&mut rng);
            space.push(op, v);
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "{} iterations, worst residual {worst:e} (tolerance {:e})",
        options.max_iterations, options.tolerance
    )))
}

/// `p(A) x` for the degree-`degree` Chebyshev polynomial mapped onto
/// `[lower, upper]`, which stays bounded there and grows below `lower`.
fn chebyshev_filter<O: SymmetricOperator>(op: &O, x: &[f64], degree: usize, lower: f64, upper: f64) -> Vec<f64> {
    let n = x.len();
    if degree == 0 || upper <= lower {
        return x.to_vec();
    }
    let half_width = (upper - lower) / 2.0;
    let center = (upper + lower) / 2.0;
    let mut prev = x.to_vec();
    let mut cur = vec![0.0; n];
    op.apply(x, &mut cur);
    for (c, p) in cur.iter_mut().zip(&prev) {
        *c = (*c - center * p) / half_width;
    }
    let mut next = vec![0.0; n];
    for _ in 1..degree {
        op.apply(&cur, &mut next);
        for ((nx, c), p) in next.iter_mut().zip(&cur).zip(&prev) {
            *nx = 2.0 * (*nx - center * c) / half_width - p;
        }
        // keep magnitudes bounded
        let scale = norm(&next);
        if scale > 1e100 {
            next.iter_mut().for_each(|v| *v /= scale);
            cur.iter_mut().for_each(|v| *v /= scale);
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
