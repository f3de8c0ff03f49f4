use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::grid::{RadialGrid, SPHERE_AREA};
use super::norms::{check_beta, weight_unchecked};
use crate::error::{Error, Result};

/// Gram matrices above this condition estimate are rejected.
pub const MAX_CONDITION: f64 = 1e14;

/// A grid together with a weight exponent: quadrature weights for the
/// energy norm and the factored Gram matrix of the clamped basis.
#[derive(Debug)]
pub struct WeightedSpace {
    grid: Arc<RadialGrid>,
    beta: f64,
    mass_weights: Vec<f64>,
    energy_weights: Vec<f64>,
    gram: DMatrix<f64>,
    cholesky: Option<Cholesky<f64, Dyn>>,
    condition: f64,
}

impl WeightedSpace {
    pub fn new(grid: Arc<RadialGrid>, beta: f64) -> Result<Arc<Self>> {
        check_beta(beta)?;
        let mass_weights: Vec<f64> = grid
            .quad_weights()
            .iter()
            .map(|w| SPHERE_AREA * w)
            .collect();
        let energy_weights: Vec<f64> = grid
            .nodes()
            .iter()
            .zip(&mass_weights)
            .map(|(&r, m)| m * weight_unchecked(r, beta))
            .collect();
        let m = grid.basis_laplacian();
        let mut weighted = m.clone();
        for (i, w) in energy_weights.iter().enumerate() {
            weighted.row_mut(i).scale_mut(*w);
        }
        let mut gram = m.transpose() * weighted;
        // symmetrize against roundoff
        let sym = (&gram + gram.transpose()) * 0.5;
        gram = sym;
        let cholesky = Cholesky::new(gram.clone());
        let condition = match &cholesky {
            Some(ch) => condition_estimate(&gram, ch),
            None => f64::INFINITY,
        };
        Ok(Arc::new(Self {
            grid,
            beta,
            mass_weights,
            energy_weights,
            gram,
            cholesky,
            condition,
        }))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `2 pi^2` times the radial quadrature weights.
    pub fn mass_weights(&self) -> &[f64] {
        &self.mass_weights
    }

    /// Mass weights multiplied by the logarithmic weight at each node.
    pub fn energy_weights(&self) -> &[f64] {
        &self.energy_weights
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    /// `int_B w Δu Δv` from nodal Laplacians.
    pub fn inner_from_laplacians(&self, lap_u: &[f64], lap_v: &[f64]) -> f64 {
        self.energy_weights
            .iter()
            .zip(lap_u.iter().zip(lap_v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Solves `gram * x = rhs`.
    pub fn solve_gram(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.cholesky {
            Some(ch) if self.condition <= MAX_CONDITION => Ok(ch.solve(rhs)),
            _ => Err(Error::IllConditioned {
                condition: self.condition,
            }),
        }
    }

    /// Squared norm of a coefficient vector.
    pub fn coefficient_norm_sq(&self, c: &DVector<f64>) -> f64 {
        self.coefficient_inner(c, c)
    }

    pub fn coefficient_inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.gram * b))
    }
}

/// Power iteration on A and A^{-1}.
fn condition_estimate(a: &DMatrix<f64>, ch: &Cholesky<f64, Dyn>) -> f64 {
    let n = a.nrows();
    let start = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919) % 13) as f64);
    let mut x = start.normalize();
    let mut lmax = 0.0;
    for _ in 0..60 {
        let y = a * &x;
        lmax = x.dot(&y);
        let norm = y.norm();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        x = y / norm;
    }
    let mut x = start.normalize();
    let mut inv_max = 0.0;
    for _ in 0..60 {
        let y = ch.solve(&x);
        inv_max = x.dot(&y);
        x = y.normalize();
    }
    lmax * inv_max
}
