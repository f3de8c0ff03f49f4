use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::RadialGrid;
use super::quadrature::{chebyshev_t, compensated_apply, compensated_dot};
use crate::error::{Error, Result};

/// Nodal values of a radial profile u(r) on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl PartialEq for RadialFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_as(&other.grid) && self.values == other.values
    }
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    /// Combination of clamped basis functions.
    pub fn from_coefficients(grid: Arc<RadialGrid>, coeffs: &DVector<f64>) -> Self {
        let v = grid.basis() * coeffs;
        Self {
            values: v.as_slice().to_vec(),
            grid,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| factor * v).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Coefficients in the grid's clamped basis (least squares).
    pub fn clamped_coefficients(&self) -> DVector<f64> {
        self.grid.fit_clamped(&self.values)
    }

    /// Closest clamped profile in the nodal least-squares sense.
    ///
    /// The basis evaluation leaves `u'(1)` at roundoff times the norm of the
    /// boundary row of `d1`, which grows like `n^2`; a minimal-norm
    /// correction along that row removes it.
    pub fn enforce_clamped(&self) -> Self {
        let c = self.clamped_coefficients();
        let mut u = Self::from_coefficients(Arc::clone(&self.grid), &c);
        let last = self.grid.n() - 1;
        u.values[last] = 0.0;
        let row: Vec<f64> = self.grid.d1().row(last).iter().copied().collect();
        let row_sq: f64 = row[..last].iter().map(|a| a * a).sum();
        for _ in 0..2 {
            let du = compensated_dot(row.iter().copied(), &u.values);
            for (v, a) in u.values[..last].iter_mut().zip(&row) {
                *v -= du * a / row_sq;
            }
        }
        u
    }

    /// `(u(1), u'(1))` as seen by the nodal operators.
    pub fn boundary_values(&self) -> (f64, f64) {
        let last = self.grid.n() - 1;
        let du = compensated_dot(self.grid.d1().row(last).iter().copied(), &self.values);
        (self.values[last], du)
    }

    pub fn derivative(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: (self.grid.d1() * DVector::from_column_slice(&self.values))
                .as_slice()
                .to_vec(),
        }
    }

    /// Nodal values of `u'' + (3/r) u'`.
    pub fn laplacian(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: compensated_apply(self.grid.laplacian_matrix(), &self.values),
        }
    }

    /// Laplacian of a clamped profile; see
    /// [`RadialGrid::clamped_laplacian_matrix`]. Norms and energies use this
    /// operator.
    pub fn clamped_laplacian(&self) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: (self.grid.clamped_laplacian_matrix()
                * DVector::from_column_slice(&self.values))
            .as_slice()
            .to_vec(),
        }
    }

    /// Writes the profile as `r,u` CSV rows in ascending r.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,u")?;
        for (r, u) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{r},{u}")?;
        }
        Ok(())
    }

    /// Reads an `r,u` CSV whose radii coincide with the grid nodes.
    pub fn read_csv<R: BufRead>(grid: Arc<RadialGrid>, input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == "r,u" => {}
            Some((_, Ok(h))) => {
                return Err(Error::Parse {
                    line: 1,
                    reason: format!("expected header `r,u`, found `{h}`"),
                })
            }
            Some((_, Err(e))) => return Err(e.into()),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    reason: "empty input".into(),
                })
            }
        }
        let mut values = Vec::with_capacity(grid.n());
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let parse_err = |reason: String| Error::Parse {
                line: lineno,
                reason,
            };
            let (r, u) = line
                .split_once(',')
                .ok_or_else(|| parse_err("expected two columns".into()))?;
            let r: f64 = r.trim().parse().map_err(|e| parse_err(format!("{e}")))?;
            let u: f64 = u.trim().parse().map_err(|e| parse_err(format!("{e}")))?;
            let k = values.len();
            let node = *grid
                .nodes()
                .get(k)
                .ok_or_else(|| parse_err("more rows than grid nodes".into()))?;
            if (node - r).abs() > 1e-12 {
                return Err(parse_err(format!(
                    "radius {r} does not match grid node {node}"
                )));
            }
            values.push(u);
        }
        Self::new(grid, values)
    }
}

/// Number of smooth modes used by [`random_profile`].
pub const RANDOM_PROFILE_MODES: usize = 16;

/// Random smooth clamped profile
/// `sum_k c_k (1 - r^2)^2 T_k(2r^2 - 1)` with `c_k ~ N(0, 1) / (1 + k^2)`.
///
/// The underlying smooth function depends only on the RNG stream, so the
/// same seed yields the same profile on every grid (up to the clamped fit on
/// finite-difference grids).
pub fn random_profile<R: Rng + ?Sized>(grid: &Arc<RadialGrid>, rng: &mut R) -> RadialFunction {
    let coeffs: Vec<f64> = (0..RANDOM_PROFILE_MODES)
        .map(|k| {
            let z: f64 = rng.sample(StandardNormal);
            z / (1.0 + (k * k) as f64)
        })
        .collect();
    let raw = RadialFunction::from_fn(Arc::clone(grid), |r| {
        let s = r * r;
        let x = 2.0 * s - 1.0;
        let envelope = (1.0 - s) * (1.0 - s);
        envelope
            * coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * chebyshev_t(k, x))
                .sum::<f64>()
    });
    raw.enforce_clamped()
}
