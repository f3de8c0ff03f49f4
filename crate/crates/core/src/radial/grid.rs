use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::quadrature::{chebyshev_t, differentiation_matrices_dd, gauss_radau_jacobi01};
use crate::error::{invalid, Result};

/// Area of the unit sphere S^3, the factor turning radial integrals
/// `int_0^1 v(r) r^3 dr` into ball integrals over B in R^4.
pub const SPHERE_AREA: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Smallest node count accepted by [`RadialGrid::new`].
pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridScheme {
    /// Polynomial collocation in `s = r^2` on Gauss–Radau nodes.
    #[serde(rename = "spectral-even")]
    SpectralEven,
    /// Cell-centred second-order finite differences, uniform spacing.
    #[serde(rename = "uniform-fd")]
    UniformFd,
}

impl fmt::Display for GridScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridScheme::SpectralEven => "spectral-even",
            GridScheme::UniformFd => "uniform-fd",
        })
    }
}

impl FromStr for GridScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "spectral-even" => Ok(GridScheme::SpectralEven),
            "uniform-fd" => Ok(GridScheme::UniformFd),
            other => Err(format!(
                "unknown grid scheme `{other}` (expected spectral-even or uniform-fd)"
            )),
        }
    }
}

/// Collocation nodes on (0, 1] with quadrature for `int_0^1 v(r) r^3 dr`,
/// nodal differentiation operators, and a basis of the clamped subspace
/// (every basis column satisfies u(1) = u'(1) = 0).
///
/// Immutable once built; shared through `Arc`.
#[derive(Debug)]
pub struct RadialGrid {
    n: usize,
    scheme: GridScheme,
    nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    d1: DMatrix<f64>,
    d2: DMatrix<f64>,
    laplacian: DMatrix<f64>,
    clamped_laplacian: DMatrix<f64>,
    basis: DMatrix<f64>,
    basis_laplacian: DMatrix<f64>,
    fit: OnceLock<DMatrix<f64>>,
}

/// Builds a grid; see [`RadialGrid::new`].
pub fn build_grid(n: usize, scheme: GridScheme) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(n, scheme)
}

impl RadialGrid {
    pub fn new(n: usize, scheme: GridScheme) -> Result<Arc<Self>> {
        if n < MIN_NODES {
            return Err(invalid(
                "n",
                format!("must be at least {MIN_NODES} for a fourth-order operator, got {n}"),
            ));
        }
        let grid = match scheme {
            GridScheme::SpectralEven => Self::spectral(n),
            GridScheme::UniformFd => Self::finite_difference(n),
        };
        Ok(Arc::new(grid))
    }

    fn spectral(n: usize) -> Self {
        let (x, w) = gauss_radau_jacobi01(n);
        let mut nodes: Vec<f64> = x.iter().map(|xi| (0.5 * (1.0 + xi)).sqrt()).collect();
        nodes[n - 1] = 1.0;
        // interpolate at s = fl(r^2) so that r * r on a node reproduces it
        let s: Vec<f64> = nodes.iter().map(|r| r * r).collect();
        // int_0^1 v r^3 dr = (1/8) int_{-1}^{1} v (1 + x) dx
        let quad_weights: Vec<f64> = w.iter().map(|wi| wi / 8.0).collect();

        let (ds, ds2) = differentiation_matrices_dd(&s, 0.25);
        let mut d1 = DMatrix::zeros(n, n);
        let mut d2 = DMatrix::zeros(n, n);
        let mut laplacian = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (ds[(i, j)], ds2[(i, j)]);
                d1[(i, j)] = (a * (2.0 * nodes[i])).hi();
                d2[(i, j)] = (a * 2.0 + b * (4.0 * s[i])).hi();
                // u'' + 3u'/r = 8 u_s + 4 s u_ss
                laplacian[(i, j)] = (a * 8.0 + b * (4.0 * s[i])).hi();
            }
        }

        let dim = n - 2;
        let basis = DMatrix::from_fn(n, dim, |i, k| {
            let one_minus = 1.0 - s[i];
            one_minus * one_minus * chebyshev_t(k, 2.0 * s[i] - 1.0)
        });
        Self::assemble(
            n,
            GridScheme::SpectralEven,
            nodes,
            quad_weights,
            d1,
            d2,
            laplacian.clone(),
            laplacian,
            basis,
        )
    }

    fn finite_difference(n: usize) -> Self {
        let h = 1.0 / (n as f64 - 0.5);
        let mut nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        nodes[n - 1] = 1.0;

        let mut d1 = DMatrix::zeros(n, n);
        let mut d2 = DMatrix::zeros(n, n);
        let h2 = h * h;
        // even reflection through the origin: u(-h/2) = u(h/2)
        d1[(0, 0)] = -1.0 / (2.0 * h);
        d1[(0, 1)] = 1.0 / (2.0 * h);
        d2[(0, 0)] = -1.0 / h2;
        d2[(0, 1)] = 1.0 / h2;
        for i in 1..n - 1 {
            d1[(i, i - 1)] = -1.0 / (2.0 * h);
            d1[(i, i + 1)] = 1.0 / (2.0 * h);
            d2[(i, i - 1)] = 1.0 / h2;
            d2[(i, i)] = -2.0 / h2;
            d2[(i, i + 1)] = 1.0 / h2;
        }
        let l = n - 1;
        d1[(l, l)] = 3.0 / (2.0 * h);
        d1[(l, l - 1)] = -4.0 / (2.0 * h);
        d1[(l, l - 2)] = 1.0 / (2.0 * h);
        d2[(l, l)] = 2.0 / h2;
        d2[(l, l - 1)] = -5.0 / h2;
        d2[(l, l - 2)] = 4.0 / h2;
        d2[(l, l - 3)] = -1.0 / h2;

        let mut laplacian = d2.clone();
        for i in 0..n {
            let c = 3.0 / nodes[i];
            for j in 0..n {
                laplacian[(i, j)] += c * d1[(i, j)];
            }
        }

        // u(1) = 0 and the reflection u(1 + h) = u(1 - h)
        let mut clamped_laplacian = laplacian.clone();
        clamped_laplacian.row_mut(l).fill(0.0);
        clamped_laplacian[(l, l - 1)] = 2.0 / h2;
        clamped_laplacian[(l, l)] = -2.0 / h2;

        let quad_weights = moment_weights(&nodes, h);

        // Free values u_0..u_{n-3}; u(1) = 0 and the one-sided derivative
        // 3u_{n-1} - 4u_{n-2} + u_{n-3} = 0 fix the last two.
        let dim = n - 2;
        let mut basis = DMatrix::zeros(n, dim);
        for k in 0..dim {
            basis[(k, k)] = 1.0;
        }
        basis[(n - 2, dim - 1)] = 0.25;
        Self::assemble(
            n,
            GridScheme::UniformFd,
            nodes,
            quad_weights,
            d1,
            d2,
            laplacian,
            clamped_laplacian,
            basis,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        n: usize,
        scheme: GridScheme,
        nodes: Vec<f64>,
        quad_weights: Vec<f64>,
        d1: DMatrix<f64>,
        d2: DMatrix<f64>,
        laplacian: DMatrix<f64>,
        clamped_laplacian: DMatrix<f64>,
        mut basis: DMatrix<f64>,
    ) -> Self {
        let mut basis_laplacian = &clamped_laplacian * &basis;
        // Normalize columns in the unweighted energy norm; this is a diagonal
        // (Jacobi) rescaling of the Gram matrix.
        for k in 0..basis.ncols() {
            let norm_sq: f64 = (0..n)
                .map(|i| SPHERE_AREA * quad_weights[i] * basis_laplacian[(i, k)].powi(2))
                .sum();
            let scale = 1.0 / norm_sq.sqrt();
            basis.column_mut(k).scale_mut(scale);
            basis_laplacian.column_mut(k).scale_mut(scale);
        }
        RadialGrid {
            n,
            scheme,
            nodes,
            quad_weights,
            d1,
            d2,
            laplacian,
            clamped_laplacian,
            basis,
            basis_laplacian,
            fit: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn d1(&self) -> &DMatrix<f64> {
        &self.d1
    }

    pub fn d2(&self) -> &DMatrix<f64> {
        &self.d2
    }

    /// Nodal matrix of the radial Laplacian in R^4 for arbitrary profiles.
    pub fn laplacian_matrix(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Laplacian for profiles satisfying the clamped conditions; the
    /// finite-difference scheme closes the last row with the even reflection
    /// `u(1 + h) = u(1 - h)` instead of a one-sided stencil.
    pub fn clamped_laplacian_matrix(&self) -> &DMatrix<f64> {
        &self.clamped_laplacian
    }

    /// Clamped basis, one column per basis function (nodal values).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Nodal Laplacians of the clamped basis.
    pub fn basis_laplacian(&self) -> &DMatrix<f64> {
        &self.basis_laplacian
    }

    /// Dimension of the clamped subspace.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `int_B v dx` for a radial field given by nodal values.
    pub fn ball_integral(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n);
        SPHERE_AREA
            * self
                .quad_weights
                .iter()
                .zip(v)
                .map(|(w, vi)| w * vi)
                .sum::<f64>()
    }

    /// Least-squares coefficients of nodal values in the clamped basis.
    pub fn fit_clamped(&self, values: &[f64]) -> DVector<f64> {
        let pinv = self.fit.get_or_init(|| {
            let qr = self.basis.clone().qr();
            let r = qr.r();
            let q = qr.q();
            let rinv = r.try_inverse().expect("clamped basis has full column rank");
            rinv * q.transpose()
        });
        pinv * DVector::from_column_slice(values)
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other) || (self.n == other.n && self.scheme == other.scheme)
    }
}

/// Weights for `int_0^1 v r^3 dr` on the cell-centred grid.
///
/// Cell `i` is `[ih, (i+1)h]` (a half cell `[1 - h/2, 1]` for the boundary
/// node). On each cell `v` is expanded to second order about its node, with
/// derivatives from three-point stencils (one-sided at both ends); the
/// exact moments `int (r - r_i)^k r^3 dr`, k = 0, 1, 2, are then spread onto
/// the stencil nodes. The rule is exact
/// for quadratics.
fn moment_weights(nodes: &[f64], h: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n {
        let a = i as f64 * h;
        let b = if i == n - 1 { 1.0 } else { a + h };
        let [m0, m1, m2] = cell_moments(a, b, nodes[i]);
        let m2 = 0.5 * m2;
        w[i] += m0;
        // first and second derivative stencils at node i
        let (d1, d2): (Vec<(usize, f64)>, Vec<(usize, f64)>) = if i == 0 {
            (
                vec![(0, -1.5), (1, 2.0), (2, -0.5)],
                vec![(0, 1.0), (1, -2.0), (2, 1.0)],
            )
        } else if i == n - 1 {
            (
                vec![(i, 1.5), (i - 1, -2.0), (i - 2, 0.5)],
                vec![(i, 1.0), (i - 1, -2.0), (i - 2, 1.0)],
            )
        } else {
            (
                vec![(i - 1, -0.5), (i + 1, 0.5)],
                vec![(i - 1, 1.0), (i, -2.0), (i + 1, 1.0)],
            )
        };
        for (j, c) in d1 {
            w[j] += m1 * c / h;
        }
        for (j, c) in d2 {
            w[j] += m2 * c / (h * h);
        }
    }
    w
}

/// `int_a^b (r - c)^k r^3 dr` for k = 0, 1, 2.
fn cell_moments(a: f64, b: f64, c: f64) -> [f64; 3] {
    // r^3 = sum_j binom(3, j) c^(3-j) y^j with y = r - c
    let binom = [1.0, 3.0, 3.0, 1.0];
    let (ya, yb) = (a - c, b - c);
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        for (j, bj) in binom.iter().enumerate() {
            let e = (k + j + 1) as i32;
            *slot += bj * c.powi(3 - j as i32) * (yb.powi(e) - ya.powi(e)) / e as f64;
        }
    }
    out
}
