//! Quadrature rules used to build radial grids.

use nalgebra::{DMatrix, SymmetricEigen};
use twofloat::TwoFloat;

/// Gauss–Radau rule on [-1, 1] for the Jacobi weight `1 + x`, with one node
/// fixed at `x = 1`.
///
/// Nodes come from the eigenvalues of the Radau-modified Jacobi matrix
/// (Golub–Welsch); weights are `mu0 * v0^2`. Exact for polynomials of
/// degree `2n - 2`. Returned nodes are ascending and the last one is exactly 1.
pub fn gauss_radau_jacobi01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Radau needs at least two nodes");
    // Monic recurrence coefficients for (1-x)^0 (1+x)^1.
    let a = |k: usize| {
        let k = k as f64;
        1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0))
    };
    let b = |k: usize| {
        let k = k as f64;
        k * (k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 1.0))
    };

    // ratio p_k(1) / p_{k-1}(1)
    let fixed = 1.0;
    let mut ratio = fixed - a(0);
    for k in 1..n - 1 {
        ratio = (fixed - a(k)) - b(k) / ratio;
    }
    let last_diag = fixed - b(n - 1) / ratio;

    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = if k == n - 1 { last_diag } else { a(k) };
        if k + 1 < n {
            let off = b(k + 1).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = 2.0;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    nodes[n - 1] = 1.0;
    (nodes, weights)
}

/// Chebyshev polynomial T_k(x) by the three-term recurrence.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut t0, mut t1) = (1.0, x);
            for _ in 1..k {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

/// Barycentric weights for arbitrary distinct nodes, scaled by `capacity`
/// to keep the products inside the floating-point range.
pub fn barycentric_weights(nodes: &[f64], capacity: f64) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|j| {
            let mut prod = 1.0;
            for k in 0..n {
                if k != j {
                    prod *= (nodes[j] - nodes[k]) / capacity;
                }
            }
            1.0 / prod
        })
        .collect()
}

/// First and second derivative matrices of the interpolating polynomial
/// through `nodes`. Diagonals use the negative-sum identity so constants
/// differentiate to zero.
pub fn differentiation_matrices(nodes: &[f64], capacity: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (d1, d2) = differentiation_matrices_dd(nodes, capacity);
    (round(&d1), round(&d2))
}

pub(crate) fn round(m: &DMatrix<TwoFloat>) -> DMatrix<f64> {
    m.map(|v| v.hi())
}

/// As [`differentiation_matrices`], carried out in double-double arithmetic.
pub(crate) fn differentiation_matrices_dd(
    nodes: &[f64],
    capacity: f64,
) -> (DMatrix<TwoFloat>, DMatrix<TwoFloat>) {
    let n = nodes.len();
    let cap = TwoFloat::from(capacity);
    let lam: Vec<TwoFloat> = (0..n)
        .map(|j| {
            let mut prod = TwoFloat::from(1.0);
            for k in (0..n).filter(|&k| k != j) {
                prod *= TwoFloat::new_sub(nodes[j], nodes[k]) / cap;
            }
            prod.recip()
        })
        .collect();
    let zero = TwoFloat::from(0.0);
    let mut d1 = DMatrix::from_element(n, n, zero);
    for i in 0..n {
        let mut diag = zero;
        for j in (0..n).filter(|&j| j != i) {
            let v = (lam[j] / lam[i]) / TwoFloat::new_sub(nodes[i], nodes[j]);
            d1[(i, j)] = v;
            diag -= v;
        }
        d1[(i, i)] = diag;
    }
    let mut d2 = DMatrix::from_element(n, n, zero);
    for i in 0..n {
        let mut diag = zero;
        for j in (0..n).filter(|&j| j != i) {
            let inv = TwoFloat::new_sub(nodes[i], nodes[j]).recip();
            let v = d1[(i, j)] * (d1[(i, i)] - inv) * 2.0;
            d2[(i, j)] = v;
            diag -= v;
        }
        d2[(i, i)] = diag;
    }
    (d1, d2)
}

/// `m v` with every dot product accumulated in double-double precision.
pub fn compensated_apply(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    assert_eq!(m.ncols(), v.len(), "dimension mismatch");
    (0..m.nrows())
        .map(|i| compensated_dot((0..v.len()).map(|j| m[(i, j)]), v))
        .collect()
}

/// Dot product accumulated in double-double.
pub fn compensated_dot(a: impl IntoIterator<Item = f64>, b: &[f64]) -> f64 {
    let mut acc = TwoFloat::from(0.0);
    for (x, &y) in a.into_iter().zip(b) {
        acc += TwoFloat::new_mul(x, y);
    }
    acc.hi()
}
