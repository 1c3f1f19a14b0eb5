//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` with `p < q` in row
//! order and applies the plane rotation that zeroes `a[p][q]`. The
//! accumulated rotations are the eigenvectors. The visiting order, the sort
//! and the sign convention are all fixed, so identical input gives
//! bit-identical output.

use nalgebra::DMatrix;

use crate::error::{Result, SmiError};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Square matrix known to be symmetric within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(SmiError::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if !a.is_finite() || !b.is_finite() || (a - b).abs() > Self::SYMMETRY_TOLERANCE {
                    return Err(SmiError::Dimension(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Eigenvalues in descending order with matching unit eigenvectors as
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub sweeps: usize,
    /// Off-diagonal Frobenius norm at exit.
    pub off_diagonal: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn total(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * sum).sqrt()
}

/// Full eigendecomposition with the default sweep cap.
///
/// Iteration stops once the off-diagonal Frobenius norm drops below
/// `tol * max(1, ‖A‖_F)`.
pub fn eigendecompose(m: &SymmetricMatrix, tol: f64) -> Result<Spectrum> {
    eigendecompose_with(m, tol, DEFAULT_MAX_SWEEPS)
}

pub fn eigendecompose_with(m: &SymmetricMatrix, tol: f64, max_sweeps: usize) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(SmiError::Config(vec![format!(
            "eigensolver tolerance must be positive, got {tol}"
        )]));
    }
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    // mirror the upper triangle so round-off asymmetry in the input cannot leak
    for p in 0..n {
        for q in (p + 1)..n {
            a[(q, p)] = a[(p, q)];
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = tol * a.norm().max(1.0);

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off >= threshold {
        if sweeps == max_sweeps {
            return Err(SmiError::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        orient(col.as_mut_slice());
        eigenvectors.set_column(dst, &col);
    }

    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        sweeps,
        off_diagonal: off,
    })
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.nrows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    // smaller root of t² + 2θt − 1 = 0, so |rotation angle| ≤ π/4
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// Flips `col` so its largest-magnitude entry is positive; the first such
/// entry wins ties.
pub(crate) fn orient(col: &mut [f64]) {
    let mut best = 0;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > col[best].abs() {
            best = i;
        }
    }
    if col.get(best).is_some_and(|&x| x < 0.0) {
        col.iter_mut().for_each(|x| *x = -*x);
    }
}
