//! Small dense linear algebra and transform-differentiation utilities.
//!
//! The systems solved here are dense, well conditioned and at most a few
//! thousand unknowns, so a plain LU factorization with partial pivoting is
//! used throughout; no sparse or iterative machinery.

use thiserror::Error;

/// Pivot threshold relative to the row scale of the original matrix.
const PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix must be square, got {rows} rows and {len} entries")]
    NotSquare { rows: usize, len: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is singular to working precision at pivot {index}")]
    Singular { index: usize },
    #[error("not a Laplace transform: f(0) = {value}, expected 1")]
    InvalidTransform { value: f64 },
}

/// A square system `A x = b` with one or more right-hand sides sharing `A`.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    pub dim: usize,
    /// Row-major `dim x dim`.
    pub matrix: Vec<f64>,
    pub rhs: Vec<Vec<f64>>,
}

impl DenseSystem {
    pub fn new(dim: usize, matrix: Vec<f64>, rhs: Vec<Vec<f64>>) -> Result<Self, NumericsError> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(NumericsError::NotSquare { rows: dim, len: matrix.len() });
        }
        if matrix.iter().any(|v| !v.is_finite())
            || rhs.iter().any(|b| b.len() != dim || b.iter().any(|v| !v.is_finite()))
        {
            return Err(NumericsError::NonFinite);
        }
        Ok(Self { dim, matrix, rhs })
    }
}

/// Solutions plus the relative infinity-norm residual of each right-hand side.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solutions: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

/// LU factors with partial pivoting, reusable across right-hand sides.
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(n: usize, matrix: &[f64]) -> Result<Self, NumericsError> {
        assert_eq!(matrix.len(), n * n);
        let mut lu = matrix.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let row_scale: Vec<f64> = (0..n)
            .map(|i| matrix[i * n..(i + 1) * n].iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect();
        for col in 0..n {
            let (mut best, mut best_val) = (col, lu[col * n + col].abs());
            for row in col + 1..n {
                let v = lu[row * n + col].abs();
                if v > best_val {
                    best = row;
                    best_val = v;
                }
            }
            let scale = row_scale[perm[best]].max(f64::MIN_POSITIVE);
            if best_val < PIVOT_TOL * scale {
                return Err(NumericsError::Singular { index: col });
            }
            if best != col {
                perm.swap(col, best);
                for j in 0..n {
                    lu.swap(col * n + j, best * n + j);
                }
            }
            let pivot = lu[col * n + col];
            for row in col + 1..n {
                let factor = lu[row * n + col] / pivot;
                lu[row * n + col] = factor;
                for j in col + 1..n {
                    lu[row * n + j] -= factor * lu[col * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    /// Solves in place: `x` enters as `b` and leaves as the solution.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        let permuted: Vec<f64> = self.perm.iter().map(|&p| x[p]).collect();
        x.copy_from_slice(&permuted);
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Factors once, solves every right-hand side and reports relative residuals
/// `max|Ax - b| / max|b|`.
pub fn solve(sys: &DenseSystem) -> Result<SolveOutcome, NumericsError> {
    let lu = LuFactors::factor(sys.dim, &sys.matrix)?;
    let mut solutions = Vec::with_capacity(sys.rhs.len());
    let mut residuals = Vec::with_capacity(sys.rhs.len());
    for b in &sys.rhs {
        let x = lu.solve(b);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..sys.dim {
            let mut ax = 0.0;
            for j in 0..sys.dim {
                ax += sys.matrix[i * sys.dim + j] * x[j];
            }
            num = num.max((ax - b[i]).abs());
            den = den.max(b[i].abs());
        }
        residuals.push(if den > 0.0 { num / den } else { num });
        solutions.push(x);
    }
    Ok(SolveOutcome { solutions, residuals })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentOrder {
    First,
    Second,
}

/// A moment extracted from a Laplace transform, with an error estimate.
/// `value` is `f64::INFINITY` when the derivative diverges at the origin.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub value: f64,
    pub error: f64,
}

impl MomentEstimate {
    pub fn is_divergent(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `E[Y^k]` from `f(s) = E[e^{-sY}]` via one-sided finite differences at
/// `s = 0` with Richardson extrapolation.
///
/// The initial step is `1e-3` of the transform's own decay scale (a crude
/// `1/E[Y]` estimate), refined over four halvings. Divergent moments (the
/// raw stencil values grow without bound under refinement) come back as the
/// infinite marker rather than an error.
pub fn lst_moment<F: Fn(f64) -> f64>(
    f: F,
    order: MomentOrder,
) -> Result<MomentEstimate, NumericsError> {
    let f0 = f(0.0);
    if (f0 - 1.0).abs() > 1e-12 {
        return Err(NumericsError::InvalidTransform { value: f0 });
    }

    // Find the scale where the transform has decayed by a few percent; this
    // pins 1/E[Y] to within an order of magnitude.
    let mut h = 1.0f64;
    for _ in 0..200 {
        let drop = 1.0 - f(h);
        if drop > 0.2 {
            h *= 0.5;
        } else if drop < 1e-3 {
            h *= 2.0;
        } else {
            break;
        }
    }
    let mean_guess = ((1.0 - f(h)) / h).max(f64::MIN_POSITIVE);
    let h0 = 1e-3 / mean_guess;

    // 5-point one-sided stencils; error O(h^4) for f', O(h^3) for f''.
    let stencil = |h: f64| -> f64 {
        let v: Vec<f64> = (0..5).map(|i| f(i as f64 * h)).collect();
        match order {
            MomentOrder::First => {
                -(-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
            }
            MomentOrder::Second => {
                (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4])
                    / (12.0 * h * h)
            }
        }
    };

    const LEVELS: usize = 5; // four Richardson refinements
    let raw: Vec<f64> = (0..LEVELS).map(|i| stencil(h0 / 2f64.powi(i as i32))).collect();

    // Divergence: successive corrections growing instead of shrinking, by a
    // margin well above rounding noise on the stencils.
    let diffs: Vec<f64> = raw.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let growing = diffs.windows(2).all(|w| w[1] >= w[0]);
    let exploded =
        diffs.last().unwrap_or(&0.0) > &(1.5 * diffs.first().unwrap_or(&0.0).max(1e-300));
    let significant =
        *diffs.last().unwrap() > 1e-3 * raw.last().unwrap().abs().max(f64::MIN_POSITIVE);
    if growing && exploded && significant && diffs[0] > 0.0 {
        return Ok(MomentEstimate { value: f64::INFINITY, error: f64::INFINITY });
    }

    // Richardson tableau; the stencil's error expansion starts at h^p0 and
    // gains one power per column.
    let p0 = match order {
        MomentOrder::First => 4,
        MomentOrder::Second => 3,
    };
    let mut tableau = vec![raw.clone()];
    for col in 1..LEVELS {
        let prev = &tableau[col - 1];
        let factor = 2f64.powi(p0 + col as i32 - 1);
        let next: Vec<f64> = (0..prev.len() - 1)
            .map(|i| (factor * prev[i + 1] - prev[i]) / (factor - 1.0))
            .collect();
        tableau.push(next);
    }
    let value = tableau[LEVELS - 1][0];
    let prev_best = tableau[LEVELS - 2][0];
    // Conservative estimate: last extrapolation correction plus the rounding
    // noise amplified by the smallest step.
    let h_min = h0 / 2f64.powi(LEVELS as i32 - 1);
    let round = match order {
        MomentOrder::First => 128.0 * f64::EPSILON / (12.0 * h_min),
        MomentOrder::Second => 320.0 * f64::EPSILON / (12.0 * h_min * h_min),
    };
    let error = 2.0 * (value - prev_best).abs() + round;
    Ok(MomentEstimate { value, error })
}

/// One panel of 15-point Gauss-Legendre quadrature.
fn gauss_legendre_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const X: [f64; 7] = [
        0.2011940939974345,
        0.3941513470775634,
        0.5709721726085388,
        0.7244177313601701,
        0.8482065834104272,
        0.9372733924007060,
        0.9879925180204854,
    ];
    const W: [f64; 7] = [
        0.1984314853271116,
        0.1861610000155622,
        0.1662692058169939,
        0.1395706779261543,
        0.1071592204671719,
        0.0703660474881081,
        0.0307532419961173,
    ];
    const W0: f64 = 0.2025782419255613;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = W0 * f(mid);
    for i in 0..7 {
        acc += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
    }
    acc * half
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadResult {
    pub value: f64,
    pub converged: bool,
}

/// Adaptive bisection around the 15-point Gauss-Legendre rule.
pub(crate) fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> QuadResult {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        converged: &mut bool,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = gauss_legendre_15(f, a, mid);
        let right = gauss_legendre_15(f, mid, b);
        let refined = left + right;
        if !refined.is_finite() {
            *converged = false;
            return refined;
        }
        if (refined - whole).abs() <= tol || depth >= 48 {
            if depth >= 48 {
                *converged = false;
            }
            return refined;
        }
        recurse(f, a, mid, left, 0.5 * tol, depth + 1, converged)
            + recurse(f, mid, b, right, 0.5 * tol, depth + 1, converged)
    }
    let whole = gauss_legendre_15(f, a, b);
    let mut converged = true;
    let value = recurse(f, a, b, whole, tol.max(1e-15), 0, &mut converged);
    QuadResult { value, converged }
}
