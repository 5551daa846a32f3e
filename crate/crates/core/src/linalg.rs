//! Dense complex linear algebra used by the propagators.
//!
//! Three independent routes to `exp(A) v` live here: Padé scaling and
//! squaring on the full matrix, a general complex eigendecomposition
//! (Schur form plus triangular back-substitution), and truncated Taylor
//! stepping of the matrix action.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Maximum absolute column sum.
pub fn norm_1(a: &CMatrix) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn real_to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| C64::new(x, 0.0))
}

/// `⟨a|b⟩` with the bra conjugated.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn overlap_sq(a: &CVector, b: &CVector) -> f64 {
    inner(a, b).norm_sqr()
}

// Padé [13/13] coefficients and the θ₁₃ bound for double precision.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let norm = norm_1(a);
    if !norm.is_finite() {
        return Err(Error::invalid("matrix", "non-finite entries in exponent"));
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = C64::new(2f64.powi(-squarings), 0.0);
    let a = a * scale;

    let ident = CMatrix::identity(n, n);
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let lu = (&v - &u).lu();
    let mut r = lu.solve(&(&v + &u)).ok_or(Error::Singular("Padé denominator"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Right eigenpairs of a general complex matrix.
#[derive(Debug, Clone)]
pub struct ComplexEigen {
    pub values: Vec<C64>,
    /// Unit-norm eigenvectors stored as columns.
    pub vectors: CMatrix,
    /// Largest `‖A v − λ v‖` over all pairs.
    pub max_residual: f64,
}

/// Eigen-decomposition through the complex Schur form `A = Q T Q†`.
///
/// The eigenvectors of `T` are found by back-substitution and rotated back
/// with `Q`. Residuals are measured on the original matrix.
pub fn complex_eigen(a: &CMatrix) -> Result<ComplexEigen> {
    let n = a.nrows();
    let schur = a.clone().try_schur(1e-15, 100_000).ok_or(Error::Singular("Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;

    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }

    let mut vectors = &q * &y;
    let mut max_residual: f64 = 0.0;
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    for k in 0..n {
        let mut col = vectors.column_mut(k);
        let nrm = col.norm();
        col /= C64::new(nrm, 0.0);
        let v = vectors.column(k);
        let r = (a * v - v * values[k]).norm();
        max_residual = max_residual.max(r);
    }
    Ok(ComplexEigen { values, vectors, max_residual })
}

/// Result of a stepped Taylor propagation: normalized vector plus the
/// natural log of the accumulated norm growth.
#[derive(Debug, Clone)]
pub struct SteppedAction {
    pub vector: CVector,
    pub log_norm: f64,
}

/// Applies `exp(-i t K)` to `v` by substepping a truncated Taylor series.
///
/// The substep is chosen so that `h‖K‖₁ ≤ 1`; each substep is renormalized
/// and its norm folded into `log_norm`, so arbitrarily long horizons cannot
/// overflow.
pub fn taylor_action(k: &CMatrix, v: &CVector, t: f64, tol: f64) -> Result<SteppedAction> {
    let mut out = v.clone();
    let start = out.norm();
    if start == 0.0 {
        return Err(Error::invalid("state", "zero vector"));
    }
    out /= C64::new(start, 0.0);
    let mut log_norm = start.ln();
    if t == 0.0 {
        return Ok(SteppedAction { vector: out, log_norm });
    }
    let knorm = norm_1(k);
    let substeps = ((knorm * t).ceil() as usize).max(1);
    let h = t / substeps as f64;
    let minus_ih = C64::new(0.0, -h);
    let inner_tol = (tol / substeps as f64).max(f64::EPSILON);

    for _ in 0..substeps {
        let mut term = out.clone();
        let mut sum = out.clone();
        for order in 1..=60 {
            term = (k * &term) * (minus_ih / order as f64);
            sum += &term;
            if term.norm() <= inner_tol * sum.norm() {
                break;
            }
        }
        let nrm = sum.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::Overflow { exponent: f64::INFINITY, limit: f64::MAX });
        }
        log_norm += nrm.ln();
        out = sum / C64::new(nrm, 0.0);
    }
    Ok(SteppedAction { vector: out, log_norm })
}
