//! Newton-step solver for the conjugate-block system
//!
//! ```text
//! [ A        diag(B) ] [ dV       ]   [ r       ]
//! [ conj(B)  conj(A) ] [ conj(dV) ] = [ conj(r) ]
//! ```
//!
//! The second block row is the conjugate of the first, so the system is
//! equivalent to the single complex equation `A dV + B conj(dV) = r`. Writing
//! `dV = x + jy` turns it into a real `2n x 2n` sparse system, which is
//! factorized with a sparse LU.

pub mod sparse_lu;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::complex::{norm_inf, ComplexVector, SparseComplexMatrix};
use crate::error::{Error, Result};

pub use sparse_lu::{factorize, CscMatrix, LuFactors, SymbolicLu};

/// Relative residual accepted after a solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateBlockSystem {
    pub a: SparseComplexMatrix,
    /// Diagonal of the `conj(dV)` coefficient.
    pub b: ComplexVector,
    pub r: ComplexVector,
}

impl ConjugateBlockSystem {
    pub fn new(a: SparseComplexMatrix, b: ComplexVector, r: ComplexVector) -> Self {
        Self { a, b, r }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.a.nrows();
        for len in [self.a.ncols(), self.b.len(), self.r.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        Ok(())
    }

    /// `A dV + B conj(dV) - r`.
    pub fn residual(&self, dv: &[Complex64]) -> Result<ComplexVector> {
        let mut res = self.a.mul_vec(dv)?;
        for (k, out) in res.iter_mut().enumerate() {
            *out += self.b[k] * dv[k].conj() - self.r[k];
        }
        Ok(res)
    }

    /// The full `2n x 2n` complex block matrix, for inspection and tests.
    pub fn block_matrix(&self) -> SparseComplexMatrix {
        let n = self.dim();
        let mut t: Vec<(usize, usize, Complex64)> = Vec::new();
        for (r, c, v) in self.a.iter() {
            t.push((r, c, v));
            t.push((n + r, n + c, v.conj()));
        }
        for (k, bk) in self.b.iter().enumerate() {
            t.push((k, n + k, *bk));
            t.push((n + k, k, bk.conj()));
        }
        SparseComplexMatrix::from_triplets(2 * n, 2 * n, t)
    }
}

/// Real form of a [`ConjugateBlockSystem`] in the unknowns `[x; y]`,
/// `dV = x + jy`, with right-hand side `[Re r; Im r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealifiedSystem {
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
}

impl RealifiedSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len() / 2
    }

    /// Complex step from a real solution vector `[x; y]`.
    pub fn to_complex(&self, xy: &[f64]) -> ComplexVector {
        let n = self.dim();
        (0..n).map(|k| Complex64::new(xy[k], xy[n + k])).collect()
    }

    /// `M [x; y] - b` folded back into complex form.
    pub fn complex_residual(&self, xy: &[f64]) -> ComplexVector {
        let n = self.dim();
        let mx = self.matrix.mul_vec(xy);
        (0..n)
            .map(|k| Complex64::new(mx[k] - self.rhs[k], mx[n + k] - self.rhs[n + k]))
            .collect()
    }
}

/// Every stored entry of `A` contributes to all four real blocks (even when
/// one of its parts is zero) and the diagonal is always present, so the
/// pattern depends only on the pattern of `A`.
pub fn realify(sys: &ConjugateBlockSystem) -> RealifiedSystem {
    let n = sys.a.nrows();
    let mut t = Vec::with_capacity(4 * (sys.a.nnz() + n));
    for (r, c, v) in sys.a.iter() {
        t.push((r, c, v.re));
        t.push((r, n + c, -v.im));
        t.push((n + r, c, v.im));
        t.push((n + r, n + c, v.re));
    }
    for (k, b) in sys.b.iter().enumerate() {
        t.push((k, k, b.re));
        t.push((k, n + k, b.im));
        t.push((n + k, k, b.im));
        t.push((n + k, n + k, -b.re));
    }
    let rhs = sys
        .r
        .iter()
        .map(|z| z.re)
        .chain(sys.r.iter().map(|z| z.im))
        .collect();
    RealifiedSystem {
        matrix: CscMatrix::from_triplets(2 * n, 2 * n, t),
        rhs,
    }
}

/// Solves conjugate-block systems, keeping the ordering of the last pattern
/// seen so repeated Newton steps only refactorize numerically.
#[derive(Debug, Clone, Default)]
pub struct ConjugateBlockSolver {
    symbolic: Option<SymbolicLu>,
}

impl ConjugateBlockSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, sys: &ConjugateBlockSystem) -> Result<ComplexVector> {
        sys.check()?;
        let real = realify(sys);
        let symbolic = match self.symbolic.take() {
            Some(s) if s.matches(&real.matrix) => s,
            _ => SymbolicLu::analyze(&real.matrix)?,
        };
        let lu = symbolic.factorize(&real.matrix);
        self.symbolic = Some(symbolic);
        let xy = lu?.solve(&real.rhs)?;
        let dv = real.to_complex(&xy);

        let residual = norm_inf(&sys.residual(&dv)?) / (1.0 + sys.r.norm_inf());
        if !(residual < RESIDUAL_TOLERANCE) {
            return Err(Error::ResidualCheck {
                relative_residual: residual,
            });
        }
        Ok(dv)
    }
}

/// One-shot solve of `A dV + B conj(dV) = r`.
pub fn solve_conjugate_block(sys: &ConjugateBlockSystem) -> Result<ComplexVector> {
    ConjugateBlockSolver::new().solve(sys)
}
