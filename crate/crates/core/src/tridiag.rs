//! Thomas algorithm for tridiagonal systems.
//!
//! The factorization is stored so that a constant matrix (the implicit
//! diffusion operator of a fixed-step scheme) is eliminated once and then
//! applied to many right-hand sides.

use crate::{Error, Result};

/// LU factors of a tridiagonal matrix without pivoting.
#[derive(Debug, Clone)]
pub struct Tridiag {
    lower: Vec<f64>,
    /// Reciprocal of the eliminated diagonal.
    inv_diag: Vec<f64>,
    /// Eliminated super-diagonal, `c_i / d_i`.
    upper: Vec<f64>,
}

impl Tridiag {
    /// Factor the matrix with sub-diagonal `lower[i] = A[i+1][i]`, diagonal
    /// `diag` and super-diagonal `upper[i] = A[i][i+1]`.
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::Contract(format!(
                "tridiagonal sizes {}/{}/{} are inconsistent",
                lower.len(),
                n,
                upper.len()
            )));
        }
        let mut inv_diag = vec![0.0; n];
        let mut up = vec![0.0; n.saturating_sub(1)];
        let mut d = diag[0];
        for i in 0..n {
            if i > 0 {
                d = diag[i] - lower[i - 1] * up[i - 1];
            }
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Numeric(format!("zero pivot at row {i}")));
            }
            inv_diag[i] = 1.0 / d;
            if i + 1 < n {
                up[i] = upper[i] * inv_diag[i];
            }
        }
        Ok(Tridiag {
            lower: lower.to_vec(),
            inv_diag,
            upper: up,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_diag.is_empty()
    }

    /// Solve in place: `x` holds the right-hand side on entry.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        x[0] *= self.inv_diag[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) * self.inv_diag[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
    }
}

/// Strict row diagonal dominance, which guarantees a stable elimination.
pub fn diagonally_dominant(lower: &[f64], diag: &[f64], upper: &[f64]) -> bool {
    let n = diag.len();
    (0..n).all(|i| {
        let off = if i > 0 { lower[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { upper[i].abs() } else { 0.0 };
        diag[i].abs() > off
    })
}

/// One-shot solve of a tridiagonal system.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let t = Tridiag::new(lower, diag, upper)?;
    if rhs.len() != t.len() {
        return Err(Error::Contract("right-hand side has the wrong length".into()));
    }
    let mut x = rhs.to_vec();
    t.solve_in_place(&mut x);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3 5 3] → x = 1
        let x = solve(&[1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0], &[3.0, 5.0, 3.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_equation() {
        let x = solve(&[], &[4.0], &[], &[2.0]).unwrap();
        assert_eq!(x, vec![0.5]);
    }

    #[test]
    fn zero_pivot_reported() {
        assert!(Tridiag::new(&[1.0], &[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn dominance() {
        assert!(diagonally_dominant(&[-1.0], &[3.0, 3.0], &[-2.0]));
        assert!(!diagonally_dominant(&[-1.0], &[1.0, 3.0], &[-2.0]));
    }
}
