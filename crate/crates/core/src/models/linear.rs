//! Ordinary least squares.
//!
//! The normal equations are solved on standardised columns with a Cholesky
//! factorisation, which keeps the Gram matrix well scaled even when one
//! column is absolute depth in the thousands of meters. Columns that are
//! exactly constant get a zero coefficient. If the Gram matrix is still not
//! positive definite a ridge term of [`RIDGE`] is added to its diagonal.

use serde::{Deserialize, Serialize};

use super::{Matrix, Regressor};
use crate::error::{Error, Result};

pub const RIDGE: f64 = 1e-8;

/// Smallest accepted Cholesky pivot on the unit-diagonal Gram matrix.
const PIVOT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl Regressor for LinearModel {
    fn width(&self) -> usize {
        self.coefficients.len()
    }

    fn predict_one(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

pub fn fit_linear(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    let (n, p) = (x.rows(), x.cols());
    if n == 0 {
        return Err(Error::EmptyInput("linear regression needs at least one row"));
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { left: y.len(), right: n });
    }
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    let mut sd = vec![0.0; p];
    for i in 0..n {
        for ((s, v), m) in sd.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m).powi(2);
        }
    }
    // a summed mean of identical values can be off by an ulp, so constant
    // columns are found by comparison rather than by their variance
    let first = x.row(0).to_vec();
    let mut varies = vec![false; p];
    for i in 1..n {
        for ((v, f), c) in varies.iter_mut().zip(&first).zip(x.row(i)) {
            *v |= c != f;
        }
    }
    let active: Vec<usize> = (0..p)
        .filter(|&j| {
            sd[j] = (sd[j] / nf).sqrt();
            varies[j] && sd[j] > 0.0
        })
        .collect();

    let k = active.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    let mut z = vec![0.0; k];
    for i in 0..n {
        let row = x.row(i);
        for (a, &j) in active.iter().enumerate() {
            z[a] = (row[j] - mean[j]) / sd[j];
        }
        let r = y[i] - y_mean;
        for a in 0..k {
            rhs[a] += z[a] * r;
            for b in 0..=a {
                gram[a * k + b] += z[a] * z[b];
            }
        }
    }
    for a in 0..k {
        rhs[a] /= nf;
        for b in 0..=a {
            gram[a * k + b] /= nf;
            gram[b * k + a] = gram[a * k + b];
        }
    }

    let solution = match cholesky_solve(&gram, &rhs, k, 0.0) {
        Some(s) => s,
        None => cholesky_solve(&gram, &rhs, k, RIDGE).ok_or(Error::SingularSystem)?,
    };

    let mut coefficients = vec![0.0; p];
    for (a, &j) in active.iter().enumerate() {
        coefficients[j] = solution[a] / sd[j];
    }
    let intercept = y_mean - coefficients.iter().zip(&mean).map(|(b, m)| b * m).sum::<f64>();
    if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(LinearModel { intercept, coefficients })
}

/// Solves `(A + ridge I) x = b` for symmetric `A` (row-major, `k x k`).
fn cholesky_solve(a: &[f64], b: &[f64], k: usize, ridge: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j] + if i == j { ridge } else { 0.0 };
            for m in 0..j {
                s -= l[i * k + m] * l[j * k + m];
            }
            if i == j {
                if !(s > PIVOT_FLOOR) {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut y = vec![0.0; k];
    for i in 0..k {
        let s = b[i] - (0..i).map(|m| l[i * k + m] * y[m]).sum::<f64>();
        y[i] = s / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s = y[i] - (i + 1..k).map(|m| l[m * k + i] * x[m]).sum::<f64>();
        x[i] = s / l[i * k + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng;
    use rand::Rng as _;

    #[test]
    fn recovers_exact_line() {
        let x = Matrix::from_rows(1, (0..10).map(|i| [i as f64]));
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let m = fit_linear(&x, &y).unwrap();
        assert!((m.intercept - 1.0).abs() < 1e-9);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_target_gives_zero_slopes() {
        let mut r = rng(1);
        let x = Matrix::from_rows(3, (0..30).map(|_| [r.random::<f64>(), r.random(), r.random()]));
        let m = fit_linear(&x, &[7.0; 30]).unwrap();
        assert!((m.intercept - 7.0).abs() < 1e-9);
        assert!(m.coefficients.iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn constant_columns_are_ignored() {
        let x = Matrix::from_rows(3, (0..20).map(|i| [i as f64, 5.0, 1234.5]));
        let y: Vec<f64> = (0..20).map(|i| 0.5 * i as f64 - 3.0).collect();
        let m = fit_linear(&x, &y).unwrap();
        assert_eq!(&m.coefficients[1..], &[0.0, 0.0]);
        assert!((m.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((m.predict_one(&[4.0, 5.0, 1234.5]) - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_fall_back_to_ridge() {
        let x = Matrix::from_rows(2, (0..20).map(|i| [i as f64, 2.0 * i as f64]));
        let y: Vec<f64> = (0..20).map(|i| 3.0 * i as f64).collect();
        let m = fit_linear(&x, &y).unwrap();
        for i in 0..20 {
            assert!((m.predict_one(x.row(i)) - y[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn identity_prediction() {
        let m = LinearModel { intercept: 0.0, coefficients: vec![0.0, 1.0, 0.0] };
        assert_eq!(m.predict_one(&[3.0, -4.5, 9.0]), -4.5);
        let x = Matrix::from_rows(2, [[1.0, 2.0]]);
        assert!(matches!(m.predict(&x), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(fit_linear(&Matrix::from_rows(2, std::iter::empty::<[f64; 2]>()), &[]).is_err());
    }
}
