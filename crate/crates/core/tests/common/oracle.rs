//! Independent reference implementations for cross-checking.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wetval_core::design::DesignMatrix;
use wetval_core::linalg::Matrix;

/// Solves A z = b by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (t, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *t -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * z[j]).sum();
        z[i] = (b[i] - s) / a[i][i];
    }
    z
}

pub fn xtx(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = x[0].len();
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| x.iter().map(|r| r[i] * r[j]).sum())
                .collect()
        })
        .collect()
}

/// β = (XᵀX)⁻¹ Xᵀy via the normal equations.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let xty = (0..p)
        .map(|j| x.iter().zip(y).map(|(r, v)| r[j] * v).sum())
        .collect();
    gauss_solve(xtx(x), xty)
}

/// Diagonal of (XᵀX)⁻¹, one unit vector at a time.
pub fn inverse_diagonal(x: &[Vec<f64>]) -> Vec<f64> {
    let a = xtx(x);
    let p = a.len();
    (0..p)
        .map(|i| {
            let mut e = vec![0.0; p];
            e[i] = 1.0;
            gauss_solve(a.clone(), e)[i]
        })
        .collect()
}

/// Random well-conditioned regression: intercept plus k uniform regressors.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>) {
    let k = rng.gen_range(1..=5);
    let n = rng.gen_range(k + 3..=30);
    let beta: Vec<f64> = (0..=k).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            std::iter::once(1.0)
                .chain((0..k).map(|_| rng.gen_range(-2.0..2.0)))
                .collect()
        })
        .collect();
    let y = x
        .iter()
        .map(|r| r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-1.0..1.0))
        .collect();
    (x, y)
}

pub fn design(x: &[Vec<f64>], y: &[f64]) -> DesignMatrix {
    let k = x[0].len() - 1;
    DesignMatrix {
        column_labels: std::iter::once("intercept".to_string())
            .chain((1..=k).map(|j| format!("x{j}")))
            .collect(),
        x: Matrix::from_rows(x),
        y: y.to_vec(),
        row_ids: (0..y.len()).map(|i| i.to_string()).collect(),
    }
}

/// Two-sided Student-t p-value for integer ν from the finite trigonometric
/// series for A(t|ν) = P(|T| < t).
pub fn t_p_series(t: f64, nu: u32) -> f64 {
    let theta = (t.abs() / (nu as f64).sqrt()).atan();
    let (s, c) = theta.sin_cos();
    let c2 = c * c;
    let a = if nu % 2 == 1 {
        let mut sum = 0.0;
        if nu > 1 {
            let mut term = 1.0;
            sum = 1.0;
            let mut j = 2;
            while j < nu - 1 {
                term *= (j as f64) / ((j + 1) as f64) * c2;
                sum += term;
                j += 2;
            }
            sum *= s * c;
        }
        std::f64::consts::FRAC_2_PI * (theta + sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut j = 1;
        while j < nu - 1 {
            term *= (j as f64) / ((j + 1) as f64) * c2;
            sum += term;
            j += 2;
        }
        s * sum
    };
    1.0 - a
}
