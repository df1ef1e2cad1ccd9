//! Ordinary least squares with classical inference statistics.

use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::linalg::{dot, PivotedQr};
use crate::special::{f_upper_tail, t_p_value_two_sided};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum OlsError {
    #[error("design is rank deficient; linearly dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("insufficient observations: n = {n} with k = {k} regressors needs n > k + 1")]
    InsufficientObservations { n: usize, k: usize },
    #[error("invalid degrees of freedom: n = {n}, k = {k}")]
    InvalidDf { n: usize, k: usize },
    #[error("R² must lie in {range}, got {value}")]
    InvalidRSquared { value: f64, range: &'static str },
    #[error("response contains non-finite values")]
    NonFiniteResponse,
}

/// Fitted model. Vectors are aligned with `column_labels` (intercept first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub column_labels: Vec<String>,
    #[serde(with = "crate::model::float::vec")]
    pub coefficients: Vec<f64>,
    #[serde(with = "crate::model::float::vec")]
    pub std_errors: Vec<f64>,
    #[serde(with = "crate::model::float::vec")]
    pub t_values: Vec<f64>,
    #[serde(with = "crate::model::float::vec")]
    pub p_values: Vec<f64>,
    #[serde(with = "crate::model::float")]
    pub r2: f64,
    #[serde(with = "crate::model::float")]
    pub adj_r2: f64,
    #[serde(with = "crate::model::float")]
    pub f_stat: f64,
    #[serde(with = "crate::model::float")]
    pub f_p_value: f64,
    pub df_residual: usize,
    pub n: usize,
    /// SSR / df_residual.
    #[serde(with = "crate::model::float")]
    pub sigma2: f64,
    #[serde(with = "crate::model::float::vec")]
    pub residuals: Vec<f64>,
}

impl RegressionFit {
    pub fn k(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.column_labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.coefficients[i])
    }

    /// Fitted values y − residual.
    pub fn fitted(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.residuals).map(|(y, r)| y - r).collect()
    }

    /// Stable 64-bit FNV-1a fingerprint over labels and coefficient bits.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x100_0000_01b3);
            }
        };
        for (label, c) in self.column_labels.iter().zip(&self.coefficients) {
            feed(label.as_bytes());
            feed(&[0]);
            feed(&c.to_bits().to_le_bytes());
        }
        feed(&self.sigma2.to_bits().to_le_bytes());
        format!("{h:016x}")
    }
}

/// 1 − (1 − R²)(n − 1)/(n − k − 1).
pub fn adjusted_r_squared(r2: f64, n: usize, k: usize) -> Result<f64, OlsError> {
    if n <= k + 1 {
        return Err(OlsError::InvalidDf { n, k });
    }
    if !(0.0..=1.0).contains(&r2) {
        return Err(OlsError::InvalidRSquared {
            value: r2,
            range: "[0, 1]",
        });
    }
    Ok(1.0 - (1.0 - r2) * (n - 1) as f64 / (n - k - 1) as f64)
}

/// Overall F statistic (R²/k) / ((1 − R²)/(n − k − 1)).
pub fn f_statistic(r2: f64, n: usize, k: usize) -> Result<f64, OlsError> {
    if k == 0 || n <= k + 1 {
        return Err(OlsError::InvalidDf { n, k });
    }
    if !(0.0..1.0).contains(&r2) {
        return Err(OlsError::InvalidRSquared {
            value: r2,
            range: "[0, 1)",
        });
    }
    Ok((r2 / k as f64) / ((1.0 - r2) / (n - k - 1) as f64))
}

/// `***` below 1%, `**` below 5%, `*` below 10%.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Fits y on X (X already carries the intercept column).
pub fn fit_ols(design: &DesignMatrix) -> Result<RegressionFit, OlsError> {
    let n = design.n();
    let p = design.x.cols();
    let k = p.saturating_sub(1);
    if n <= k + 1 {
        return Err(OlsError::InsufficientObservations { n, k });
    }
    if design.y.iter().any(|v| !v.is_finite()) {
        return Err(OlsError::NonFiniteResponse);
    }

    let qr = PivotedQr::new(&design.x);
    if !qr.is_full_rank() {
        let labels = qr
            .dependent_columns()
            .into_iter()
            .map(|j| design.column_labels[j].clone())
            .collect();
        return Err(OlsError::RankDeficient(labels));
    }

    let y = &design.y;
    let coefficients = qr.solve(y);
    let fitted = design.x.mul_vec(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();

    let df_residual = n - p;
    let ssr = dot(&residuals, &residuals);
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r2 = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else if k == 0 {
        0.0
    } else {
        1.0
    };
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / df_residual as f64;
    let sigma2 = ssr / df_residual as f64;

    let std_errors: Vec<f64> = qr
        .xtx_inverse_diagonal()
        .into_iter()
        .map(|d| (sigma2 * d).sqrt())
        .collect();
    let t_values: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(&b, &se)| {
            if se > 0.0 {
                b / se
            } else if b == 0.0 {
                0.0
            } else {
                b.signum() * f64::INFINITY
            }
        })
        .collect();
    let p_values = t_values
        .iter()
        .map(|&t| t_p_value_two_sided(t, df_residual as f64))
        .collect();

    let (f_stat, f_p_value) = if k == 0 {
        (f64::NAN, f64::NAN)
    } else if r2 >= 1.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = (r2 / k as f64) / ((1.0 - r2) / df_residual as f64);
        (f, f_upper_tail(f, k as f64, df_residual as f64))
    };

    Ok(RegressionFit {
        column_labels: design.column_labels.clone(),
        coefficients,
        std_errors,
        t_values,
        p_values,
        r2,
        adj_r2,
        f_stat,
        f_p_value,
        df_residual,
        n,
        sigma2,
        residuals,
    })
}
