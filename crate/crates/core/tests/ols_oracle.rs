mod common;

use common::oracle::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wetval_core::linalg::dot;
use wetval_core::ols::{fit_ols, OlsError};

#[test]
fn coefficients_match_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_100_301);
    for case in 0..100 {
        let (x, y) = random_instance(&mut rng);
        let fit = fit_ols(&design(&x, &y)).unwrap();
        let oracle = normal_equations(&x, &y);
        for (b, o) in fit.coefficients.iter().zip(&oracle) {
            assert!(
                (b - o).abs() <= 1e-8 * o.abs().max(1.0),
                "case {case}: {b} vs {o}"
            );
        }
        let inv = inverse_diagonal(&x);
        for (se, d) in fit.std_errors.iter().zip(&inv) {
            let want = (fit.sigma2 * d).sqrt();
            assert!((se - want).abs() <= 1e-8 * want, "case {case}");
        }
    }
}

#[test]
fn residuals_orthogonal_to_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let (x, y) = random_instance(&mut rng);
        let fit = fit_ols(&design(&x, &y)).unwrap();
        let scale = dot(&y, &y).sqrt() * x.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..x[0].len() {
            let g: f64 = x.iter().zip(&fit.residuals).map(|(r, e)| r[j] * e).sum();
            assert!(g.abs() / scale < 1e-8, "case {case} column {j}");
        }
        // intercept ⇒ residuals sum to zero and R² = 1 − SSR/SST
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let ssr = dot(&fit.residuals, &fit.residuals);
        assert!((fit.r2 - (1.0 - ssr / sst)).abs() < 1e-12);
    }
}

#[test]
fn exact_line_and_prediction() {
    let x = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
    let fit = fit_ols(&design(&x, &[1.0, 2.0, 3.0])).unwrap();
    let y5 = fit.coefficients[0] + 5.0 * fit.coefficients[1];
    assert!((y5 - 6.0).abs() < 1e-12);
}

#[test]
fn column_scaling_rescales_coefficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut x, y) = random_instance(&mut rng);
    let before = fit_ols(&design(&x, &y)).unwrap();
    for r in &mut x {
        r[1] *= 1000.0;
    }
    let after = fit_ols(&design(&x, &y)).unwrap();
    assert!((after.coefficients[1] * 1000.0 - before.coefficients[1]).abs() < 1e-9);
    assert!((after.t_values[1] - before.t_values[1]).abs() < 1e-8);
    assert!((after.r2 - before.r2).abs() < 1e-12);
}

#[test]
fn dummy_trap_is_named() {
    let rows: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let a = (i % 2) as f64;
            vec![1.0, a, 1.0 - a, i as f64]
        })
        .collect();
    let y: Vec<f64> = (0..8).map(|i| i as f64 * 0.5 + (i % 3) as f64).collect();
    let err = fit_ols(&design(&rows, &y)).unwrap_err();
    assert_eq!(
        err,
        OlsError::RankDeficient(vec!["intercept".into(), "x1".into(), "x2".into()])
    );
}
