//! Acceptance criteria 1–9. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::oracle::{design, normal_equations, random_instance};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wetval_core::cli::{cmd_fit, cmd_loocv, prepare, RunConfig};
use wetval_core::design::{encode, EncodingSchema};
use wetval_core::ols::{adjusted_r_squared, f_statistic, fit_ols};
use wetval_core::quality::{assign_quality, Confidence, QualityEvidence, QualityState};
use wetval_core::records::parse_quality_code;
use wetval_core::report::crosstab;
use wetval_core::special::t_p_value_two_sided;
use wetval_core::transfer::{loocv, predict_log, BackTransform, PolicySite};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if let false = $cond {
            return Err(format!($($msg)+));
        }
    };
}

fn screening_endpoints() -> Outcome {
    let (report, records) = prepare(&config()).map_err(|e| e.to_string())?;
    let after_per_annum = report
        .stages
        .iter()
        .find(|s| s.name == "keep_per_annum")
        .map(|s| s.remaining);
    ensure!(report.ingested == 255, "ingested {}", report.ingested);
    ensure!(
        after_per_annum == Some(149),
        "after per-annum {after_per_annum:?}"
    );
    ensure!(records.len() == 70, "retained {}", records.len());
    ensure!(
        report.article_count == 27,
        "articles {}",
        report.article_count
    );
    Ok("255 ingested, 149 after dedupe + per-annum, 70 retained from 27 articles".into())
}

fn crosstab_fidelity() -> Outcome {
    let (_, records) = bundled();
    let mut cells = 0;
    for (fixture_name, col) in [
        ("service_by_wetland_type.csv", "wetland_type"),
        ("service_by_method.csv", "method"),
    ] {
        let tab = crosstab(&records, "service", col).map_err(|e| e.to_string())?;
        let rows = read_csv(&fixture(fixture_name));
        for row in &rows[1..] {
            for (j, want) in row.iter().enumerate().skip(1) {
                let want: usize = want.parse().unwrap();
                let got = match (row[0].as_str(), rows[0][j].as_str()) {
                    ("total", "total") => Some(tab.grand_total),
                    ("total", c) => tab.col_total(c),
                    (r, "total") => tab.row_total(r),
                    (r, c) => tab.cell(r, c),
                };
                ensure!(
                    got == Some(want),
                    "{col}: {} x {} = {got:?}, want {want}",
                    row[0],
                    rows[0][j]
                );
                cells += 1;
            }
        }
    }
    let tab = crosstab(&records, "service", "wetland_type").unwrap();
    ensure!(
        tab.cell("Food", "Floodplains") == Some(8),
        "Food x Floodplains"
    );
    ensure!(
        tab.cell("ExtremeEvents", "SwampsMarshes") == Some(3),
        "ExtremeEvents x SwampsMarshes"
    );
    let by_method = crosstab(&records, "service", "method").unwrap();
    ensure!(
        by_method.col_total("DirectMarketPricing") == Some(41),
        "DirectMarketPricing total"
    );
    Ok(format!(
        "{cells} cells and margins exact across both tables"
    ))
}

fn statistical_identities() -> Outcome {
    let adj = adjusted_r_squared(0.676, 70, 18).map_err(|e| e.to_string())?;
    let f = f_statistic(0.676, 70, 18).map_err(|e| e.to_string())?;
    ensure!((0.559..=0.563).contains(&adj), "adjusted R2 {adj}");
    ensure!((5.86..=5.96).contains(&f), "F {f}");
    Ok(format!("adjusted R2 = {adj:.4}, F = {f:.4}"))
}

fn ols_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_100_301);
    let (mut worst_rel, mut worst_orth) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let (x, y) = random_instance(&mut rng);
        let fit = fit_ols(&design(&x, &y)).map_err(|e| format!("case {case}: {e}"))?;
        for (b, o) in fit.coefficients.iter().zip(normal_equations(&x, &y)) {
            worst_rel = worst_rel.max((b - o).abs() / o.abs().max(1.0));
        }
        let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt()
            * x.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..x[0].len() {
            let g: f64 = x.iter().zip(&fit.residuals).map(|(r, e)| r[j] * e).sum();
            worst_orth = worst_orth.max(g.abs() / scale);
        }
    }
    ensure!(worst_rel < 1e-8, "coefficient relative error {worst_rel:e}");
    ensure!(worst_orth < 1e-8, "scaled |X'r| {worst_orth:e}");
    Ok(format!(
        "100 instances, max relative error {worst_rel:.1e}, max scaled |X'r| {worst_orth:.1e}"
    ))
}

fn t_accuracy() -> Outcome {
    for df in [1.0, 2.0, 5.0, 51.0, 1000.0] {
        ensure!(t_p_value_two_sided(0.0, df) == 1.0, "p(0, {df}) != 1");
    }
    let e1 = (t_p_value_two_sided(1.0, 1.0) - 0.5).abs();
    let s2 = 2f64.sqrt();
    let e2 = (t_p_value_two_sided(s2, 2.0) - (1.0 - s2 / 2.0)).abs();
    ensure!(e1 < 1e-10, "p(1, 1) error {e1:e}");
    ensure!(e2 < 1e-10, "p(sqrt 2, 2) error {e2:e}");
    for df in [1.0, 2.0, 7.5, 51.0, 300.0] {
        let mut prev = 1.0;
        for i in 0..1000 {
            let t = i as f64 * 0.015;
            let p = t_p_value_two_sided(t, df);
            ensure!(p <= prev, "not monotone at df={df}, t={t}");
            prev = p;
        }
    }
    Ok(format!(
        "closed-form errors {e1:.1e}, {e2:.1e}; monotone on 1000-point grids"
    ))
}

fn quality_truth_table() -> Outcome {
    let rows = read_csv(&data_dir().join("quality_truth_table.csv"));
    ensure!(rows.len() == 17, "{} fixture rows", rows.len() - 1);
    for row in &rows[1..] {
        let ev = QualityEvidence {
            degradation_described: row[0] == "1",
            degrading_activities: row[1] == "1",
            market_price_method: row[2] == "1",
            ideal_state_assumed: row[3] == "1",
        };
        let c = assign_quality(ev);
        let conf = if c.confidence == Confidence::High {
            "High"
        } else {
            "Low"
        };
        ensure!(
            c.state.code().to_string() == row[4] && conf == row[5],
            "{row:?}"
        );
    }
    let codes = read_csv(&data_dir().join("article_quality_codes.csv"));
    let (_, records) = bundled();
    let mut matched = 0;
    for row in &codes[1..] {
        let want = parse_quality_code(&row[1])
            .ok_or(format!("bad code {}", row[1]))?
            .0;
        let mine: Vec<_> = records.iter().filter(|r| r.article_id == row[0]).collect();
        ensure!(!mine.is_empty(), "article {} absent", row[0]);
        for r in mine {
            ensure!(
                assign_quality(r.quality_evidence).state == want,
                "{} ({})",
                row[0],
                r.record_id
            );
        }
        matched += 1;
    }
    ensure!(matched == 27, "{matched} articles");
    let gerrard = parse_quality_code("2(1)").unwrap().0;
    ensure!(gerrard == QualityState::Degraded, "Gerrard code");
    Ok("16/16 combinations, 27/27 article codes (Gerrard stored as 2)".into())
}

fn noise_free_loocv() -> Outcome {
    let records = noise_free(10, 42, &SMALL_BETA);
    let report = loocv(
        &records,
        &small_schema(),
        &usd_tables(),
        BackTransform::NaiveExp,
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        report.skipped.is_empty(),
        "skipped folds: {:?}",
        report.skipped
    );
    ensure!(report.folds.len() == 10, "{} folds", report.folds.len());
    let worst = report
        .folds
        .iter()
        .map(|f| f.function_error)
        .fold(0.0, f64::max);
    ensure!(worst < 1e-8, "max function error {worst:e}");
    Ok(format!("10 folds, max function error {worst:.1e}"))
}

fn parameters_and_counterfactual() -> Outcome {
    let (_, records) = bundled();
    let schema = EncodingSchema::default_schema();
    let fit = fit_ols(&encode(&records, &schema, &tables()).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure!(
        fit.coefficients.len() == 19,
        "{} parameters",
        fit.coefficients.len()
    );
    ensure!(
        fit.column_labels.len() == 19,
        "{} labels",
        fit.column_labels.len()
    );
    let q = fit.coefficient("Quality").ok_or("no Quality column")?;
    let mut worst = 0.0f64;
    for r in &records {
        let site = |state| PolicySite {
            site_id: r.record_id.clone(),
            biome: r.biome,
            wetland_type: r.wetland_type,
            service: r.service,
            method: r.method,
            value_basis: r.value_basis,
            wetland_size_ha: r.wetland_size_ha,
            gni_per_capita: r.gni_per_capita,
            population_density: r.population_density,
            quality_state: state,
        };
        let good = predict_log(&fit, &schema, &site(QualityState::NaturallyFunctioning))
            .map_err(|e| e.to_string())?;
        let bad =
            predict_log(&fit, &schema, &site(QualityState::Degraded)).map_err(|e| e.to_string())?;
        worst = worst.max((good - bad - q).abs());
    }
    ensure!(worst <= 1e-12, "counterfactual gap error {worst:e}");
    Ok(format!(
        "19 labeled parameters; quality gap equals coefficient {q:.3} within {worst:.1e} on 70 sites"
    ))
}

fn determinism() -> Outcome {
    let run = |dir: &std::path::Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let mut config: RunConfig = config();
        config.output_dir = Some(dir.to_path_buf());
        let fit = cmd_fit(&config).map_err(|e| e.to_string())?;
        let cv = cmd_loocv(&config, BackTransform::default()).map_err(|e| e.to_string())?;
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .map_err(|e| e.to_string())?
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        files.push(("stdout:fit".into(), fit.into_bytes()));
        files.push(("stdout:loocv".into(), cv.into_bytes()));
        Ok(files)
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(a.path())?;
    let second = run(b.path())?;
    ensure!(first.len() == second.len(), "different file sets");
    for (x, y) in first.iter().zip(&second) {
        ensure!(x == y, "{} differs between runs", x.0);
    }
    Ok(format!(
        "{} artifacts byte-identical across two runs",
        first.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            1,
            "screening endpoints",
            Duration::from_secs(1),
            screening_endpoints,
        ),
        (
            2,
            "cross-tab fidelity",
            Duration::from_secs(1),
            crosstab_fidelity,
        ),
        (
            3,
            "statistical identities",
            Duration::from_secs(1),
            statistical_identities,
        ),
        (
            4,
            "OLS oracle equivalence",
            Duration::from_secs(5),
            ols_oracle,
        ),
        (
            5,
            "t-distribution accuracy",
            Duration::from_secs(1),
            t_accuracy,
        ),
        (
            6,
            "quality coder truth table",
            Duration::from_secs(1),
            quality_truth_table,
        ),
        (
            7,
            "noise-free LOOCV",
            Duration::from_secs(1),
            noise_free_loocv,
        ),
        (
            8,
            "parameter count and quality counterfactual",
            Duration::from_secs(5),
            parameters_and_counterfactual,
        ),
        (
            9,
            "determinism of fit and loocv",
            Duration::from_secs(30),
            determinism,
        ),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n} PASS [{name}] {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL [{name}] {why} ({elapsed:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
