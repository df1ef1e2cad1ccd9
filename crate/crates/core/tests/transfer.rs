mod common;

use common::*;
use wetval_core::design::{encode, EncodingSchema};
use wetval_core::ols::fit_ols;
use wetval_core::quality::QualityState;
use wetval_core::records::{Method, Service, WetlandType};
use wetval_core::transfer::{
    loocv, predict_log, predict_value, unit_value_transfer, BackTransform, TransferError,
};

#[test]
fn noise_free_loocv_is_exact() {
    let records = noise_free(10, 42, &SMALL_BETA);
    let report = loocv(
        &records,
        &small_schema(),
        &usd_tables(),
        BackTransform::NaiveExp,
    )
    .unwrap();
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    assert_eq!(report.folds.len(), 10);
    for (f, r) in report.folds.iter().zip(&records) {
        assert_eq!(f.record_id, r.record_id);
        assert!(
            f.function_error < 1e-8,
            "{}: {}",
            f.record_id,
            f.function_error
        );
    }
}

#[test]
fn identical_records_intercept_only() {
    let site = Site {
        wetland_type: WetlandType::Floodplains,
        service: Service::Food,
        method: Method::DirectMarketPricing,
        size: 10.0,
        gni: 1000.0,
        quality: QualityState::Degraded,
    };
    let records: Vec<_> = (0..3)
        .map(|i| record(&format!("r{i}"), &site, 250.0))
        .collect();
    let report = loocv(
        &records,
        &EncodingSchema::intercept_only(),
        &usd_tables(),
        BackTransform::NaiveExp,
    )
    .unwrap();
    for f in &report.folds {
        assert!(f.function_error < 1e-12);
        assert_eq!(f.unit_error, Some(0.0));
    }
    assert_eq!(report.function_summary.count, 3);
}

#[test]
fn fold_with_singleton_level_is_folded_not_skipped() {
    let mut records = noise_free(12, 3, &SMALL_BETA);
    // make one record the only PeatWetlands site
    for r in records
        .iter_mut()
        .filter(|r| r.wetland_type == WetlandType::PeatWetlands)
        .skip(1)
    {
        r.wetland_type = WetlandType::Unspecified;
    }
    let report = loocv(
        &records,
        &small_schema(),
        &usd_tables(),
        BackTransform::NaiveExp,
    )
    .unwrap();
    assert!(report.skipped.is_empty());
    let lone = report
        .folds
        .iter()
        .find(|f| f.folded_levels == ["Peat-wetlands"])
        .expect("singleton fold");
    assert!(lone.function_error.is_finite());
}

#[test]
fn too_small_folds_are_reported() {
    let records = noise_free(6, 5, &SMALL_BETA);
    let report = loocv(
        &records,
        &small_schema(),
        &usd_tables(),
        BackTransform::NaiveExp,
    )
    .unwrap();
    assert_eq!(report.skipped.len() + report.folds.len(), 6);
    assert!(!report.skipped.is_empty());
    assert!(report.skipped.iter().all(|s| s.reason.starts_with("ols: ")));
}

#[test]
fn unit_transfer_missing_service() {
    let mut records = noise_free(10, 9, &SMALL_BETA);
    records[4].service = Service::Medical;
    let report = loocv(
        &records,
        &small_schema(),
        &usd_tables(),
        BackTransform::NaiveExp,
    )
    .unwrap();
    let f = &report.folds[4];
    assert_eq!(f.unit_prediction, None);
    assert_eq!(f.unit_error, None);
    assert_eq!(report.unit_summary.count, 9);
}

#[test]
fn prediction_from_fixture_fit() {
    let records = noise_free(10, 42, &SMALL_BETA);
    let schema = small_schema();
    let fit = fit_ols(&encode(&records, &schema, &usd_tables()).unwrap()).unwrap();
    for (b, t) in fit.coefficients.iter().zip(SMALL_BETA) {
        assert!((b - t).abs() < 1e-9);
    }
    let naive = predict_value(&fit, &schema, &records[0], BackTransform::NaiveExp).unwrap();
    assert!((naive.value_prediction / records[0].raw_value - 1.0).abs() < 1e-9);
    assert_eq!(naive.value_prediction, naive.log_prediction.exp());
    let corrected = predict_value(
        &fit,
        &schema,
        &records[0],
        BackTransform::HalfVarianceCorrected,
    )
    .unwrap();
    assert!(corrected.value_prediction >= naive.value_prediction);
    assert_eq!(naive.model_id, fit.fingerprint());
}

#[test]
fn schema_mismatch_and_unknown_level() {
    let records = noise_free(10, 1, &SMALL_BETA);
    let fit = fit_ols(&encode(&records, &small_schema(), &usd_tables()).unwrap()).unwrap();
    assert!(matches!(
        predict_log(&fit, &EncodingSchema::default_schema(), &records[0]),
        Err(TransferError::SchemaMismatch { .. })
    ));
    assert_eq!(
        unit_value_transfer(&records, &usd_tables(), |r| r.service == Service::Water),
        Err(TransferError::EmptySelection)
    );
}

#[test]
fn unit_transfer_examples() {
    let site = Site {
        wetland_type: WetlandType::Floodplains,
        service: Service::Food,
        method: Method::DirectMarketPricing,
        size: 10.0,
        gni: 1000.0,
        quality: QualityState::Degraded,
    };
    let t = usd_tables();
    let one = [record("a", &site, 42.0)];
    assert_eq!(unit_value_transfer(&one, &t, |_| true).unwrap(), 42.0);
    let two = [record("a", &site, 10.0), record("b", &site, 30.0)];
    assert_eq!(unit_value_transfer(&two, &t, |_| true).unwrap(), 20.0);
}

#[test]
fn bundled_loocv_is_complete_and_ordered() {
    let (_, records) = bundled();
    let report = loocv(
        &records,
        &EncodingSchema::default_schema(),
        &tables(),
        BackTransform::default(),
    )
    .unwrap();
    assert_eq!(report.folds.len() + report.skipped.len(), 70);
    let ids: Vec<&str> = report.folds.iter().map(|f| f.record_id.as_str()).collect();
    let expected: Vec<&str> = records
        .iter()
        .map(|r| r.record_id.as_str())
        .filter(|id| !report.skipped.iter().any(|s| s.record_id == *id))
        .collect();
    assert_eq!(ids, expected);
}
