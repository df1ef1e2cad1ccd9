//! Benefit transfer: function transfer from a fitted meta-regression, unit
//! value transfer, and leave-one-out comparison of the two.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{
    encode, ContinuousField, DesignError, EncodingSchema, NominalField, SiteAttributes,
};
use crate::linalg::dot;
use crate::ols::{fit_ols, OlsError, RegressionFit};
use crate::quality::{assign_quality, QualityEvidence, QualityState};
use crate::records::{
    normalize_value, parse_quality_code, Biome, Category, Method, NormalizationTables,
    RecordsError, Service, StudyRecord, ValueBasis, WetlandType,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TransferError {
    #[error("model columns do not match the schema: model has [{model}], schema has [{schema}]")]
    SchemaMismatch { model: String, schema: String },
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("no records match the unit-transfer selection")]
    EmptySelection,
    #[error("observed value must be strictly positive, got {0}")]
    NonPositiveObserved(f64),
    #[error(transparent)]
    Records(#[from] RecordsError),
}

/// An unstudied site to which values are transferred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySite {
    pub site_id: String,
    pub biome: Biome,
    pub wetland_type: WetlandType,
    pub service: Service,
    pub method: Method,
    pub value_basis: ValueBasis,
    pub wetland_size_ha: f64,
    pub gni_per_capita: f64,
    pub population_density: f64,
    pub quality_state: QualityState,
}

impl SiteAttributes for PolicySite {
    fn site_id(&self) -> &str {
        &self.site_id
    }

    fn nominal(&self, field: NominalField) -> &'static str {
        match field {
            NominalField::Biome => self.biome.label(),
            NominalField::WetlandType => self.wetland_type.label(),
            NominalField::Service => self.service.label(),
            NominalField::Method => self.method.label(),
            NominalField::ValueBasis => self.value_basis.label(),
        }
    }

    fn continuous(&self, field: ContinuousField) -> f64 {
        match field {
            ContinuousField::WetlandSizeHa => self.wetland_size_ha,
            ContinuousField::GniPerCapita => self.gni_per_capita,
            ContinuousField::PopulationDensity => self.population_density,
        }
    }

    fn quality(&self) -> Option<QualityState> {
        Some(self.quality_state)
    }
}

/// Columns of the policy-site file: the dataset columns without
/// `raw_value`, `currency_code` and `value_year`.
pub const SITE_COLUMNS: [&str; 15] = [
    "record_id",
    "article_id",
    "biome",
    "wetland_type",
    "service",
    "method",
    "value_basis",
    "wetland_size_ha",
    "gni_per_capita",
    "population_density",
    "ev_degradation_described",
    "ev_degrading_activities",
    "ev_market_price_method",
    "ev_ideal_state_assumed",
    "quality_code",
];

/// Reads policy sites. A blank `quality_code` is filled in from the evidence
/// flags.
pub fn parse_policy_sites<R: Read>(reader: R) -> Result<Vec<PolicySite>, RecordsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| RecordsError::MalformedRow {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if headers
        .iter()
        .map(str::trim)
        .ne(SITE_COLUMNS.iter().copied())
    {
        return Err(RecordsError::MalformedRow {
            line: 1,
            reason: format!("expected header {}", SITE_COLUMNS.join(",")),
        });
    }
    let mut sites = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| RecordsError::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let text = |i: usize| row.get(i).unwrap_or("").trim();
        fn cat<C: Category>(v: &str, column: &str, line: u64) -> Result<C, RecordsError> {
            C::from_label(v).ok_or_else(|| RecordsError::UnknownEnumLabel {
                column: column.into(),
                value: v.into(),
                line,
            })
        }
        let positive = |i: usize| -> Result<f64, RecordsError> {
            let v: f64 = text(i).parse().map_err(|_| RecordsError::MalformedRow {
                line,
                reason: format!("{}: not a number", SITE_COLUMNS[i]),
            })?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(RecordsError::NonPositiveValue {
                    column: SITE_COLUMNS[i].into(),
                    line,
                })
            }
        };
        let flag = |i: usize| -> Result<bool, RecordsError> {
            match text(i) {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(RecordsError::MalformedRow {
                    line,
                    reason: format!("{}: expected 0 or 1, found {other:?}", SITE_COLUMNS[i]),
                }),
            }
        };
        let evidence = QualityEvidence {
            degradation_described: flag(10)?,
            degrading_activities: flag(11)?,
            market_price_method: flag(12)?,
            ideal_state_assumed: flag(13)?,
        };
        let quality_state = match text(14) {
            "" => assign_quality(evidence).state,
            code => {
                parse_quality_code(code)
                    .ok_or_else(|| RecordsError::UnknownEnumLabel {
                        column: "quality_code".into(),
                        value: code.into(),
                        line,
                    })?
                    .0
            }
        };
        if text(0).is_empty() {
            return Err(RecordsError::MalformedRow {
                line,
                reason: "record_id is empty".into(),
            });
        }
        sites.push(PolicySite {
            site_id: text(0).to_string(),
            biome: cat(text(2), "biome", line)?,
            wetland_type: cat(text(3), "wetland_type", line)?,
            service: cat(text(4), "service", line)?,
            method: cat(text(5), "method", line)?,
            value_basis: cat(text(6), "value_basis", line)?,
            wetland_size_ha: positive(7)?,
            gni_per_capita: positive(8)?,
            population_density: positive(9)?,
            quality_state,
        });
    }
    Ok(sites)
}

pub fn parse_policy_sites_path(path: &Path) -> Result<Vec<PolicySite>, RecordsError> {
    let file = std::fs::File::open(path)
        .map_err(|e| RecordsError::Io(format!("{}: {e}", path.display())))?;
    parse_policy_sites(file)
}

/// How a log-scale prediction is mapped back to values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackTransform {
    /// exp(ŷ)
    NaiveExp,
    /// exp(ŷ + σ²/2), the log-normal mean.
    #[default]
    HalfVarianceCorrected,
}

impl BackTransform {
    pub fn label(self) -> &'static str {
        match self {
            BackTransform::NaiveExp => "naive",
            BackTransform::HalfVarianceCorrected => "corrected",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" | "naiveexp" => Some(BackTransform::NaiveExp),
            "corrected" | "halfvariancecorrected" => Some(BackTransform::HalfVarianceCorrected),
            _ => None,
        }
    }

    pub fn apply(self, log_prediction: f64, sigma2: f64) -> f64 {
        match self {
            BackTransform::NaiveExp => log_prediction.exp(),
            BackTransform::HalfVarianceCorrected => (log_prediction + sigma2 / 2.0).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferPrediction {
    pub site_id: String,
    pub log_prediction: f64,
    /// 2007 US$ ha⁻¹ yr⁻¹.
    pub value_prediction: f64,
    pub mode: BackTransform,
    /// Fingerprint of the fit used.
    pub model_id: String,
}

fn check_schema(fit: &RegressionFit, schema: &EncodingSchema) -> Result<(), TransferError> {
    let labels = schema.column_labels();
    if labels != fit.column_labels {
        return Err(TransferError::SchemaMismatch {
            model: fit.column_labels.join(", "),
            schema: labels.join(", "),
        });
    }
    Ok(())
}

/// ŷ = coefficients · encoded row (disturbance at zero).
pub fn predict_log<S: SiteAttributes + ?Sized>(
    fit: &RegressionFit,
    schema: &EncodingSchema,
    site: &S,
) -> Result<f64, TransferError> {
    check_schema(fit, schema)?;
    let row = schema.encode_row(site)?;
    Ok(dot(&fit.coefficients, &row))
}

pub fn predict_value<S: SiteAttributes + ?Sized>(
    fit: &RegressionFit,
    schema: &EncodingSchema,
    site: &S,
    mode: BackTransform,
) -> Result<TransferPrediction, TransferError> {
    let log_prediction = predict_log(fit, schema, site)?;
    Ok(TransferPrediction {
        site_id: site.site_id().to_string(),
        log_prediction,
        value_prediction: mode.apply(log_prediction, fit.sigma2),
        mode,
        model_id: fit.fingerprint(),
    })
}

/// Mean normalized value of the records accepted by `filter`.
pub fn unit_value_transfer<F>(
    records: &[StudyRecord],
    tables: &NormalizationTables,
    filter: F,
) -> Result<f64, TransferError>
where
    F: Fn(&StudyRecord) -> bool,
{
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in records.iter().filter(|r| filter(r)) {
        sum += normalize_value(r, tables)?;
        count += 1;
    }
    if count == 0 {
        return Err(TransferError::EmptySelection);
    }
    Ok(sum / count as f64)
}

/// |predicted − observed| / observed.
pub fn transfer_error(predicted: f64, observed: f64) -> Result<f64, TransferError> {
    if observed.is_nan() || observed <= 0.0 {
        return Err(TransferError::NonPositiveObserved(observed));
    }
    Ok((predicted - observed).abs() / observed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoocvFold {
    pub record_id: String,
    pub observed: f64,
    pub function_prediction: f64,
    pub function_error: f64,
    /// None when no other record shares the held-out record's service.
    pub unit_prediction: Option<f64>,
    pub unit_error: Option<f64>,
    /// Dummy columns folded into the baseline for this fold.
    pub folded_levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedFold {
    pub record_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub count: usize,
    #[serde(serialize_with = "crate::model::float::serialize")]
    pub mean: f64,
    #[serde(serialize_with = "crate::model::float::serialize")]
    pub median: f64,
}

impl ErrorSummary {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.collect();
        v.sort_by(f64::total_cmp);
        let count = v.len();
        if count == 0 {
            return ErrorSummary {
                count,
                mean: f64::NAN,
                median: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / count as f64;
        let median = if count % 2 == 1 {
            v[count / 2]
        } else {
            (v[count / 2 - 1] + v[count / 2]) / 2.0
        };
        ErrorSummary {
            count,
            mean,
            median,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoocvReport {
    pub mode: BackTransform,
    pub folds: Vec<LoocvFold>,
    pub skipped: Vec<SkippedFold>,
    pub function_summary: ErrorSummary,
    pub unit_summary: ErrorSummary,
}

enum FoldOutcome {
    Done(LoocvFold),
    Skipped(SkippedFold),
}

/// Leave-one-out comparison of function transfer and service-pooled unit
/// transfer. Folds run in parallel; results are reported in record order.
pub fn loocv(
    records: &[StudyRecord],
    schema: &EncodingSchema,
    tables: &NormalizationTables,
    mode: BackTransform,
) -> Result<LoocvReport, TransferError> {
    let values: Vec<f64> = records
        .iter()
        .map(|r| normalize_value(r, tables))
        .collect::<Result<_, _>>()?;

    let outcomes: Vec<FoldOutcome> = (0..records.len())
        .into_par_iter()
        .map(|held| run_fold(records, &values, held, schema, tables, mode))
        .collect();

    let mut folds = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            FoldOutcome::Done(f) => folds.push(f),
            FoldOutcome::Skipped(s) => skipped.push(s),
        }
    }
    Ok(LoocvReport {
        mode,
        function_summary: ErrorSummary::of(folds.iter().map(|f| f.function_error)),
        unit_summary: ErrorSummary::of(folds.iter().filter_map(|f| f.unit_error)),
        folds,
        skipped,
    })
}

fn run_fold(
    records: &[StudyRecord],
    values: &[f64],
    held: usize,
    schema: &EncodingSchema,
    tables: &NormalizationTables,
    mode: BackTransform,
) -> FoldOutcome {
    let target = &records[held];
    let skip = |reason: String| {
        FoldOutcome::Skipped(SkippedFold {
            record_id: target.record_id.clone(),
            reason,
        })
    };
    let training: Vec<StudyRecord> = records
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != held)
        .map(|(_, r)| r.clone())
        .collect();
    let fold_schema = schema.fold_unobserved(&training);
    let folded_levels: Vec<String> = {
        let kept = fold_schema.column_labels();
        schema
            .column_labels()
            .into_iter()
            .filter(|l| !kept.contains(l))
            .collect()
    };
    let design = match encode(&training, &fold_schema, tables) {
        Ok(d) => d,
        Err(e) => return skip(format!("design: {e}")),
    };
    let fit = match fit_ols(&design) {
        Ok(f) => f,
        Err(e @ (OlsError::RankDeficient(_) | OlsError::InsufficientObservations { .. })) => {
            return skip(format!("ols: {e}"))
        }
        Err(e) => return skip(format!("ols: {e}")),
    };
    let prediction = match predict_value(&fit, &fold_schema, target, mode) {
        Ok(p) => p,
        Err(e) => return skip(format!("transfer: {e}")),
    };
    let observed = values[held];
    let function_error = match transfer_error(prediction.value_prediction, observed) {
        Ok(e) => e,
        Err(e) => return skip(format!("transfer: {e}")),
    };

    let mut by_service: HashMap<Service, (f64, usize)> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        if i != held {
            let e = by_service.entry(r.service).or_default();
            e.0 += values[i];
            e.1 += 1;
        }
    }
    let unit_prediction = by_service
        .get(&target.service)
        .map(|&(sum, count)| sum / count as f64);
    let unit_error = unit_prediction.and_then(|u| transfer_error(u, observed).ok());

    FoldOutcome::Done(LoocvFold {
        record_id: target.record_id.clone(),
        observed,
        function_prediction: prediction.value_prediction,
        function_error,
        unit_prediction,
        unit_error,
        folded_levels,
    })
}
