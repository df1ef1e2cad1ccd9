//! Valuation records: the data model, the delimited dataset format and
//! normalization of reported values to 2007 US$ per hectare per year.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::quality::{Confidence, QualityCode, QualityEvidence, QualityState};

/// Base year of the normalized value scale.
pub const BASE_YEAR: i32 = 2007;

/// Accepted range of `value_year`.
pub const MIN_VALUE_YEAR: i32 = 1950;
pub const MAX_VALUE_YEAR: i32 = 2025;

/// Column names of the dataset file, in file order.
pub const DATASET_COLUMNS: [&str; 18] = [
    "record_id",
    "article_id",
    "biome",
    "wetland_type",
    "service",
    "method",
    "value_basis",
    "raw_value",
    "currency_code",
    "value_year",
    "wetland_size_ha",
    "gni_per_capita",
    "population_density",
    "ev_degradation_described",
    "ev_degrading_activities",
    "ev_market_price_method",
    "ev_ideal_state_assumed",
    "quality_code",
];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RecordsError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: unknown label {value:?} in column {column}")]
    UnknownEnumLabel {
        column: String,
        value: String,
        line: u64,
    },
    #[error("line {line}: column {column} must be strictly positive")]
    NonPositiveValue { column: String, line: u64 },
    #[error("no exchange rate for {currency} in {year}")]
    MissingRate { currency: String, year: i32 },
    #[error("no deflator for {0}")]
    MissingDeflator(i32),
    #[error("invalid normalization tables: {0}")]
    InvalidTables(String),
    #[error("{0}")]
    Io(String),
}

impl RecordsError {
    fn malformed(line: u64, reason: impl Into<String>) -> Self {
        RecordsError::MalformedRow {
            line,
            reason: reason.into(),
        }
    }
}

/// A closed set of labels with a canonical spelling and a display name.
pub trait Category: Copy + Eq + Sized + 'static {
    const ALL: &'static [Self];

    /// Canonical label used in data files.
    fn label(self) -> &'static str;

    /// Human-readable name used in rendered tables.
    fn display_name(self) -> &'static str;

    /// Case-insensitive lookup against the canonical labels.
    fn from_label(s: &str) -> Option<Self> {
        let s = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.label().eq_ignore_ascii_case(s))
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }
}

macro_rules! category {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $display:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl Category for $name {
            const ALL: &'static [Self] = &[$($name::$variant),+];

            fn label(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }

            fn display_name(self) -> &'static str {
                match self {
                    $($name::$variant => $display),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

category!(Biome {
    InlandWetlands => "Inland wetlands",
    Other => "Other",
});

category!(
    /// `Unspecified` is a real category ("wetlands, unspecified by the
    /// authors"), never a fallback for unrecognised labels.
    WetlandType {
        Floodplains => "Floodplains",
        PeatWetlands => "Peat-wetlands",
        SwampsMarshes => "Swamps / marshes",
        Unspecified => "Wetlands [unspecified]",
    }
);

category!(Service {
    Climate => "Climate",
    ExtremeEvents => "Extreme events",
    Food => "Food",
    Genepool => "Genepool",
    Medical => "Medical",
    Ornamental => "Ornamental",
    RawMaterials => "Raw materials",
    Recreation => "Recreation",
    SoilFertility => "Soil fertility",
    Waste => "Waste",
    Water => "Water",
    WaterFlows => "Water flows",
    TEV => "TEV",
    Various => "Various",
});

category!(Method {
    AvoidedCost => "Avoided Cost",
    ContingentValuation => "Contingent Valuation",
    DirectMarketPricing => "Direct market pricing",
    FactorIncomeProduction => "Factor Income / Production Function",
    MitigationRestorationCost => "Mitigation and Restoration Cost",
    ReplacementCost => "Replacement Cost",
    TravelCost => "Travel Cost",
    BenefitTransfer => "Benefit Transfer",
});

category!(ValueBasis {
    PerAnnum => "Per annum",
    Other => "Other",
});

/// One valuation estimate from a primary study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub record_id: String,
    pub article_id: String,
    pub biome: Biome,
    pub wetland_type: WetlandType,
    pub service: Service,
    pub method: Method,
    pub value_basis: ValueBasis,
    /// Currency units per hectare per year.
    pub raw_value: f64,
    pub currency_code: String,
    pub value_year: i32,
    pub wetland_size_ha: f64,
    /// 2007 US$ per person per year, national.
    pub gni_per_capita: f64,
    /// Persons per km², national.
    pub population_density: f64,
    pub quality_evidence: QualityEvidence,
    pub quality_code: Option<QualityCode>,
    /// Parenthetical qualifier carried from the source code, e.g. the `1`
    /// of `2(1)`.
    pub quality_annotation: Option<String>,
}

impl StudyRecord {
    pub fn quality_state(&self) -> Option<QualityState> {
        self.quality_code.map(|c| c.state)
    }
}

/// Comparison key for "repeated item" detection: every field except
/// `record_id`.
#[derive(PartialEq, Eq, Hash)]
pub(crate) struct ContentKey<'a> {
    article_id: &'a str,
    categories: (Biome, WetlandType, Service, Method, ValueBasis),
    numbers: [u64; 4],
    currency_code: &'a str,
    value_year: i32,
    evidence: QualityEvidence,
    quality: Option<QualityState>,
    annotation: Option<&'a str>,
}

impl StudyRecord {
    pub(crate) fn content_key(&self) -> ContentKey<'_> {
        ContentKey {
            article_id: &self.article_id,
            categories: (
                self.biome,
                self.wetland_type,
                self.service,
                self.method,
                self.value_basis,
            ),
            numbers: [
                self.raw_value.to_bits(),
                self.wetland_size_ha.to_bits(),
                self.gni_per_capita.to_bits(),
                self.population_density.to_bits(),
            ],
            currency_code: &self.currency_code,
            value_year: self.value_year,
            evidence: self.quality_evidence,
            quality: self.quality_state(),
            annotation: self.quality_annotation.as_deref(),
        }
    }
}

/// Price deflators and exchange rates used to bring values onto the 2007 US$
/// scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormalizationTables {
    /// year → price index, 2007 = 1.0.
    pub deflator: BTreeMap<i32, f64>,
    /// (currency, year) → US$ per currency unit.
    pub fx: BTreeMap<(String, i32), f64>,
}

impl NormalizationTables {
    pub fn new(
        deflator: BTreeMap<i32, f64>,
        fx: BTreeMap<(String, i32), f64>,
    ) -> Result<Self, RecordsError> {
        let tables = NormalizationTables { deflator, fx };
        tables.validate()?;
        Ok(tables)
    }

    fn validate(&self) -> Result<(), RecordsError> {
        match self.deflator.get(&BASE_YEAR) {
            Some(1.0) => {}
            Some(d) => {
                return Err(RecordsError::InvalidTables(format!(
                    "deflator for {BASE_YEAR} is {d}, expected 1"
                )))
            }
            None => {
                return Err(RecordsError::InvalidTables(format!(
                    "deflator for base year {BASE_YEAR} missing"
                )))
            }
        }
        if let Some((y, r)) = self
            .deflator
            .iter()
            .find(|(_, r)| !(**r > 0.0 && r.is_finite()))
        {
            return Err(RecordsError::InvalidTables(format!(
                "deflator for {y} is not strictly positive ({r})"
            )));
        }
        if let Some(((c, y), r)) = self.fx.iter().find(|(_, r)| !(**r > 0.0 && r.is_finite())) {
            return Err(RecordsError::InvalidTables(format!(
                "fx rate for {c} {y} is not strictly positive ({r})"
            )));
        }
        Ok(())
    }

    /// Reads the two-kind rates file (`kind,currency_code,year,rate`).
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, RecordsError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| RecordsError::malformed(1, e.to_string()))?
            .clone();
        let expected = ["kind", "currency_code", "year", "rate"];
        if headers.iter().map(str::trim).ne(expected.iter().copied()) {
            return Err(RecordsError::malformed(
                1,
                format!("expected header {}", expected.join(",")),
            ));
        }
        let mut deflator = BTreeMap::new();
        let mut fx = BTreeMap::new();
        for row in rdr.records() {
            let row = row.map_err(csv_error)?;
            let line = row.position().map_or(0, |p| p.line());
            let year: i32 = row[2]
                .trim()
                .parse()
                .map_err(|_| RecordsError::malformed(line, format!("bad year {:?}", &row[2])))?;
            let rate: f64 = row[3]
                .trim()
                .parse()
                .map_err(|_| RecordsError::malformed(line, format!("bad rate {:?}", &row[3])))?;
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(RecordsError::NonPositiveValue {
                    column: "rate".into(),
                    line,
                });
            }
            let duplicate = match row[0].trim() {
                "deflator" => {
                    if !row[1].trim().is_empty() {
                        return Err(RecordsError::malformed(
                            line,
                            "deflator rows take no currency_code",
                        ));
                    }
                    deflator.insert(year, rate).is_some()
                }
                "fx" => {
                    let cur = row[1].trim();
                    if cur.is_empty() {
                        return Err(RecordsError::malformed(
                            line,
                            "fx row without currency_code",
                        ));
                    }
                    fx.insert((cur.to_string(), year), rate).is_some()
                }
                other => {
                    return Err(RecordsError::UnknownEnumLabel {
                        column: "kind".into(),
                        value: other.into(),
                        line,
                    })
                }
            };
            if duplicate {
                return Err(RecordsError::malformed(line, "duplicate rate entry"));
            }
        }
        Self::new(deflator, fx)
    }

    pub fn from_path(path: &Path) -> Result<Self, RecordsError> {
        let file = std::fs::File::open(path)
            .map_err(|e| RecordsError::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }
}

/// Converts a record's reported value to 2007 US$ ha⁻¹ yr⁻¹:
/// `raw_value × fx[(currency, year)] ÷ deflator[year]`.
pub fn normalize_value(
    record: &StudyRecord,
    tables: &NormalizationTables,
) -> Result<f64, RecordsError> {
    let year = record.value_year;
    let fx = tables
        .fx
        .get(&(record.currency_code.clone(), year))
        .ok_or_else(|| RecordsError::MissingRate {
            currency: record.currency_code.clone(),
            year,
        })?;
    let deflator = tables
        .deflator
        .get(&year)
        .ok_or(RecordsError::MissingDeflator(year))?;
    Ok(record.raw_value * fx / deflator)
}

fn csv_error(e: csv::Error) -> RecordsError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => RecordsError::malformed(line, format!("expected {expected_len} fields, found {len}")),
        csv::ErrorKind::Io(io) => RecordsError::Io(io.to_string()),
        _ => RecordsError::malformed(line, e.to_string()),
    }
}

struct RowParser<'r> {
    row: &'r csv::StringRecord,
    line: u64,
}

impl RowParser<'_> {
    fn text(&self, idx: usize) -> &str {
        self.row.get(idx).unwrap_or("").trim()
    }

    fn category<C: Category>(&self, idx: usize) -> Result<C, RecordsError> {
        let value = self.text(idx);
        C::from_label(value).ok_or_else(|| RecordsError::UnknownEnumLabel {
            column: DATASET_COLUMNS[idx].into(),
            value: value.into(),
            line: self.line,
        })
    }

    fn positive(&self, idx: usize) -> Result<f64, RecordsError> {
        let column = DATASET_COLUMNS[idx];
        let v: f64 = self.text(idx).parse().map_err(|_| {
            RecordsError::malformed(
                self.line,
                format!("{column}: not a number: {:?}", self.text(idx)),
            )
        })?;
        if !v.is_finite() {
            return Err(RecordsError::malformed(
                self.line,
                format!("{column}: not finite"),
            ));
        }
        if v <= 0.0 {
            return Err(RecordsError::NonPositiveValue {
                column: column.into(),
                line: self.line,
            });
        }
        Ok(v)
    }

    fn flag(&self, idx: usize) -> Result<bool, RecordsError> {
        match self.text(idx) {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(RecordsError::malformed(
                self.line,
                format!("{}: expected 0 or 1, found {other:?}", DATASET_COLUMNS[idx]),
            )),
        }
    }

    fn nonempty(&self, idx: usize) -> Result<String, RecordsError> {
        let s = self.text(idx);
        if s.is_empty() {
            return Err(RecordsError::malformed(
                self.line,
                format!("{} is empty", DATASET_COLUMNS[idx]),
            ));
        }
        Ok(s.to_string())
    }
}

/// Parses a source quality code: `1`, `2`, optionally followed by a
/// parenthetical annotation such as `2(1)`.
pub fn parse_quality_code(s: &str) -> Option<(QualityState, Option<String>)> {
    let s = s.trim();
    let (head, note) = match s.find('(') {
        Some(open) => {
            let inner = s.strip_suffix(')')?;
            (&s[..open], Some(inner[open + 1..].trim().to_string()))
        }
        None => (s, None),
    };
    let state = match head.trim() {
        "1" => QualityState::NaturallyFunctioning,
        "2" => QualityState::Degraded,
        _ => return None,
    };
    Some((state, note.filter(|n| !n.is_empty())))
}

fn parse_row(row: &csv::StringRecord, line: u64) -> Result<StudyRecord, RecordsError> {
    let p = RowParser { row, line };
    let value_year: i32 = p
        .text(9)
        .parse()
        .map_err(|_| RecordsError::malformed(line, format!("value_year: {:?}", p.text(9))))?;
    if !(MIN_VALUE_YEAR..=MAX_VALUE_YEAR).contains(&value_year) {
        return Err(RecordsError::malformed(
            line,
            format!("value_year {value_year} outside [{MIN_VALUE_YEAR}, {MAX_VALUE_YEAR}]"),
        ));
    }
    let evidence = QualityEvidence {
        degradation_described: p.flag(13)?,
        degrading_activities: p.flag(14)?,
        market_price_method: p.flag(15)?,
        ideal_state_assumed: p.flag(16)?,
    };
    let (quality_code, quality_annotation) = match p.text(17) {
        "" => (None, None),
        raw => {
            let (state, note) =
                parse_quality_code(raw).ok_or_else(|| RecordsError::UnknownEnumLabel {
                    column: "quality_code".into(),
                    value: raw.into(),
                    line,
                })?;
            // Carried codes start at low confidence; the coder upgrades them
            // when the evidence agrees.
            let code = QualityCode {
                state,
                confidence: Confidence::Low,
            };
            (Some(code), note)
        }
    };
    Ok(StudyRecord {
        record_id: p.nonempty(0)?,
        article_id: p.nonempty(1)?,
        biome: p.category(2)?,
        wetland_type: p.category(3)?,
        service: p.category(4)?,
        method: p.category(5)?,
        value_basis: p.category(6)?,
        raw_value: p.positive(7)?,
        currency_code: p.nonempty(8)?,
        value_year,
        wetland_size_ha: p.positive(10)?,
        gni_per_capita: p.positive(11)?,
        population_density: p.positive(12)?,
        quality_evidence: evidence,
        quality_code,
        quality_annotation,
    })
}

/// Parses the comma-delimited dataset. Rows come back in file order.
///
/// The header must list [`DATASET_COLUMNS`] in order; the trailing
/// `quality_code` column may be omitted entirely.
pub fn parse_dataset<R: Read>(reader: R) -> Result<Vec<StudyRecord>, RecordsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let full = names.as_slice() == DATASET_COLUMNS;
    let without_quality = names.as_slice() == &DATASET_COLUMNS[..DATASET_COLUMNS.len() - 1];
    if !full && !without_quality {
        let missing: Vec<&str> = DATASET_COLUMNS
            .iter()
            .copied()
            .filter(|c| !names.contains(c))
            .collect();
        let reason = if missing.is_empty() {
            "header columns out of order".to_string()
        } else {
            format!("header missing columns: {}", missing.join(", "))
        };
        return Err(RecordsError::malformed(1, reason));
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let record = parse_row(&row, line)?;
        if !seen.insert(record.record_id.clone()) {
            return Err(RecordsError::malformed(
                line,
                format!("duplicate record_id {}", record.record_id),
            ));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn parse_dataset_path(path: &Path) -> Result<Vec<StudyRecord>, RecordsError> {
    let file = std::fs::File::open(path)
        .map_err(|e| RecordsError::Io(format!("{}: {e}", path.display())))?;
    parse_dataset(file)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn quality_field(record: &StudyRecord) -> String {
    match (record.quality_code, &record.quality_annotation) {
        (None, _) => String::new(),
        (Some(c), None) => c.state.code().to_string(),
        (Some(c), Some(note)) => format!("{}({note})", c.state.code()),
    }
}

/// Writes records in the dataset format; `parse_dataset` reads it back
/// field-identical (quality confidence aside, which is not serialized).
pub fn write_dataset<W: Write>(writer: W, records: &[StudyRecord]) -> Result<(), RecordsError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let io = |e: csv::Error| RecordsError::Io(e.to_string());
    w.write_record(DATASET_COLUMNS).map_err(io)?;
    for r in records {
        let ev = r.quality_evidence;
        w.write_record([
            r.record_id.as_str(),
            &r.article_id,
            r.biome.label(),
            r.wetland_type.label(),
            r.service.label(),
            r.method.label(),
            r.value_basis.label(),
            &r.raw_value.to_string(),
            &r.currency_code,
            &r.value_year.to_string(),
            &r.wetland_size_ha.to_string(),
            &r.gni_per_capita.to_string(),
            &r.population_density.to_string(),
            flag(ev.degradation_described),
            flag(ev.degrading_activities),
            flag(ev.market_price_method),
            flag(ev.ideal_state_assumed),
            &quality_field(r),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| RecordsError::Io(e.to_string()))
}
