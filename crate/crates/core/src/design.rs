//! Encoding of records into a labeled regression design: log transforms,
//! dummy groups against merged reference levels, and the quality dummy.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::quality::QualityState;
use crate::records::{
    normalize_value, Biome, Category, Method, NormalizationTables, RecordsError, Service,
    StudyRecord, ValueBasis, WetlandType,
};

pub const INTERCEPT: &str = "intercept";

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("record {record_id}: {column} must be strictly positive")]
    NonPositiveValue { record_id: String, column: String },
    #[error("group {group}: unknown level {level:?}")]
    UnknownLevel { group: String, level: String },
    #[error("record {0} has no quality code")]
    MissingQualityCode(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("{0}")]
    Normalization(#[from] RecordsError),
}

/// Nominal record fields usable as dummy groups or cross-tab dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NominalField {
    Biome,
    WetlandType,
    Service,
    Method,
    ValueBasis,
}

impl NominalField {
    pub const ALL: [NominalField; 5] = [
        NominalField::Biome,
        NominalField::WetlandType,
        NominalField::Service,
        NominalField::Method,
        NominalField::ValueBasis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NominalField::Biome => "biome",
            NominalField::WetlandType => "wetland_type",
            NominalField::Service => "service",
            NominalField::Method => "method",
            NominalField::ValueBasis => "value_basis",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
    }

    /// Canonical labels in declaration order.
    pub fn levels(self) -> Vec<&'static str> {
        fn labels<C: Category>() -> Vec<&'static str> {
            C::ALL.iter().map(|c| c.label()).collect()
        }
        match self {
            NominalField::Biome => labels::<Biome>(),
            NominalField::WetlandType => labels::<WetlandType>(),
            NominalField::Service => labels::<Service>(),
            NominalField::Method => labels::<Method>(),
            NominalField::ValueBasis => labels::<ValueBasis>(),
        }
    }

    pub fn display_name(self, level: &str) -> Option<&'static str> {
        fn lookup<C: Category>(s: &str) -> Option<&'static str> {
            C::from_label(s).map(|c| c.display_name())
        }
        match self {
            NominalField::Biome => lookup::<Biome>(level),
            NominalField::WetlandType => lookup::<WetlandType>(level),
            NominalField::Service => lookup::<Service>(level),
            NominalField::Method => lookup::<Method>(level),
            NominalField::ValueBasis => lookup::<ValueBasis>(level),
        }
    }

    /// Canonical spelling of a (case-insensitive) level label.
    pub fn canonical(self, level: &str) -> Option<&'static str> {
        self.levels()
            .into_iter()
            .find(|l| l.eq_ignore_ascii_case(level.trim()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousField {
    WetlandSizeHa,
    GniPerCapita,
    PopulationDensity,
}

impl ContinuousField {
    pub fn name(self) -> &'static str {
        match self {
            ContinuousField::WetlandSizeHa => "wetland_size_ha",
            ContinuousField::GniPerCapita => "gni_per_capita",
            ContinuousField::PopulationDensity => "population_density",
        }
    }

    pub fn default_label(self) -> &'static str {
        match self {
            ContinuousField::WetlandSizeHa => "Size(ln)",
            ContinuousField::GniPerCapita => "GNI per capita (ln)",
            ContinuousField::PopulationDensity => "Population density (ln)",
        }
    }
}

/// Explanatory attributes of a study or policy site.
pub trait SiteAttributes {
    fn site_id(&self) -> &str;
    fn nominal(&self, field: NominalField) -> &'static str;
    fn continuous(&self, field: ContinuousField) -> f64;
    fn quality(&self) -> Option<QualityState>;
}

impl SiteAttributes for StudyRecord {
    fn site_id(&self) -> &str {
        &self.record_id
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
        self.quality_state()
    }
}

/// One block of design columns, in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    /// One dummy per included level; reference levels are the merged
    /// baseline.
    Nominal {
        group: String,
        field: NominalField,
        levels: Vec<String>,
        reference: Vec<String>,
    },
    /// Natural log of a strictly positive field.
    Log {
        field: ContinuousField,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    /// 1 when the site's quality state equals `positive_state`.
    Quality {
        positive_state: QualityState,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl Term {
    fn labels(&self) -> Vec<String> {
        match self {
            Term::Nominal { field, levels, .. } => levels
                .iter()
                .map(|l| field.display_name(l).unwrap_or(l).to_string())
                .collect(),
            Term::Log { field, label } => {
                vec![label
                    .clone()
                    .unwrap_or_else(|| field.default_label().into())]
            }
            Term::Quality { label, .. } => vec![label.clone().unwrap_or_else(|| "Quality".into())],
        }
    }
}

/// Ordered list of terms; the intercept always comes first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSchema {
    #[serde(rename = "term")]
    pub terms: Vec<Term>,
}

fn nominal(group: &str, field: NominalField, levels: &[&str], reference: &[&str]) -> Term {
    Term::Nominal {
        group: group.into(),
        field,
        levels: levels.iter().map(|s| s.to_string()).collect(),
        reference: reference.iter().map(|s| s.to_string()).collect(),
    }
}

impl EncodingSchema {
    /// The standard meta-regression layout: four method dummies, ln size,
    /// quality, three wetland-type dummies, eight service dummies, ln GNI.
    pub fn default_schema() -> Self {
        EncodingSchema {
            terms: vec![
                nominal(
                    "method",
                    NominalField::Method,
                    &[
                        "AvoidedCost",
                        "ContingentValuation",
                        "DirectMarketPricing",
                        "ReplacementCost",
                    ],
                    &[
                        "FactorIncomeProduction",
                        "MitigationRestorationCost",
                        "TravelCost",
                        "BenefitTransfer",
                    ],
                ),
                Term::Log {
                    field: ContinuousField::WetlandSizeHa,
                    label: None,
                },
                Term::Quality {
                    positive_state: QualityState::NaturallyFunctioning,
                    label: None,
                },
                nominal(
                    "wetland_type",
                    NominalField::WetlandType,
                    &["Floodplains", "PeatWetlands", "SwampsMarshes"],
                    &["Unspecified"],
                ),
                nominal(
                    "service",
                    NominalField::Service,
                    &[
                        "Climate",
                        "ExtremeEvents",
                        "Food",
                        "Genepool",
                        "Medical",
                        "RawMaterials",
                        "Recreation",
                        "SoilFertility",
                    ],
                    &[
                        "Ornamental",
                        "Waste",
                        "Water",
                        "WaterFlows",
                        "TEV",
                        "Various",
                    ],
                ),
                Term::Log {
                    field: ContinuousField::GniPerCapita,
                    label: None,
                },
            ],
        }
    }

    /// Intercept-only schema.
    pub fn intercept_only() -> Self {
        EncodingSchema { terms: Vec::new() }
    }

    pub fn from_toml(text: &str) -> Result<Self, DesignError> {
        let schema: EncodingSchema =
            toml::from_str(text).map_err(|e| DesignError::InvalidSchema(e.to_string()))?;
        schema.validated()
    }

    pub fn from_path(path: &Path) -> Result<Self, DesignError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DesignError::InvalidSchema(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    /// Checks level lists and canonicalizes label spelling.
    pub fn validated(mut self) -> Result<Self, DesignError> {
        for term in &mut self.terms {
            if let Term::Nominal {
                group,
                field,
                levels,
                reference,
            } = term
            {
                let mut seen = BTreeSet::new();
                for level in levels.iter_mut().chain(reference.iter_mut()) {
                    let canon =
                        field
                            .canonical(level)
                            .ok_or_else(|| DesignError::UnknownLevel {
                                group: group.clone(),
                                level: level.clone(),
                            })?;
                    if !seen.insert(canon) {
                        return Err(DesignError::InvalidSchema(format!(
                            "group {group}: level {canon} listed twice"
                        )));
                    }
                    *level = canon.to_string();
                }
                let missing: Vec<&str> = field
                    .levels()
                    .into_iter()
                    .filter(|l| !seen.contains(l))
                    .collect();
                if !missing.is_empty() {
                    return Err(DesignError::InvalidSchema(format!(
                        "group {group}: levels not assigned to dummies or reference: {}",
                        missing.join(", ")
                    )));
                }
            }
        }
        let labels = self.column_labels();
        let mut seen = BTreeSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(DesignError::InvalidSchema(format!(
                "duplicate column label {dup:?}"
            )));
        }
        Ok(self)
    }

    /// Column labels, intercept first.
    pub fn column_labels(&self) -> Vec<String> {
        std::iter::once(INTERCEPT.to_string())
            .chain(self.terms.iter().flat_map(Term::labels))
            .collect()
    }

    /// Number of non-intercept columns.
    pub fn k(&self) -> usize {
        self.column_labels().len() - 1
    }

    pub fn nominal_groups(
        &self,
    ) -> impl Iterator<Item = (&str, NominalField, &[String], &[String])> {
        self.terms.iter().filter_map(|t| match t {
            Term::Nominal {
                group,
                field,
                levels,
                reference,
            } => Some((
                group.as_str(),
                *field,
                levels.as_slice(),
                reference.as_slice(),
            )),
            _ => None,
        })
    }

    pub fn continuous_log(&self) -> impl Iterator<Item = ContinuousField> + '_ {
        self.terms.iter().filter_map(|t| match t {
            Term::Log { field, .. } => Some(*field),
            _ => None,
        })
    }

    pub fn include_quality(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::Quality { .. }))
    }

    /// Encodes one site as a design row (intercept first).
    pub fn encode_row<S: SiteAttributes + ?Sized>(
        &self,
        site: &S,
    ) -> Result<Vec<f64>, DesignError> {
        let mut row = Vec::with_capacity(self.k() + 1);
        row.push(1.0);
        for term in &self.terms {
            match term {
                Term::Nominal {
                    group,
                    field,
                    levels,
                    reference,
                } => {
                    let value = site.nominal(*field);
                    let hit = levels.iter().position(|l| l == value);
                    if hit.is_none() && !reference.iter().any(|l| l == value) {
                        return Err(DesignError::UnknownLevel {
                            group: group.clone(),
                            level: value.to_string(),
                        });
                    }
                    row.extend((0..levels.len()).map(|i| if Some(i) == hit { 1.0 } else { 0.0 }));
                }
                Term::Log { field, .. } => {
                    let v = site.continuous(*field);
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(DesignError::NonPositiveValue {
                            record_id: site.site_id().to_string(),
                            column: field.name().to_string(),
                        });
                    }
                    row.push(v.ln());
                }
                Term::Quality { positive_state, .. } => {
                    let state = site.quality().ok_or_else(|| {
                        DesignError::MissingQualityCode(site.site_id().to_string())
                    })?;
                    row.push(if state == *positive_state { 1.0 } else { 0.0 });
                }
            }
        }
        Ok(row)
    }

    /// Copy of the schema in which every dummy level absent from `sites` is
    /// moved into that group's reference set.
    pub fn fold_unobserved<S: SiteAttributes>(&self, sites: &[S]) -> EncodingSchema {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Nominal {
                    group,
                    field,
                    levels,
                    reference,
                } => {
                    let observed: BTreeSet<&str> =
                        sites.iter().map(|s| s.nominal(*field)).collect();
                    let (keep, fold): (Vec<String>, Vec<String>) = levels
                        .iter()
                        .cloned()
                        .partition(|l| observed.contains(l.as_str()));
                    Term::Nominal {
                        group: group.clone(),
                        field: *field,
                        levels: keep,
                        reference: reference.iter().cloned().chain(fold).collect(),
                    }
                }
                other => other.clone(),
            })
            .collect();
        EncodingSchema { terms }
    }
}

/// Labeled design matrix with the log-value response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub column_labels: Vec<String>,
    pub x: Matrix,
    pub y: Vec<f64>,
    pub row_ids: Vec<String>,
}

impl DesignMatrix {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn k(&self) -> usize {
        self.x.cols() - 1
    }

    /// Delimited export: header of column labels plus `y`.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let mut header = self.column_labels.clone();
        header.push("y".into());
        w.write_record(&header)?;
        for (row, y) in self.x.row_iter().zip(&self.y) {
            let fields: Vec<String> = row
                .iter()
                .chain(std::iter::once(y))
                .map(f64::to_string)
                .collect();
            w.write_record(&fields)?;
        }
        w.flush()
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            column_labels: self.column_labels.clone(),
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            row_ids: rows.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }
}

/// Builds the design for `records`: y = ln(2007-US$ value).
pub fn encode(
    records: &[StudyRecord],
    schema: &EncodingSchema,
    tables: &NormalizationTables,
) -> Result<DesignMatrix, DesignError> {
    let labels = schema.column_labels();
    let mut x = Matrix::zeros(records.len(), labels.len());
    let mut y = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        for (j, v) in schema.encode_row(r)?.into_iter().enumerate() {
            x.set(i, j, v);
        }
        let value = normalize_value(r, tables)?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(DesignError::NonPositiveValue {
                record_id: r.record_id.clone(),
                column: "raw_value".into(),
            });
        }
        y.push(value.ln());
    }
    Ok(DesignMatrix {
        column_labels: labels,
        x,
        y,
        row_ids: records.iter().map(|r| r.record_id.clone()).collect(),
    })
}

/// Observed level counts for a nominal field, in declaration order.
pub fn level_counts<S: SiteAttributes>(
    sites: &[S],
    field: NominalField,
) -> Vec<(&'static str, usize)> {
    field
        .levels()
        .into_iter()
        .map(|level| {
            (
                level,
                sites.iter().filter(|s| s.nominal(field) == level).count(),
            )
        })
        .filter(|&(_, n)| n > 0)
        .collect()
}
