//! Persisted model: the encoding schema plus the fitted coefficients, so
//! predictions need no refit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::EncodingSchema;
use crate::ols::RegressionFit;
use crate::transfer::TransferError;

pub const MODEL_FORMAT: &str = "wetval-model/1";

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("unsupported model format {0:?}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Schema(#[from] TransferError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub model_id: String,
    pub schema: EncodingSchema,
    pub fit: RegressionFit,
}

impl ModelDocument {
    pub fn new(schema: EncodingSchema, fit: RegressionFit) -> Result<Self, ModelError> {
        let labels = schema.column_labels();
        if labels != fit.column_labels {
            return Err(TransferError::SchemaMismatch {
                model: fit.column_labels.join(", "),
                schema: labels.join(", "),
            }
            .into());
        }
        Ok(ModelDocument {
            format: MODEL_FORMAT.into(),
            model_id: fit.fingerprint(),
            schema,
            fit,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(ModelError::UnsupportedFormat(doc.format));
        }
        let schema = doc
            .schema
            .clone()
            .validated()
            .map_err(|e| ModelError::Malformed(e.to_string()))?;
        if doc.fit.coefficients.len() != doc.fit.column_labels.len() {
            return Err(ModelError::Malformed(
                "coefficient count differs from labels".into(),
            ));
        }
        ModelDocument::new(schema, doc.fit)
    }

    pub fn read(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

/// Finite floats as JSON numbers; NaN and infinities as the strings
/// `"NaN"`, `"inf"`, `"-inf"`.
pub(crate) mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub(crate) fn to_repr(v: f64) -> Result<f64, &'static str> {
        if v.is_finite() {
            Ok(v)
        } else if v.is_nan() {
            Err("NaN")
        } else if v > 0.0 {
            Err("inf")
        } else {
            Err("-inf")
        }
    }

    fn from_text(s: &str) -> Option<f64> {
        match s {
            "NaN" => Some(f64::NAN),
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            _ => None,
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match to_repr(*v) {
            Ok(x) => s.serialize_f64(x),
            Err(t) => s.serialize_str(t),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => {
                from_text(&t).ok_or_else(|| serde::de::Error::custom(format!("bad float {t:?}")))
            }
        }
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                match super::to_repr(*x) {
                    Ok(x) => seq.serialize_element(&x)?,
                    Err(t) => seq.serialize_element(t)?,
                }
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let raw = Vec::<super::Repr>::deserialize(d)?;
            raw.into_iter()
                .map(|r| match r {
                    super::Repr::Num(x) => Ok(x),
                    super::Repr::Text(t) => super::from_text(&t)
                        .ok_or_else(|| serde::de::Error::custom(format!("bad float {t:?}"))),
                })
                .collect()
        }
    }
}
