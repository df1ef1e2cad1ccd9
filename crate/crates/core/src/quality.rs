//! Rule-based wetland quality coding and the weighted quality index.

use serde::{Deserialize, Serialize};

use crate::records::StudyRecord;

/// Evidence about a study site, pre-extracted from the source article.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QualityEvidence {
    pub degradation_described: bool,
    pub degrading_activities: bool,
    pub market_price_method: bool,
    pub ideal_state_assumed: bool,
}

impl QualityEvidence {
    /// All 16 flag combinations, bit 3 = degradation_described down to
    /// bit 0 = ideal_state_assumed.
    pub fn all() -> impl Iterator<Item = QualityEvidence> {
        (0u8..16).map(|bits| QualityEvidence {
            degradation_described: bits & 8 != 0,
            degrading_activities: bits & 4 != 0,
            market_price_method: bits & 2 != 0,
            ideal_state_assumed: bits & 1 != 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityState {
    NaturallyFunctioning,
    Degraded,
}

impl QualityState {
    /// Numeric code: 1 = naturally functioning, 2 = degraded.
    pub fn code(self) -> u8 {
        match self {
            QualityState::NaturallyFunctioning => 1,
            QualityState::Degraded => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(QualityState::NaturallyFunctioning),
            2 => Some(QualityState::Degraded),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QualityState::NaturallyFunctioning => "NaturallyFunctioning",
            QualityState::Degraded => "Degraded",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        let s = s.trim();
        [QualityState::NaturallyFunctioning, QualityState::Degraded]
            .into_iter()
            .find(|q| q.label().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Confidence {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QualityCode {
    pub state: QualityState,
    pub confidence: Confidence,
}

/// Assigns the two-level quality state.
///
/// Precedence: an assumed ideal state wins, then a described degradation,
/// then degrading human activities; otherwise the site is naturally
/// functioning. Market-price evidence only raises confidence in a degraded
/// code.
pub fn assign_quality(evidence: QualityEvidence) -> QualityCode {
    use Confidence::*;
    use QualityState::*;
    let (state, confidence) = if evidence.ideal_state_assumed {
        (NaturallyFunctioning, High)
    } else if evidence.degradation_described {
        (Degraded, High)
    } else if evidence.degrading_activities {
        let c = if evidence.market_price_method {
            High
        } else {
            Low
        };
        (Degraded, c)
    } else {
        (NaturallyFunctioning, Low)
    };
    QualityCode { state, confidence }
}

/// Fills in missing quality codes from the evidence flags. Codes carried from
/// the source are kept; their confidence is taken from the coder when the
/// coder agrees on the state.
pub fn code_records(records: &[StudyRecord]) -> Vec<StudyRecord> {
    records
        .iter()
        .map(|r| {
            let assigned = assign_quality(r.quality_evidence);
            let mut r = r.clone();
            r.quality_code = match r.quality_code {
                None => Some(assigned),
                Some(c) if c.state == assigned.state => Some(assigned),
                carried => carried,
            };
            r
        })
        .collect()
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum QualityError {
    #[error("quality index out of range: {0}")]
    IndexOutOfRange(String),
}

/// Weighted-score quality index: Σ weight·score ÷ max_score.
pub fn quality_index(scores: &[(f64, f64)], max_score: f64) -> Result<f64, QualityError> {
    if !(max_score > 0.0 && max_score.is_finite()) {
        return Err(QualityError::IndexOutOfRange(format!(
            "max_score must be positive, got {max_score}"
        )));
    }
    let mut total = 0.0;
    for &(weight, score) in scores {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(QualityError::IndexOutOfRange(format!(
                "weight must be positive, got {weight}"
            )));
        }
        if !(score >= 0.0 && score.is_finite()) {
            return Err(QualityError::IndexOutOfRange(format!(
                "score must be non-negative, got {score}"
            )));
        }
        total += weight * score;
    }
    let index = total / max_score;
    if index > 1.0 {
        return Err(QualityError::IndexOutOfRange(format!(
            "weighted total {total} exceeds max_score {max_score}"
        )));
    }
    Ok(index)
}
