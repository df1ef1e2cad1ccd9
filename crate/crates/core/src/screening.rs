//! Ordered, audited screening of raw query results down to the analysis set.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::records::{Method, Service, StudyRecord, ValueBasis};

/// What a stage does to the records that reach it.
#[derive(Clone, Copy)]
pub enum StageKind {
    /// Drop records whose fields (other than `record_id`) repeat an earlier
    /// record. The first occurrence in input order survives.
    Deduplicate,
    /// Keep only records matching the predicate.
    Retain(fn(&StudyRecord) -> bool),
}

#[derive(Clone, Copy)]
pub struct Stage {
    pub name: &'static str,
    pub kind: StageKind,
}

impl Stage {
    fn apply(&self, records: Vec<StudyRecord>) -> Vec<StudyRecord> {
        match self.kind {
            StageKind::Deduplicate => {
                let keep: Vec<bool> = {
                    let mut seen = HashSet::new();
                    records
                        .iter()
                        .map(|r| seen.insert(r.content_key()))
                        .collect()
                };
                records
                    .into_iter()
                    .zip(keep)
                    .filter_map(|(r, k)| k.then_some(r))
                    .collect()
            }
            StageKind::Retain(keep) => records.into_iter().filter(keep).collect(),
        }
    }
}

/// The four-stage dropping process for single-service primary estimates.
pub fn default_stages() -> Vec<Stage> {
    vec![
        Stage {
            name: "remove_duplicates",
            kind: StageKind::Deduplicate,
        },
        Stage {
            name: "keep_per_annum",
            kind: StageKind::Retain(|r| r.value_basis == ValueBasis::PerAnnum),
        },
        Stage {
            name: "drop_benefit_transfer",
            kind: StageKind::Retain(|r| r.method != Method::BenefitTransfer),
        },
        Stage {
            name: "drop_tev_and_various",
            kind: StageKind::Retain(|r| !matches!(r.service, Service::TEV | Service::Various)),
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageSummary {
    pub name: String,
    pub removed: usize,
    pub remaining: usize,
    /// Distinct article ids among the remaining records.
    pub articles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningReport {
    pub ingested: usize,
    pub ingested_articles: usize,
    pub stages: Vec<StageSummary>,
    pub retained: Vec<StudyRecord>,
    pub article_count: usize,
}

impl ScreeningReport {
    pub fn remaining(&self) -> usize {
        self.stages.last().map_or(self.ingested, |s| s.remaining)
    }
}

fn article_count(records: &[StudyRecord]) -> usize {
    records
        .iter()
        .map(|r| r.article_id.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

/// Runs `stages` in order over `records`.
pub fn screen_with(records: &[StudyRecord], stages: &[Stage]) -> ScreeningReport {
    let mut current = records.to_vec();
    let mut summaries = Vec::with_capacity(stages.len());
    for stage in stages {
        let before = current.len();
        current = stage.apply(current);
        summaries.push(StageSummary {
            name: stage.name.to_string(),
            removed: before - current.len(),
            remaining: current.len(),
            articles: article_count(&current),
        });
    }
    ScreeningReport {
        ingested: records.len(),
        ingested_articles: article_count(records),
        stages: summaries,
        article_count: article_count(&current),
        retained: current,
    }
}

pub fn screen(records: &[StudyRecord]) -> ScreeningReport {
    screen_with(records, &default_stages())
}

/// `(stage name, removed, remaining)` for each stage, in order.
pub fn stage_counts(report: &ScreeningReport) -> Vec<(String, usize, usize)> {
    report
        .stages
        .iter()
        .map(|s| (s.name.clone(), s.removed, s.remaining))
        .collect()
}
