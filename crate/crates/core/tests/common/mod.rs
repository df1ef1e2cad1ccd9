#![allow(dead_code)]
pub mod oracle;

use std::path::{Path, PathBuf};

use wetval_core::cli::{prepare, RunConfig};
use wetval_core::records::{NormalizationTables, StudyRecord};
use wetval_core::screening::ScreeningReport;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn dataset_path() -> PathBuf {
    data_dir().join("teeb_inland_wetlands.csv")
}

pub fn rates_path() -> PathBuf {
    data_dir().join("normalization_rates.csv")
}

pub fn config() -> RunConfig {
    RunConfig::new(dataset_path(), rates_path())
}

pub fn tables() -> NormalizationTables {
    NormalizationTables::from_path(&rates_path()).unwrap()
}

/// Screening report and the screened, quality-coded records.
pub fn bundled() -> (ScreeningReport, Vec<StudyRecord>) {
    prepare(&config()).unwrap()
}

/// Rows of a small CSV fixture as string vectors, header first.
pub fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wetval_core::design::{ContinuousField, EncodingSchema, NominalField, Term};
use wetval_core::quality::{Confidence, QualityCode, QualityEvidence, QualityState};
use wetval_core::records::{Biome, Method, Service, ValueBasis, WetlandType};

/// Tables where 2007 US$ map to themselves.
pub fn usd_tables() -> NormalizationTables {
    NormalizationTables::new(
        BTreeMap::from([(2007, 1.0)]),
        BTreeMap::from([(("USD".to_string(), 2007), 1.0)]),
    )
    .unwrap()
}

pub struct Site {
    pub wetland_type: WetlandType,
    pub service: Service,
    pub method: Method,
    pub size: f64,
    pub gni: f64,
    pub quality: QualityState,
}

pub fn record(id: &str, site: &Site, value: f64) -> StudyRecord {
    StudyRecord {
        record_id: id.to_string(),
        article_id: format!("A-{id}"),
        biome: Biome::InlandWetlands,
        wetland_type: site.wetland_type,
        service: site.service,
        method: site.method,
        value_basis: ValueBasis::PerAnnum,
        raw_value: value,
        currency_code: "USD".into(),
        value_year: 2007,
        wetland_size_ha: site.size,
        gni_per_capita: site.gni,
        population_density: 50.0,
        quality_evidence: QualityEvidence::default(),
        quality_code: Some(QualityCode {
            state: site.quality,
            confidence: Confidence::High,
        }),
        quality_annotation: None,
    }
}

/// ln size, ln GNI, quality and a two-dummy wetland-type group.
pub fn small_schema() -> EncodingSchema {
    EncodingSchema {
        terms: vec![
            Term::Log {
                field: ContinuousField::WetlandSizeHa,
                label: None,
            },
            Term::Quality {
                positive_state: QualityState::NaturallyFunctioning,
                label: None,
            },
            Term::Nominal {
                group: "type".into(),
                field: NominalField::WetlandType,
                levels: vec!["Floodplains".into(), "PeatWetlands".into()],
                reference: vec!["SwampsMarshes".into(), "Unspecified".into()],
            },
            Term::Log {
                field: ContinuousField::GniPerCapita,
                label: None,
            },
        ],
    }
}

/// `n` records whose log values follow `beta` under [`small_schema`] with no
/// disturbance.
pub fn noise_free(n: usize, seed: u64, beta: &[f64]) -> Vec<StudyRecord> {
    let schema = small_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let types = [
        WetlandType::Floodplains,
        WetlandType::PeatWetlands,
        WetlandType::SwampsMarshes,
        WetlandType::Unspecified,
    ];
    let services = [Service::Food, Service::RawMaterials, Service::Recreation];
    (0..n)
        .map(|i| {
            let site = Site {
                wetland_type: types[i % types.len()],
                service: services[i % services.len()],
                method: Method::DirectMarketPricing,
                size: rng.gen_range(1.0..1e5),
                gni: rng.gen_range(300.0..40_000.0),
                quality: if rng.gen_bool(0.5) {
                    QualityState::NaturallyFunctioning
                } else {
                    QualityState::Degraded
                },
            };
            let probe = record("probe", &site, 1.0);
            let row = schema.encode_row(&probe).unwrap();
            let y: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            record(&format!("S{i:02}"), &site, y.exp())
        })
        .collect()
}

pub const SMALL_BETA: [f64; 6] = [2.0, -0.3, 1.5, 0.8, -0.4, 0.25];
