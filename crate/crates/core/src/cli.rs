//! Command-line pipeline: ingest → screen → code quality → encode → fit →
//! report or predict.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::design::{encode, EncodingSchema};
use crate::error::Error;
use crate::model::ModelDocument;
use crate::ols::fit_ols;
use crate::quality::code_records;
use crate::records::{parse_dataset_path, NormalizationTables, StudyRecord};
use crate::report::{
    crosstab, render_crosstab, render_loocv, render_predictions, render_regression,
    render_screening, OutputFormat,
};
use crate::screening::{screen, ScreeningReport};
use crate::transfer::{loocv, parse_policy_sites_path, predict_value, BackTransform};

pub const DEFAULT_DATA: &str = "data/teeb_inland_wetlands.csv";
pub const DEFAULT_RATES: &str = "data/normalization_rates.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Naive,
    Corrected,
}

impl From<ModeArg> for BackTransform {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Naive => BackTransform::NaiveExp,
            ModeArg::Corrected => BackTransform::HalfVarianceCorrected,
        }
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Study-record CSV
    #[arg(long, global = true, default_value = DEFAULT_DATA)]
    pub data: PathBuf,
    /// Deflator and exchange-rate CSV
    #[arg(long, global = true, default_value = DEFAULT_RATES)]
    pub rates: PathBuf,
    /// Encoding schema (TOML); the default layout when absent
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,
    /// Directory receiving output files; stdout only when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: FormatArg,
}

#[derive(Debug, Parser)]
#[command(
    name = "wetval",
    version,
    about = "Wetland value meta-regression and benefit transfer"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Screening audit: counts removed and remaining per stage
    Screen,
    /// Cross-tabulate the screened records by two nominal fields
    Crosstab {
        #[arg(long, default_value = "service")]
        row: String,
        #[arg(long, default_value = "wetland_type")]
        col: String,
        /// Omit rows and columns with no records
        #[arg(long)]
        suppress_empty: bool,
    },
    /// Fit the meta-regression; writes model.json and the regression table
    Fit,
    /// Transfer values to policy sites with a saved model
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sites: PathBuf,
        #[arg(long, value_enum, default_value = "corrected")]
        mode: ModeArg,
    },
    /// Leave-one-out function vs unit transfer errors
    Loocv {
        #[arg(long, value_enum, default_value = "corrected")]
        mode: ModeArg,
    },
}

/// Resolved paths and output settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset_path: PathBuf,
    pub normalization_path: PathBuf,
    pub schema_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

impl From<&GlobalArgs> for RunConfig {
    fn from(g: &GlobalArgs) -> Self {
        RunConfig {
            dataset_path: g.data.clone(),
            normalization_path: g.rates.clone(),
            schema_path: g.schema.clone(),
            output_dir: g.out.clone(),
            format: g.format.into(),
        }
    }
}

impl RunConfig {
    pub fn new(dataset_path: impl Into<PathBuf>, normalization_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset_path: dataset_path.into(),
            normalization_path: normalization_path.into(),
            schema_path: None,
            output_dir: None,
            format: OutputFormat::Text,
        }
    }

    fn schema(&self) -> Result<EncodingSchema, Error> {
        match &self.schema_path {
            Some(p) => Ok(EncodingSchema::from_path(p)?),
            None => Ok(EncodingSchema::default_schema()),
        }
    }

    fn tables(&self) -> Result<NormalizationTables, Error> {
        Ok(NormalizationTables::from_path(&self.normalization_path)?)
    }

    fn emit(&self, name: &str, text: &str) -> Result<(), Error> {
        if let Some(dir) = &self.output_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    fn file_name(&self, stem: &str) -> String {
        format!("{stem}.{}", self.format.extension())
    }
}

/// Parses and screens the dataset, then codes quality on the retained set.
pub fn prepare(config: &RunConfig) -> Result<(ScreeningReport, Vec<StudyRecord>), Error> {
    let records = parse_dataset_path(&config.dataset_path)?;
    let report = screen(&records);
    let coded = code_records(&report.retained);
    Ok((report, coded))
}

pub fn cmd_screen(config: &RunConfig) -> Result<String, Error> {
    let (report, _) = prepare(config)?;
    let text = render_screening(&report, config.format);
    config.emit(&config.file_name("screening"), &text)?;
    Ok(text)
}

pub fn cmd_crosstab(
    config: &RunConfig,
    row: &str,
    col: &str,
    suppress_empty: bool,
) -> Result<String, Error> {
    let (_, records) = prepare(config)?;
    let tab = crosstab(&records, row, col)?;
    let text = render_crosstab(&tab, config.format, suppress_empty);
    config.emit(
        &config.file_name(&format!(
            "crosstab_{}_{}",
            tab.row_dim.name(),
            tab.col_dim.name()
        )),
        &text,
    )?;
    Ok(text)
}

/// Full pipeline through the regression table. Writes `model.json` next to
/// the table when an output directory is set.
pub fn cmd_fit(config: &RunConfig) -> Result<String, Error> {
    let schema = config.schema()?;
    let tables = config.tables()?;
    let (_, records) = prepare(config)?;
    let design = encode(&records, &schema, &tables)?;
    let fit = fit_ols(&design)?;
    let doc = ModelDocument::new(schema, fit)?;
    let text = render_regression(&doc.fit, config.format);
    config.emit("model.json", &doc.to_json())?;
    config.emit(&config.file_name("regression"), &text)?;
    Ok(text)
}

pub fn cmd_predict(
    config: &RunConfig,
    model: &Path,
    sites: &Path,
    mode: BackTransform,
) -> Result<String, Error> {
    let doc = ModelDocument::read(model)?;
    let sites = parse_policy_sites_path(sites)?;
    let predictions = sites
        .iter()
        .map(|s| predict_value(&doc.fit, &doc.schema, s, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let text = render_predictions(&predictions, config.format);
    config.emit(&config.file_name("predictions"), &text)?;
    Ok(text)
}

pub fn cmd_loocv(config: &RunConfig, mode: BackTransform) -> Result<String, Error> {
    let schema = config.schema()?;
    let tables = config.tables()?;
    let (_, records) = prepare(config)?;
    let report = loocv(&records, &schema, &tables, mode)?;
    let text = render_loocv(&report, config.format);
    config.emit(&config.file_name("loocv"), &text)?;
    Ok(text)
}

pub fn execute(cli: &Cli) -> Result<String, Error> {
    let config = RunConfig::from(&cli.global);
    match &cli.command {
        Command::Screen => cmd_screen(&config),
        Command::Crosstab {
            row,
            col,
            suppress_empty,
        } => cmd_crosstab(&config, row, col, *suppress_empty),
        Command::Fit => cmd_fit(&config),
        Command::Predict { model, sites, mode } => {
            cmd_predict(&config, model, sites, (*mode).into())
        }
        Command::Loocv { mode } => cmd_loocv(&config, (*mode).into()),
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code. Failures print a single diagnostic line to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                crate::error::EXIT_INPUT
            } else {
                0
            };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let line = rendered.lines().next().unwrap_or("usage error");
                let _ = writeln!(stderr, "{line}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => match stdout.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "io: stdout: {e}");
                crate::error::EXIT_IO
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
