//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when an input file is unreadable or invalid,
//! 2 on a usage or configuration error (unknown flag, misordered thresholds).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::annotator::{annotate_corpus, annotated_corpus_json, ThreadAnnotation};
use crate::classifier::{
    self, assignments_json, classify_with, exceptions, exceptions_json, CategoryAssignment,
    CategoryModel, Thresholds,
};
use crate::corpus::{parse_corpus, Corpus};
use crate::gridlab::{
    self, aggregate, build_grid, induce_with, markdown_report, scripts_json, validate_scripts,
    validation_json, CrossGrid, ScriptThresholds,
};
use crate::lexicon::{self, Lexicon};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input { .. } | CliError::Output { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "threadscript",
    version,
    about = "Annotate forum threads, classify support requests and induce request scripts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Validate a corpus and print thread and message counts.
    Ingest,
    /// Write the annotated corpus.
    Annotate,
    /// Write category assignments and the exception list.
    Classify,
    /// Write the slot × thread cross-grid.
    Grid,
    /// Write induced scripts and the markdown report.
    Induce,
    /// Check induced scripts against held-out threads.
    Validate,
    /// Run every stage in order.
    Pipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Args)]
struct Options {
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    models: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Second corpus for `validate`; defaults to the training corpus.
    #[arg(long, global = true)]
    holdout: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = classifier::DEFAULT_TAU_ASSIGN)]
    tau_assign: f64,
    #[arg(long, global = true, default_value_t = classifier::DEFAULT_TAU_UNCLASSIFIABLE)]
    tau_unclassifiable: f64,
    #[arg(long, global = true, default_value_t = gridlab::DEFAULT_THETA_MANDATORY)]
    theta_mandatory: f64,
    #[arg(long, global = true, default_value_t = gridlab::DEFAULT_THETA_OPTIONAL)]
    theta_optional: f64,
    #[arg(long, global = true, default_value_t = gridlab::DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

/// Validated run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub corpus: PathBuf,
    pub lexicon: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub holdout: Option<PathBuf>,
    pub out: PathBuf,
    pub classify: Thresholds,
    pub scripts: ScriptThresholds,
    pub gamma: f64,
    pub format: Option<Format>,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let o = cli.options;
        let command = cli.command;
        let need = |p: Option<PathBuf>, flag: &str| {
            p.ok_or_else(|| CliError::Config(format!("`{}` requires --{flag}", name(command))))
        };
        let corpus = need(o.corpus, "corpus")?;
        let (lexicon, models) = match command {
            Command::Ingest => (o.lexicon, o.models),
            Command::Annotate | Command::Grid => (Some(need(o.lexicon, "lexicon")?), o.models),
            _ => (
                Some(need(o.lexicon, "lexicon")?),
                Some(need(o.models, "models")?),
            ),
        };
        let classify = Thresholds::new(o.tau_assign, o.tau_unclassifiable)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let scripts = ScriptThresholds::new(o.theta_mandatory, o.theta_optional)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&o.gamma) {
            return Err(CliError::Config(
                gridlab::GridError::InvalidGamma(o.gamma).to_string(),
            ));
        }
        if let Some(f) = o.format {
            let ok = match command {
                Command::Grid => matches!(f, Format::Csv | Format::Json),
                Command::Induce => matches!(f, Format::Json | Format::Md),
                Command::Annotate | Command::Classify | Command::Validate => f == Format::Json,
                Command::Ingest | Command::Pipeline => false,
            };
            if !ok {
                return Err(CliError::Config(format!(
                    "`{}` does not support --format {}",
                    name(command),
                    f.to_possible_value().expect("named").get_name()
                )));
            }
        }
        Ok(RunConfig {
            command,
            corpus,
            lexicon,
            models,
            holdout: o.holdout,
            out: o.out,
            classify,
            scripts,
            gamma: o.gamma,
            format: o.format,
        })
    }
}

fn name(c: Command) -> &'static str {
    match c {
        Command::Ingest => "ingest",
        Command::Annotate => "annotate",
        Command::Classify => "classify",
        Command::Grid => "grid",
        Command::Induce => "induce",
        Command::Validate => "validate",
        Command::Pipeline => "pipeline",
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    parse_corpus(&read(path)?).map_err(|e| input_err(path, e))
}

/// Lazily evaluated stages over one configuration.
struct Session<'a, W: Write> {
    config: &'a RunConfig,
    stdout: &'a mut W,
    corpus: Corpus,
    lexicon: Option<Lexicon>,
    models: Option<Vec<CategoryModel>>,
    annotations: Option<Vec<ThreadAnnotation>>,
    assignments: Option<Vec<CategoryAssignment>>,
}

impl<'a, W: Write> Session<'a, W> {
    fn lexicon(&mut self) -> Result<&Lexicon, CliError> {
        if self.lexicon.is_none() {
            let path = self
                .config
                .lexicon
                .as_deref()
                .expect("checked in RunConfig");
            self.lexicon =
                Some(lexicon::load_lexicon(&read(path)?).map_err(|e| input_err(path, e))?);
        }
        Ok(self.lexicon.as_ref().expect("loaded"))
    }

    fn models(&mut self) -> Result<&[CategoryModel], CliError> {
        if self.models.is_none() {
            let path = self.config.models.clone().expect("checked in RunConfig");
            let raw = read(&path)?;
            let models =
                classifier::load_models(&raw, self.lexicon()?).map_err(|e| input_err(&path, e))?;
            self.models = Some(models);
        }
        Ok(self.models.as_deref().expect("loaded"))
    }

    fn annotations(&mut self) -> Result<&[ThreadAnnotation], CliError> {
        if self.annotations.is_none() {
            self.lexicon()?;
            let lexicon = self.lexicon.as_ref().expect("loaded");
            self.annotations = Some(annotate_corpus(&self.corpus, lexicon));
        }
        Ok(self.annotations.as_deref().expect("annotated"))
    }

    fn classify(
        &mut self,
        annotations: &[ThreadAnnotation],
    ) -> Result<Vec<CategoryAssignment>, CliError> {
        let thresholds = self.config.classify.clone();
        let models = self.models()?;
        Ok(annotations
            .iter()
            .map(|a| classify_with(a, models, &thresholds))
            .collect())
    }

    fn assignments(&mut self) -> Result<&[CategoryAssignment], CliError> {
        if self.assignments.is_none() {
            let anns = self.annotations()?.to_vec();
            self.assignments = Some(self.classify(&anns)?);
        }
        Ok(self.assignments.as_deref().expect("classified"))
    }

    fn grid(&mut self) -> Result<CrossGrid, CliError> {
        let path = self.config.corpus.clone();
        build_grid(self.annotations()?).map_err(|e| input_err(&path, e))
    }

    fn write(&mut self, file: &str, contents: &str) -> Result<(), CliError> {
        let dir = &self.config.out;
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.clone(),
            source,
        })?;
        let path = dir.join(file);
        fs::write(&path, contents).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        let _ = writeln!(self.stdout, "wrote {}", path.display());
        Ok(())
    }

    fn wants(&self, f: Format, default: bool) -> bool {
        match self.config.format {
            Some(chosen) => chosen == f,
            None => default,
        }
    }

    fn ingest(&mut self) {
        let _ = writeln!(
            self.stdout,
            "corpus {}: {} threads, {} messages",
            self.corpus.corpus_id,
            self.corpus.threads().len(),
            self.corpus.message_count()
        );
    }

    fn annotate(&mut self) -> Result<(), CliError> {
        let anns = self.annotations()?.to_vec();
        let text = annotated_corpus_json(&self.corpus, &anns);
        self.write("annotated.json", &text)
    }

    fn classify_stage(&mut self) -> Result<(), CliError> {
        let assignments = self.assignments()?.to_vec();
        let text = assignments_json(&assignments, &self.config.classify);
        self.write("assignments.json", &text)?;
        self.write("exceptions.json", &exceptions_json(&assignments))?;
        let queued = exceptions(&assignments);
        let _ = writeln!(self.stdout, "{} unclassifiable thread(s)", queued.len());
        Ok(())
    }

    fn grid_stage(&mut self) -> Result<(), CliError> {
        let grid = self.grid()?;
        if self.wants(Format::Csv, true) {
            self.write("grid.csv", &grid.to_csv())?;
        }
        if self.wants(Format::Json, false) {
            self.write("grid.json", &grid.to_json())?;
        }
        Ok(())
    }

    fn induced(
        &mut self,
    ) -> Result<(Vec<gridlab::CategorySupport>, Vec<gridlab::Script>), CliError> {
        let grid = self.grid()?;
        let path = self.config.corpus.clone();
        let supports = aggregate(&grid, self.assignments()?).map_err(|e| input_err(&path, e))?;
        let scripts = induce_with(&supports, &self.config.scripts);
        Ok((supports, scripts))
    }

    fn induce(&mut self) -> Result<(), CliError> {
        let (supports, scripts) = self.induced()?;
        if self.wants(Format::Json, true) {
            let text = scripts_json(&supports, &scripts, &self.config.scripts);
            self.write("scripts.json", &text)?;
        }
        if self.wants(Format::Md, true) {
            self.write("report.md", &markdown_report(&supports, &scripts))?;
        }
        Ok(())
    }

    fn validate(&mut self) -> Result<(), CliError> {
        let (_, scripts) = self.induced()?;
        let (holdout_anns, holdout_assignments) = match self.config.holdout.clone() {
            Some(path) => {
                let holdout = load_corpus(&path)?;
                let anns = annotate_corpus(&holdout, self.lexicon()?);
                let assignments = self.classify(&anns)?;
                (anns, assignments)
            }
            None => (self.annotations()?.to_vec(), self.assignments()?.to_vec()),
        };
        let report = validate_scripts(
            &scripts,
            &holdout_anns,
            &holdout_assignments,
            self.config.gamma,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        self.write("validation.json", &validation_json(&report))
    }
}

pub fn run(config: &RunConfig, stdout: &mut impl Write) -> Result<(), CliError> {
    let corpus = load_corpus(&config.corpus)?;
    let mut s = Session {
        config,
        stdout,
        corpus,
        lexicon: None,
        models: None,
        annotations: None,
        assignments: None,
    };
    match config.command {
        Command::Ingest => s.ingest(),
        Command::Annotate => s.annotate()?,
        Command::Classify => s.classify_stage()?,
        Command::Grid => s.grid_stage()?,
        Command::Induce => s.induce()?,
        Command::Validate => s.validate()?,
        Command::Pipeline => {
            s.ingest();
            s.annotate()?;
            s.classify_stage()?;
            s.grid_stage()?;
            s.induce()?;
            s.validate()?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|config| run(&config, stdout));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
