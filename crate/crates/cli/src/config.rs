//! Run configuration: a key=value config file, command-line flag overrides
//! (flags win), environment fallback for the output directory, and
//! validation with exit-code classes.

use std::fmt;
use std::path::{Path, PathBuf};

use polarbench::distance::PNorm;
use polarbench::eval::ClassifierSpec;
use polarbench::EncodingChoice;

/// Errors grouped by exit code: 1 for I/O, 2 for configuration, 3 for
/// violated internal invariants.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) | CliError::Config(msg) | CliError::Internal(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub datasets: Vec<PathBuf>,
    /// Sidecar schema per dataset; `None` infers kinds from the data.
    pub schemas: Vec<Option<PathBuf>>,
    pub missing_markers: Vec<String>,
    pub encodings: Vec<EncodingChoice>,
    pub classifiers: Vec<ClassifierSpec>,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

/// Raw settings collected from the config file and the flags before
/// merging; every field optional so the two layers can be overlaid.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub data: Option<Vec<String>>,
    pub schema: Option<Vec<String>>,
    pub missing_markers: Option<Vec<String>>,
    pub encoding: Option<Vec<String>>,
    pub classifier: Option<Vec<String>>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub folds: Option<usize>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub threads: Option<usize>,
}

/// Which subcommand the config is for; decides required fields and
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFor {
    Encode,
    Bench,
}

impl PartialConfig {
    /// Parses a config file of `key = value` lines; `#` starts a comment.
    /// List-valued keys take comma-separated values. Keys are named after
    /// the corresponding flags.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = PartialConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected key = value, got {line:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let list = || -> Vec<String> { value.split(',').map(|s| s.trim().to_owned()).collect() };
            let parse_err = |what: &str| {
                CliError::Config(format!(
                    "{}:{}: invalid {what} value {value:?}",
                    path.display(),
                    lineno + 1
                ))
            };
            match key {
                "data" => cfg.data = Some(list()),
                "schema" => cfg.schema = Some(list()),
                "missing-markers" => {
                    cfg.missing_markers = Some(value.split(',').map(str::to_owned).collect())
                }
                "encoding" => cfg.encoding = Some(list()),
                "classifier" => cfg.classifier = Some(list()),
                "k" => cfg.k = Some(value.parse().map_err(|_| parse_err("k"))?),
                "p" => cfg.p = Some(value.parse().map_err(|_| parse_err("p"))?),
                "alpha" => cfg.alpha = Some(value.parse().map_err(|_| parse_err("alpha"))?),
                "folds" => cfg.folds = Some(value.parse().map_err(|_| parse_err("folds"))?),
                "repeats" => cfg.repeats = Some(value.parse().map_err(|_| parse_err("repeats"))?),
                "seed" => cfg.seed = Some(value.parse().map_err(|_| parse_err("seed"))?),
                "out" => cfg.out = Some(value.to_owned()),
                "threads" => cfg.threads = Some(value.parse().map_err(|_| parse_err("threads"))?),
                other => {
                    return Err(CliError::Config(format!(
                        "{}:{}: unknown config key {other:?}",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    /// Overlays `over` on `self`: any field set in `over` wins.
    pub fn overlaid(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            data: over.data.or(self.data),
            schema: over.schema.or(self.schema),
            missing_markers: over.missing_markers.or(self.missing_markers),
            encoding: over.encoding.or(self.encoding),
            classifier: over.classifier.or(self.classifier),
            k: over.k.or(self.k),
            p: over.p.or(self.p),
            alpha: over.alpha.or(self.alpha),
            folds: over.folds.or(self.folds),
            repeats: over.repeats.or(self.repeats),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            threads: over.threads.or(self.threads),
        }
    }

    /// Validates the merged settings into a `RunConfig`. Output directory
    /// resolution order: `out` setting, then the `POLARBENCH_OUT`
    /// environment variable, then the current directory.
    pub fn finalize(self, usage: ConfigFor) -> Result<RunConfig, CliError> {
        let data = self.data.unwrap_or_default();
        if data.is_empty() {
            return Err(CliError::Config(
                "no dataset given; pass --data <path> or set data= in the config".into(),
            ));
        }
        let datasets: Vec<PathBuf> = data.iter().map(PathBuf::from).collect();
        for path in &datasets {
            if !path.is_file() {
                return Err(CliError::Io(format!(
                    "input file not found: {}",
                    path.display()
                )));
            }
        }

        let schemas: Vec<Option<PathBuf>> = match self.schema {
            None => vec![None; datasets.len()],
            Some(entries) => {
                if entries.len() != datasets.len() {
                    return Err(CliError::Config(format!(
                        "--schema lists {} entries for {} datasets; use \"-\" to infer one",
                        entries.len(),
                        datasets.len()
                    )));
                }
                entries
                    .iter()
                    .map(|e| {
                        if e == "-" {
                            Ok(None)
                        } else {
                            let p = PathBuf::from(e);
                            if p.is_file() {
                                Ok(Some(p))
                            } else {
                                Err(CliError::Io(format!(
                                    "schema file not found: {}",
                                    p.display()
                                )))
                            }
                        }
                    })
                    .collect::<Result<_, _>>()?
            }
        };

        let missing_markers = self
            .missing_markers
            .unwrap_or_else(|| vec!["?".to_owned(), String::new()]);

        let encoding_names = match (self.encoding, usage) {
            (Some(names), _) => names,
            (None, ConfigFor::Encode) => {
                return Err(CliError::Config(format!(
                    "no encoding given; valid names: {}",
                    valid_encoding_names()
                )))
            }
            (None, ConfigFor::Bench) => EncodingChoice::ALL
                .iter()
                .map(|c| c.name().to_owned())
                .collect(),
        };
        let mut encodings = Vec::new();
        for name in &encoding_names {
            let choice: EncodingChoice = name
                .parse()
                .map_err(|e: polarbench::encoding::EncodingError| CliError::Config(e.to_string()))?;
            if !encodings.contains(&choice) {
                encodings.push(choice);
            }
        }

        let classifier_names = self
            .classifier
            .unwrap_or_else(|| ["nn", "nn-d", "frnn", "cart"].map(String::from).to_vec());
        if let Some(k) = self.k {
            if k == 0 {
                return Err(CliError::Config("k must be at least 1".into()));
            }
        }
        let p_norm = match self.p {
            None => None,
            Some(p) => Some(
                PNorm::new(p).map_err(|e| CliError::Config(e.to_string()))?,
            ),
        };
        if let Some(alpha) = self.alpha {
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(CliError::Config(format!(
                    "alpha must be a non-negative real, got {alpha}"
                )));
            }
        }
        let mut classifiers = Vec::new();
        for name in &classifier_names {
            let mut spec = ClassifierSpec::from_name(name)
                .map_err(|e| CliError::Config(e.to_string()))?;
            match &mut spec {
                ClassifierSpec::Nn { k, p } | ClassifierSpec::NnDudani { k, p } => {
                    if let Some(k_over) = self.k {
                        *k = k_over;
                    }
                    if let Some(p_over) = p_norm {
                        *p = p_over;
                    }
                }
                ClassifierSpec::FrnnOwa { k } => {
                    if let Some(k_over) = self.k {
                        *k = k_over;
                    }
                }
                ClassifierSpec::Cart { alpha, .. } => {
                    if let Some(a) = self.alpha {
                        *alpha = a;
                    }
                }
            }
            if !classifiers.contains(&spec) {
                classifiers.push(spec);
            }
        }

        let folds = self.folds.unwrap_or(5);
        if folds < 2 {
            return Err(CliError::Config(format!(
                "need at least 2 folds, got {folds}"
            )));
        }
        let repeats = self.repeats.unwrap_or(5);
        if repeats == 0 {
            return Err(CliError::Config("need at least 1 repeat".into()));
        }
        if let Some(threads) = self.threads {
            if threads == 0 {
                return Err(CliError::Config("threads must be at least 1".into()));
            }
        }

        let out_dir = self
            .out
            .or_else(|| std::env::var("POLARBENCH_OUT").ok())
            .map_or_else(|| PathBuf::from("."), PathBuf::from);

        Ok(RunConfig {
            datasets,
            schemas,
            missing_markers,
            encodings,
            classifiers,
            folds,
            repeats,
            seed: self.seed.unwrap_or(0),
            out_dir,
            threads: self.threads,
        })
    }
}

fn valid_encoding_names() -> String {
    EncodingChoice::ALL
        .iter()
        .map(|c| c.name())
        .collect::<Vec<_>>()
        .join(", ")
}
