//! The three subcommands: `encode` (write encoded matrices), `bench` (run
//! the cross-validated comparison and write reports), and `selftest` (check
//! the library's numeric identities).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polarbench::distance::{dist, PNorm};
use polarbench::encoding::{one_hot_redundant, polar_encode_boscovich, polar_encode_euclidean};
use polarbench::eval::run_benchmark;
use polarbench::ingest::{load_csv, IngestError, LoadOptions};
use polarbench::tree::{mia_enumerate, polar_enumerate, Bipartition};
use polarbench::{Dataset, FittedEncoding, SchemaSource};

use crate::config::{CliError, RunConfig};

fn load_dataset(
    path: &Path,
    schema: Option<&Path>,
    markers: &[String],
) -> Result<Dataset, CliError> {
    let options = LoadOptions {
        missing_markers: markers.to_vec(),
        ..LoadOptions::default()
    };
    let source = match schema {
        Some(p) => SchemaSource::Sidecar(p),
        None => SchemaSource::Infer,
    };
    load_csv(path, source, &options).map_err(|e| match e {
        IngestError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Io(format!("{}: {other}", path.display())),
    })
}

fn dataset_stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "dataset".to_owned(), |s| s.to_string_lossy().into_owned())
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Encodes every dataset under every requested encoding and writes one
/// delimited file per combination, named `{stem}.{encoding}.csv`.
pub fn cmd_encode(config: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(&config.out_dir)?;
    for (path, schema) in config.datasets.iter().zip(&config.schemas) {
        let dataset = load_dataset(path, schema.as_deref(), &config.missing_markers)?;
        for &encoding in &config.encodings {
            let fitted = FittedEncoding::fit(&dataset, encoding)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            let matrix = fitted
                .encode(&dataset)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            let out_path = config
                .out_dir
                .join(format!("{}.{}.csv", dataset_stem(path), encoding.name()));
            let file = File::create(&out_path)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out_path.display())))?;
            let mut out = BufWriter::new(file);
            writeln!(
                out,
                "# polarbench encode: source={} encoding={} rows={} columns={}",
                path.display(),
                encoding.name(),
                matrix.n_rows(),
                matrix.n_cols()
            )
            .and_then(|()| matrix.write_delimited(&mut out, b','))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out_path.display())))?;
            println!("wrote {}", out_path.display());
        }
    }
    Ok(())
}

/// Runs the benchmark on every dataset and writes `{stem}.scores.csv` plus
/// `{stem}.summary.md` per dataset. A failing dataset is reported on stderr
/// and does not stop the remaining ones; the first failure's exit class is
/// returned at the end.
pub fn cmd_bench(config: &RunConfig) -> Result<(), CliError> {
    ensure_out_dir(&config.out_dir)?;
    let run = || -> Result<(), CliError> {
        let mut first_failure: Option<CliError> = None;
        for (path, schema) in config.datasets.iter().zip(&config.schemas) {
            match bench_one(config, path, schema.as_deref()) {
                Ok(outputs) => {
                    for written in outputs {
                        println!("wrote {}", written.display());
                    }
                }
                Err(e) => {
                    eprintln!("dataset {}: {e}", path.display());
                    first_failure.get_or_insert(e);
                }
            }
        }
        match first_failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    };
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Internal(format!("cannot build thread pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    }
}

fn bench_one(
    config: &RunConfig,
    path: &Path,
    schema: Option<&Path>,
) -> Result<Vec<PathBuf>, CliError> {
    let dataset = load_dataset(path, schema, &config.missing_markers)?;
    let plan = polarbench::FoldPlan {
        n_folds: config.folds,
        n_repeats: config.repeats,
        seed: config.seed,
    };
    let report = run_benchmark(&dataset, &config.encodings, &config.classifiers, &plan)
        .map_err(|e| CliError::Internal(e.to_string()))?;

    let stem = dataset_stem(path);
    let scores_path = config.out_dir.join(format!("{stem}.scores.csv"));
    let scores_file = File::create(&scores_path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", scores_path.display())))?;
    let mut scores_out = BufWriter::new(scores_file);
    report
        .write_scores_csv(&mut scores_out)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", scores_path.display())))?;

    let summary_path = config.out_dir.join(format!("{stem}.summary.md"));
    let summary_file = File::create(&summary_path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", summary_path.display())))?;
    let mut summary_out = BufWriter::new(summary_file);
    report
        .write_markdown(&mut summary_out)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", summary_path.display())))?;

    Ok(vec![scores_path, summary_path])
}

struct Check {
    name: &'static str,
    detail: String,
    passed: bool,
}

/// Runs the numeric identity checks and prints one line per check with the
/// measured maximum error. `perturb_euclidean` inflates the Euclidean polar
/// map radially (simulating an implementation defect) so the detection path
/// itself can be exercised; 0 checks the real map.
pub fn cmd_selftest(seed: u64, perturb_euclidean: f64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks: Vec<Check> = Vec::new();
    let scale = 1.0 + perturb_euclidean;
    let euclid = |x: Option<f64>| -> [f64; 2] {
        let e = polar_encode_euclidean(x).expect("unit-interval input");
        [e[0] * scale, e[1] * scale]
    };
    let p1 = PNorm::ONE;
    let p2 = PNorm::TWO;

    // twice-the-distance identity of the Boscovich map
    let mut max_err: f64 = 0.0;
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(0.0..=1.0);
        let y: f64 = rng.gen_range(0.0..=1.0);
        let a = polar_encode_boscovich(Some(x)).expect("unit interval");
        let b = polar_encode_boscovich(Some(y)).expect("unit interval");
        let d = dist(&a, &b, p1).expect("equal lengths");
        max_err = max_err.max((d - 2.0 * (x - y).abs()).abs());
    }
    checks.push(Check {
        name: "boscovich-twice-distance",
        detail: format!("max error {max_err:.3e} over 1000 pairs (tol 1e-12)"),
        passed: max_err < 1e-12,
    });

    // missing at distance 1 from every value, under both maps
    let mut max_err: f64 = 0.0;
    let missing_b = polar_encode_boscovich(None).expect("missing is representable");
    let missing_e = euclid(None);
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(0.0..=1.0);
        let b = polar_encode_boscovich(Some(x)).expect("unit interval");
        let e = euclid(Some(x));
        let d1 = dist(&missing_b, &b, p1).expect("equal lengths");
        let d2 = dist(&missing_e, &e, p2).expect("equal lengths");
        max_err = max_err.max((d1 - 1.0).abs()).max((d2 - 1.0).abs());
    }
    checks.push(Check {
        name: "missing-equidistance",
        detail: format!("max error {max_err:.3e} over 1000 values (tol 1e-12)"),
        passed: max_err < 1e-12,
    });

    // Euclidean anchor distances: endpoints at sqrt(2), d(0.5, 1) at 0.765
    let d01 = dist(&euclid(Some(0.0)), &euclid(Some(1.0)), p2).expect("equal lengths");
    let endpoint_err = (d01 - std::f64::consts::SQRT_2).abs();
    checks.push(Check {
        name: "euclidean-endpoint-anchor",
        detail: format!("|d(0,1) − √2| = {endpoint_err:.3e} (tol 1e-9)"),
        passed: endpoint_err < 1e-9,
    });
    let d_half =
        dist(&euclid(Some(0.5)), &euclid(Some(1.0)), p2).expect("equal lengths");
    let half_err = (d_half - 0.765).abs();
    checks.push(Check {
        name: "euclidean-midpoint-anchor",
        detail: format!("|d(0.5,1) − 0.765| = {half_err:.3e} (tol 5e-4)"),
        passed: half_err < 5e-4,
    });

    // one-hot geometry: categories 2 apart (Boscovich), sqrt(2) (Euclidean),
    // missing 1 from everything
    let mut max_err: f64 = 0.0;
    for arity in 2..=6 {
        let missing = one_hot_redundant(None, arity).expect("redundant one-hot");
        for c in 0..arity {
            let a = one_hot_redundant(Some(c), arity).expect("in range");
            for c2 in 0..arity {
                if c2 == c {
                    continue;
                }
                let b = one_hot_redundant(Some(c2), arity).expect("in range");
                let e1 = (dist(&a, &b, p1).expect("equal lengths") - 2.0).abs();
                let e2 = (dist(&a, &b, p2).expect("equal lengths")
                    - std::f64::consts::SQRT_2)
                    .abs();
                max_err = max_err.max(e1).max(e2);
            }
            let m1 = (dist(&a, &missing, p1).expect("equal lengths") - 1.0).abs();
            let m2 = (dist(&a, &missing, p2).expect("equal lengths") - 1.0).abs();
            max_err = max_err.max(m1).max(m2);
        }
    }
    checks.push(Check {
        name: "one-hot-geometry",
        detail: format!("max error {max_err:.3e} over arities 2–6 (tol 1e-12)"),
        passed: max_err < 1e-12,
    });

    // split equivalence: single-column thresholds-with-missing against the
    // two polar columns, as bipartition sets
    let mut mismatches = 0usize;
    let trials = 60;
    for trial in 0..trials {
        let n = rng.gen_range(2..=30);
        let rate = [0.0, 0.2, 0.5][trial % 3];
        let column: Vec<Option<f64>> = (0..n)
            .map(|_| {
                if rng.gen_bool(rate) {
                    None
                } else {
                    Some(rng.gen_range(0.0..=1.0))
                }
            })
            .collect();
        let pos: Vec<f64> = column.iter().map(|v| v.unwrap_or(0.0)).collect();
        let neg: Vec<f64> = column.iter().map(|v| v.map_or(0.0, |x| 1.0 - x)).collect();
        let mia: std::collections::BTreeSet<Bipartition> =
            mia_enumerate(&column, 0).into_iter().map(|(_, b)| b).collect();
        let polar: std::collections::BTreeSet<Bipartition> =
            polar_enumerate(&pos, &neg).into_iter().collect();
        if mia != polar {
            mismatches += 1;
        }
    }
    checks.push(Check {
        name: "split-equivalence",
        detail: format!("{mismatches} mismatches over {trials} random columns"),
        passed: mismatches == 0,
    });

    let mut failed = 0;
    for check in &checks {
        let verdict = if check.passed { "ok" } else { "FAIL" };
        println!("check {}: {} — {verdict}", check.name, check.detail);
        if !check.passed {
            failed += 1;
        }
    }
    println!("selftest: {} checks, {failed} failed", checks.len());
    if failed > 0 {
        Err(CliError::Internal(format!(
            "{failed} selftest check(s) failed"
        )))
    } else {
        Ok(())
    }
}
