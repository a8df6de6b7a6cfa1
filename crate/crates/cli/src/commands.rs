use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;

use ktbench::baselines::write_bkt;
use ktbench::config::{env_seed, RunConfig};
use ktbench::dataset::{
    clean_records, generate_synthetic, load_interactions, read_ground_truth, write_canonical, write_ground_truth,
    CleanOptions, Dataset, SynthConfig,
};
use ktbench::eval::{
    reference_for, reference_scores, run_cv, sweep as run_sweep, write_predictions, write_sweep, FittedModel,
    ModelKind, SweepAxis, REFERENCE_TOLERANCE,
};
use ktbench::neural::write_params;
use ktbench::oracle::self_check;
use ktbench::Error;

use crate::{CheckArgs, ExperimentArgs, IngestArgs, RunArgs, SweepArgs, SynthArgs};

/// A failed command: process exit code plus message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CHECK: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_FIT: u8 = 4;
pub const EXIT_OUTPUT: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Config(_) => EXIT_USAGE,
        Error::Csv { .. } | Error::EmptyDataset(_) | Error::Encoding(_) | Error::Format(_) => EXIT_DATA,
        Error::Numerical { .. } | Error::UndefinedLoss | Error::UndefinedMetric(_) => EXIT_FIT,
        Error::Fold { source, .. } => match exit_code(source) {
            EXIT_USAGE => EXIT_USAGE,
            _ => EXIT_FIT,
        },
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn output_failure(path: &Path, e: impl Display) -> Failure {
    Failure {
        code: EXIT_OUTPUT,
        message: format!("{}: {e}", path.display()),
    }
}

type CmdResult = Result<(), Failure>;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| output_failure(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| output_failure(path, e))
}

/// Creates `path` and hands it to `write`, mapping any error to an output failure.
fn write_file<E: Display>(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<(), E>) -> CmdResult {
    let mut f = create(path)?;
    write(&mut f).map_err(|e| output_failure(path, e))?;
    f.flush().map_err(|e| output_failure(path, e))
}

pub fn ingest(a: IngestArgs) -> CmdResult {
    let format = a.format.parse()?;
    let (raw, load) = load_interactions(&a.data, format)?;
    let opts = CleanOptions {
        multiskill: a.multiskill.parse()?,
        first_attempt_only: !a.keep_repeats,
    };
    let (clean, report) = clean_records(&raw, opts);
    write_canonical(&a.out, &clean).map_err(|e| output_failure(&a.out, e))?;
    println!("rows read      {}", load.rows_read);
    println!("rows kept      {}", report.rows_out);
    println!(
        "rows dropped   {} (missing {}, invalid {}, filtered {}, duplicates {}, merged {}, repeats {})",
        load.rows_read - report.rows_out,
        load.dropped_missing,
        load.dropped_invalid,
        load.dropped_filtered,
        report.exact_duplicates,
        report.multiskill_merged,
        report.repeat_attempts
    );
    println!("students       {}", clean.sequences.len());
    println!("skills         {}", clean.n_skills());
    Ok(())
}

/// Defaults, then the seed fallback, then the config file, then flags.
fn resolve(exp: &ExperimentArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(seed) = env_seed()? {
        cfg.experiment.seed = seed;
    }
    if let Some(path) = &exp.config {
        cfg.apply_file(path)?;
    }
    let mut flags: Vec<(&str, String)> = Vec::new();
    let mut put = |k, v: Option<String>| {
        if let Some(v) = v {
            flags.push((k, v));
        }
    };
    put("data", exp.data.as_ref().map(|p| p.display().to_string()));
    put("format", exp.format.clone());
    put("dataset", exp.dataset.clone());
    put("interval_len", exp.interval_len.map(|v| v.to_string()));
    put("clusters", exp.clusters.map(|v| v.to_string()));
    put("hidden", exp.hidden.map(|v| v.to_string()));
    put("batch", exp.batch.map(|v| v.to_string()));
    put("lr", exp.lr.map(|v| v.to_string()));
    put("epochs", exp.epochs.map(|v| v.to_string()));
    put("dropout", exp.dropout.map(|v| v.to_string()));
    put("seed", exp.seed.map(|v| v.to_string()));
    put("folds", exp.folds.map(|v| v.to_string()));
    put("cell", exp.cell.clone());
    put("out", exp.out.as_ref().map(|p| p.display().to_string()));
    put("strict", exp.strict.then(|| "true".to_owned()));
    put("jobs", Some(exp.jobs.to_string()));
    for (k, v) in flags {
        cfg.set(k, &v)?;
    }
    Ok(cfg)
}

fn load(cfg: &RunConfig) -> Result<Dataset, Failure> {
    let path = cfg.data.as_deref().ok_or_else(|| Failure {
        code: EXIT_USAGE,
        message: "no dataset given (use --data or `data=` in the config file)".into(),
    })?;
    let (raw, _) = load_interactions(path, cfg.format)?;
    let (data, report) = clean_records(&raw, CleanOptions::default());
    info!(
        "{}: {} students, {} skills, {} records ({} dropped in cleaning)",
        path.display(),
        data.sequences.len(),
        data.n_skills(),
        data.n_records(),
        report.dropped()
    );
    Ok(data)
}

fn write_fitted(dir: &Path, data: &Dataset, model: ModelKind, fold: usize, fitted: &FittedModel) -> CmdResult {
    let stem = dir.join(format!("{model}-fold{fold}"));
    let with_ext = |ext: &str| PathBuf::from(format!("{}.{ext}", stem.display()));
    let tags = data.vocab.tags();
    match fitted {
        FittedModel::Irt(p) => write_file(&with_ext("csv"), |f| p.write(f)),
        FittedModel::Bkt(fits) => write_file(&with_ext("csv"), |f| write_bkt(f, tags, fits)),
        FittedModel::Pfa(p) => write_file(&with_ext("csv"), |f| p.write(f, tags)),
        FittedModel::Rnn {
            params,
            clusters,
            loss_trace,
        } => {
            write_file(&with_ext("bin"), |f| write_params(f, params))?;
            write_file(&with_ext("loss.csv"), |f| {
                writeln!(f, "epoch,loss")?;
                for (e, l) in loss_trace.iter().enumerate() {
                    writeln!(f, "{e},{l}")?;
                }
                Ok::<(), std::io::Error>(())
            })?;
            match clusters {
                Some(c) => write_file(&with_ext("clusters.csv"), |f| c.write(f)),
                None => Ok(()),
            }
        }
    }
}

pub fn run(a: RunArgs) -> CmdResult {
    let mut cfg = resolve(&a.exp)?;
    if let Some(m) = &a.model {
        cfg.set("model", m)?;
    }
    let data = load(&cfg)?;
    let name = cfg.resolved_name();
    if a.full && reference_for(&name).is_none() {
        return Err(Failure {
            code: EXIT_USAGE,
            message: format!(
                "--full needs --dataset set to one of assistments09, assistments12, assistments14, cognitive-tutor (got {name:?})"
            ),
        });
    }
    let cv = run_cv(&data, &cfg.models, &cfg.experiment, &name)?;

    let out = &cfg.out;
    write_file(&out.join("config.txt"), |f| f.write_all(cfg.to_text().as_bytes()))?;
    write_file(&out.join("report.csv"), |f| cv.report.write_csv(f))?;
    write_file(&out.join("report.json"), |f| f.write_all(cv.report.to_json().as_bytes()))?;
    let rows: Vec<_> = cv.folds.iter().flat_map(|f| f.predictions.iter().cloned()).collect();
    write_file(&out.join("predictions.csv"), |f| write_predictions(f, &data.vocab, &rows))?;
    for fold in &cv.folds {
        write_fitted(&out.join("models"), &data, fold.model, fold.fold, &fold.fitted)?;
    }

    println!("{:<8} {:>8} {:>8} {:>8} {:>8}", "model", "auc", "±", "rmse", "±");
    for s in &cv.report.summary {
        let (am, asd) = s.auc.as_ref().map_or((f64::NAN, f64::NAN), |a| (a.mean, a.std));
        let (rm, rsd) = s.rmse.as_ref().map_or((f64::NAN, f64::NAN), |a| (a.mean, a.std));
        println!("{:<8} {am:>8.4} {asd:>8.4} {rm:>8.4} {rsd:>8.4}", s.model);
    }
    if a.full {
        println!("published AUC, tolerance {REFERENCE_TOLERANCE}:");
        let mut lines = String::from("model,auc,reference,within_tolerance\n");
        for &m in &cfg.models {
            let (reference, _) = reference_scores(&name, m).expect("checked above");
            let got = cv.report.mean_auc(m);
            let ok = got.is_some_and(|g| (g - reference).abs() <= REFERENCE_TOLERANCE);
            println!(
                "  {m:<8} {:>8} vs {reference:.2}  {}",
                got.map_or("-".into(), |g| format!("{g:.4}")),
                if ok { "ok" } else { "outside" }
            );
            lines.push_str(&format!("{m},{},{reference},{ok}\n", got.map_or(String::new(), |g| g.to_string())));
        }
        write_file(&out.join("reference.csv"), |f| f.write_all(lines.as_bytes()))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}

pub fn sweep(a: SweepArgs) -> CmdResult {
    let cfg = resolve(&a.exp)?;
    let axis: SweepAxis = a.axis.parse()?;
    let data = load(&cfg)?;
    let groups = a.groups.as_deref().map(read_ground_truth).transpose()?;
    let rows = run_sweep(&data, axis, &cfg.experiment, &cfg.resolved_name(), groups.as_ref())?;
    let path = cfg.out.join(format!("sweep-{axis}.csv"));
    write_file(&cfg.out.join("config.txt"), |f| f.write_all(cfg.to_text().as_bytes()))?;
    write_file(&path, |f| write_sweep(f, axis, &rows))?;
    println!("{:<12} {:>8} {:>8}", axis.tag(), "auc", "±");
    for r in &rows {
        println!(
            "{:<12} {:>8.4} {:>8.4}",
            r.value,
            r.auc_mean.unwrap_or(f64::NAN),
            r.auc_std.unwrap_or(f64::NAN)
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

pub fn synth(a: SynthArgs) -> CmdResult {
    let cfg = SynthConfig {
        n_students: a.students,
        n_skills: a.skills,
        attempts_per_student: a.attempts,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&cfg)?;
    fs::create_dir_all(&a.out).map_err(|e| output_failure(&a.out, e))?;
    let records = a.out.join("synthetic.csv");
    let groups = a.out.join("groups.csv");
    write_canonical(&records, &data.dataset).map_err(|e| output_failure(&records, e))?;
    write_ground_truth(&groups, &data).map_err(|e| output_failure(&groups, e))?;
    println!("wrote {} and {}", records.display(), groups.display());
    Ok(())
}

pub fn check(a: CheckArgs) -> CmdResult {
    let lines = self_check(a.seed);
    let failed = lines.iter().filter(|l| !l.pass).count();
    for l in &lines {
        println!(
            "[{}] {}: {:.3e} (limit {:.1e})",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.value,
            l.threshold
        );
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_CHECK,
            message: format!("{failed} checks failed"),
        })
    }
}
