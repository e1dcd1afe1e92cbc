use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Duration;

use crate::app::{self, AppId, Method};
use crate::bench::config::Experiment;
use crate::error::{Error, Result};
use crate::mc::SampleSet;
use crate::metrics::{
    time_block, wasserstein1_sorted, write_records, GroundTruthCache, RunRecord, SortedSamples, TimerSpan,
};
use crate::rng::{derive_seed, RngHandle};

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub csv_path: PathBuf,
    /// One `position,mass` CSV per representation size (dirac-prop only).
    pub representations: Vec<PathBuf>,
}

/// Seed for repetition `rep` of parameter index `param`.
pub fn run_seed(master: u64, param: usize, rep: u32) -> u64 {
    derive_seed(&[master, param as u64, rep as u64])
}

/// Seed used for an application's ground truth under a master seed. Kept
/// apart from every per-run seed.
pub fn ground_truth_seed(master: u64, app: AppId) -> u64 {
    derive_seed(&[master, u64::MAX, app as u64])
}

pub fn records_path(exp: &Experiment) -> PathBuf {
    exp.out.join(format!("{}-{}.csv", exp.app, exp.method))
}

pub fn representation_path(exp: &Experiment, r: u64) -> PathBuf {
    exp.out.join("representations").join(format!("{}-r{r}.csv", exp.app))
}

fn with_context(e: Error, exp: &Experiment, param: u64, rep: u32) -> Error {
    match e {
        Error::Propagation { at, detail } => Error::propagation(
            format!("{} {} param={param} rep={rep}: {at}", exp.app, exp.method),
            detail,
        ),
        other => other,
    }
}

/// Runs every (parameter, repetition) pair. Only sampling and evaluation
/// are timed; ground-truth loading, W1 and file output are not.
pub fn run_experiment(exp: &Experiment, cache: Option<&GroundTruthCache>) -> Result<ExperimentOutput> {
    fs::create_dir_all(&exp.out)?;
    let gt_seed = ground_truth_seed(exp.seed, exp.app);
    let gt = crate::metrics::ground_truth(exp.app, gt_seed, exp.gt_samples, cache)?;
    let gt = SortedSamples::from_set(&gt)?;

    let spot_programs = match exp.method {
        Method::Spot => app::spot_programs(exp.app)?,
        _ => Vec::new(),
    };
    let grappa_fits = match exp.method {
        Method::Grappa => {
            let fits = app::grappa_fits(exp.app, exp.grappa_k)?;
            for f in fits.iter().filter(|f| !f.is_monotone()) {
                log::warn!(
                    "grappa fit of {} is not monotone on the grid (largest drop {:e})",
                    f.target(),
                    f.monotonicity_defect()
                );
            }
            fits
        }
        _ => Vec::new(),
    };

    let mut records = Vec::with_capacity(exp.params.len() * exp.repetitions as usize);
    let mut representations = Vec::new();
    for (i, &param) in exp.params.iter().enumerate() {
        let size = param as usize;
        let mut first_repr: Option<crate::dirac::DiracMixture> = None;
        for rep in 0..exp.repetitions {
            if exp.delay_s > 0.0 && !(i == 0 && rep == 0) {
                std::thread::sleep(Duration::from_secs_f64(exp.delay_s));
            }
            let seed = run_seed(exp.seed, i, rep);
            let mut rng = RngHandle::seeded(seed);
            let ctx = |e| with_context(e, exp, param, rep);
            let (output, span): (SampleSet, TimerSpan) = match exp.method {
                Method::MonteCarlo => {
                    let (out, span) = time_block(|| app::monte_carlo(exp.app, &mut rng, size));
                    (out.map_err(ctx)?, span)
                }
                Method::Spot => {
                    let (out, span) = time_block(|| app::spot(exp.app, &spot_programs, &mut rng, size));
                    (out.map_err(ctx)?, span)
                }
                Method::Grappa => {
                    let (out, span) = time_block(|| app::grappa(exp.app, &grappa_fits, &mut rng, size));
                    (out.map_err(ctx)?, span)
                }
                Method::DiracProp => {
                    let (d, span) = time_block(|| app::dirac_prop(exp.app, size));
                    let d = d.map_err(ctx)?;
                    match &first_repr {
                        None => {
                            let path = representation_path(exp, param);
                            fs::create_dir_all(path.parent().expect("has parent"))?;
                            d.write_csv(BufWriter::new(fs::File::create(&path)?))?;
                            representations.push(path);
                        }
                        Some(prev) if *prev != d => {
                            return Err(Error::propagation(
                                format!("{} r={param} rep={rep}", exp.app),
                                "representation differs from the first repetition",
                            ));
                        }
                        Some(_) => {}
                    }
                    // Evaluation samples drawn from the representation; not
                    // part of the timed computation.
                    let samples = d.sample(&mut rng, exp.gt_samples)?;
                    first_repr.get_or_insert(d);
                    (samples, span)
                }
            };
            let w = wasserstein1_sorted(&SortedSamples::from_set(&output)?, &gt);
            records.push(RunRecord {
                app: exp.app.id().to_string(),
                method: exp.method.id().to_string(),
                param,
                repetition: rep,
                wasserstein: w.distance,
                runtime_ms: span.elapsed_ms(),
                seed,
            });
        }
        log::info!(
            "{} {} param={param}: {} repetitions done",
            exp.app,
            exp.method,
            exp.repetitions
        );
    }
    let csv_path = records_path(exp);
    write_records(BufWriter::new(fs::File::create(&csv_path)?), &records)?;
    Ok(ExperimentOutput {
        records,
        csv_path,
        representations,
    })
}
