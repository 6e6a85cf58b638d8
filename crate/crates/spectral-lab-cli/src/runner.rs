//! Experiment dispatch and CSV emission.
//!
//! Output files carry `#`-prefixed metadata (tool version, experiment,
//! config hash) above an RFC-4180 body and end with a `# summary:` line.
//! Rows are written in grid order after all computations finish, so two
//! runs of the same config produce byte-identical files; wall time is
//! reported on stdout only. On any computation error the partial file is
//! removed and the offending grid point named.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use spectral_lab::scaling;
use spectral_lab::schwinger::{self, DipoleProfile};
use spectral_lab::{ftscale, kernel, ShellProbe};

use crate::config::{Experiment, Resolved};

/// Outcome of a run: what was written and how long it took.
#[derive(Debug)]
pub struct RunRecord {
    pub config_hash: String,
    pub version: &'static str,
    pub rows: usize,
    pub summary: String,
    pub wall_ms: u128,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{context}: {message}")]
    Compute { context: String, message: String },
    #[error("cannot write output {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn compute_err<E: std::fmt::Display>(context: impl Into<String>) -> impl FnOnce(E) -> RunError {
    let context = context.into();
    move |e| RunError::Compute {
        context,
        message: e.to_string(),
    }
}

struct Csv {
    header: &'static str,
    rows: Vec<String>,
    summary: String,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn run_experiment(cfg: &Resolved) -> Result<Csv, RunError> {
    match cfg.experiment {
        Experiment::Propagator => {
            let plan = cfg.propagator.as_ref().expect("validated");
            let grid: Vec<(f64, f64)> = plan
                .masses
                .iter()
                .flat_map(|&m| plan.radii.iter().map(move |&r| (m, r)))
                .collect();
            let rows = grid
                .par_iter()
                .map(|&(mass, r)| {
                    let ev = kernel::free_two_point_spacelike(mass, r)
                        .map_err(compute_err(format!("at grid point (mass={mass}, r={r})")))?;
                    Ok(format!(
                        "{},{},{},{}",
                        num(mass),
                        num(r),
                        num(ev.value),
                        num(ev.abs_error)
                    ))
                })
                .collect::<Result<Vec<_>, RunError>>()?;
            Ok(Csv {
                header: "mass,r,value,abs_error",
                summary: format!("rows={}", rows.len()),
                rows,
            })
        }
        Experiment::ScalingDegree | Experiment::Classify => {
            let measure = cfg.measure.as_ref().expect("validated");
            let grid = scaling::compute_grid(measure, &cfg.probe, &cfg.scaling)
                .map_err(compute_err("scaling grid"))?;
            let rows = grid
                .lambdas
                .iter()
                .zip(&grid.values)
                .zip(&grid.abs_errors)
                .map(|((l, v), e)| format!("{},{},{}", num(*l), num(*v), num(*e)))
                .collect();
            let fit = scaling::fit_grid(&grid, cfg.scaling.fit_window)
                .map_err(compute_err("degree fit"))?;
            let summary = if cfg.experiment == Experiment::Classify {
                let verdict = scaling::classify(measure, &cfg.probe)
                    .map_err(compute_err("classification"))?;
                format!(
                    "degree={:.6} stderr={:.3e} verdict={:?} sigma_mass_finite={}",
                    fit.degree, fit.stderr, verdict.kind, verdict.sigma_mass_finite
                )
            } else {
                format!(
                    "degree={:.6} stderr={:.3e} residual={:.3e}",
                    fit.degree, fit.stderr, fit.residual
                )
            };
            Ok(Csv {
                header: "lambda,value,abs_error",
                rows,
                summary,
            })
        }
        Experiment::SchwingerEnergy | Experiment::Confinement => {
            let plan = cfg.schwinger.as_ref().expect("validated");
            let reports = plan
                .r_grid
                .par_iter()
                .map(|&r| {
                    let profile = DipoleProfile::with_shape(r, plan.epsilon, plan.ramp)
                        .map_err(compute_err(format!("profile at R={r}")))?;
                    schwinger::dipole_energy(plan.coupling, &profile)
                        .map_err(compute_err(format!("energy at R={r}")))
                })
                .collect::<Result<Vec<_>, RunError>>()?;
            let rows = plan
                .r_grid
                .iter()
                .zip(&reports)
                .map(|(r, rep)| {
                    format!(
                        "{},{},{},{}",
                        num(*r),
                        num(rep.energy),
                        num(rep.gradient_part),
                        num(rep.mass_part)
                    )
                })
                .collect();
            let summary = if cfg.experiment == Experiment::Confinement {
                let energies: Vec<f64> = reports.iter().map(|r| r.energy).collect();
                let verdict = schwinger::confinement_verdict_from_energies(&plan.r_grid, &energies)
                    .map_err(compute_err("confinement fit"))?;
                format!(
                    "verdict={:?} slope={:.6} stderr={:.3e} photon_mass={}",
                    verdict.kind,
                    verdict.growth_slope,
                    verdict.slope_stderr,
                    num(schwinger::photon_mass(plan.coupling))
                )
            } else {
                format!(
                    "photon_mass={} rows={}",
                    num(schwinger::photon_mass(plan.coupling)),
                    reports.len()
                )
            };
            Ok(Csv {
                header: "r,energy,gradient_part,mass_part",
                rows,
                summary,
            })
        }
        Experiment::FtScaling => {
            let plan = cfg.ftscale.as_ref().expect("validated");
            let pairings = plan
                .radii
                .par_iter()
                .map(|&r| {
                    let probe = ShellProbe::new(r, plan.rel_width, plan.shell)
                        .map_err(compute_err(format!("probe at radius={r}")))?;
                    ftscale::smeared_power_ft(&plan.spec, &probe)
                        .map_err(compute_err(format!("pairing at radius={r}")))
                })
                .collect::<Result<Vec<_>, RunError>>()?;
            let rows = plan
                .radii
                .iter()
                .zip(&pairings)
                .map(|(r, ev)| format!("{},{},{}", num(*r), num(ev.value), num(ev.abs_error)))
                .collect();
            let fit =
                ftscale::fit_position_exponent(&plan.spec, &plan.radii, plan.rel_width, plan.shell)
                    .map_err(compute_err("exponent fit"))?;
            Ok(Csv {
                header: "radius,pairing,abs_error",
                rows,
                summary: format!(
                    "fitted_exponent={:.6} stderr={:.3e} expected={}",
                    fit.fitted_exponent,
                    fit.stderr,
                    num(-plan.spec.pl_exponent - plan.spec.space_dim as f64)
                ),
            })
        }
        Experiment::Decompose => {
            let measure = cfg.measure.as_ref().expect("validated");
            let (atoms, continuum) = measure.decompose();
            let rows = atoms
                .iter()
                .map(|a| format!("{},{}", num(a.mass_sq), num(a.weight)))
                .collect();
            let cont_mass = continuum
                .total_mass()
                .map_err(compute_err("continuum mass"))?;
            let support = continuum.support();
            Ok(Csv {
                header: "atom_mass_sq,atom_weight",
                rows,
                summary: format!(
                    "atoms={} continuum_family={:?} support=[{},{}] continuum_mass={}",
                    atoms.len(),
                    continuum.family(),
                    num(support.lower),
                    num(support.upper),
                    num(cont_mass.value)
                ),
            })
        }
        Experiment::SumRule => {
            let measure = cfg.measure.as_ref().expect("validated");
            let total = measure
                .total_mass()
                .map_err(compute_err("total mass"))?;
            let verdict = measure
                .check_etcr_sum_rule(cfg.sum_rule_tol)
                .map_err(compute_err("sum rule"))?;
            let rows = vec![format!(
                "{},{},{:?}",
                num(total.value),
                num(total.quadrature_error),
                verdict
            )];
            Ok(Csv {
                header: "total_mass,quadrature_error,verdict",
                rows,
                summary: format!("verdict={verdict:?} tol={}", num(cfg.sum_rule_tol)),
            })
        }
    }
}

/// Execute the experiment and write its CSV atomically.
pub fn run(cfg: &Resolved) -> Result<RunRecord, RunError> {
    let started = Instant::now();
    let csv = run_experiment(cfg)?;

    let mut text = String::new();
    let version = env!("CARGO_PKG_VERSION");
    let _ = writeln!(text, "# spectral-lab {version}");
    let _ = writeln!(text, "# experiment: {}", cfg.experiment);
    let _ = writeln!(text, "# config-hash: sha256:{}", cfg.config_hash);
    let _ = writeln!(text, "# seed: {}", cfg.seed);
    let _ = writeln!(text, "{}", csv.header);
    for row in &csv.rows {
        let _ = writeln!(text, "{row}");
    }
    let _ = writeln!(text, "# summary: {}", csv.summary);

    write_atomically(&cfg.out, &text).map_err(|source| RunError::Io {
        path: cfg.out.display().to_string(),
        source,
    })?;

    Ok(RunRecord {
        config_hash: cfg.config_hash.clone(),
        version,
        rows: csv.rows.len(),
        summary: csv.summary,
        wall_ms: started.elapsed().as_millis(),
    })
}

fn write_atomically(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("csv.tmp");
    std::fs::write(&tmp, text)?;
    match std::fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}
