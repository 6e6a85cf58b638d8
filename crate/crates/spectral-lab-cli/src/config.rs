//! Experiment configuration: TOML schema, resolution, and validation.
//!
//! A config names one experiment, the measure/probe it acts on, and the
//! grid parameters. Measures may be given inline (same schema as the
//! measure file format) or by `file = "path"` reference. `validate`
//! collects every problem without running anything; `resolve` produces the
//! typed inputs the runner consumes plus a canonical serialization whose
//! SHA-256 identifies the computation in the output header.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use spectral_lab::scaling::ScalingGridSpec;
use spectral_lab::{PowerLawSpec, RampShape, ShellShape, SpectralMeasure, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Propagator,
    ScalingDegree,
    Classify,
    SchwingerEnergy,
    Confinement,
    FtScaling,
    Decompose,
    SumRule,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Propagator,
        Experiment::ScalingDegree,
        Experiment::Classify,
        Experiment::SchwingerEnergy,
        Experiment::Confinement,
        Experiment::FtScaling,
        Experiment::Decompose,
        Experiment::SumRule,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Propagator => "propagator",
            Experiment::ScalingDegree => "scaling-degree",
            Experiment::Classify => "classify",
            Experiment::SchwingerEnergy => "schwinger-energy",
            Experiment::Confinement => "confinement",
            Experiment::FtScaling => "ft-scaling",
            Experiment::Decompose => "decompose",
            Experiment::SumRule => "sum-rule",
        }
    }

    /// Whether the experiment consumes a spectral measure.
    pub fn needs_measure(&self) -> bool {
        matches!(
            self,
            Experiment::ScalingDegree
                | Experiment::Classify
                | Experiment::Decompose
                | Experiment::SumRule
        )
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .iter()
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment '{s}'; expected one of {}", names.join(", "))
            })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single validation finding, tied to the config field that caused it.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

// ---------------------------------------------------------------------------
// raw TOML document
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub experiment: Option<String>,
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub measure: Option<toml::Table>,
    pub probe: Option<ProbeDoc>,
    pub scaling: Option<ScalingDoc>,
    pub propagator: Option<PropagatorDoc>,
    pub schwinger: Option<SchwingerDoc>,
    pub ftscale: Option<FtscaleDoc>,
    pub sum_rule: Option<SumRuleDoc>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeDoc {
    #[serde(default)]
    pub center: Option<[f64; 4]>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingDoc {
    #[serde(default)]
    pub k_min: Option<u32>,
    #[serde(default)]
    pub k_max: Option<u32>,
    #[serde(default)]
    pub window: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorDoc {
    pub masses: Vec<f64>,
    pub radii: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SchwingerDoc {
    pub coupling: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub r_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub r_min: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub r_steps: Option<usize>,
    #[serde(default)]
    pub ramp: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FtscaleDoc {
    pub pl_exponent: f64,
    pub space_dim: u32,
    #[serde(default)]
    pub regularization_order: Option<u32>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub r_min: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub r_points: Option<usize>,
    #[serde(default)]
    pub rel_width: Option<f64>,
    #[serde(default)]
    pub shell: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SumRuleDoc {
    #[serde(default)]
    pub tol: Option<f64>,
}

// ---------------------------------------------------------------------------
// resolved config
// ---------------------------------------------------------------------------

/// Everything the runner needs, fully parsed and validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub experiment: Experiment,
    pub out: PathBuf,
    pub seed: u64,
    pub measure: Option<SpectralMeasure>,
    pub probe: TestFunction,
    pub scaling: ScalingGridSpec,
    pub propagator: Option<PropagatorDoc>,
    pub schwinger: Option<SchwingerPlan>,
    pub ftscale: Option<FtscalePlan>,
    pub sum_rule_tol: f64,
    /// SHA-256 of the canonical serialization, hex-encoded.
    pub config_hash: String,
}

#[derive(Clone, Debug)]
pub struct SchwingerPlan {
    pub coupling: f64,
    pub epsilon: f64,
    pub r_grid: Vec<f64>,
    pub ramp: RampShape,
}

#[derive(Clone, Debug)]
pub struct FtscalePlan {
    pub spec: PowerLawSpec,
    pub radii: Vec<f64>,
    pub rel_width: f64,
    pub shell: ShellShape,
}

/// Canonical content that the config hash covers.
#[derive(Serialize)]
struct Canonical<'a> {
    version: &'a str,
    experiment: &'a str,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    measure: Option<String>,
    probe: (Vec<f64>, f64, f64),
    scaling: (u32, u32, usize),
    #[serde(skip_serializing_if = "Option::is_none")]
    propagator: Option<&'a PropagatorDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schwinger: Option<(f64, f64, Vec<f64>, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ftscale: Option<(f64, u32, u32, Vec<f64>, f64, String)>,
    sum_rule_tol: f64,
}

pub fn load_doc(path: &Path) -> Result<ConfigDoc, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("cannot parse config {}: {e}", path.display()))
}

fn resolve_measure(
    doc: &ConfigDoc,
    config_dir: &Path,
    diags: &mut Vec<Diagnostic>,
) -> Option<SpectralMeasure> {
    let table = doc.measure.as_ref()?;
    let mut table = table.clone();
    let text = if let Some(file) = table.remove("file") {
        if !table.is_empty() {
            diags.push(Diagnostic {
                field: "measure".into(),
                message: "give either file = \"...\" or an inline measure, not both".into(),
            });
            return None;
        }
        let Some(rel) = file.as_str() else {
            diags.push(Diagnostic {
                field: "measure.file".into(),
                message: "must be a string path".into(),
            });
            return None;
        };
        match std::fs::read_to_string(config_dir.join(rel)) {
            Ok(t) => t,
            Err(e) => {
                diags.push(Diagnostic {
                    field: "measure.file".into(),
                    message: format!("cannot read '{rel}': {e}"),
                });
                return None;
            }
        }
    } else {
        toml::to_string(&table).expect("tables serialize")
    };
    match SpectralMeasure::from_toml_str(&text) {
        Ok(m) => Some(m),
        Err(e) => {
            diags.push(Diagnostic {
                field: "measure".into(),
                message: e.to_string(),
            });
            None
        }
    }
}

/// Resolve and validate in one pass. Returns the resolved config only when
/// the diagnostics list comes back empty.
pub fn resolve(
    doc: &ConfigDoc,
    config_dir: &Path,
    experiment_override: Option<&str>,
    out_override: Option<&Path>,
) -> (Option<Resolved>, Vec<Diagnostic>) {
    let mut diags = Vec::new();

    let experiment_name = experiment_override.or(doc.experiment.as_deref());
    let experiment = match experiment_name {
        None => {
            diags.push(Diagnostic {
                field: "experiment".into(),
                message: "missing; set it in the config or pass --experiment".into(),
            });
            None
        }
        Some(name) => match Experiment::from_str(name) {
            Ok(e) => Some(e),
            Err(msg) => {
                diags.push(Diagnostic {
                    field: "experiment".into(),
                    message: msg,
                });
                None
            }
        },
    };

    let measure = resolve_measure(doc, config_dir, &mut diags);
    if let Some(e) = experiment {
        if e.needs_measure() && doc.measure.is_none() {
            diags.push(Diagnostic {
                field: "measure".into(),
                message: format!("experiment '{e}' requires a [measure] section"),
            });
        }
    }

    let probe_doc = doc.probe.clone();
    let center = probe_doc
        .as_ref()
        .and_then(|p| p.center)
        .unwrap_or([0.0; 4]);
    let width = probe_doc.as_ref().and_then(|p| p.width).unwrap_or(1.0);
    let amplitude = probe_doc
        .as_ref()
        .and_then(|p| p.amplitude)
        .unwrap_or(1.0);
    let probe = match TestFunction::new(center, width, amplitude) {
        Ok(p) => Some(p),
        Err(e) => {
            diags.push(Diagnostic {
                field: "probe".into(),
                message: e.to_string(),
            });
            None
        }
    };

    let scaling = {
        let d = doc.scaling.clone().unwrap_or(ScalingDoc {
            k_min: None,
            k_max: None,
            window: None,
        });
        let default = ScalingGridSpec::default();
        let spec = ScalingGridSpec {
            k_min: d.k_min.unwrap_or(default.k_min),
            k_max: d.k_max.unwrap_or(default.k_max),
            fit_window: d.window.unwrap_or(default.fit_window),
        };
        let n = spec.k_max as i64 - spec.k_min as i64 + 1;
        if n < 8 || (spec.k_max - spec.k_min) < 10 {
            diags.push(Diagnostic {
                field: "scaling".into(),
                message: "grid needs at least 8 scales spanning at least 3 decades \
                          (k_max - k_min >= 10)"
                    .into(),
            });
        }
        if spec.fit_window < 5 || spec.fit_window as i64 > n {
            diags.push(Diagnostic {
                field: "scaling.window".into(),
                message: "fit window needs at least 5 points inside the grid".into(),
            });
        }
        spec
    };

    if let Some(p) = &doc.propagator {
        if p.masses.is_empty() || p.radii.is_empty() {
            diags.push(Diagnostic {
                field: "propagator".into(),
                message: "masses and radii must be non-empty".into(),
            });
        }
        if p.masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            diags.push(Diagnostic {
                field: "propagator.masses".into(),
                message: "masses must be finite and nonnegative".into(),
            });
        }
        if p.radii.iter().any(|r| !(*r > 0.0)) {
            diags.push(Diagnostic {
                field: "propagator.radii".into(),
                message: "radii must be positive".into(),
            });
        }
    } else if experiment == Some(Experiment::Propagator) {
        diags.push(Diagnostic {
            field: "propagator".into(),
            message: "experiment 'propagator' requires a [propagator] section".into(),
        });
    }

    let schwinger = match (&doc.schwinger, experiment) {
        (None, Some(Experiment::SchwingerEnergy | Experiment::Confinement)) => {
            diags.push(Diagnostic {
                field: "schwinger".into(),
                message: "this experiment requires a [schwinger] section".into(),
            });
            None
        }
        (None, _) => None,
        (Some(d), _) => {
            let mut plan = None;
            let r_grid = match (&d.r_grid, d.r_min, d.r_max, d.r_steps) {
                (Some(g), ..) => g.clone(),
                (None, Some(lo), Some(hi), Some(n)) if n >= 2 && hi > lo && lo > 0.0 => {
                    let step = (hi - lo) / (n - 1) as f64;
                    (0..n).map(|i| lo + step * i as f64).collect()
                }
                _ => {
                    diags.push(Diagnostic {
                        field: "schwinger".into(),
                        message: "give r_grid = [...] or r_min/r_max/r_steps (steps >= 2)".into(),
                    });
                    Vec::new()
                }
            };
            if !r_grid.is_empty() {
                if experiment == Some(Experiment::Confinement) {
                    if r_grid.len() < 5 {
                        diags.push(Diagnostic {
                            field: "schwinger.r_grid".into(),
                            message: format!(
                                "confinement needs >= 5 points, got {}",
                                r_grid.len()
                            ),
                        });
                    } else if r_grid[r_grid.len() - 1] / r_grid[0] < 10.0 {
                        diags.push(Diagnostic {
                            field: "schwinger.r_grid".into(),
                            message: "confinement grid must span at least one decade".into(),
                        });
                    }
                }
                if !(d.coupling >= 0.0 && d.coupling.is_finite()) {
                    diags.push(Diagnostic {
                        field: "schwinger.coupling".into(),
                        message: "must be finite and nonnegative".into(),
                    });
                }
                if !(d.epsilon > 0.0) {
                    diags.push(Diagnostic {
                        field: "schwinger.epsilon".into(),
                        message: "must be positive".into(),
                    });
                }
                let ramp = match d.ramp.as_deref() {
                    None | Some("linear") => Some(RampShape::Linear),
                    Some("smoothstep") => Some(RampShape::Smoothstep),
                    Some(other) => {
                        diags.push(Diagnostic {
                            field: "schwinger.ramp".into(),
                            message: format!("unknown ramp '{other}'; use linear or smoothstep"),
                        });
                        None
                    }
                };
                if let Some(ramp) = ramp {
                    plan = Some(SchwingerPlan {
                        coupling: d.coupling,
                        epsilon: d.epsilon,
                        r_grid,
                        ramp,
                    });
                }
            }
            plan
        }
    };

    let ftscale = match (&doc.ftscale, experiment) {
        (None, Some(Experiment::FtScaling)) => {
            diags.push(Diagnostic {
                field: "ftscale".into(),
                message: "experiment 'ft-scaling' requires an [ftscale] section".into(),
            });
            None
        }
        (None, _) => None,
        (Some(d), _) => {
            let spec = match d.regularization_order {
                Some(order) => PowerLawSpec::with_order(d.pl_exponent, d.space_dim, order),
                None => PowerLawSpec::new(d.pl_exponent, d.space_dim),
            };
            let spec = match spec {
                Ok(s) => Some(s),
                Err(e) => {
                    diags.push(Diagnostic {
                        field: "ftscale".into(),
                        message: e.to_string(),
                    });
                    None
                }
            };
            let radii = match (&d.radii, d.r_min, d.r_max, d.r_points) {
                (Some(r), ..) => r.clone(),
                (None, Some(lo), Some(hi), Some(n)) if n >= 2 && hi > lo && lo > 0.0 => {
                    spectral_lab::ftscale::log_radii(lo, hi, n)
                }
                _ => {
                    diags.push(Diagnostic {
                        field: "ftscale".into(),
                        message: "give radii = [...] or r_min/r_max/r_points (points >= 2)".into(),
                    });
                    Vec::new()
                }
            };
            if !radii.is_empty()
                && (radii.len() < 6 || radii[radii.len() - 1] / radii[0] < 10.0)
            {
                diags.push(Diagnostic {
                    field: "ftscale.radii".into(),
                    message: "exponent fits need >= 6 radii spanning >= 1 decade".into(),
                });
            }
            let rel_width = d.rel_width.unwrap_or(spectral_lab::ftscale::DEFAULT_REL_WIDTH);
            if !(rel_width > 0.0 && rel_width <= 0.075) {
                diags.push(Diagnostic {
                    field: "ftscale.rel_width".into(),
                    message: "must lie in (0, 0.075]".into(),
                });
            }
            let shell = match d.shell.as_deref() {
                None | Some("gaussian") => Some(ShellShape::Gaussian),
                Some("bump") => Some(ShellShape::Bump),
                Some(other) => {
                    diags.push(Diagnostic {
                        field: "ftscale.shell".into(),
                        message: format!("unknown shell '{other}'; use gaussian or bump"),
                    });
                    None
                }
            };
            match (spec, shell, radii.is_empty()) {
                (Some(spec), Some(shell), false) => Some(FtscalePlan {
                    spec,
                    radii,
                    rel_width,
                    shell,
                }),
                _ => None,
            }
        }
    };

    let sum_rule_tol = doc
        .sum_rule
        .as_ref()
        .and_then(|d| d.tol)
        .unwrap_or(spectral_lab::measure::DEFAULT_SUM_RULE_TOL);
    if !(sum_rule_tol > 0.0) {
        diags.push(Diagnostic {
            field: "sum_rule.tol".into(),
            message: "must be positive".into(),
        });
    }

    if !diags.is_empty() {
        return (None, diags);
    }
    let experiment = experiment.expect("validated above");
    let probe = probe.expect("validated above");
    if experiment.needs_measure() && measure.is_none() {
        // parse errors were already reported
        return (None, diags);
    }

    let out = out_override
        .map(Path::to_path_buf)
        .or_else(|| doc.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name())));
    let seed = doc.seed.unwrap_or(0);

    let canonical = Canonical {
        version: env!("CARGO_PKG_VERSION"),
        experiment: experiment.name(),
        seed,
        measure: measure.as_ref().map(|m| m.to_toml_string()),
        probe: (probe.center().to_vec(), probe.width(), probe.amplitude()),
        scaling: (scaling.k_min, scaling.k_max, scaling.fit_window),
        propagator: doc.propagator.as_ref(),
        schwinger: schwinger.as_ref().map(|p| {
            (
                p.coupling,
                p.epsilon,
                p.r_grid.clone(),
                format!("{:?}", p.ramp),
            )
        }),
        ftscale: ftscale.as_ref().map(|p| {
            (
                p.spec.pl_exponent,
                p.spec.space_dim,
                p.spec.regularization_order,
                p.radii.clone(),
                p.rel_width,
                format!("{:?}", p.shell),
            )
        }),
        sum_rule_tol,
    };
    let canonical_text = toml::to_string(&canonical).expect("canonical config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical_text.as_bytes());
    let config_hash = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();

    (
        Some(Resolved {
            experiment,
            out,
            seed,
            measure,
            probe,
            scaling,
            propagator: doc.propagator.clone(),
            schwinger,
            ftscale,
            sum_rule_tol,
            config_hash,
        }),
        diags,
    )
}
