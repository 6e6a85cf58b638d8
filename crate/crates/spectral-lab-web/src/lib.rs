//! Browser demo bindings: three interactive operations exposed to a static
//! page through JSON-in/JSON-out calls.
//!
//! The exports stay string-typed so the page needs no generated glue
//! beyond the wasm-pack loader, and the same functions run natively in
//! tests. Errors come back as `{"error": "..."}` rather than exceptions.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use spectral_lab::measure::{ContinuousDensity, DensityFamily, SpectralMeasure, Support};
use spectral_lab::scaling::{self, ScalingGridSpec, SingularityKind};
use spectral_lab::schwinger::{self, DipoleProfile, RampShape};
use spectral_lab::{ftscale, ConfinementKind, PowerLawSpec, ShellShape, TestFunction};

fn reply<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(value) => serde_json::to_string(&value).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(message) => error_json(&message),
    }
}

fn error_json(message: &str) -> String {
    serde_json::to_string(&serde_json::json!({ "error": message })).unwrap()
}

// ---------------------------------------------------------------------------
// scaling-degree explorer
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct ScalingRequest {
    /// "free" (single atom), "flat" (constant density on the half line) or
    /// "power" (density (m^2)^alpha on the half line)
    measure: String,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    atom_mass_sq: Option<f64>,
    #[serde(default)]
    probe_width: Option<f64>,
}

#[derive(Serialize)]
struct ScalingResponse {
    grid: Vec<[f64; 2]>,
    degree: f64,
    stderr: f64,
    verdict: String,
    sigma_mass_finite: bool,
}

fn scaling_impl(input: &str) -> Result<ScalingResponse, String> {
    let req: ScalingRequest = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let measure = match req.measure.as_str() {
        "free" => SpectralMeasure::free_field(req.atom_mass_sq.unwrap_or(1.0)),
        "flat" => SpectralMeasure::from_continuum(
            ContinuousDensity::new(
                DensityFamily::Constant { level: 1.0 },
                Support::from_lower(0.0),
            )
            .map_err(|e| e.to_string())?,
        ),
        "power" => SpectralMeasure::from_continuum(
            ContinuousDensity::new(
                DensityFamily::Power {
                    coeff: 1.0,
                    exponent: req.alpha.unwrap_or(1.0),
                },
                Support::from_lower(0.0),
            )
            .map_err(|e| e.to_string())?,
        ),
        other => return Err(format!("unknown measure kind '{other}'")),
    };
    let width = req.probe_width.unwrap_or(1.0).clamp(0.25, 8.0);
    let probe = TestFunction::centered(width).map_err(|e| e.to_string())?;
    let spec = ScalingGridSpec::default();
    let grid = scaling::compute_grid(&measure, &probe, &spec).map_err(|e| e.to_string())?;
    let fit = scaling::fit_grid(&grid, spec.fit_window).map_err(|e| e.to_string())?;
    let verdict = scaling::classify(&measure, &probe).map_err(|e| e.to_string())?;
    Ok(ScalingResponse {
        grid: grid
            .lambdas
            .iter()
            .zip(&grid.values)
            .map(|(&l, &v)| [l, v])
            .collect(),
        degree: fit.degree,
        stderr: fit.stderr,
        verdict: match verdict.kind {
            SingularityKind::FreeLike => "FreeLike".into(),
            SingularityKind::SatisfiesSingularityHypothesis => {
                "SatisfiesSingularityHypothesis".into()
            }
        },
        sigma_mass_finite: verdict.sigma_mass_finite,
    })
}

/// Scaling-degree explorer: grid of scaled two-point values, the fitted
/// degree, and the singularity verdict.
#[wasm_bindgen]
pub fn scaling_demo(input: &str) -> String {
    reply(scaling_impl(input))
}

// ---------------------------------------------------------------------------
// Schwinger dipole-energy explorer
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct DipoleRequest {
    coupling: f64,
    epsilon: f64,
    #[serde(default)]
    r_min: Option<f64>,
    #[serde(default)]
    r_max: Option<f64>,
    #[serde(default)]
    points: Option<usize>,
    #[serde(default)]
    ramp: Option<String>,
}

#[derive(Serialize)]
struct DipoleResponse {
    rows: Vec<[f64; 4]>,
    verdict: String,
    slope: f64,
    photon_mass: f64,
}

fn dipole_impl(input: &str) -> Result<DipoleResponse, String> {
    let req: DipoleRequest = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let r_min = req.r_min.unwrap_or(10.0);
    let r_max = req.r_max.unwrap_or(100.0);
    let points = req.points.unwrap_or(10).clamp(5, 64);
    if !(r_min > 0.0 && r_max > r_min) {
        return Err("need 0 < r_min < r_max".into());
    }
    let ramp = match req.ramp.as_deref() {
        None | Some("linear") => RampShape::Linear,
        Some("smoothstep") => RampShape::Smoothstep,
        Some(other) => return Err(format!("unknown ramp '{other}'")),
    };
    let step = (r_max - r_min) / (points - 1) as f64;
    let r_grid: Vec<f64> = (0..points).map(|i| r_min + step * i as f64).collect();
    let mut rows = Vec::with_capacity(points);
    let mut energies = Vec::with_capacity(points);
    for &r in &r_grid {
        let profile = DipoleProfile::with_shape(r, req.epsilon, ramp).map_err(|e| e.to_string())?;
        let rep = schwinger::dipole_energy(req.coupling, &profile).map_err(|e| e.to_string())?;
        rows.push([r, rep.energy, rep.gradient_part, rep.mass_part]);
        energies.push(rep.energy);
    }
    let verdict = schwinger::confinement_verdict_from_energies(&r_grid, &energies)
        .map_err(|e| e.to_string())?;
    Ok(DipoleResponse {
        rows,
        verdict: match verdict.kind {
            ConfinementKind::Confined => "Confined".into(),
            ConfinementKind::FiniteEnergy => "FiniteEnergy".into(),
        },
        slope: verdict.growth_slope,
        photon_mass: schwinger::photon_mass(req.coupling),
    })
}

/// Dipole-energy explorer: energy sweep over the separation grid plus the
/// confinement verdict.
#[wasm_bindgen]
pub fn dipole_demo(input: &str) -> String {
    reply(dipole_impl(input))
}

// ---------------------------------------------------------------------------
// Fourier-scaling explorer
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FtScaleRequest {
    pl_exponent: f64,
    space_dim: u32,
    #[serde(default)]
    r_min: Option<f64>,
    #[serde(default)]
    r_max: Option<f64>,
    #[serde(default)]
    points: Option<usize>,
    #[serde(default)]
    shell: Option<String>,
}

#[derive(Serialize)]
struct FtScaleResponse {
    rows: Vec<[f64; 2]>,
    fitted_exponent: f64,
    stderr: f64,
    expected_exponent: f64,
}

fn ftscale_impl(input: &str) -> Result<FtScaleResponse, String> {
    let req: FtScaleRequest = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let spec = PowerLawSpec::new(req.pl_exponent, req.space_dim).map_err(|e| e.to_string())?;
    let r_min = req.r_min.unwrap_or(1.0);
    let r_max = req.r_max.unwrap_or(16.0);
    let points = req.points.unwrap_or(8).clamp(6, 24);
    if !(r_min > 0.0 && r_max >= 10.0 * r_min) {
        return Err("radii must span at least one decade".into());
    }
    let shell = match req.shell.as_deref() {
        None | Some("gaussian") => ShellShape::Gaussian,
        Some("bump") => ShellShape::Bump,
        Some(other) => return Err(format!("unknown shell '{other}'")),
    };
    let radii = ftscale::log_radii(r_min, r_max, points);
    let mut rows = Vec::with_capacity(points);
    for &r in &radii {
        let probe = spectral_lab::ShellProbe::new(r, ftscale::DEFAULT_REL_WIDTH, shell)
            .map_err(|e| e.to_string())?;
        let ev = ftscale::smeared_power_ft(&spec, &probe).map_err(|e| e.to_string())?;
        rows.push([r, ev.value]);
    }
    let fit = ftscale::fit_position_exponent(&spec, &radii, ftscale::DEFAULT_REL_WIDTH, shell)
        .map_err(|e| e.to_string())?;
    Ok(FtScaleResponse {
        rows,
        fitted_exponent: fit.fitted_exponent,
        stderr: fit.stderr,
        expected_exponent: -req.pl_exponent - req.space_dim as f64,
    })
}

/// Fourier-scaling explorer: pairings of `|p|^lambda` against shell probes
/// and the fitted position-space exponent.
#[wasm_bindgen]
pub fn ftscale_demo(input: &str) -> String {
    reply(ftscale_impl(input))
}
