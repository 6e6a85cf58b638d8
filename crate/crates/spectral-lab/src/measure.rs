//! Polynomially-bounded spectral measures on the mass-squared axis.
//!
//! A measure is an explicit list of discrete atoms plus a continuous
//! density from a small registered family, so the decomposition into pure
//! point and continuous parts is structural rather than estimated. The
//! singular-continuous part is not representable by design: identifying it
//! numerically is ill-posed.
//!
//! Total masses of unbounded supports are settled by octave doubling: the
//! tail integrals over `[L, 2L]` for `L = L0 * 2^k`, `k = 0..10`, either
//! vanish, decay geometrically (the remainder is then extrapolated), or
//! keep a non-vanishing ratio, in which case the total is flagged infinite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{self, QuadError, QuadOptions};

/// Default tolerance for the equal-time-commutator sum rule.
pub const DEFAULT_SUM_RULE_TOL: f64 = 1e-8;
/// Default tolerance for matching an atom by its mass squared.
pub const DEFAULT_ATOM_TOL: f64 = 1e-9;

/// `int_{-1}^{1} exp(-1/(1-t^2)) dt`, the normalization of the smooth bump
/// shape (mpmath, 22 digits).
const BUMP_NORM: f64 = 0.443_993_816_168_079_4;

/// Tail ratios at or above this value flag a divergent total mass.
const DIVERGENCE_RATIO: f64 = 0.999;

/// A discrete spectral line: a point mass at `mass_sq` carrying `weight`.
///
/// Weights are the Z-factors of the representation; positivity of the
/// underlying metric restricts them to `[0, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralAtom {
    pub mass_sq: f64,
    pub weight: f64,
}

impl SpectralAtom {
    pub fn new(mass_sq: f64, weight: f64) -> Self {
        Self { mass_sq, weight }
    }
}

/// Support interval of a continuous density; `upper` may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn bounded(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn from_lower(lower: f64) -> Self {
        Self {
            lower,
            upper: f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn contains(&self, m_sq: f64) -> bool {
        m_sq >= self.lower && m_sq <= self.upper
    }
}

/// Certificate `int_0^L density <= coeff * (1 + L^degree)` for the
/// polynomial bound on the measure. Checked on a sampled grid of `L`
/// values at construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyBound {
    pub coeff: f64,
    pub degree: u32,
}

impl PolyBound {
    pub fn bound_at(&self, l: f64) -> f64 {
        self.coeff * (1.0 + l.powi(self.degree as i32))
    }
}

/// Registered density families. All evaluate to a nonnegative value inside
/// the support and to zero outside.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityFamily {
    Zero,
    /// `level` on the support.
    Constant { level: f64 },
    /// `coeff * (m^2)^exponent` on the support.
    Power { coeff: f64, exponent: f64 },
    /// Smooth compactly supported bump normalized so its integral over the
    /// support equals `mass`.
    Bump { mass: f64 },
    /// `coeff * exp(-rate * m^2)` on the support.
    ExpCutoff { coeff: f64, rate: f64 },
    /// Piecewise-linear interpolation of `(mass_sq, density)` samples,
    /// zero outside the sampled range.
    Tabulated { points: Vec<(f64, f64)> },
}

/// The continuous part of a spectral measure.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousDensity {
    family: DensityFamily,
    support: Support,
    poly_bound: PolyBound,
}

/// Total measure of the half line: either a finite value with a quadrature
/// error estimate or `f64::INFINITY` when the tail test flags divergence.
#[derive(Clone, Copy, Debug)]
pub struct MassTotal {
    pub value: f64,
    pub quadrature_error: f64,
}

impl MassTotal {
    pub fn finite(value: f64, quadrature_error: f64) -> Self {
        Self {
            value,
            quadrature_error,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            quadrature_error: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Outcome of the equal-time-commutator sum rule `int drho = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SumRuleVerdict {
    Holds,
    /// The total mass is finite but off unity; carries the total.
    Fails(f64),
    /// The total mass is infinite, which is incompatible with the rule.
    Divergent,
}

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("atom {index} has negative or non-finite weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("atom {index} has negative or non-finite mass_sq {mass_sq}")]
    InvalidMassSq { index: usize, mass_sq: f64 },
    #[error("atoms {first} and {second} share mass_sq = {mass_sq}; the pure point part must be discrete")]
    DuplicateAtomMass {
        first: usize,
        second: usize,
        mass_sq: f64,
    },
    #[error("invalid support [{lower}, {upper}]: need 0 <= lower < upper")]
    InvalidSupport { lower: f64, upper: f64 },
    #[error("density parameter {name} = {value} is out of range: {what}")]
    InvalidDensityParam {
        name: &'static str,
        value: f64,
        what: &'static str,
    },
    #[error("tabulated density must have >= 2 strictly increasing, nonnegative, finite samples")]
    InvalidTabulation,
    #[error("{family} density requires a bounded support")]
    UnboundedFamily { family: &'static str },
    #[error("poly_bound coefficient must be positive, got {coeff}")]
    InvalidPolyBound { coeff: f64 },
    #[error(
        "poly_bound certificate violated at L = {level}: integral {integral:e} > bound {bound:e}"
    )]
    PolyBoundViolated {
        level: f64,
        integral: f64,
        bound: f64,
    },
    #[error("tolerance must be positive, got {tol}")]
    NonPositiveTolerance { tol: f64 },
    #[error("{count} atoms match mass_sq = {query} within tol = {tol}; match is ambiguous")]
    AmbiguousAtomMatch { query: f64, tol: f64, count: usize },
    #[error("renormalization undefined at Z=0: no discrete atom with positive weight")]
    RenormalizationUndefined,
    #[error("cannot merge two measures that both carry a continuous part")]
    UnmergeableContinua,
    #[error("measure config: {0}")]
    Config(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

impl DensityFamily {
    fn validate(&self, support: &Support) -> Result<(), MeasureError> {
        let check = |name: &'static str, value: f64, ok: bool| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(MeasureError::InvalidDensityParam {
                    name,
                    value,
                    what: "must be finite and nonnegative",
                })
            }
        };
        match self {
            DensityFamily::Zero => Ok(()),
            DensityFamily::Constant { level } => check("level", *level, *level >= 0.0),
            DensityFamily::Power { coeff, exponent } => {
                check("coeff", *coeff, *coeff >= 0.0)?;
                if !exponent.is_finite() {
                    return Err(MeasureError::InvalidDensityParam {
                        name: "exponent",
                        value: *exponent,
                        what: "must be finite",
                    });
                }
                if *exponent < 0.0 && support.lower == 0.0 && *exponent <= -1.0 {
                    return Err(MeasureError::InvalidDensityParam {
                        name: "exponent",
                        value: *exponent,
                        what: "not locally integrable at m^2 = 0; raise the support lower bound",
                    });
                }
                Ok(())
            }
            DensityFamily::Bump { mass } => {
                check("mass", *mass, *mass >= 0.0)?;
                if !support.is_bounded() {
                    return Err(MeasureError::UnboundedFamily { family: "bump" });
                }
                Ok(())
            }
            DensityFamily::ExpCutoff { coeff, rate } => {
                check("coeff", *coeff, *coeff >= 0.0)?;
                check("rate", *rate, *rate > 0.0)
            }
            DensityFamily::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(MeasureError::InvalidTabulation);
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(MeasureError::InvalidTabulation);
                    }
                }
                for &(m, v) in points {
                    if !m.is_finite() || !v.is_finite() || m < 0.0 || v < 0.0 {
                        return Err(MeasureError::InvalidTabulation);
                    }
                }
                Ok(())
            }
        }
    }

    /// A certificate that holds for the family by construction; used when
    /// the caller does not provide one.
    fn derive_poly_bound(&self, support: &Support) -> PolyBound {
        let half_total = |t: f64| PolyBound {
            coeff: (t / 2.0).max(1e-12),
            degree: 0,
        };
        match self {
            DensityFamily::Zero => half_total(0.0),
            DensityFamily::Constant { level } => PolyBound {
                coeff: level.max(1.0),
                degree: 1,
            },
            DensityFamily::Power { coeff, exponent } => {
                if *exponent > -1.0 {
                    PolyBound {
                        coeff: (coeff / (exponent + 1.0)).max(1e-12),
                        degree: (exponent + 1.0).ceil().max(1.0) as u32,
                    }
                } else if *exponent == -1.0 {
                    PolyBound {
                        coeff: (coeff * (1.0f64).max(1.0 / support.lower)).max(1e-12),
                        degree: 1,
                    }
                } else {
                    // integrable tail from a positive lower edge
                    let total =
                        coeff * support.lower.powf(exponent + 1.0) / (-exponent - 1.0);
                    half_total(total)
                }
            }
            DensityFamily::Bump { mass } => half_total(*mass),
            DensityFamily::ExpCutoff { coeff, rate } => half_total(coeff / rate),
            DensityFamily::Tabulated { points } => {
                let mut total = 0.0;
                for w in points.windows(2) {
                    total += 0.5 * (w[1].1 + w[0].1) * (w[1].0 - w[0].0);
                }
                half_total(total)
            }
        }
    }
}

impl ContinuousDensity {
    pub fn new(family: DensityFamily, support: Support) -> Result<Self, MeasureError> {
        let poly_bound = family.derive_poly_bound(&support);
        Self::with_poly_bound(family, support, poly_bound)
    }

    pub fn with_poly_bound(
        family: DensityFamily,
        support: Support,
        poly_bound: PolyBound,
    ) -> Result<Self, MeasureError> {
        if !(support.lower >= 0.0 && support.lower.is_finite() && support.lower < support.upper) {
            return Err(MeasureError::InvalidSupport {
                lower: support.lower,
                upper: support.upper,
            });
        }
        if !(poly_bound.coeff > 0.0 && poly_bound.coeff.is_finite()) {
            return Err(MeasureError::InvalidPolyBound {
                coeff: poly_bound.coeff,
            });
        }
        family.validate(&support)?;
        let density = Self {
            family,
            support,
            poly_bound,
        };
        density.check_poly_bound()?;
        Ok(density)
    }

    /// The zero density (empty continuum).
    pub fn zero() -> Self {
        Self {
            family: DensityFamily::Zero,
            support: Support::bounded(0.0, 1.0),
            poly_bound: PolyBound {
                coeff: 1e-12,
                degree: 0,
            },
        }
    }

    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn poly_bound(&self) -> PolyBound {
        self.poly_bound
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, DensityFamily::Zero)
    }

    /// Density value at `m_sq`; zero outside the support.
    pub fn eval(&self, m_sq: f64) -> f64 {
        if !self.support.contains(m_sq) {
            return 0.0;
        }
        match &self.family {
            DensityFamily::Zero => 0.0,
            DensityFamily::Constant { level } => *level,
            DensityFamily::Power { coeff, exponent } => coeff * m_sq.powf(*exponent),
            DensityFamily::Bump { mass } => {
                let (a, b) = (self.support.lower, self.support.upper);
                let t = (2.0 * m_sq - a - b) / (b - a);
                if t.abs() >= 1.0 {
                    return 0.0;
                }
                let shape = (-1.0 / (1.0 - t * t)).exp();
                mass * shape / (BUMP_NORM * 0.5 * (b - a))
            }
            DensityFamily::ExpCutoff { coeff, rate } => coeff * (-rate * m_sq).exp(),
            DensityFamily::Tabulated { points } => {
                match points.binary_search_by(|p| p.0.total_cmp(&m_sq)) {
                    Ok(i) => points[i].1,
                    Err(0) => 0.0,
                    Err(i) if i == points.len() => 0.0,
                    Err(i) => {
                        let (x0, y0) = points[i - 1];
                        let (x1, y1) = points[i];
                        y0 + (y1 - y0) * (m_sq - x0) / (x1 - x0)
                    }
                }
            }
        }
    }

    /// Integral of the density over `[lo, hi]` (intersected with the support).
    pub fn integral(&self, lo: f64, hi: f64) -> Result<(f64, f64), MeasureError> {
        let lo = lo.max(self.support.lower);
        let hi = hi.min(self.support.upper);
        if self.is_zero() || hi <= lo {
            return Ok((0.0, 0.0));
        }
        let r = quad::integrate(|m| self.eval(m), lo, hi, &QuadOptions::default())?;
        Ok((r.value, r.abs_error))
    }

    /// Total mass of the continuum, with octave-doubling divergence
    /// detection on unbounded supports.
    pub fn total_mass(&self) -> Result<MassTotal, MeasureError> {
        if self.is_zero() {
            return Ok(MassTotal::finite(0.0, 0.0));
        }
        if self.support.is_bounded() {
            let (v, e) = self.integral(self.support.lower, self.support.upper)?;
            return Ok(MassTotal::finite(v, e));
        }
        let l0 = self.support.lower.max(0.0) + 16.0;
        let (mut value, mut err) = self.integral(self.support.lower, l0)?;
        let mut tails = Vec::with_capacity(11);
        for k in 0..11 {
            let a = l0 * (1u64 << k) as f64;
            let (t, te) = self.integral(a, 2.0 * a)?;
            tails.push(t);
            value += t;
            err += te;
        }
        let scale = 1.0 + value.abs();
        let late_max = tails[8..].iter().cloned().fold(0.0f64, f64::max);
        if late_max <= 1e-13 * scale {
            // tail already negligible
            return Ok(MassTotal::finite(value, err + 1e-13 * scale));
        }
        let r = tails[10] / tails[9];
        let r_prev = tails[9] / tails[8];
        if !r.is_finite() || r >= DIVERGENCE_RATIO {
            return Ok(MassTotal::infinite());
        }
        // geometric remainder beyond the last sampled octave
        let rest = tails[10] * r / (1.0 - r);
        let rest_err = rest.abs() * ((r - r_prev).abs() / (1.0 - r)).max(f64::EPSILON);
        Ok(MassTotal::finite(value + rest, err + rest_err))
    }

    /// Rescale the density by `factor >= 0` (linear in every family).
    pub fn scaled(&self, factor: f64) -> Result<Self, MeasureError> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(MeasureError::InvalidDensityParam {
                name: "factor",
                value: factor,
                what: "must be finite and nonnegative",
            });
        }
        let family = match &self.family {
            DensityFamily::Zero => DensityFamily::Zero,
            DensityFamily::Constant { level } => DensityFamily::Constant {
                level: level * factor,
            },
            DensityFamily::Power { coeff, exponent } => DensityFamily::Power {
                coeff: coeff * factor,
                exponent: *exponent,
            },
            DensityFamily::Bump { mass } => DensityFamily::Bump {
                mass: mass * factor,
            },
            DensityFamily::ExpCutoff { coeff, rate } => DensityFamily::ExpCutoff {
                coeff: coeff * factor,
                rate: *rate,
            },
            DensityFamily::Tabulated { points } => DensityFamily::Tabulated {
                points: points.iter().map(|&(m, v)| (m, v * factor)).collect(),
            },
        };
        let poly_bound = PolyBound {
            coeff: (self.poly_bound.coeff * factor).max(1e-300),
            degree: self.poly_bound.degree,
        };
        Self::with_poly_bound(family, self.support, poly_bound)
    }

    fn check_poly_bound(&self) -> Result<(), MeasureError> {
        if self.is_zero() {
            return Ok(());
        }
        let mut grid: Vec<f64> = vec![1.0, 4.0, 16.0, 64.0, 256.0, 1024.0];
        if self.support.is_bounded() {
            grid.push(self.support.upper);
        }
        let mut cum = 0.0;
        let mut prev = 0.0f64;
        grid.sort_by(f64::total_cmp);
        for l in grid {
            if l <= self.support.lower {
                continue;
            }
            let (seg, _) = self.integral(prev.max(self.support.lower), l)?;
            cum += seg;
            prev = l;
            let bound = self.poly_bound.bound_at(l);
            if cum > bound * (1.0 + 1e-9) + 1e-12 {
                return Err(MeasureError::PolyBoundViolated {
                    level: l,
                    integral: cum,
                    bound,
                });
            }
        }
        Ok(())
    }
}

/// A spectral measure: discrete atoms plus a continuous density.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<SpectralAtom>,
    continuum: ContinuousDensity,
}

impl SpectralMeasure {
    pub fn new(
        atoms: Vec<SpectralAtom>,
        continuum: ContinuousDensity,
    ) -> Result<Self, MeasureError> {
        for (i, atom) in atoms.iter().enumerate() {
            if !(atom.weight >= 0.0 && atom.weight.is_finite()) {
                return Err(MeasureError::InvalidWeight {
                    index: i,
                    weight: atom.weight,
                });
            }
            if !(atom.mass_sq >= 0.0 && atom.mass_sq.is_finite()) {
                return Err(MeasureError::InvalidMassSq {
                    index: i,
                    mass_sq: atom.mass_sq,
                });
            }
            for (j, other) in atoms[..i].iter().enumerate() {
                if other.mass_sq == atom.mass_sq {
                    return Err(MeasureError::DuplicateAtomMass {
                        first: j,
                        second: i,
                        mass_sq: atom.mass_sq,
                    });
                }
            }
        }
        Ok(Self { atoms, continuum })
    }

    /// The free-field measure: a single atom of unit weight at `mass_sq`.
    pub fn free_field(mass_sq: f64) -> Self {
        Self {
            atoms: vec![SpectralAtom::new(mass_sq, 1.0)],
            continuum: ContinuousDensity::zero(),
        }
    }

    pub fn from_atoms(atoms: Vec<SpectralAtom>) -> Result<Self, MeasureError> {
        Self::new(atoms, ContinuousDensity::zero())
    }

    pub fn from_continuum(continuum: ContinuousDensity) -> Self {
        Self {
            atoms: Vec::new(),
            continuum,
        }
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn continuum(&self) -> &ContinuousDensity {
        &self.continuum
    }

    /// The structural Lebesgue decomposition into the pure point part and
    /// the continuous remainder.
    pub fn decompose(&self) -> (&[SpectralAtom], &ContinuousDensity) {
        (&self.atoms, &self.continuum)
    }

    /// Total measure of `[0, inf)`: atom weights plus the continuum mass.
    pub fn total_mass(&self) -> Result<MassTotal, MeasureError> {
        let atom_sum: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let cont = self.continuum.total_mass()?;
        if !cont.is_finite() {
            return Ok(MassTotal::infinite());
        }
        Ok(MassTotal::finite(
            atom_sum + cont.value,
            cont.quadrature_error,
        ))
    }

    /// Z-factor at `mass_sq`: the weight of the unique atom within `tol`,
    /// or zero when no atom matches.
    pub fn z_at(&self, mass_sq: f64, tol: f64) -> Result<f64, MeasureError> {
        if !(tol > 0.0) {
            return Err(MeasureError::NonPositiveTolerance { tol });
        }
        let matches: Vec<&SpectralAtom> = self
            .atoms
            .iter()
            .filter(|a| (a.mass_sq - mass_sq).abs() <= tol)
            .collect();
        match matches.len() {
            0 => Ok(0.0),
            1 => Ok(matches[0].weight),
            count => Err(MeasureError::AmbiguousAtomMatch {
                query: mass_sq,
                tol,
                count,
            }),
        }
    }

    /// The sum rule `int drho = 1` implied by canonical equal-time
    /// commutators, checked to `tol`.
    pub fn check_etcr_sum_rule(&self, tol: f64) -> Result<SumRuleVerdict, MeasureError> {
        if !(tol > 0.0) {
            return Err(MeasureError::NonPositiveTolerance { tol });
        }
        let total = self.total_mass()?;
        if !total.is_finite() {
            return Ok(SumRuleVerdict::Divergent);
        }
        if (total.value - 1.0).abs() <= tol {
            Ok(SumRuleVerdict::Holds)
        } else {
            Ok(SumRuleVerdict::Fails(total.value))
        }
    }

    /// Divide the measure by the particle Z-factor, i.e. pass to the
    /// measure of the renormalized field. The particle atom is the
    /// lowest-mass atom with positive weight.
    pub fn renormalize(&self) -> Result<SpectralMeasure, MeasureError> {
        let z = self
            .atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .min_by(|a, b| a.mass_sq.total_cmp(&b.mass_sq))
            .map(|a| a.weight)
            .ok_or(MeasureError::RenormalizationUndefined)?;
        self.scale_weights(1.0 / z)
    }

    /// Multiply all weights and the density by `factor`.
    pub fn scale_weights(&self, factor: f64) -> Result<SpectralMeasure, MeasureError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| SpectralAtom::new(a.mass_sq, a.weight * factor))
            .collect();
        Self::new(atoms, self.continuum.scaled(factor)?)
    }

    /// Union of two measures. At most one side may carry a continuum;
    /// atom masses must stay pairwise distinct.
    pub fn merge(&self, other: &SpectralMeasure) -> Result<SpectralMeasure, MeasureError> {
        let continuum = match (self.continuum.is_zero(), other.continuum.is_zero()) {
            (false, false) => return Err(MeasureError::UnmergeableContinua),
            (false, true) => self.continuum.clone(),
            _ => other.continuum.clone(),
        };
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self::new(atoms, continuum)
    }
}

// ---------------------------------------------------------------------------
// plain-text (TOML) wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    #[serde(default, rename = "atom", skip_serializing_if = "Vec::is_empty")]
    atoms: Vec<SpectralAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    continuum: Option<ContinuumDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContinuumDoc {
    family: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
    support: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poly_bound: Option<PolyBound>,
}

fn family_to_doc(density: &ContinuousDensity) -> ContinuumDoc {
    let (family, params) = match density.family() {
        DensityFamily::Zero => ("zero", vec![]),
        DensityFamily::Constant { level } => ("constant", vec![*level]),
        DensityFamily::Power { coeff, exponent } => ("power", vec![*coeff, *exponent]),
        DensityFamily::Bump { mass } => ("bump", vec![*mass]),
        DensityFamily::ExpCutoff { coeff, rate } => ("exp_cutoff", vec![*coeff, *rate]),
        DensityFamily::Tabulated { points } => (
            "tabulated",
            points.iter().flat_map(|&(m, v)| [m, v]).collect(),
        ),
    };
    ContinuumDoc {
        family: family.to_string(),
        params,
        support: [density.support().lower, density.support().upper],
        poly_bound: Some(density.poly_bound()),
    }
}

fn family_from_doc(doc: &ContinuumDoc) -> Result<ContinuousDensity, MeasureError> {
    let p = &doc.params;
    let arity = |n: usize| {
        if p.len() == n {
            Ok(())
        } else {
            Err(MeasureError::Config(format!(
                "family '{}' takes {} params, got {}",
                doc.family,
                n,
                p.len()
            )))
        }
    };
    let family = match doc.family.as_str() {
        "zero" => {
            arity(0)?;
            DensityFamily::Zero
        }
        "constant" => {
            arity(1)?;
            DensityFamily::Constant { level: p[0] }
        }
        "power" => {
            arity(2)?;
            DensityFamily::Power {
                coeff: p[0],
                exponent: p[1],
            }
        }
        "bump" => {
            arity(1)?;
            DensityFamily::Bump { mass: p[0] }
        }
        "exp_cutoff" => {
            arity(2)?;
            DensityFamily::ExpCutoff {
                coeff: p[0],
                rate: p[1],
            }
        }
        "tabulated" => {
            if p.len() < 4 || !p.len().is_multiple_of(2) {
                return Err(MeasureError::Config(
                    "family 'tabulated' takes an even number (>= 4) of params, \
                     interleaved as m_sq, density"
                        .to_string(),
                ));
            }
            DensityFamily::Tabulated {
                points: p.chunks(2).map(|c| (c[0], c[1])).collect(),
            }
        }
        other => {
            return Err(MeasureError::Config(format!(
                "unknown density family '{other}'"
            )))
        }
    };
    let support = Support {
        lower: doc.support[0],
        upper: doc.support[1],
    };
    match doc.poly_bound {
        Some(pb) => ContinuousDensity::with_poly_bound(family, support, pb),
        None => ContinuousDensity::new(family, support),
    }
}

impl SpectralMeasure {
    /// Serialize to the plain-text key-value config format.
    pub fn to_toml_string(&self) -> String {
        let doc = MeasureDoc {
            atoms: self.atoms.clone(),
            continuum: if self.continuum.is_zero() {
                None
            } else {
                Some(family_to_doc(&self.continuum))
            },
        };
        toml::to_string(&doc).expect("measure doc serializes")
    }

    /// Parse and validate a measure from its TOML representation.
    pub fn from_toml_str(text: &str) -> Result<Self, MeasureError> {
        let doc: MeasureDoc =
            toml::from_str(text).map_err(|e| MeasureError::Config(e.to_string()))?;
        let continuum = match &doc.continuum {
            Some(c) => family_from_doc(c)?,
            None => ContinuousDensity::zero(),
        };
        Self::new(doc.atoms, continuum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(level: f64, lo: f64, hi: f64) -> ContinuousDensity {
        ContinuousDensity::new(
            DensityFamily::Constant { level },
            Support::bounded(lo, hi),
        )
        .unwrap()
    }

    #[test]
    fn free_field_total_mass_is_one() {
        let m = SpectralMeasure::free_field(1.0);
        let t = m.total_mass().unwrap();
        assert!(t.is_finite());
        assert!((t.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_measure_total_mass_is_zero() {
        let m = SpectralMeasure::from_atoms(vec![]).unwrap();
        let t = m.total_mass().unwrap();
        assert_eq!(t.value, 0.0);
    }

    #[test]
    fn atom_plus_indicator_totals_one() {
        // weight 0.6 atom plus density 0.4 * 1_[1,2]
        let m = SpectralMeasure::new(
            vec![SpectralAtom::new(1.0, 0.6)],
            indicator(0.4, 1.0, 2.0),
        )
        .unwrap();
        let t = m.total_mass().unwrap();
        assert!((t.value - 1.0).abs() < 1e-10, "total {}", t.value);
    }

    #[test]
    fn constant_density_on_half_line_diverges() {
        let d = ContinuousDensity::new(
            DensityFamily::Constant { level: 1.0 },
            Support::from_lower(0.0),
        )
        .unwrap();
        let t = SpectralMeasure::from_continuum(d).total_mass().unwrap();
        assert!(!t.is_finite());
    }

    #[test]
    fn integrable_power_tail_is_finite() {
        // (m^2)^-2 from 1: integral = 1
        let d = ContinuousDensity::new(
            DensityFamily::Power {
                coeff: 1.0,
                exponent: -2.0,
            },
            Support::from_lower(1.0),
        )
        .unwrap();
        let t = SpectralMeasure::from_continuum(d).total_mass().unwrap();
        assert!(t.is_finite());
        assert!(
            (t.value - 1.0).abs() < 1e-6,
            "total {} err {}",
            t.value,
            t.quadrature_error
        );
        assert!((t.value - 1.0).abs() < 10.0 * t.quadrature_error.max(1e-12));
    }

    #[test]
    fn log_divergent_power_is_flagged_infinite() {
        let d = ContinuousDensity::new(
            DensityFamily::Power {
                coeff: 1.0,
                exponent: -1.0,
            },
            Support::from_lower(1.0),
        )
        .unwrap();
        let t = SpectralMeasure::from_continuum(d).total_mass().unwrap();
        assert!(!t.is_finite());
    }

    #[test]
    fn exp_cutoff_total_matches_closed_form() {
        let d = ContinuousDensity::new(
            DensityFamily::ExpCutoff {
                coeff: 2.0,
                rate: 0.5,
            },
            Support::from_lower(0.0),
        )
        .unwrap();
        let t = SpectralMeasure::from_continuum(d).total_mass().unwrap();
        assert!((t.value - 4.0).abs() < 1e-8, "total {}", t.value);
    }

    #[test]
    fn bump_mass_is_normalized() {
        let d = ContinuousDensity::new(
            DensityFamily::Bump { mass: 0.4 },
            Support::bounded(2.0, 3.0),
        )
        .unwrap();
        let (v, _) = d.integral(0.0, 10.0).unwrap();
        assert!((v - 0.4).abs() < 1e-11, "bump integral {v}");
        assert_eq!(d.eval(2.0), 0.0);
        assert_eq!(d.eval(3.1), 0.0);
        assert!(d.eval(2.5) > 0.0);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let d = ContinuousDensity::new(
            DensityFamily::Tabulated {
                points: vec![(1.0, 0.0), (2.0, 2.0), (4.0, 0.0)],
            },
            Support::bounded(1.0, 4.0),
        )
        .unwrap();
        assert_eq!(d.eval(0.5), 0.0);
        assert!((d.eval(1.5) - 1.0).abs() < 1e-15);
        assert!((d.eval(3.0) - 1.0).abs() < 1e-15);
        let (v, _) = d.integral(0.0, 5.0).unwrap();
        assert!((v - 3.0).abs() < 1e-10);
    }

    #[test]
    fn decompose_roundtrips() {
        let atoms = vec![SpectralAtom::new(1.0, 0.6)];
        let cont = indicator(0.4, 2.0, 3.0);
        let m = SpectralMeasure::new(atoms.clone(), cont.clone()).unwrap();
        let (got_atoms, got_cont) = m.decompose();
        assert_eq!(got_atoms, atoms.as_slice());
        assert_eq!(got_cont, &cont);
    }

    #[test]
    fn z_at_matches_and_detects_ambiguity() {
        let m = SpectralMeasure::from_atoms(vec![
            SpectralAtom::new(1.0, 0.6),
            SpectralAtom::new(4.0, 0.2),
        ])
        .unwrap();
        assert_eq!(m.z_at(4.0, DEFAULT_ATOM_TOL).unwrap(), 0.2);
        assert_eq!(m.z_at(2.5, DEFAULT_ATOM_TOL).unwrap(), 0.0);
        assert!(matches!(
            m.z_at(2.0, 5.0),
            Err(MeasureError::AmbiguousAtomMatch { count: 2, .. })
        ));
        assert!(matches!(
            m.z_at(1.0, 0.0),
            Err(MeasureError::NonPositiveTolerance { .. })
        ));
    }

    #[test]
    fn pure_continuum_has_zero_z() {
        let m = SpectralMeasure::from_continuum(indicator(1.0, 0.0, 1.0));
        assert_eq!(m.z_at(0.5, DEFAULT_ATOM_TOL).unwrap(), 0.0);
    }

    #[test]
    fn sum_rule_verdicts() {
        let free = SpectralMeasure::free_field(1.0);
        assert_eq!(
            free.check_etcr_sum_rule(DEFAULT_SUM_RULE_TOL).unwrap(),
            SumRuleVerdict::Holds
        );

        let mixed = SpectralMeasure::new(
            vec![SpectralAtom::new(1.0, 0.6)],
            indicator(0.4, 1.0, 2.0),
        )
        .unwrap();
        assert_eq!(
            mixed.check_etcr_sum_rule(1e-8).unwrap(),
            SumRuleVerdict::Holds
        );

        let off = SpectralMeasure::free_field(2.0).scale_weights(0.5).unwrap();
        assert!(matches!(
            off.check_etcr_sum_rule(1e-8).unwrap(),
            SumRuleVerdict::Fails(t) if (t - 0.5).abs() < 1e-12
        ));

        let divergent = SpectralMeasure::from_continuum(
            ContinuousDensity::new(
                DensityFamily::Constant { level: 1.0 },
                Support::from_lower(0.0),
            )
            .unwrap(),
        );
        assert_eq!(
            divergent.check_etcr_sum_rule(1e-8).unwrap(),
            SumRuleVerdict::Divergent
        );
    }

    #[test]
    fn renormalize_scales_by_particle_weight() {
        let m = SpectralMeasure::new(
            vec![SpectralAtom::new(1.0, 0.5)],
            indicator(0.5, 2.0, 3.0),
        )
        .unwrap();
        let g = m.renormalize().unwrap();
        let t = g.total_mass().unwrap();
        assert!((t.value - 2.0).abs() < 1e-10, "total {}", t.value);

        let free = SpectralMeasure::free_field(1.0);
        assert_eq!(free.renormalize().unwrap(), free);

        let pure = SpectralMeasure::from_continuum(indicator(1.0, 0.0, 1.0));
        assert!(matches!(
            pure.renormalize(),
            Err(MeasureError::RenormalizationUndefined)
        ));
    }

    #[test]
    fn renormalize_picks_lowest_mass_atom() {
        let m = SpectralMeasure::from_atoms(vec![
            SpectralAtom::new(4.0, 0.8),
            SpectralAtom::new(1.0, 0.0),
            SpectralAtom::new(2.0, 0.4),
        ])
        .unwrap();
        // lowest-mass atom with positive weight is at mass_sq = 2
        let g = m.renormalize().unwrap();
        assert_eq!(g.z_at(2.0, 1e-9).unwrap(), 1.0);
        assert_eq!(g.z_at(4.0, 1e-9).unwrap(), 2.0);
    }

    #[test]
    fn validation_rejects_bad_atoms() {
        assert!(matches!(
            SpectralMeasure::from_atoms(vec![SpectralAtom::new(1.0, -0.1)]),
            Err(MeasureError::InvalidWeight { .. })
        ));
        assert!(matches!(
            SpectralMeasure::from_atoms(vec![SpectralAtom::new(-1.0, 0.1)]),
            Err(MeasureError::InvalidMassSq { .. })
        ));
        assert!(matches!(
            SpectralMeasure::from_atoms(vec![
                SpectralAtom::new(1.0, 0.1),
                SpectralAtom::new(1.0, 0.2)
            ]),
            Err(MeasureError::DuplicateAtomMass { .. })
        ));
    }

    #[test]
    fn poly_bound_violation_is_reported() {
        let err = ContinuousDensity::with_poly_bound(
            DensityFamily::Constant { level: 100.0 },
            Support::from_lower(0.0),
            PolyBound {
                coeff: 1e-6,
                degree: 0,
            },
        )
        .unwrap_err();
        assert!(matches!(err, MeasureError::PolyBoundViolated { .. }));
    }

    #[test]
    fn total_mass_is_additive_on_merge() {
        let a = SpectralMeasure::from_atoms(vec![SpectralAtom::new(1.0, 0.3)]).unwrap();
        let b = SpectralMeasure::from_continuum(indicator(0.2, 3.0, 5.0));
        let merged = a.merge(&b).unwrap();
        let got = merged.total_mass().unwrap().value;
        let want = a.total_mass().unwrap().value + b.total_mass().unwrap().value;
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn toml_roundtrip_is_exact() {
        let m = SpectralMeasure::new(
            vec![
                SpectralAtom::new(1.0 / 3.0, 0.6000000000000001),
                SpectralAtom::new(std::f64::consts::PI, 0.2),
            ],
            ContinuousDensity::new(
                DensityFamily::Power {
                    coeff: 0.1,
                    exponent: 1.5,
                },
                Support::from_lower(0.25),
            )
            .unwrap(),
        )
        .unwrap();
        let text = m.to_toml_string();
        let back = SpectralMeasure::from_toml_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn toml_parses_spec_schema() {
        let text = r#"
            [[atom]]
            mass_sq = 1.0
            weight = 0.6

            [continuum]
            family = "bump"
            params = [0.4]
            support = [2.0, 3.0]
        "#;
        let m = SpectralMeasure::from_toml_str(text).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!(!m.continuum().is_zero());
        let t = m.total_mass().unwrap();
        assert!((t.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn toml_rejects_invalid_config() {
        let negative_weight = r#"
            [[atom]]
            mass_sq = 1.0
            weight = -0.5
        "#;
        assert!(SpectralMeasure::from_toml_str(negative_weight).is_err());

        let bad_family = r#"
            [continuum]
            family = "cauchy"
            support = [0.0, 1.0]
        "#;
        assert!(matches!(
            SpectralMeasure::from_toml_str(bad_family),
            Err(MeasureError::Config(_))
        ));

        let stray_key = r#"
            [[atom]]
            mass_sq = 1.0
            weight = 1.0
            charge = 2.0
        "#;
        assert!(matches!(
            SpectralMeasure::from_toml_str(stray_key),
            Err(MeasureError::Config(_))
        ));
    }
}
