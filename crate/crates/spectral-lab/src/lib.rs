//! Numerical laboratory for spectral representations of two-point functions.
//!
//! The crate evaluates Kallen-Lehmann spectral measures and the smeared
//! two-point functionals built from them, estimates Steinmann scaling
//! degrees from geometric scaling grids, computes dipole energies in the
//! bosonized Schwinger model together with the confinement verdict, and
//! verifies the power-law behaviour of distributional Fourier transforms
//! of `|p|^lambda`.
//!
//! Everything is plain `f64` numerics: adaptive Gauss-Kronrod quadrature
//! with error estimates, closed-form Gaussian probes so that no FFT enters
//! the pipeline, and least-squares exponent fits on log-log grids. All
//! types are immutable values and all operations are pure functions, so
//! grids may be evaluated concurrently by callers.

// negated float comparisons are deliberate: they reject NaN parameters
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fit;
pub mod ftscale;
pub mod kernel;
pub mod measure;
pub mod quad;
pub mod scaling;
pub mod schwinger;
pub mod special;

pub use fit::LineFit;
pub use ftscale::{ExponentFit, FtScaleError, PowerLawSpec, ShellProbe, ShellShape};
pub use kernel::{Evaluation, KernelError, TestFunction};
pub use measure::{
    ContinuousDensity, DensityFamily, MassTotal, MeasureError, PolyBound, SpectralAtom,
    SpectralMeasure, SumRuleVerdict, Support,
};
pub use quad::{QuadError, QuadOptions, QuadResult};
pub use scaling::{
    ScalingError, ScalingFit, ScalingGrid, ScalingGridSpec, SingularityKind, SingularityVerdict,
};
pub use schwinger::{
    ConfinementKind, ConfinementVerdict, DipoleProfile, EnergyReport, RampShape, SchwingerError,
};
