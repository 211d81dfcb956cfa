//! Physical configuration of the waveguide: dispersion, scattering loss,
//! nonlinear coupling, input waveforms and the interaction window.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::Grid1D;

/// Reduced Planck constant in J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    /// Fundamental.
    F,
    /// Second harmonic.
    SH,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::F => f.write_str("F"),
            Band::SH => f.write_str("SH"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Process {
    Dfg,
    Sfg,
    Spdc,
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Dfg => f.write_str("DFG"),
            Process::Sfg => f.write_str("SFG"),
            Process::Spdc => f.write_str("SPDC"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitMode {
    Si,
    /// Time in units of the window half-width, rates in its inverse, ħ = 1.
    #[default]
    Nondimensional,
}

impl UnitMode {
    pub fn hbar(&self) -> f64 {
        match self {
            UnitMode::Si => HBAR_SI,
            UnitMode::Nondimensional => 1.0,
        }
    }
}

/// Linear dispersion of one band about its center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandDispersion {
    pub k0: f64,
    pub omega0: f64,
    pub group_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionRelation {
    f: BandDispersion,
    sh: BandDispersion,
}

impl DispersionRelation {
    pub fn new(f: BandDispersion, sh: BandDispersion) -> Result<Self> {
        for (band, d) in [(Band::F, &f), (Band::SH, &sh)] {
            if !(d.group_velocity > 0.0 && d.group_velocity.is_finite()) {
                return Err(Error::param(
                    format!("dispersion.v_{band}"),
                    format!("group velocity must be positive, got {}", d.group_velocity),
                ));
            }
            if !(d.k0.is_finite() && d.omega0.is_finite()) {
                return Err(Error::param(
                    format!("dispersion.{band}"),
                    "center wavenumber and frequency must be finite",
                ));
            }
        }
        Ok(Self { f, sh })
    }

    /// Equal group velocities, centers at zero.
    pub fn uniform(v: f64) -> Result<Self> {
        let d = BandDispersion {
            k0: 0.0,
            omega0: 0.0,
            group_velocity: v,
        };
        Self::new(d, d)
    }

    pub fn band(&self, band: Band) -> &BandDispersion {
        match band {
            Band::F => &self.f,
            Band::SH => &self.sh,
        }
    }

    pub fn omega(&self, band: Band, k: f64) -> f64 {
        let d = self.band(band);
        d.omega0 + d.group_velocity * (k - d.k0)
    }
}

/// Loss rate β(k) of a single band.
#[derive(Debug, Clone, PartialEq)]
pub enum BandLoss {
    Constant(f64),
    /// Piecewise-linear in k, clamped to the end values outside the knots.
    Table(Vec<(f64, f64)>),
}

impl BandLoss {
    pub fn constant(beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::param("loss", format!("rate must be finite and >= 0, got {beta}")));
        }
        Ok(BandLoss::Constant(beta))
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::param("loss.table", "table has no rows"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::param(
                    "loss.table",
                    format!("knots must strictly increase: {} then {}", w[0].0, w[1].0),
                ));
            }
        }
        if let Some(&(k, b)) = knots
            .iter()
            .find(|(k, b)| !(k.is_finite() && b.is_finite() && *b >= 0.0))
        {
            return Err(Error::param("loss.table", format!("bad row ({k}, {b})")));
        }
        Ok(BandLoss::Table(knots))
    }

    pub fn eval(&self, k: f64) -> f64 {
        match self {
            BandLoss::Constant(b) => *b,
            BandLoss::Table(knots) => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if k <= first.0 {
                    return first.1;
                }
                if k >= last.0 {
                    return last.1;
                }
                let j = knots.partition_point(|&(kk, _)| kk <= k);
                let (k0, b0) = knots[j - 1];
                let (k1, b1) = knots[j];
                b0 + (b1 - b0) * (k - k0) / (k1 - k0)
            }
        }
    }

    /// Smallest knot spacing, the scale over which β can vary.
    pub fn feature_width(&self) -> f64 {
        match self {
            BandLoss::Constant(_) => f64::INFINITY,
            BandLoss::Table(knots) => knots
                .windows(2)
                .filter(|w| w[0].1 != w[1].1)
                .map(|w| w[1].0 - w[0].0)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossProfile {
    f: BandLoss,
    sh: BandLoss,
}

impl LossProfile {
    pub fn new(f: BandLoss, sh: BandLoss) -> Self {
        Self { f, sh }
    }

    pub fn lossless() -> Self {
        Self::new(BandLoss::Constant(0.0), BandLoss::Constant(0.0))
    }

    pub fn constant(beta_f: f64, beta_sh: f64) -> Result<Self> {
        Ok(Self::new(BandLoss::constant(beta_f)?, BandLoss::constant(beta_sh)?))
    }

    pub fn band(&self, band: Band) -> &BandLoss {
        match band {
            Band::F => &self.f,
            Band::SH => &self.sh,
        }
    }

    pub fn eval(&self, band: Band, k: f64) -> f64 {
        self.band(band).eval(k)
    }
}

/// Converts a temporal loss rate to the spatial attenuation coefficient α = 2β/v.
pub fn alpha_from_beta(beta: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::param("v", format!("group velocity must be positive, got {v}")));
    }
    if !(beta >= 0.0) {
        return Err(Error::param("beta", format!("loss rate must be >= 0, got {beta}")));
    }
    Ok(2.0 * beta / v)
}

/// Phase-matching envelope as a function of the mismatch k₁ + k₂ − k − offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Constant,
    /// exp(−Δk²/(2w²)).
    Gaussian { width: f64 },
    /// sin(ΔkL/2)/(ΔkL/2). Changes sign, so S is no longer positive.
    Sinc { length: f64 },
}

impl Envelope {
    pub fn eval(&self, dk: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Gaussian { width } => (-0.5 * (dk / width).powi(2)).exp(),
            Envelope::Sinc { length } => {
                let x = 0.5 * dk * length;
                if x.abs() < 1e-8 {
                    1.0 - x * x / 6.0
                } else {
                    x.sin() / x
                }
            }
        }
    }

    /// Scale in Δk over which the envelope changes appreciably.
    pub fn feature_width(&self) -> f64 {
        match *self {
            Envelope::Constant => f64::INFINITY,
            Envelope::Gaussian { width } => width,
            Envelope::Sinc { length } => 2.0 * std::f64::consts::PI / length,
        }
    }

    pub fn is_sign_changing(&self) -> bool {
        matches!(self, Envelope::Sinc { .. })
    }
}

/// S(k₁, k₂, k) = s₀ · envelope(k₁ + k₂ − k − offset).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingModel {
    strength: f64,
    envelope: Envelope,
    offset: f64,
}

impl CouplingModel {
    pub fn new(strength: f64, envelope: Envelope, offset: f64) -> Result<Self> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(Error::param("coupling.s0", format!("must be positive, got {strength}")));
        }
        match envelope {
            Envelope::Gaussian { width } if !(width > 0.0 && width.is_finite()) => {
                return Err(Error::param("coupling.width", "gaussian width must be positive"));
            }
            Envelope::Sinc { length } if !(length > 0.0 && length.is_finite()) => {
                return Err(Error::param("coupling.width", "sinc length must be positive"));
            }
            _ => {}
        }
        if !offset.is_finite() {
            return Err(Error::param("coupling.offset", "must be finite"));
        }
        Ok(Self {
            strength,
            envelope,
            offset,
        })
    }

    /// Zero-strength coupling, for the no-nonlinearity baseline only.
    pub fn disabled() -> Self {
        Self {
            strength: 0.0,
            envelope: Envelope::Constant,
            offset: 0.0,
        }
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Coupling as a function of the summed mismatch k₁ + k₂ − k.
    pub fn of_mismatch(&self, mismatch: f64) -> f64 {
        self.strength * self.envelope.eval(mismatch - self.offset)
    }

    pub fn eval(&self, k1: f64, k2: f64, k: f64) -> f64 {
        self.of_mismatch(k1 + k2 - k)
    }
}

/// Nonlinear interaction interval [t₀, t₁] = [−T, T].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionWindow {
    half_width: f64,
}

impl InteractionWindow {
    pub fn symmetric(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("window.T", format!("must be positive, got {half_width}")));
        }
        Ok(Self { half_width })
    }

    /// Window for a waveguide of length `length` traversed at `v_in`, so that
    /// t₁ − t₀ = L / v_in.
    pub fn from_length(length: f64, v_in: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::param("window.L", format!("must be positive, got {length}")));
        }
        if !(v_in > 0.0 && v_in.is_finite()) {
            return Err(Error::param("window.v_in", format!("must be positive, got {v_in}")));
        }
        Self::symmetric(length / (2.0 * v_in))
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn t0(&self) -> f64 {
        -self.half_width
    }

    pub fn t1(&self) -> f64 {
        self.half_width
    }

    pub fn duration(&self) -> f64 {
        self.t1() - self.t0()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0() && t <= self.t1()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideModel {
    pub dispersion: DispersionRelation,
    pub loss: LossProfile,
    pub coupling: CouplingModel,
    pub window: InteractionWindow,
    pub units: UnitMode,
}

impl WaveguideModel {
    pub fn new(
        dispersion: DispersionRelation,
        loss: LossProfile,
        coupling: CouplingModel,
        window: InteractionWindow,
        units: UnitMode,
    ) -> Self {
        Self {
            dispersion,
            loss,
            coupling,
            window,
            units,
        }
    }

    pub fn omega(&self, band: Band, k: f64) -> f64 {
        self.dispersion.omega(band, k)
    }

    pub fn loss_rate(&self, band: Band, k: f64) -> f64 {
        self.loss.eval(band, k)
    }

    pub fn coupling(&self, k1: f64, k2: f64, k: f64) -> f64 {
        self.coupling.eval(k1, k2, k)
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar()
    }

    /// Energy mismatch ω_F(k₁) + ω_F(k₂) − ω_SH(k).
    pub fn detuning(&self, k1: f64, k2: f64, k: f64) -> f64 {
        self.omega(Band::F, k1) + self.omega(Band::F, k2) - self.omega(Band::SH, k)
    }

    pub fn with_loss(&self, loss: LossProfile) -> Self {
        Self {
            loss,
            ..self.clone()
        }
    }
}

pub fn eval_dispersion(model: &WaveguideModel, band: Band, k: f64) -> f64 {
    model.omega(band, k)
}

pub fn eval_loss(model: &WaveguideModel, band: Band, k: f64) -> f64 {
    model.loss_rate(band, k)
}

pub fn eval_coupling(model: &WaveguideModel, k1: f64, k2: f64, k: f64) -> f64 {
    model.coupling(k1, k2, k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveformShape {
    /// |φ|² has standard deviation `sigma` in k.
    Gaussian { sigma: f64 },
    /// All weight in the single grid bin at the center.
    GridDelta,
}

/// Normalized spectral pulse shape sampled on its band's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    band: Band,
    center: f64,
    shape: WaveformShape,
    grid: Grid1D,
    scale: f64,
    samples: Vec<Complex64>,
}

/// Gaussians must reach this many σ inside the grid on both sides.
pub const GAUSSIAN_COVERAGE: f64 = 6.0;

impl Waveform {
    pub fn new(band: Band, center: f64, shape: WaveformShape, grid: Grid1D) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::param("waveform.center", "must be finite"));
        }
        match shape {
            WaveformShape::Gaussian { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::param("waveform.width", format!("sigma must be positive, got {sigma}")));
                }
                if center - GAUSSIAN_COVERAGE * sigma < grid.min()
                    || center + GAUSSIAN_COVERAGE * sigma > grid.max()
                {
                    return Err(Error::param(
                        "grids",
                        format!(
                            "{band} grid [{}, {}] must extend {GAUSSIAN_COVERAGE} sigma = {} beyond the waveform center {center}",
                            grid.min(),
                            grid.max(),
                            GAUSSIAN_COVERAGE * sigma
                        ),
                    ));
                }
                let raw: Vec<f64> = grid.points().map(|k| gaussian_profile(k, center, sigma)).collect();
                let norm2: f64 = raw
                    .iter()
                    .enumerate()
                    .map(|(i, g)| g * g * grid.weight(i))
                    .sum();
                let scale = norm2.sqrt().recip();
                let samples = raw.iter().map(|g| Complex64::new(g * scale, 0.0)).collect();
                Ok(Self {
                    band,
                    center,
                    shape,
                    grid,
                    scale,
                    samples,
                })
            }
            WaveformShape::GridDelta => {
                let idx = grid.require_index(center)?;
                if idx == 0 || idx + 1 == grid.len() {
                    return Err(Error::param(
                        "waveform.center",
                        format!("grid-delta waveform must sit on an interior node, got k = {center}"),
                    ));
                }
                let scale = grid.delta().sqrt().recip();
                let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
                samples[idx] = Complex64::new(scale, 0.0);
                Ok(Self {
                    band,
                    center: grid.point(idx),
                    shape,
                    grid,
                    scale,
                    samples,
                })
            }
        }
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn shape(&self) -> WaveformShape {
        self.shape
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Spectral width; zero for a grid delta.
    pub fn width(&self) -> f64 {
        match self.shape {
            WaveformShape::Gaussian { sigma } => sigma,
            WaveformShape::GridDelta => 0.0,
        }
    }

    pub fn eval(&self, k: f64) -> Complex64 {
        match self.shape {
            WaveformShape::Gaussian { sigma } => {
                Complex64::new(self.scale * gaussian_profile(k, self.center, sigma), 0.0)
            }
            WaveformShape::GridDelta => {
                if (k - self.center).abs() < 0.5 * self.grid.delta() {
                    Complex64::new(self.scale, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Grid quadrature of |φ|².
    pub fn norm_squared(&self) -> f64 {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| s.norm_sqr() * self.grid.weight(i))
            .sum()
    }

    /// Grid nodes carrying nonzero weight, with trapezoid weight × φ.
    pub fn weighted_support(&self) -> Vec<(usize, Complex64)> {
        self.samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.norm_sqr() > 0.0)
            .map(|(i, s)| (i, s * self.grid.weight(i)))
            .collect()
    }

    /// The same pulse resampled on another grid of the same band.
    pub fn resampled(&self, grid: Grid1D) -> Result<Self> {
        Self::new(self.band, self.center, self.shape, grid)
    }
}

fn gaussian_profile(k: f64, center: f64, sigma: f64) -> f64 {
    let x = (k - center) / sigma;
    (-0.25 * x * x).exp()
}

/// Coherent state |z⟩ in the mode defined by `waveform`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentInput {
    pub waveform: Waveform,
    pub z: Complex64,
}

impl CoherentInput {
    pub fn new(waveform: Waveform, z: Complex64) -> Self {
        Self { waveform, z }
    }

    pub fn band(&self) -> Band {
        self.waveform.band()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.z.norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model_with(dispersion: DispersionRelation, loss: LossProfile, coupling: CouplingModel) -> WaveguideModel {
        WaveguideModel::new(
            dispersion,
            loss,
            coupling,
            InteractionWindow::symmetric(1.0).unwrap(),
            UnitMode::Nondimensional,
        )
    }

    fn g1_like() -> WaveguideModel {
        model_with(
            DispersionRelation::uniform(1.0).unwrap(),
            LossProfile::lossless(),
            CouplingModel::new(1.0, Envelope::Gaussian { width: 0.7 }, 0.3).unwrap(),
        )
    }

    #[test]
    fn dispersion_is_linear_about_center() {
        let f = BandDispersion { k0: 1.5, omega0: 7.0, group_velocity: 3.0 };
        let sh = BandDispersion { k0: 1.0, omega0: 10.0, group_velocity: 2.0 };
        let m = model_with(
            DispersionRelation::new(f, sh).unwrap(),
            LossProfile::lossless(),
            CouplingModel::new(1.0, Envelope::Constant, 0.0).unwrap(),
        );
        assert_eq!(eval_dispersion(&m, Band::F, 1.5), 7.0);
        assert_eq!(eval_dispersion(&m, Band::SH, 3.0), 14.0);
        let unit = model_with(
            DispersionRelation::uniform(1.0).unwrap(),
            LossProfile::lossless(),
            CouplingModel::new(1.0, Envelope::Constant, 0.0).unwrap(),
        );
        assert_eq!(eval_dispersion(&unit, Band::F, 2.5), 2.5);
    }

    #[test]
    fn dispersion_rejects_nonpositive_velocity() {
        let ok = BandDispersion { k0: 0.0, omega0: 0.0, group_velocity: 1.0 };
        let bad = BandDispersion { group_velocity: 0.0, ..ok };
        let err = DispersionRelation::new(bad, ok).unwrap_err();
        assert!(err.to_string().contains("dispersion.v_F"), "{err}");
        let err = DispersionRelation::new(ok, BandDispersion { group_velocity: -2.0, ..ok }).unwrap_err();
        assert!(err.to_string().contains("dispersion.v_SH"), "{err}");
    }

    #[test]
    fn loss_forms() {
        let lossless = LossProfile::lossless();
        for k in [-3.0, 0.0, 8.0] {
            assert_eq!(lossless.eval(Band::F, k), 0.0);
        }
        let table = BandLoss::table(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(table.eval(1.0), 2.0);
        assert_eq!(table.eval(5.0), 3.0);
        assert_eq!(table.eval(-5.0), 1.0);
        assert_eq!(table.eval(2.0), 3.0);
        assert!(BandLoss::table(vec![(0.0, 1.0), (0.0, 3.0)]).is_err());
        assert!(BandLoss::table(vec![(1.0, 1.0), (0.0, 3.0)]).is_err());
        assert!(BandLoss::table(vec![(0.0, -1.0)]).is_err());
        assert!(BandLoss::constant(-0.1).is_err());
    }

    #[test]
    fn attenuation_coefficient() {
        assert_eq!(alpha_from_beta(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(alpha_from_beta(0.5, 1.0).unwrap(), 1.0);
        assert_eq!(alpha_from_beta(3.0, 2.0).unwrap(), 3.0);
        assert!(matches!(alpha_from_beta(1.0, 0.0), Err(Error::InvalidParameter { .. })));
        assert!(alpha_from_beta(1.0, -1.0).is_err());
    }

    #[test]
    fn coupling_examples() {
        let c = CouplingModel::new(1.0, Envelope::Constant, 0.0).unwrap();
        assert_eq!(c.eval(0.3, -2.0, 9.0), 1.0);
        let g = g1_like();
        // k1 + k2 - k equal to the offset sits on the envelope peak
        assert_eq!(eval_coupling(&g, 1.0, 0.3, 1.0), 1.0);
        assert_eq!(eval_coupling(&g, 0.2, 1.7, 0.5), eval_coupling(&g, 1.7, 0.2, 0.5));
        assert!(CouplingModel::new(0.0, Envelope::Constant, 0.0).is_err());
        assert!(CouplingModel::new(1.0, Envelope::Gaussian { width: 0.0 }, 0.0).is_err());
    }

    #[test]
    fn sinc_envelope_changes_sign() {
        let e = Envelope::Sinc { length: 2.0 };
        assert_eq!(e.eval(0.0), 1.0);
        assert!(e.eval(4.0) < 0.0);
        assert!(e.eval(std::f64::consts::PI).abs() < 1e-15);
        assert!(e.is_sign_changing());
    }

    #[test]
    fn window_from_length() {
        let w = InteractionWindow::from_length(3e-3, 2e8).unwrap();
        assert_eq!(w.t1() - w.t0(), 3e-3 / 2e8);
        assert_eq!(w.duration(), 2.0 * w.half_width());
        assert!(InteractionWindow::from_length(1.0, 0.0).is_err());
        assert!(InteractionWindow::symmetric(-1.0).is_err());
    }

    #[test]
    fn gaussian_waveform_normalized() {
        let grid = Grid1D::new(-12.0, 12.0, 97).unwrap();
        let w = Waveform::new(Band::F, -2.0, WaveformShape::Gaussian { sigma: 1.0 }, grid).unwrap();
        assert!((w.norm_squared() - 1.0).abs() < 1e-6);
        // narrower than a bin still normalizes on the grid
        let w = Waveform::new(Band::F, 0.0, WaveformShape::Gaussian { sigma: 0.05 }, grid).unwrap();
        assert!((w.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_waveform_needs_coverage() {
        let grid = Grid1D::new(-5.0, 5.0, 41).unwrap();
        let err = Waveform::new(Band::F, 0.0, WaveformShape::Gaussian { sigma: 1.0 }, grid).unwrap_err();
        assert!(err.to_string().contains("grids"), "{err}");
    }

    #[test]
    fn grid_delta_waveform() {
        let grid = Grid1D::new(-2.0, 2.0, 17).unwrap();
        let w = Waveform::new(Band::SH, 0.5, WaveformShape::GridDelta, grid).unwrap();
        let nonzero: Vec<_> = w.samples().iter().filter(|s| s.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert!((nonzero[0].re - 1.0 / 0.25f64.sqrt()).abs() < 1e-15);
        assert!((w.norm_squared() - 1.0).abs() < 1e-15);
        assert!(Waveform::new(Band::SH, 0.1, WaveformShape::GridDelta, grid).is_err());
        assert!(Waveform::new(Band::SH, 2.0, WaveformShape::GridDelta, grid).is_err());
    }

    #[test]
    fn coherent_input_mean_number() {
        let grid = Grid1D::new(-2.0, 2.0, 17).unwrap();
        let w = Waveform::new(Band::F, 0.0, WaveformShape::GridDelta, grid).unwrap();
        let c = CoherentInput::new(w, Complex64::new(0.3, -0.4));
        assert!((c.mean_photon_number() - 0.25).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn coupling_exchange_symmetry(a in -50.0..50.0f64, b in -50.0..50.0f64, c in -50.0..50.0f64) {
            let m = g1_like();
            prop_assert_eq!(eval_coupling(&m, a, b, c), eval_coupling(&m, b, a, c));
            let sinc = model_with(
                DispersionRelation::uniform(1.0).unwrap(),
                LossProfile::lossless(),
                CouplingModel::new(2.0, Envelope::Sinc { length: 3.0 }, -1.0).unwrap(),
            );
            prop_assert_eq!(eval_coupling(&sinc, a, b, c), eval_coupling(&sinc, b, a, c));
        }

        #[test]
        fn nonsinc_coupling_nonnegative(a in -50.0..50.0f64, b in -50.0..50.0f64, c in -50.0..50.0f64) {
            prop_assert!(eval_coupling(&g1_like(), a, b, c) >= 0.0);
        }

        #[test]
        fn table_loss_nonnegative(
            rows in proptest::collection::vec((0.01..5.0f64, 0.0..3.0f64), 1..8),
            k in -20.0..40.0f64,
        ) {
            let mut x = -3.0;
            let knots: Vec<(f64, f64)> = rows.iter().map(|(dx, b)| { x += dx; (x, *b) }).collect();
            let loss = BandLoss::table(knots).unwrap();
            prop_assert!(loss.eval(k) >= 0.0);
        }

        #[test]
        fn window_length_consistency(l in 1e-6..10.0f64, v in 1e3..3e8f64) {
            let w = InteractionWindow::from_length(l, v).unwrap();
            let expected = l / v;
            prop_assert!(((w.t1() - w.t0()) - expected).abs() <= f64::EPSILON * expected);
        }

        #[test]
        fn gaussian_normalization(center in -2.0..2.0f64, sigma in 0.01..1.0f64, n in 21usize..300) {
            let grid = Grid1D::new(-10.0, 10.0, n).unwrap();
            let w = Waveform::new(Band::F, center, WaveformShape::Gaussian { sigma }, grid).unwrap();
            prop_assert!((w.norm_squared() - 1.0).abs() < 1e-6);
        }
    }
}
