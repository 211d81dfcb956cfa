//! Quantum-classical number ratios, the loss integrals behind them, and the
//! Δ± discrepancy curve.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::ProcessInputs;
use crate::model::{Band, CoherentInput, Process, Waveform, WaveguideModel};
use crate::observables::{
    dfg_spectrum, pair_density, sfg_spectrum, spdc_biphoton, BiphotonAmplitude, Simulation, SpectralAmplitude,
};

/// Pair densities below this make a ratio undefined.
pub const PAIR_DENSITY_FLOOR: f64 = 1e-30;

/// A field is spectrally narrow when its width is at most this fraction of
/// the narrowest model feature.
pub const NARROWNESS_FRACTION: f64 = 1.0 / 20.0;

const SERIES_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub process: Process,
    /// Classical single-photon number over quantum pair number, from full spectra.
    pub ratio: f64,
    /// Lossless prediction.
    pub ideal: f64,
    /// `ratio / ideal`.
    pub correction: f64,
    /// Narrow-field closed-form estimate of `ratio`.
    pub approximation: f64,
    /// Set when the closed form's equal-velocity assumption does not hold.
    pub approximation_flagged: bool,
    pub classical_density: f64,
    pub pair_density: f64,
    pub ks: f64,
    pub ki: f64,
    pub kp: Option<f64>,
    pub dk_f: f64,
    pub dk_sh: f64,
    pub t_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPoint {
    /// β/β_SH.
    pub beta_ratio: f64,
    pub delta_minus: f64,
    pub delta_plus: f64,
    /// β_SH² |Δ₋ − Δ₊|.
    pub scaled_difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCurve {
    pub beta_sh: f64,
    pub t: f64,
    pub points: Vec<DeltaPoint>,
}

/// ∫_{−T}^{T} e^{ct} dt for complex c.
fn window_exponential(c: Complex64, t: f64) -> Complex64 {
    let ct = c * t;
    if ct.norm() < SERIES_CUTOFF {
        Complex64::new(2.0 * t, 0.0) * (1.0 + ct * ct / 6.0)
    } else {
        2.0 * ct.sinh() / c
    }
}

/// |∫_{−T}^{T}dt ∫dk φ_p(k) S(ks,ki,k;t) e^{xt}|², with the time integral
/// done in closed form on each k node.
pub fn i_integral(model: &WaveguideModel, pump: &Waveform, ks: f64, ki: f64, x: f64) -> f64 {
    let t = model.window.half_width();
    let grid = pump.grid();
    let total: Complex64 = pump
        .weighted_support()
        .into_iter()
        .map(|(j, w)| {
            let k = grid.point(j);
            let c = Complex64::new(x, model.detuning(ks, ki, k));
            w * model.coupling(ks, ki, k) * window_exponential(c, t)
        })
        .sum();
    total.norm_sqr()
}

/// Δ(x) = |∫_{−T}^{T} e^{xt} dt|² = 4 sinh²(xT)/x².
pub fn delta_pm(x: f64, t: f64) -> f64 {
    let u = x * t;
    if u.abs() < SERIES_CUTOFF {
        4.0 * t * t * (1.0 + u * u / 3.0)
    } else {
        let s = u.sinh() / x;
        4.0 * s * s
    }
}

/// β_SH² |Δ(−β_SH) − Δ(2β − β_SH)| for equal signal and idler losses β,
/// at each β/β_SH in `sweep`.
pub fn figure2_curve(beta_sh: f64, t: f64, sweep: &[f64]) -> Result<DeltaCurve> {
    if !(beta_sh >= 0.0 && beta_sh.is_finite()) {
        return Err(Error::param("beta_sh", format!("must be a finite non-negative rate, got {beta_sh}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("T", format!("must be positive, got {t}")));
    }
    if let Some(bad) = sweep.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::param("sweep", format!("values must be finite and non-negative, got {bad}")));
    }
    let points = sweep
        .par_iter()
        .map(|&r| {
            let beta = r * beta_sh;
            let delta_minus = delta_pm(-beta_sh, t);
            let delta_plus = delta_pm(2.0 * beta - beta_sh, t);
            DeltaPoint {
                beta_ratio: r,
                delta_minus,
                delta_plus,
                scaled_difference: beta_sh * beta_sh * (delta_minus - delta_plus).abs(),
            }
        })
        .collect();
    Ok(DeltaCurve { beta_sh, t, points })
}

/// `n` evenly spaced values from `min` to `max` inclusive; a single value when `n == 1`.
pub fn linear_sweep(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("sweep", "needs at least one point"));
    }
    if !(min.is_finite() && max.is_finite()) || max < min {
        return Err(Error::param("sweep", format!("bounds must satisfy min <= max, got {min}:{max}")));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    let span = max - min;
    Ok((0..n).map(|i| min + span * i as f64 / (n - 1) as f64).collect())
}

fn checked_pair_density(biphoton: &BiphotonAmplitude, ks: f64, ki: f64) -> Result<f64> {
    let n = pair_density(biphoton, ks, ki)?;
    if n < PAIR_DENSITY_FLOOR {
        return Err(Error::UndefinedRatio {
            pair_density: n,
            threshold: PAIR_DENSITY_FLOOR,
        });
    }
    Ok(n)
}

fn equal_velocities(model: &WaveguideModel) -> bool {
    model.dispersion.band(Band::F).group_velocity == model.dispersion.band(Band::SH).group_velocity
}

fn only(inputs: &ProcessInputs, process: Process) -> Result<&[CoherentInput]> {
    if inputs.process() != process {
        return Err(Error::InvalidProcess {
            process,
            reason: format!("got {} inputs", inputs.process()),
        });
    }
    Ok(inputs.inputs())
}

/// R^DFG from an already computed idler spectrum and biphoton amplitude.
pub fn dfg_ratio_from(
    sim: &Simulation,
    spdc: &ProcessInputs,
    dfg: &ProcessInputs,
    spectrum: &SpectralAmplitude,
    biphoton: &BiphotonAmplitude,
    ks: f64,
    ki: f64,
) -> Result<RatioReport> {
    let [pump] = only(spdc, Process::Spdc)? else {
        unreachable!("validated at construction")
    };
    let [seed, _] = only(dfg, Process::Dfg)? else {
        unreachable!("validated at construction")
    };
    let model = &sim.model;
    let (dk_f, dk_sh) = (sim.grid(Band::F).delta(), sim.grid(Band::SH).delta());
    let n_pair = checked_pair_density(biphoton, ks, ki)?;
    let n_dfg = spectrum.amplitude(ki)?.norm_sqr();
    let ratio = n_dfg * dk_f / (n_pair * dk_f * dk_f);
    let ideal = seed.z.norm_sqr();

    let (beta_s, beta_i) = (model.loss_rate(Band::F, ks), model.loss_rate(Band::F, ki));
    let beta_sh = model.loss_rate(Band::SH, pump.waveform.center());
    let w = &pump.waveform;
    let approximation = ideal * i_integral(model, w, ks, ki, beta_i - beta_s - beta_sh)
        / i_integral(model, w, ks, ki, beta_i + beta_s - beta_sh);

    Ok(RatioReport {
        process: Process::Dfg,
        ratio,
        ideal,
        correction: ratio / ideal,
        approximation,
        approximation_flagged: !equal_velocities(model),
        classical_density: n_dfg,
        pair_density: n_pair,
        ks,
        ki,
        kp: None,
        dk_f,
        dk_sh,
        t_nodes: spectrum.t_nodes.max(biphoton.t_nodes),
    })
}

/// R^SFG from an already computed SH spectrum and biphoton amplitude.
#[allow(clippy::too_many_arguments)]
pub fn sfg_ratio_from(
    sim: &Simulation,
    spdc: &ProcessInputs,
    sfg: &ProcessInputs,
    spectrum: &SpectralAmplitude,
    biphoton: &BiphotonAmplitude,
    ks: f64,
    ki: f64,
    kp: f64,
) -> Result<RatioReport> {
    let [pump] = only(spdc, Process::Spdc)? else {
        unreachable!("validated at construction")
    };
    let [a, b] = only(sfg, Process::Sfg)? else {
        unreachable!("validated at construction")
    };
    let model = &sim.model;
    let (dk_f, dk_sh) = (sim.grid(Band::F).delta(), sim.grid(Band::SH).delta());
    let n_pair = checked_pair_density(biphoton, ks, ki)?;
    let n_sfg = spectrum.amplitude(kp)?.norm_sqr();
    let ratio = n_sfg * dk_sh / (n_pair * dk_f * dk_f);
    let ideal = a.z.norm_sqr() * b.z.norm_sqr() / pump.z.norm_sqr();

    // the pump-independent time integral at (ks, ki, kp), weighted by the
    // pump's spectral area so that a narrow pump gives exactly one
    let x = model.loss_rate(Band::F, ks) + model.loss_rate(Band::F, ki) - model.loss_rate(Band::SH, kp);
    let c = Complex64::new(x, model.detuning(ks, ki, kp));
    let point = (model.coupling(ks, ki, kp) * window_exponential(c, model.window.half_width())).norm_sqr();
    let area: Complex64 = pump.waveform.weighted_support().into_iter().map(|(_, w)| w).sum();
    let fraction = point * area.norm_sqr() / i_integral(model, &pump.waveform, ks, ki, x);

    Ok(RatioReport {
        process: Process::Sfg,
        ratio,
        ideal,
        correction: ratio / ideal,
        approximation: ideal * fraction,
        approximation_flagged: false,
        classical_density: n_sfg,
        pair_density: n_pair,
        ks,
        ki,
        kp: Some(kp),
        dk_f,
        dk_sh,
        t_nodes: spectrum.t_nodes.max(biphoton.t_nodes),
    })
}

/// R^DFG = N_DFG(ki) δk / (N_pair(ks,ki) δk²), computing both spectra.
pub fn ratio_dfg(sim: &Simulation, spdc: &ProcessInputs, dfg: &ProcessInputs, ks: f64, ki: f64) -> Result<RatioReport> {
    let biphoton = spdc_biphoton(sim, spdc)?;
    let spectrum = dfg_spectrum(sim, dfg)?;
    dfg_ratio_from(sim, spdc, dfg, &spectrum, &biphoton, ks, ki)
}

/// R^SFG = N_SFG(kp) δk_p / (N_pair(ks,ki) δk²), computing both spectra.
pub fn ratio_sfg(
    sim: &Simulation,
    spdc: &ProcessInputs,
    sfg: &ProcessInputs,
    ks: f64,
    ki: f64,
    kp: f64,
) -> Result<RatioReport> {
    let biphoton = spdc_biphoton(sim, spdc)?;
    let spectrum = sfg_spectrum(sim, sfg)?;
    sfg_ratio_from(sim, spdc, sfg, &spectrum, &biphoton, ks, ki, kp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NarrownessWarning {
    pub role: String,
    pub width: f64,
    pub limit: f64,
    pub feature: &'static str,
}

impl std::fmt::Display for NarrownessWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} width {} exceeds {} (1/20 of the {} scale); narrow-field approximations may not hold",
            self.role, self.width, self.limit, self.feature
        )
    }
}

/// Narrowest model scales a spectrally narrow field must resolve: the
/// phase-matching envelope, loss-table variation, and the window phase
/// π/(vT) across which energy mismatch dephases.
pub fn narrow_features(model: &WaveguideModel) -> Vec<(&'static str, f64)> {
    let v_max = [Band::F, Band::SH]
        .iter()
        .map(|b| model.dispersion.band(*b).group_velocity.abs())
        .fold(0.0, f64::max);
    let features = [
        ("phase-matching envelope", model.coupling.envelope().feature_width()),
        ("F loss profile", model.loss.band(Band::F).feature_width()),
        ("SH loss profile", model.loss.band(Band::SH).feature_width()),
        ("interaction-window phase", std::f64::consts::PI / (v_max * model.window.half_width())),
    ];
    features.into_iter().filter(|(_, w)| w.is_finite()).collect()
}

pub fn narrowness_warnings(model: &WaveguideModel, roles: &[(&str, &Waveform)]) -> Vec<NarrownessWarning> {
    let features = narrow_features(model);
    let mut out = Vec::new();
    for (role, waveform) in roles {
        let width = waveform.width();
        for &(feature, scale) in &features {
            let limit = scale * NARROWNESS_FRACTION;
            if width > limit {
                out.push(NarrownessWarning {
                    role: role.to_string(),
                    width,
                    limit,
                    feature,
                });
            }
        }
    }
    out
}
