//! Generated spectra, biphoton amplitudes and photon-number densities.
//!
//! Each output is the time integral over the interaction window of a kernel
//! from [`crate::kernels`] times the decay of the generated field from t to
//! t₁, evaluated on the output band's grid. The batched evaluation relies on
//! the linear dispersion: every phase and decay factor separates by mode, and
//! the coupling depends on its first two arguments only through their sum,
//! which on a uniform F grid is indexed by `i1 + i2`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::ProcessInputs;
use crate::model::{Band, CoherentInput, Envelope, Process, WaveguideModel};
use crate::quadrature::{refine_t_window, GaussLegendre, Grid1D, QuadratureConfig, TimeIntegral};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Phase-matching envelopes must reach this many feature widths inside the
/// range of mismatches the grids can represent.
pub const ENVELOPE_COVERAGE: f64 = 6.0;

/// A waveguide model together with its discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub model: WaveguideModel,
    f_grid: Grid1D,
    sh_grid: Grid1D,
    pub quadrature: QuadratureConfig,
}

impl Simulation {
    pub fn new(model: WaveguideModel, f_grid: Grid1D, sh_grid: Grid1D, quadrature: QuadratureConfig) -> Result<Self> {
        let envelope = model.coupling.envelope();
        if !matches!(envelope, Envelope::Constant) {
            let reach = ENVELOPE_COVERAGE * envelope.feature_width();
            let center = model.coupling.offset();
            let lo = 2.0 * f_grid.min() - sh_grid.max();
            let hi = 2.0 * f_grid.max() - sh_grid.min();
            if center - reach < lo || center + reach > hi {
                return Err(Error::param(
                    "grids",
                    format!(
                        "mismatch range [{lo}, {hi}] must cover the phase-matching center {center} ± {reach}"
                    ),
                ));
            }
        }
        Ok(Self {
            model,
            f_grid,
            sh_grid,
            quadrature,
        })
    }

    pub fn grid(&self, band: Band) -> &Grid1D {
        match band {
            Band::F => &self.f_grid,
            Band::SH => &self.sh_grid,
        }
    }

    pub fn with_model(&self, model: WaveguideModel) -> Result<Self> {
        Self::new(model, self.f_grid, self.sh_grid, self.quadrature)
    }

    pub fn with_grids(&self, f_grid: Grid1D, sh_grid: Grid1D) -> Result<Self> {
        Self::new(self.model.clone(), f_grid, sh_grid, self.quadrature)
    }

    fn check_input(&self, input: &CoherentInput) -> Result<()> {
        if input.waveform.grid() != self.grid(input.band()) {
            return Err(Error::param(
                "waveform",
                format!("{} waveform is not sampled on the simulation's {} grid", input.band(), input.band()),
            ));
        }
        Ok(())
    }

    /// Coupling over (i1 + i2, j): F index sum and SH index.
    fn mismatch_table(&self) -> Vec<Vec<f64>> {
        let f = &self.f_grid;
        let sh = &self.sh_grid;
        let coupling = &self.model.coupling;
        (0..2 * f.len() - 1)
            .map(|s| {
                let ksum = 2.0 * f.min() + s as f64 * f.delta();
                sh.points().map(|k| coupling.of_mismatch(ksum - k)).collect()
            })
            .collect()
    }

    fn time_integrate<F>(&self, eval: F) -> Result<TimeIntegral<Vec<Complex64>>>
    where
        F: Fn(&GaussLegendre, f64, f64) -> Result<Vec<Complex64>>,
    {
        refine_t_window(&self.model.window, &self.quadrature, eval)
    }
}

/// Generated field amplitude A(k) on one band's grid; |A|² is photons per unit k.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    pub band: Band,
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub t_nodes: usize,
    pub achieved_tolerance: Option<f64>,
}

impl SpectralAmplitude {
    pub fn amplitude(&self, k: f64) -> Result<Complex64> {
        Ok(self.values[self.grid.require_index(k)?])
    }

    /// Σ |A(k)|² δk.
    pub fn total_photon_number(&self) -> f64 {
        self.values.iter().map(Complex64::norm_sqr).sum::<f64>() * self.grid.delta()
    }

    pub fn densities(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().zip(self.values.iter().map(Complex64::norm_sqr))
    }
}

/// Two-photon amplitude G(k₁,k₂) = ∫dt φ(k₁,k₂;t) e^{−(β_F(k₁)+β_F(k₂))(t₁−t)}
/// on the F grid, stored row-major. The two-photon ket is (1/√2)∫∫G a†a†|vac⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonAmplitude {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub t_nodes: usize,
    pub achieved_tolerance: Option<f64>,
}

impl BiphotonAmplitude {
    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.grid.len() + i2]
    }

    pub fn amplitude(&self, k1: f64, k2: f64) -> Result<Complex64> {
        let i1 = self.grid.require_index(k1)?;
        let i2 = self.grid.require_index(k2)?;
        Ok(self.at(i1, i2))
    }

    /// ⟨a†_{k1} a†_{k2} a_{k2} a_{k1}⟩ per unit k², equal to 2|G|² for the ket
    /// above. Defined on every cell, including the diagonal.
    pub fn coincidence_density_at(&self, i1: usize, i2: usize) -> f64 {
        2.0 * self.at(i1, i2).norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberDensityReport {
    /// N_sing^DFG at the idler, photons per unit k.
    pub dfg_single: Option<f64>,
    /// N_sing^SFG at the pump wavenumber, photons per unit k.
    pub sfg_single: Option<f64>,
    /// N_pair^SPDC at (signal, idler), pairs per unit k².
    pub spdc_pair: Option<f64>,
}

impl NumberDensityReport {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        [self.dfg_single, self.sfg_single, self.spdc_pair].into_iter().flatten()
    }

    /// Largest relative difference over densities present in both reports.
    pub fn max_relative_change(&self, other: &Self) -> f64 {
        [
            (self.dfg_single, other.dfg_single),
            (self.sfg_single, other.sfg_single),
            (self.spdc_pair, other.spdc_pair),
        ]
        .into_iter()
        .filter_map(|pair| match pair {
            (Some(a), Some(b)) => Some(relative_difference(a, b)),
            _ => None,
        })
        .fold(0.0, f64::max)
    }
}

pub(crate) fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Weighted waveform samples on their support, with per-node phase and
/// input-decay factors for time `t` applied by `factor`.
/// (grid index, weighted value) over a waveform's support.
type Support = Vec<(usize, Complex64)>;

fn support_at<F>(input: &CoherentInput, conjugate: bool, factor: F) -> Support
where
    F: Fn(f64) -> Complex64,
{
    let grid = input.waveform.grid();
    input
        .waveform
        .weighted_support()
        .into_iter()
        .map(|(i, w)| {
            let w = if conjugate { w.conj() } else { w };
            (i, w * factor(grid.point(i)))
        })
        .collect()
}

fn check_finite(values: &[Complex64], t: f64) -> Result<()> {
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NumericalDomain { abscissa: t });
    }
    Ok(())
}

/// A(k) = ∫dt Φ_DFG(k;t) e^{−β_F(k)(t₁−t)} on the F grid.
pub fn dfg_spectrum(sim: &Simulation, inputs: &ProcessInputs) -> Result<SpectralAmplitude> {
    let [seed, pump] = inputs.expect(Process::Dfg)? else {
        unreachable!("validated at construction")
    };
    sim.check_input(seed)?;
    sim.check_input(pump)?;
    let model = &sim.model;
    let f = sim.f_grid;
    let table = sim.mismatch_table();
    let prefactor = 2.0 * I * seed.z.conj() * pump.z / model.hbar();
    let (t0, t1) = (model.window.t0(), model.window.t1());

    let result = sim.time_integrate(|rule, _, _| {
        let nodes: Vec<(f64, f64)> = rule.mapped(t0, t1).collect();
        // per node: seed terms and the pump sum reduced against the coupling
        let per_t: Vec<(Support, Vec<Complex64>)> = nodes
            .par_iter()
            .map(|&(t, _)| {
                let elapsed = t - t0;
                let u = support_at(seed, true, |k1| {
                    Complex64::from_polar(1.0, model.omega(Band::F, k1) * t)
                        * (-model.loss_rate(Band::F, k1) * elapsed).exp()
                });
                let v = support_at(pump, false, |k2| {
                    Complex64::from_polar(1.0, -model.omega(Band::SH, k2) * t)
                        * (-model.loss_rate(Band::SH, k2) * elapsed).exp()
                });
                let reduced: Vec<Complex64> = table
                    .iter()
                    .map(|row| v.iter().map(|&(j, vj)| vj * row[j]).sum())
                    .collect();
                (u, reduced)
            })
            .collect();
        let values: Vec<Complex64> = (0..f.len())
            .into_par_iter()
            .map(|i| {
                let k = f.point(i);
                let omega = model.omega(Band::F, k);
                let beta = model.loss_rate(Band::F, k);
                let mut acc = ZERO;
                for ((t, w), (u, reduced)) in nodes.iter().zip(&per_t) {
                    let inner: Complex64 = u.iter().map(|&(j1, uj)| uj * reduced[i + j1]).sum();
                    acc += inner * Complex64::from_polar(*w, omega * t) * (-beta * (t1 - t)).exp();
                }
                acc * prefactor
            })
            .collect();
        check_finite(&values, t0)?;
        Ok(values)
    })?;
    Ok(SpectralAmplitude {
        band: Band::F,
        grid: f,
        values: result.value,
        t_nodes: result.nodes,
        achieved_tolerance: result.achieved_tolerance,
    })
}

/// A(k) = ∫dt Φ_SFG(k;t) e^{−β_SH(k)(t₁−t)} on the SH grid.
pub fn sfg_spectrum(sim: &Simulation, inputs: &ProcessInputs) -> Result<SpectralAmplitude> {
    let [a, b] = inputs.expect(Process::Sfg)? else {
        unreachable!("validated at construction")
    };
    sim.check_input(a)?;
    sim.check_input(b)?;
    let model = &sim.model;
    let f = sim.f_grid;
    let sh = sim.sh_grid;
    let table = sim.mismatch_table();
    let prefactor = 2.0 * I * a.z * b.z / model.hbar();
    let (t0, t1) = (model.window.t0(), model.window.t1());

    let result = sim.time_integrate(|rule, _, _| {
        let nodes: Vec<(f64, f64)> = rule.mapped(t0, t1).collect();
        // per node: the two inputs convolved onto index sums i1 + i2
        let per_t: Vec<Vec<Complex64>> = nodes
            .par_iter()
            .map(|&(t, _)| {
                let elapsed = t - t0;
                let factor = |k: f64| {
                    Complex64::from_polar(1.0, -model.omega(Band::F, k) * t)
                        * (-model.loss_rate(Band::F, k) * elapsed).exp()
                };
                let ua = support_at(a, false, factor);
                let ub = support_at(b, false, factor);
                let mut conv = vec![ZERO; 2 * f.len() - 1];
                for &(i1, x) in &ua {
                    for &(i2, y) in &ub {
                        conv[i1 + i2] += x * y;
                    }
                }
                conv
            })
            .collect();
        let values: Vec<Complex64> = (0..sh.len())
            .into_par_iter()
            .map(|j| {
                let k = sh.point(j);
                let omega = model.omega(Band::SH, k);
                let beta = model.loss_rate(Band::SH, k);
                let mut acc = ZERO;
                for ((t, w), conv) in nodes.iter().zip(&per_t) {
                    let inner: Complex64 = conv
                        .iter()
                        .zip(&table)
                        .filter(|(c, _)| c.norm_sqr() > 0.0)
                        .map(|(c, row)| c * row[j])
                        .sum();
                    acc += inner * Complex64::from_polar(*w, omega * t) * (-beta * (t1 - t)).exp();
                }
                acc * prefactor
            })
            .collect();
        check_finite(&values, t0)?;
        Ok(values)
    })?;
    Ok(SpectralAmplitude {
        band: Band::SH,
        grid: sh,
        values: result.value,
        t_nodes: result.nodes,
        achieved_tolerance: result.achieved_tolerance,
    })
}

/// G(k₁,k₂) on the F grid; see [`BiphotonAmplitude`].
pub fn spdc_biphoton(sim: &Simulation, inputs: &ProcessInputs) -> Result<BiphotonAmplitude> {
    let [pump] = inputs.expect(Process::Spdc)? else {
        unreachable!("validated at construction")
    };
    sim.check_input(pump)?;
    let model = &sim.model;
    let f = sim.f_grid;
    let n = f.len();
    let table = sim.mismatch_table();
    let prefactor = std::f64::consts::SQRT_2 * I * pump.z / model.hbar();
    let (t0, t1) = (model.window.t0(), model.window.t1());

    let result = sim.time_integrate(|rule, _, _| {
        let nodes: Vec<(f64, f64)> = rule.mapped(t0, t1).collect();
        // per node: pump reduced against the coupling, and the per-mode
        // output factor e^{iω_F(k)t} e^{−β_F(k)(t₁−t)} (weight folded in once)
        let per_t: Vec<(Vec<Complex64>, Vec<Complex64>)> = nodes
            .par_iter()
            .map(|&(t, w)| {
                let p = support_at(pump, false, |k| {
                    Complex64::from_polar(1.0, -model.omega(Band::SH, k) * t)
                        * (-model.loss_rate(Band::SH, k) * (t - t0)).exp()
                });
                let reduced: Vec<Complex64> = table
                    .iter()
                    .map(|row| p.iter().map(|&(j, pj)| pj * row[j]).sum::<Complex64>() * w)
                    .collect();
                let modes: Vec<Complex64> = f
                    .points()
                    .map(|k| {
                        Complex64::from_polar(1.0, model.omega(Band::F, k) * t)
                            * (-model.loss_rate(Band::F, k) * (t1 - t)).exp()
                    })
                    .collect();
                (reduced, modes)
            })
            .collect();
        let values: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|cell| {
                let (i1, i2) = (cell / n, cell % n);
                let mut acc = ZERO;
                for (reduced, modes) in &per_t {
                    acc += reduced[i1 + i2] * (modes[i1] * modes[i2]);
                }
                acc * prefactor
            })
            .collect();
        check_finite(&values, t0)?;
        Ok(values)
    })?;
    Ok(BiphotonAmplitude {
        grid: f,
        values: result.value,
        t_nodes: result.nodes,
        achieved_tolerance: result.achieved_tolerance,
    })
}

/// Signal-idler pair density ⟨n_{ks} n_{ki}⟩ per unit k² (= 2|G(ks,ki)|²).
pub fn pair_density(biphoton: &BiphotonAmplitude, ks: f64, ki: f64) -> Result<f64> {
    let i1 = biphoton.grid.require_index(ks)?;
    let i2 = biphoton.grid.require_index(ki)?;
    if i1 == i2 {
        return Err(Error::DegenerateBin { k: ks });
    }
    Ok(biphoton.coincidence_density_at(i1, i2))
}

/// Coherent-state photon density |A(k)|² per unit k.
pub fn photon_density(spectrum: &SpectralAmplitude, k: f64) -> Result<f64> {
    Ok(spectrum.amplitude(k)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{dfg_kernel, sfg_kernel, spdc_kernel};
    use crate::model::*;

    fn sim(envelope: Envelope, loss: LossProfile, tolerance: f64) -> Simulation {
        let model = WaveguideModel::new(
            DispersionRelation::uniform(1.0).unwrap(),
            loss,
            CouplingModel::new(1.0, envelope, 0.0).unwrap(),
            InteractionWindow::symmetric(1.0).unwrap(),
            UnitMode::Nondimensional,
        );
        Simulation::new(
            model,
            Grid1D::new(-12.0, 12.0, 49).unwrap(),
            Grid1D::new(-10.0, 10.0, 41).unwrap(),
            QuadratureConfig::new(tolerance, 6, 32).unwrap(),
        )
        .unwrap()
    }

    fn input(sim: &Simulation, band: Band, center: f64, shape: WaveformShape, z: f64) -> CoherentInput {
        CoherentInput::new(
            Waveform::new(band, center, shape, *sim.grid(band)).unwrap(),
            Complex64::new(z, 0.0),
        )
    }

    fn gauss(sigma: f64) -> WaveformShape {
        WaveformShape::Gaussian { sigma }
    }

    #[test]
    fn batched_dfg_matches_pointwise_kernels() {
        let s = sim(Envelope::Gaussian { width: 2.0 }, LossProfile::constant(0.3, 0.2).unwrap(), 1e-12);
        let dfg = ProcessInputs::dfg(
            input(&s, Band::F, -2.0, gauss(1.0), 0.8),
            input(&s, Band::SH, 0.0, gauss(1.0), 1.0),
        )
        .unwrap();
        let spec = dfg_spectrum(&s, &dfg).unwrap();
        let rule = GaussLegendre::new(spec.t_nodes);
        let m = &s.model;
        for k in [2.0, 0.5, 4.0] {
            let direct = rule
                .integrate(m.window.t0(), m.window.t1(), |t| {
                    dfg_kernel(m, &dfg, k, t).unwrap() * (-m.loss_rate(Band::F, k) * (m.window.t1() - t)).exp()
                })
                .unwrap();
            let batched = spec.amplitude(k).unwrap();
            assert!((direct - batched).norm() < 1e-11 * direct.norm().max(1e-3), "k={k}: {direct} vs {batched}");
        }
    }

    #[test]
    fn batched_sfg_and_spdc_match_pointwise_kernels() {
        let s = sim(Envelope::Gaussian { width: 2.0 }, LossProfile::constant(0.3, 0.2).unwrap(), 1e-12);
        let m = &s.model;
        let (t0, t1) = (m.window.t0(), m.window.t1());
        let sfg = ProcessInputs::sfg(
            input(&s, Band::F, -2.0, gauss(1.0), 0.8),
            input(&s, Band::F, 2.0, gauss(1.0), 0.6),
        )
        .unwrap();
        let spec = sfg_spectrum(&s, &sfg).unwrap();
        let rule = GaussLegendre::new(spec.t_nodes);
        for k in [0.0, 1.0] {
            let direct = rule
                .integrate(t0, t1, |t| {
                    sfg_kernel(m, &sfg, k, t).unwrap() * (-m.loss_rate(Band::SH, k) * (t1 - t)).exp()
                })
                .unwrap();
            assert!((direct - spec.amplitude(k).unwrap()).norm() < 1e-11 * direct.norm());
        }

        let spdc = ProcessInputs::spdc(input(&s, Band::SH, 0.0, gauss(1.0), 1.0)).unwrap();
        let bi = spdc_biphoton(&s, &spdc).unwrap();
        let rule = GaussLegendre::new(bi.t_nodes);
        for (k1, k2) in [(-2.0, 2.0), (-1.0, 0.5)] {
            let direct = rule
                .integrate(t0, t1, |t| {
                    spdc_kernel(m, &spdc, k1, k2, t).unwrap()
                        * (-(m.loss_rate(Band::F, k1) + m.loss_rate(Band::F, k2)) * (t1 - t)).exp()
                })
                .unwrap();
            assert!((direct - bi.amplitude(k1, k2).unwrap()).norm() < 1e-11 * direct.norm());
        }
    }

    #[test]
    fn zero_pump_gives_empty_spectra() {
        let s = sim(Envelope::Constant, LossProfile::lossless(), 1e-6);
        let dfg = ProcessInputs::dfg(
            input(&s, Band::F, -2.0, gauss(1.0), 1.0),
            input(&s, Band::SH, 0.0, gauss(1.0), 0.0),
        )
        .unwrap();
        let spec = dfg_spectrum(&s, &dfg).unwrap();
        assert_eq!(spec.total_photon_number(), 0.0);
        let sfg = ProcessInputs::sfg(
            input(&s, Band::F, -2.0, gauss(1.0), 0.0),
            input(&s, Band::F, 2.0, gauss(1.0), 1.0),
        )
        .unwrap();
        assert!(sfg_spectrum(&s, &sfg).unwrap().values.iter().all(|v| v.norm() == 0.0));
        let spdc = ProcessInputs::spdc(input(&s, Band::SH, 0.0, gauss(1.0), 0.0)).unwrap();
        assert!(spdc_biphoton(&s, &spdc).unwrap().values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_bin_dfg_collapse() {
        let s = sim(Envelope::Constant, LossProfile::lossless(), 1e-10);
        let (za, zb) = (Complex64::new(0.6, 0.3), Complex64::new(-0.2, 0.9));
        let seed = CoherentInput::new(
            Waveform::new(Band::F, -2.0, WaveformShape::GridDelta, *s.grid(Band::F)).unwrap(),
            za,
        );
        let pump = CoherentInput::new(
            Waveform::new(Band::SH, 0.5, WaveformShape::GridDelta, *s.grid(Band::SH)).unwrap(),
            zb,
        );
        let spec = dfg_spectrum(&s, &ProcessInputs::dfg(seed, pump).unwrap()).unwrap();
        // idler at k = kp − ks is exactly energy matched: |A|² = |2 za* zb|² (2T)² δk_s δk_p
        let (dks, dkp) = (s.grid(Band::F).delta(), s.grid(Band::SH).delta());
        let expected = (2.0 * za.norm() * zb.norm()).powi(2) * 4.0 * dks * dkp;
        let got = photon_density(&spec, 2.5).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
    }

    #[test]
    fn single_bin_spdc_collapse() {
        let s = sim(Envelope::Constant, LossProfile::lossless(), 1e-10);
        let z = Complex64::new(0.3, -0.4);
        let pump = CoherentInput::new(
            Waveform::new(Band::SH, 0.0, WaveformShape::GridDelta, *s.grid(Band::SH)).unwrap(),
            z,
        );
        let bi = spdc_biphoton(&s, &ProcessInputs::spdc(pump).unwrap()).unwrap();
        let g = bi.amplitude(-2.0, 2.0).unwrap();
        let dkp = s.grid(Band::SH).delta();
        // |G|² = 2|z|² s0² (2T)² δk_p
        let expected = 2.0 * z.norm_sqr() * 4.0 * dkp;
        assert!((g.norm_sqr() - expected).abs() < 1e-12 * expected);
        assert!((pair_density(&bi, -2.0, 2.0).unwrap() - 2.0 * expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn equal_loss_sfg_pulls_out_constant_factor() {
        // β_F(k1) + β_F(k2) = β_SH makes the integrand decay independent of t
        let beta_sh = 0.8;
        let lossless = sim(Envelope::Gaussian { width: 2.0 }, LossProfile::lossless(), 1e-10);
        let lossy = sim(Envelope::Gaussian { width: 2.0 }, LossProfile::constant(beta_sh / 2.0, beta_sh).unwrap(), 1e-10);
        let mk = |s: &Simulation| {
            ProcessInputs::sfg(input(s, Band::F, -2.0, gauss(1.0), 1.0), input(s, Band::F, 2.0, gauss(1.0), 1.0)).unwrap()
        };
        let n0 = sfg_spectrum(&lossless, &mk(&lossless)).unwrap().total_photon_number();
        let n1 = sfg_spectrum(&lossy, &mk(&lossy)).unwrap().total_photon_number();
        let expected = n0 * (-2.0 * beta_sh * 2.0f64).exp();
        assert!((n1 - expected).abs() < 1e-9 * expected, "{n1} vs {expected}");
    }

    #[test]
    fn biphoton_symmetric_and_nonnegative() {
        let s = sim(Envelope::Gaussian { width: 1.5 }, LossProfile::constant(0.4, 0.1).unwrap(), 1e-8);
        let spdc = ProcessInputs::spdc(input(&s, Band::SH, 0.5, gauss(0.8), 1.0)).unwrap();
        let bi = spdc_biphoton(&s, &spdc).unwrap();
        let n = bi.grid.len();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (bi.at(i, j), bi.at(j, i));
                assert!((a - b).norm() <= 1e-12 * a.norm());
                assert!(bi.coincidence_density_at(i, j) >= 0.0);
            }
        }
        assert_eq!(pair_density(&bi, -1.0, 2.0).unwrap(), pair_density(&bi, 2.0, -1.0).unwrap());
        assert!(matches!(pair_density(&bi, 1.0, 1.0), Err(Error::DegenerateBin { .. })));
        assert!(matches!(pair_density(&bi, 1.1, 1.0), Err(Error::OffGrid { .. })));
    }

    #[test]
    fn losses_reduce_total_photon_number() {
        let lossless = sim(Envelope::Constant, LossProfile::lossless(), 1e-8);
        let mk = |s: &Simulation| {
            ProcessInputs::dfg(input(s, Band::F, -2.0, gauss(1.0), 1.0), input(s, Band::SH, 0.0, gauss(1.0), 1.0)).unwrap()
        };
        let n0 = dfg_spectrum(&lossless, &mk(&lossless)).unwrap().total_photon_number();
        for (bf, bsh) in [(0.1, 0.0), (0.0, 0.1), (0.5, 1.0), (2.0, 0.5)] {
            let s = sim(Envelope::Constant, LossProfile::constant(bf, bsh).unwrap(), 1e-8);
            let n = dfg_spectrum(&s, &mk(&s)).unwrap().total_photon_number();
            assert!(n < n0, "β=({bf},{bsh}): {n} vs {n0}");
        }
    }

    #[test]
    fn photon_density_examples() {
        let grid = Grid1D::new(0.0, 1.0, 5).unwrap();
        let mut spec = SpectralAmplitude {
            band: Band::F,
            grid,
            values: vec![ZERO; 5],
            t_nodes: 1,
            achieved_tolerance: None,
        };
        assert_eq!(photon_density(&spec, 0.5).unwrap(), 0.0);
        spec.values[2] = Complex64::new(0.0, 2.0);
        assert_eq!(photon_density(&spec, 0.5).unwrap(), 4.0);
    }

    #[test]
    fn rejects_waveforms_from_other_grids() {
        let s = sim(Envelope::Constant, LossProfile::lossless(), 1e-6);
        let other = Grid1D::new(-12.0, 12.0, 97).unwrap();
        let seed = CoherentInput::new(Waveform::new(Band::F, 0.0, gauss(1.0), other).unwrap(), Complex64::new(1.0, 0.0));
        let dfg = ProcessInputs::dfg(seed, input(&s, Band::SH, 0.0, gauss(1.0), 1.0)).unwrap();
        assert!(dfg_spectrum(&s, &dfg).is_err());
    }

    #[test]
    fn envelope_must_fit_mismatch_range() {
        let model = WaveguideModel::new(
            DispersionRelation::uniform(1.0).unwrap(),
            LossProfile::lossless(),
            CouplingModel::new(1.0, Envelope::Gaussian { width: 10.0 }, 0.0).unwrap(),
            InteractionWindow::symmetric(1.0).unwrap(),
            UnitMode::Nondimensional,
        );
        let r = Simulation::new(
            model,
            Grid1D::new(-12.0, 12.0, 49).unwrap(),
            Grid1D::new(-10.0, 10.0, 41).unwrap(),
            QuadratureConfig::default(),
        );
        assert!(r.is_err());
    }
}
