//! Pointwise time-dependent kernels Φ_DFG(k;t), Φ_SFG(k;t) and φ(k₁,k₂;t).
//!
//! These are direct evaluations, each costing a full wavenumber quadrature
//! over the input waveforms. Whole spectra are computed by the batched
//! routines in [`crate::observables`], which must agree with these.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Band, CoherentInput, Process, WaveguideModel};
use crate::quadrature::integrate_1d;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coherent inputs of one process, in a fixed role order:
/// DFG `[seed (F), pump (SH)]`, SFG `[a (F), b (F)]`, SPDC `[pump (SH)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessInputs {
    process: Process,
    inputs: Vec<CoherentInput>,
}

impl ProcessInputs {
    pub fn new(process: Process, inputs: Vec<CoherentInput>) -> Result<Self> {
        let expected: &[Band] = match process {
            Process::Dfg => &[Band::F, Band::SH],
            Process::Sfg => &[Band::F, Band::F],
            Process::Spdc => &[Band::SH],
        };
        let bands: Vec<Band> = inputs.iter().map(CoherentInput::band).collect();
        if bands != expected {
            return Err(Error::InvalidProcess {
                process,
                reason: format!("expected input bands {expected:?}, got {bands:?}"),
            });
        }
        Ok(Self { process, inputs })
    }

    pub fn dfg(seed: CoherentInput, pump: CoherentInput) -> Result<Self> {
        Self::new(Process::Dfg, vec![seed, pump])
    }

    pub fn sfg(a: CoherentInput, b: CoherentInput) -> Result<Self> {
        Self::new(Process::Sfg, vec![a, b])
    }

    pub fn spdc(pump: CoherentInput) -> Result<Self> {
        Self::new(Process::Spdc, vec![pump])
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn inputs(&self) -> &[CoherentInput] {
        &self.inputs
    }

    pub(crate) fn expect(&self, process: Process) -> Result<&[CoherentInput]> {
        if self.process != process {
            return Err(Error::InvalidProcess {
                process,
                reason: format!("inputs are tagged {}", self.process),
            });
        }
        Ok(&self.inputs)
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let inputs = self
            .inputs
            .iter()
            .map(|c| CoherentInput::new(c.waveform.clone(), c.z * factor))
            .collect();
        Self {
            process: self.process,
            inputs,
        }
    }
}

/// S(k₁,k₂,k;t) = S(k₁,k₂,k) exp(i(ω_F(k₁) + ω_F(k₂) − ω_SH(k))t).
pub fn coupling_t(model: &WaveguideModel, k1: f64, k2: f64, k: f64, t: f64) -> Complex64 {
    let s = model.coupling(k1, k2, k);
    Complex64::from_polar(1.0, model.detuning(k1, k2, k) * t) * s
}

fn check_time(model: &WaveguideModel, t: f64) -> Result<()> {
    if !model.window.contains(t) {
        return Err(Error::param(
            "t",
            format!("{t} lies outside [{}, {}]", model.window.t0(), model.window.t1()),
        ));
    }
    Ok(())
}

/// Φ_DFG(k;t). The generated F wavenumber `k` occupies the first slot of S and
/// the seed enters conjugated.
pub fn dfg_kernel(model: &WaveguideModel, inputs: &ProcessInputs, k: f64, t: f64) -> Result<Complex64> {
    let [seed, pump] = inputs.expect(Process::Dfg)? else {
        unreachable!("validated at construction")
    };
    check_time(model, t)?;
    let elapsed = t - model.window.t0();
    let mut failure = None;
    let integral = integrate_1d(
        |k1| {
            let phi_a = seed.waveform.eval(k1).conj();
            if phi_a.norm_sqr() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let inner = integrate_1d(
                |k2| {
                    let phi_b = pump.waveform.eval(k2);
                    if phi_b.norm_sqr() == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let decay = (-(model.loss_rate(Band::F, k1) + model.loss_rate(Band::SH, k2)) * elapsed).exp();
                    phi_b * coupling_t(model, k, k1, k2, t) * decay
                },
                pump.waveform.grid(),
            );
            match inner {
                Ok(v) => phi_a * v,
                Err(e) => {
                    failure = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        seed.waveform.grid(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * I * seed.z.conj() * pump.z / model.hbar() * integral)
}

/// Φ_SFG(k;t). Both F inputs enter unconjugated; the coupling is conjugated.
pub fn sfg_kernel(model: &WaveguideModel, inputs: &ProcessInputs, k: f64, t: f64) -> Result<Complex64> {
    let [a, b] = inputs.expect(Process::Sfg)? else {
        unreachable!("validated at construction")
    };
    check_time(model, t)?;
    let elapsed = t - model.window.t0();
    let mut failure = None;
    let integral = integrate_1d(
        |k1| {
            let phi_a = a.waveform.eval(k1);
            if phi_a.norm_sqr() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let inner = integrate_1d(
                |k2| {
                    let phi_b = b.waveform.eval(k2);
                    if phi_b.norm_sqr() == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let decay = (-(model.loss_rate(Band::F, k1) + model.loss_rate(Band::F, k2)) * elapsed).exp();
                    phi_b * coupling_t(model, k1, k2, k, t).conj() * decay
                },
                b.waveform.grid(),
            );
            match inner {
                Ok(v) => phi_a * v,
                Err(e) => {
                    failure = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        a.waveform.grid(),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * I * a.z * b.z / model.hbar() * integral)
}

/// φ(k₁,k₂;t), the time-resolved two-photon kernel.
pub fn spdc_kernel(model: &WaveguideModel, inputs: &ProcessInputs, k1: f64, k2: f64, t: f64) -> Result<Complex64> {
    let [pump] = inputs.expect(Process::Spdc)? else {
        unreachable!("validated at construction")
    };
    check_time(model, t)?;
    let elapsed = t - model.window.t0();
    let integral = integrate_1d(
        |k| {
            let phi = pump.waveform.eval(k);
            if phi.norm_sqr() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            phi * coupling_t(model, k1, k2, k, t) * (-model.loss_rate(Band::SH, k) * elapsed).exp()
        },
        pump.waveform.grid(),
    )?;
    Ok(std::f64::consts::SQRT_2 * I * pump.z / model.hbar() * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use crate::quadrature::Grid1D;

    fn model(envelope: Envelope, loss: LossProfile) -> WaveguideModel {
        WaveguideModel::new(
            DispersionRelation::uniform(1.0).unwrap(),
            loss,
            CouplingModel::new(1.0, envelope, 0.0).unwrap(),
            InteractionWindow::symmetric(1.0).unwrap(),
            UnitMode::Nondimensional,
        )
    }

    fn f_grid() -> Grid1D {
        Grid1D::new(-12.0, 12.0, 97).unwrap()
    }

    fn sh_grid() -> Grid1D {
        Grid1D::new(-10.0, 10.0, 81).unwrap()
    }

    fn gaussian(band: Band, center: f64, sigma: f64, z: Complex64) -> CoherentInput {
        let grid = if band == Band::F { f_grid() } else { sh_grid() };
        CoherentInput::new(
            Waveform::new(band, center, WaveformShape::Gaussian { sigma }, grid).unwrap(),
            z,
        )
    }

    fn delta(band: Band, center: f64, z: Complex64) -> CoherentInput {
        let grid = if band == Band::F { f_grid() } else { sh_grid() };
        CoherentInput::new(Waveform::new(band, center, WaveformShape::GridDelta, grid).unwrap(), z)
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn band_composition_enforced() {
        let f = gaussian(Band::F, 0.0, 1.0, one());
        let sh = gaussian(Band::SH, 0.0, 1.0, one());
        assert!(ProcessInputs::dfg(f.clone(), sh.clone()).is_ok());
        assert!(matches!(
            ProcessInputs::dfg(sh.clone(), f.clone()),
            Err(Error::InvalidProcess { process: Process::Dfg, .. })
        ));
        assert!(ProcessInputs::sfg(f.clone(), sh.clone()).is_err());
        assert!(ProcessInputs::spdc(f.clone()).is_err());
        let spdc = ProcessInputs::spdc(sh).unwrap();
        let m = model(Envelope::Constant, LossProfile::lossless());
        assert!(matches!(dfg_kernel(&m, &spdc, 0.0, 0.0), Err(Error::InvalidProcess { .. })));
    }

    #[test]
    fn coupling_t_phase_properties() {
        let m = model(Envelope::Gaussian { width: 2.0 }, LossProfile::lossless());
        let (k1, k2, k) = (0.4, -1.1, 0.9);
        assert_eq!(coupling_t(&m, k1, k2, k, 0.0), Complex64::new(m.coupling(k1, k2, k), 0.0));
        // energy matched: k1 + k2 = k with unit velocities and zero offsets
        let matched = coupling_t(&m, 0.5, 1.0, 1.5, 0.77);
        assert!((matched - Complex64::new(m.coupling(0.5, 1.0, 1.5), 0.0)).norm() < 1e-15);
        for t in [0.1, 0.5, 1.0] {
            let plus = coupling_t(&m, k1, k2, k, t);
            let minus = coupling_t(&m, k1, k2, k, -t);
            assert!((minus - plus.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_pump_or_coupling_gives_zero() {
        let m = model(Envelope::Constant, LossProfile::lossless());
        let zero = Complex64::new(0.0, 0.0);
        let dfg = ProcessInputs::dfg(gaussian(Band::F, -2.0, 1.0, one()), gaussian(Band::SH, 0.0, 1.0, zero)).unwrap();
        assert_eq!(dfg_kernel(&m, &dfg, 2.0, 0.3).unwrap(), zero);
        let sfg = ProcessInputs::sfg(gaussian(Band::F, -2.0, 1.0, zero), gaussian(Band::F, 2.0, 1.0, one())).unwrap();
        assert_eq!(sfg_kernel(&m, &sfg, 0.0, 0.3).unwrap(), zero);
        let spdc = ProcessInputs::spdc(gaussian(Band::SH, 0.0, 1.0, zero)).unwrap();
        assert_eq!(spdc_kernel(&m, &spdc, -2.0, 2.0, 0.3).unwrap(), zero);

        let mut off = m.clone();
        off.coupling = CouplingModel::disabled();
        let dfg = ProcessInputs::dfg(gaussian(Band::F, -2.0, 1.0, one()), gaussian(Band::SH, 0.0, 1.0, one())).unwrap();
        assert_eq!(dfg_kernel(&off, &dfg, 2.0, 0.3).unwrap().norm(), 0.0);
    }

    #[test]
    fn rejects_time_outside_window() {
        let m = model(Envelope::Constant, LossProfile::lossless());
        let spdc = ProcessInputs::spdc(gaussian(Band::SH, 0.0, 1.0, one())).unwrap();
        assert!(spdc_kernel(&m, &spdc, 0.0, 1.0, 1.5).is_err());
    }

    /// Brute-force 2-D trapezoid at 4x the k resolution with analytically
    /// normalized Gaussians, independent of the waveform sampling path.
    fn dfg_oracle(m: &WaveguideModel, k: f64, t: f64, ka: f64, kb: f64, sigma: f64) -> Complex64 {
        let fg = f_grid().refined_by(4);
        let sg = sh_grid().refined_by(4);
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let g = |x: f64, c: f64| norm * (-(x - c).powi(2) / (4.0 * sigma * sigma)).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..fg.len() {
            let k1 = fg.point(i);
            for j in 0..sg.len() {
                let k2 = sg.point(j);
                let s = m.coupling(k, k1, k2) * Complex64::from_polar(1.0, m.detuning(k, k1, k2) * t);
                acc += g(k1, ka) * g(k2, kb) * s * fg.weight(i) * sg.weight(j);
            }
        }
        2.0 * I * acc
    }

    #[test]
    fn dfg_kernel_matches_gaussian_overlap_oracle() {
        let m = model(Envelope::Constant, LossProfile::lossless());
        let dfg = ProcessInputs::dfg(gaussian(Band::F, -2.0, 1.0, one()), gaussian(Band::SH, 0.0, 1.0, one())).unwrap();
        let v = dfg_kernel(&m, &dfg, 2.0, 0.0).unwrap();
        let oracle = dfg_oracle(&m, 2.0, 0.0, -2.0, 0.0, 1.0);
        assert!((v - oracle).norm() / oracle.norm() < 1e-6, "{v} vs {oracle}");
        // closed form: 2i (∫φ)² with ∫φ = (8πσ²)^{1/4}
        let closed = 2.0 * I * (8.0 * std::f64::consts::PI).sqrt();
        assert!((v - closed).norm() / closed.norm() < 1e-6);
        // and away from t = 0, where the phase matters
        let v = dfg_kernel(&m, &dfg, 1.5, 0.6).unwrap();
        let oracle = dfg_oracle(&m, 1.5, 0.6, -2.0, 0.0, 1.0);
        assert!((v - oracle).norm() / oracle.norm() < 1e-6, "{v} vs {oracle}");
    }

    #[test]
    fn sfg_kernel_at_start_of_window() {
        let m = model(Envelope::Constant, LossProfile::lossless());
        let za = Complex64::new(0.6, 0.2);
        let zb = Complex64::new(-0.3, 0.9);
        let a = gaussian(Band::F, -2.0, 1.0, za);
        let b = gaussian(Band::F, 2.0, 1.0, zb);
        let sfg = ProcessInputs::sfg(a.clone(), b.clone()).unwrap();
        let t0 = m.window.t0();
        // evaluate where the phase vanishes at the waveform centers; the
        // oracle integrates the full phase factor directly
        let k = 0.0;
        let v = sfg_kernel(&m, &sfg, k, t0).unwrap();
        let fg = f_grid().refined_by(4);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..fg.len() {
            for j in 0..fg.len() {
                let (k1, k2) = (fg.point(i), fg.point(j));
                acc += a.waveform.eval(k1) * b.waveform.eval(k2)
                    * coupling_t(&m, k1, k2, k, t0).conj()
                    * fg.weight(i) * fg.weight(j);
            }
        }
        let oracle = 2.0 * I * za * zb * acc;
        assert!((v - oracle).norm() / oracle.norm() < 1e-6, "{v} vs {oracle}");

        // narrow inputs at energy matching: the phase is stationary and the
        // kernel collapses to 2i z_a z_b s0 (∫φ_a)(∫φ_b)
        let a = delta(Band::F, -2.0, za);
        let b = delta(Band::F, 2.5, zb);
        let sfg = ProcessInputs::sfg(a.clone(), b.clone()).unwrap();
        let v = sfg_kernel(&m, &sfg, 0.5, t0).unwrap();
        let dk = f_grid().delta();
        let expected = 2.0 * I * za * zb * dk.sqrt() * dk.sqrt();
        assert!((v - expected).norm() < 1e-14 * expected.norm(), "{v} vs {expected}");
    }

    #[test]
    fn sfg_kernel_symmetric_under_input_exchange() {
        let m = model(Envelope::Gaussian { width: 1.5 }, LossProfile::constant(0.3, 0.1).unwrap());
        let a = gaussian(Band::F, -2.0, 1.0, Complex64::new(0.5, 0.1));
        let b = gaussian(Band::F, 1.0, 0.7, Complex64::new(0.2, -0.8));
        let ab = ProcessInputs::sfg(a.clone(), b.clone()).unwrap();
        let ba = ProcessInputs::sfg(b, a).unwrap();
        for (k, t) in [(-1.0, 0.2), (0.5, -0.9)] {
            let x = sfg_kernel(&m, &ab, k, t).unwrap();
            let y = sfg_kernel(&m, &ba, k, t).unwrap();
            assert!((x - y).norm() <= 1e-13 * x.norm());
        }
    }

    #[test]
    fn spdc_kernel_exchange_symmetric() {
        let m = model(Envelope::Gaussian { width: 1.5 }, LossProfile::constant(0.2, 0.4).unwrap());
        let spdc = ProcessInputs::spdc(gaussian(Band::SH, 0.0, 1.0, one())).unwrap();
        for (k1, k2, t) in [(-2.0, 2.0, 0.3), (0.25, 1.75, -0.8)] {
            assert_eq!(
                spdc_kernel(&m, &spdc, k1, k2, t).unwrap(),
                spdc_kernel(&m, &spdc, k2, k1, t).unwrap()
            );
        }
    }

    #[test]
    fn spdc_grid_delta_pump_single_bin_collapse() {
        let m = model(Envelope::Gaussian { width: 3.0 }, LossProfile::lossless());
        let z = Complex64::new(0.7, -0.2);
        let kp = 0.5;
        let spdc = ProcessInputs::spdc(delta(Band::SH, kp, z)).unwrap();
        let dk = sh_grid().delta();
        for (k1, k2, t) in [(-2.0, 2.5, 0.0), (0.0, 1.0, 0.7)] {
            let v = spdc_kernel(&m, &spdc, k1, k2, t).unwrap();
            let expected = std::f64::consts::SQRT_2 * I * z * coupling_t(&m, k1, k2, kp, t) * dk.sqrt();
            assert!((v - expected).norm() < 1e-14 * expected.norm());
        }
    }

    #[test]
    fn narrow_gaussian_pump_converges_to_grid_delta() {
        let m = model(Envelope::Gaussian { width: 3.0 }, LossProfile::constant(0.1, 0.4).unwrap());
        let kp = 0.5;
        let reference = spdc_kernel(&m, &ProcessInputs::spdc(delta(Band::SH, kp, one())).unwrap(), -1.0, 2.0, 0.4).unwrap();
        let dk = sh_grid().delta();
        let errs: Vec<f64> = [1.0, 0.5, 0.25, 0.125]
            .iter()
            .map(|f| {
                let pump = gaussian(Band::SH, kp, f * dk, one());
                let v = spdc_kernel(&m, &ProcessInputs::spdc(pump).unwrap(), -1.0, 2.0, 0.4).unwrap();
                (v - reference).norm() / reference.norm()
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "{errs:?}");
            if w[1] > 1e-14 {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.0, "order {order} from {errs:?}");
            }
        }
    }

    #[test]
    fn conjugation_and_linearity() {
        let m = model(Envelope::Gaussian { width: 2.0 }, LossProfile::lossless());
        let dfg = ProcessInputs::dfg(gaussian(Band::F, -2.0, 1.0, one()), gaussian(Band::SH, 0.0, 1.0, one())).unwrap();
        let sfg = ProcessInputs::sfg(gaussian(Band::F, -2.0, 1.0, one()), gaussian(Band::F, 2.0, 1.0, one())).unwrap();
        let spdc = ProcessInputs::spdc(gaussian(Band::SH, 0.0, 1.0, one())).unwrap();
        let t = 0.45;
        // real waveforms, real z: every kernel is i × (real-coupled integral),
        // so flipping t conjugates the integral and gives −conj(Φ)
        let pairs = [
            (dfg_kernel(&m, &dfg, 1.7, t).unwrap(), dfg_kernel(&m, &dfg, 1.7, -t).unwrap()),
            (sfg_kernel(&m, &sfg, 0.3, t).unwrap(), sfg_kernel(&m, &sfg, 0.3, -t).unwrap()),
            (
                spdc_kernel(&m, &spdc, -1.5, 2.0, t).unwrap(),
                spdc_kernel(&m, &spdc, -1.5, 2.0, -t).unwrap(),
            ),
        ];
        for (plus, minus) in pairs {
            let int_plus = plus / I;
            let int_minus = minus / I;
            assert!((int_minus - int_plus.conj()).norm() < 1e-13 * plus.norm());
        }
        let doubled = dfg.scaled(2.0);
        let x = dfg_kernel(&m, &dfg, 1.7, t).unwrap();
        let y = dfg_kernel(&m, &doubled, 1.7, t).unwrap();
        // both amplitudes doubled: ×4; the pump alone: ×2
        assert!((y - 4.0 * x).norm() < 1e-13 * y.norm());
        let spdc2 = spdc.scaled(2.0);
        let a = spdc_kernel(&m, &spdc, -1.5, 2.0, t).unwrap();
        let b = spdc_kernel(&m, &spdc2, -1.5, 2.0, t).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn loss_strictly_reduces_kernel_magnitude() {
        let spdc = ProcessInputs::spdc(gaussian(Band::SH, 0.0, 1.0, one())).unwrap();
        let sfg = ProcessInputs::sfg(gaussian(Band::F, -2.0, 1.0, one()), gaussian(Band::F, 2.0, 1.0, one())).unwrap();
        let t = 0.2;
        let mut last_spdc = f64::INFINITY;
        let mut last_sfg = f64::INFINITY;
        for beta in [0.0, 0.1, 0.5, 2.0] {
            let m = model(Envelope::Gaussian { width: 2.0 }, LossProfile::constant(beta, beta).unwrap());
            let a = spdc_kernel(&m, &spdc, -2.0, 2.0, t).unwrap().norm();
            let b = sfg_kernel(&m, &sfg, 0.0, t).unwrap().norm();
            assert!(a < last_spdc && b < last_sfg);
            last_spdc = a;
            last_sfg = b;
        }
    }
}
