//! Independent references for the main engine.
//!
//! [`DiscreteModeSystem`] holds a state vector on a truncated Fock space of
//! at most three modes and evaluates number operators by applying ladder
//! operators to it. [`oracle_recompute`] re-evaluates the scenario densities
//! by direct summation at four times the k resolution, with each time
//! integral done in closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Band, WaveformShape, WaveguideModel};
use crate::observables::{BiphotonAmplitude, NumberDensityReport, SpectralAmplitude};
use crate::quadrature::Grid1D;
use crate::scenario::{InputSpec, Scenario, Targets};

pub const MAX_MODES: usize = 3;
pub const COHERENT_CUTOFF: usize = 20;
pub const TWO_PHOTON_CUTOFF: usize = 4;
pub const NORM_THRESHOLD: f64 = 1.0 - 1e-8;
pub const MAX_ORACLE_CELLS: usize = 1_000_000;
pub const REFINEMENT: usize = 4;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StateKind {
    Coherent,
    TwoPhoton,
}

/// State vector over occupations (n₀, …, n_{M−1}), each 0..=cutoff, with
/// mode 0 the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModeSystem {
    modes: usize,
    cutoff: usize,
    kind: StateKind,
    amplitudes: Vec<Complex64>,
}

impl DiscreteModeSystem {
    fn vacuum(modes: usize, cutoff: usize, kind: StateKind) -> Result<Self> {
        if modes == 0 || modes > MAX_MODES {
            return Err(Error::InvalidInput(format!("mode count must be 1..={MAX_MODES}, got {modes}")));
        }
        let dim = (cutoff + 1).pow(modes as u32);
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            modes,
            cutoff,
            kind,
            amplitudes,
        })
    }

    /// Product of truncated coherent states |z₀⟩⊗|z₁⟩⊗….
    pub fn coherent(z: &[Complex64], cutoff: usize) -> Result<Self> {
        if cutoff == 0 || cutoff > COHERENT_CUTOFF {
            return Err(Error::InvalidInput(format!("coherent cutoff must be 1..={COHERENT_CUTOFF}, got {cutoff}")));
        }
        let mut system = Self::vacuum(z.len(), cutoff, StateKind::Coherent)?;
        let per_mode: Vec<Vec<Complex64>> = z
            .iter()
            .map(|&z| {
                let mut c = Vec::with_capacity(cutoff + 1);
                let mut term = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
                c.push(term);
                for n in 1..=cutoff {
                    term = term * z / (n as f64).sqrt();
                    c.push(term);
                }
                c
            })
            .collect();
        for idx in 0..system.amplitudes.len() {
            let occ = system.occupations(idx);
            system.amplitudes[idx] = occ.iter().zip(&per_mode).map(|(&n, c)| c[n]).product();
        }
        Ok(system)
    }

    /// (1/√2) Σᵢⱼ F(i,j) a†ᵢ a†ⱼ |vac⟩, built by applying creation operators.
    pub fn two_photon(f: &[Vec<Complex64>], cutoff: usize) -> Result<Self> {
        if !(2..=TWO_PHOTON_CUTOFF).contains(&cutoff) {
            return Err(Error::InvalidInput(format!(
                "two-photon cutoff must be 2..={TWO_PHOTON_CUTOFF}, got {cutoff}"
            )));
        }
        let m = f.len();
        if f.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidInput("coefficient matrix must be square".into()));
        }
        for i in 0..m {
            for j in 0..i {
                let (a, b) = (f[i][j], f[j][i]);
                if (a - b).norm() > SYMMETRY_TOLERANCE * a.norm().max(b.norm()) {
                    return Err(Error::InvalidInput(format!(
                        "coefficients must be symmetric: F({i},{j}) = {a} but F({j},{i}) = {b}"
                    )));
                }
            }
        }
        let vac = Self::vacuum(m, cutoff, StateKind::TwoPhoton)?;
        let mut ket = vec![ZERO; vac.amplitudes.len()];
        for (i, row) in f.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c == ZERO {
                    continue;
                }
                let pair = vac.create(&vac.create(&vac.amplitudes, j)?, i)?;
                for (k, v) in ket.iter_mut().zip(pair) {
                    *k += c * v / std::f64::consts::SQRT_2;
                }
            }
        }
        Ok(Self {
            amplitudes: ket,
            ..vac
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow((self.modes - 1 - mode) as u32)
    }

    fn occupations(&self, mut idx: usize) -> Vec<usize> {
        let mut occ = vec![0; self.modes];
        for m in (0..self.modes).rev() {
            occ[m] = idx % (self.cutoff + 1);
            idx /= self.cutoff + 1;
        }
        occ
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            return Err(Error::InvalidInput(format!("mode {mode} out of range for {} modes", self.modes)));
        }
        Ok(())
    }

    /// a_mode applied to `state`.
    fn annihilate(&self, state: &[Complex64], mode: usize) -> Vec<Complex64> {
        let stride = self.stride(mode);
        let mut out = vec![ZERO; state.len()];
        for (idx, &amp) in state.iter().enumerate() {
            let n = self.occupations(idx)[mode];
            if n > 0 && amp != ZERO {
                out[idx - stride] += amp * (n as f64).sqrt();
            }
        }
        out
    }

    /// a†_mode applied to `state`; fails if that would leave the truncated space.
    fn create(&self, state: &[Complex64], mode: usize) -> Result<Vec<Complex64>> {
        let stride = self.stride(mode);
        let mut out = vec![ZERO; state.len()];
        for (idx, &amp) in state.iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let n = self.occupations(idx)[mode];
            if n == self.cutoff {
                return Err(Error::Truncation {
                    norm: 0.0,
                    threshold: NORM_THRESHOLD,
                });
            }
            out[idx + stride] += amp * ((n + 1) as f64).sqrt();
        }
        Ok(out)
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum()
}

/// ⟨a†a⟩ on `mode`, as the squared norm of a|ψ⟩.
pub fn coherent_number_expectation(system: &DiscreteModeSystem, mode: usize) -> Result<f64> {
    system.check_mode(mode)?;
    if system.kind == StateKind::Coherent {
        let norm = system.norm_squared();
        if norm < NORM_THRESHOLD {
            return Err(Error::Truncation {
                norm,
                threshold: NORM_THRESHOLD,
            });
        }
    }
    Ok(norm_sqr(&system.annihilate(&system.amplitudes, mode)))
}

/// ⟨a†ᵢ a†ⱼ aⱼ aᵢ⟩, as the squared norm of aⱼ aᵢ|ψ⟩. With i = j this is the
/// same-bin coincidence ⟨a†a†aa⟩.
pub fn pair_number_expectation(system: &DiscreteModeSystem, i: usize, j: usize) -> Result<f64> {
    system.check_mode(i)?;
    system.check_mode(j)?;
    let once = system.annihilate(&system.amplitudes, i);
    Ok(norm_sqr(&system.annihilate(&once, j)))
}

/// Pair density at (ks, ki) from the Fock-space evaluation of the two-bin
/// discretized ket, F(a,b) = G(k_a,k_b) δk.
pub fn fock_pair_density(biphoton: &BiphotonAmplitude, ks: f64, ki: f64) -> Result<f64> {
    let grid = &biphoton.grid;
    let idx = [grid.require_index(ks)?, grid.require_index(ki)?];
    if idx[0] == idx[1] {
        return Err(Error::DegenerateBin { k: ks });
    }
    let dk = grid.delta();
    let f: Vec<Vec<Complex64>> = idx
        .iter()
        .map(|&a| idx.iter().map(|&b| biphoton.at(a, b) * dk).collect())
        .collect();
    let system = DiscreteModeSystem::two_photon(&f, 2)?;
    Ok(pair_number_expectation(&system, 0, 1)? / (dk * dk))
}

/// Photon density at `k` from the Fock-space evaluation of the single-bin
/// coherent state with amplitude A(k)√δk.
pub fn fock_photon_density(spectrum: &SpectralAmplitude, k: f64) -> Result<f64> {
    let dk = spectrum.grid.delta();
    let z = spectrum.amplitude(k)? * dk.sqrt();
    let system = DiscreteModeSystem::coherent(&[z], COHERENT_CUTOFF)?;
    Ok(coherent_number_expectation(&system, 0)? / dk)
}

/// ∫_{t0}^{t1} e^{c(t − t_ref)} dt, written as e^{c(t̄ − t_ref)} 2 sinh(cΔt/2)/c
/// to avoid cancellation for small c.
fn exp_integral(c: Complex64, t0: f64, t1: f64, t_ref: f64) -> Complex64 {
    let dt = t1 - t0;
    let mid = (c * (0.5 * (t0 + t1) - t_ref)).exp();
    if c.norm() < 1e-100 {
        return mid * dt;
    }
    mid * 2.0 * (c * (0.5 * dt)).sinh() / c
}

/// Weighted spectral samples of a field: Gaussians with continuum
/// normalization on a refined grid, grid deltas as a single point mass
/// of weight √δk on the main grid.
fn field_points(spec: &InputSpec, main: &Grid1D, fine: &Grid1D) -> Vec<(f64, Complex64)> {
    match spec.shape {
        WaveformShape::Gaussian { sigma } => {
            let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
            (0..fine.len())
                .map(|i| {
                    let k = fine.point(i);
                    let x = (k - spec.center) / sigma;
                    (k, Complex64::new(fine.weight(i) * norm * (-0.25 * x * x).exp(), 0.0))
                })
                .filter(|(_, w)| w.norm_sqr() > 0.0)
                .collect()
        }
        WaveformShape::GridDelta => vec![(spec.center, Complex64::new(main.delta().sqrt(), 0.0))],
    }
}

fn oracle_dfg(m: &WaveguideModel, seed: &[(f64, Complex64)], pump: &[(f64, Complex64)], zs: Complex64, zp: Complex64, ki: f64) -> Complex64 {
    let (t0, t1) = (m.window.t0(), m.window.t1());
    let beta_i = m.loss_rate(Band::F, ki);
    let mut acc = ZERO;
    for &(k1, a) in seed {
        let beta1 = m.loss_rate(Band::F, k1);
        for &(k2, b) in pump {
            let s = m.coupling(ki, k1, k2);
            if s == 0.0 {
                continue;
            }
            let dw = m.detuning(ki, k1, k2);
            let beta2 = m.loss_rate(Band::SH, k2);
            // e^{iΔω t} e^{−(β1+β2)(t−t0)} e^{−βi(t1−t)}
            let c = Complex64::new(beta_i - beta1 - beta2, dw);
            let time = exp_integral(c, t0, t1, 0.0) * ((beta1 + beta2) * t0 - beta_i * t1).exp();
            acc += a.conj() * b * s * time;
        }
    }
    2.0 * I * zs.conj() * zp / m.hbar() * acc
}

fn oracle_sfg(m: &WaveguideModel, sa: &[(f64, Complex64)], sb: &[(f64, Complex64)], za: Complex64, zb: Complex64, kp: f64) -> Complex64 {
    let (t0, t1) = (m.window.t0(), m.window.t1());
    let beta_p = m.loss_rate(Band::SH, kp);
    let mut acc = ZERO;
    for &(k1, a) in sa {
        let beta1 = m.loss_rate(Band::F, k1);
        for &(k2, b) in sb {
            let s = m.coupling(k1, k2, kp);
            if s == 0.0 {
                continue;
            }
            let dw = m.detuning(k1, k2, kp);
            let beta2 = m.loss_rate(Band::F, k2);
            let c = Complex64::new(beta_p - beta1 - beta2, -dw);
            let time = exp_integral(c, t0, t1, 0.0) * ((beta1 + beta2) * t0 - beta_p * t1).exp();
            acc += a * b * s * time;
        }
    }
    2.0 * I * za * zb / m.hbar() * acc
}

fn oracle_spdc(m: &WaveguideModel, pump: &[(f64, Complex64)], zp: Complex64, ks: f64, ki: f64) -> Complex64 {
    let (t0, t1) = (m.window.t0(), m.window.t1());
    let beta_out = m.loss_rate(Band::F, ks) + m.loss_rate(Band::F, ki);
    let mut acc = ZERO;
    for &(k, p) in pump {
        let s = m.coupling(ks, ki, k);
        if s == 0.0 {
            continue;
        }
        let beta = m.loss_rate(Band::SH, k);
        let c = Complex64::new(beta_out - beta, m.detuning(ks, ki, k));
        let time = exp_integral(c, t0, t1, 0.0) * (beta * t0 - beta_out * t1).exp();
        acc += p * s * time;
    }
    std::f64::consts::SQRT_2 * I * zp / m.hbar() * acc
}

/// Densities at the scenario targets by direct summation on 4× refined k
/// grids, with exact time integrals.
pub fn oracle_recompute(scenario: &Scenario) -> Result<NumberDensityReport> {
    let sim = &scenario.simulation;
    let (f, sh) = (*sim.grid(Band::F), *sim.grid(Band::SH));
    let (f4, sh4) = (f.refined_by(REFINEMENT), sh.refined_by(REFINEMENT));
    let cells = (f4.len() * sh4.len()).max(f4.len() * f4.len());
    if cells > MAX_ORACLE_CELLS {
        return Err(Error::ResourceLimit {
            cells,
            limit: MAX_ORACLE_CELLS,
        });
    }
    let m = &sim.model;
    let Targets { ks, ki, kp } = scenario.targets;
    for (k, grid) in [(ks, &f), (ki, &f), (kp, &sh)] {
        grid.require_index(k)?;
    }
    let dfg_single = match (scenario.dfg_seed, scenario.dfg_pump) {
        (Some(seed), Some(pump)) => {
            let a = oracle_dfg(m, &field_points(&seed, &f, &f4), &field_points(&pump, &sh, &sh4), seed.z, pump.z, ki);
            Some(a.norm_sqr())
        }
        _ => None,
    };
    let sfg_single = match (scenario.sfg_signal, scenario.sfg_idler) {
        (Some(a), Some(b)) => {
            let amp = oracle_sfg(m, &field_points(&a, &f, &f4), &field_points(&b, &f, &f4), a.z, b.z, kp);
            Some(amp.norm_sqr())
        }
        _ => None,
    };
    let spdc_pair = match scenario.spdc_pump {
        Some(pump) => {
            if f.index_of(ks) == f.index_of(ki) {
                return Err(Error::DegenerateBin { k: ks });
            }
            let g = oracle_spdc(m, &field_points(&pump, &sh, &sh4), pump.z, ks, ki);
            Some(2.0 * g.norm_sqr())
        }
        None => None,
    };
    Ok(NumberDensityReport {
        dfg_single,
        sfg_single,
        spdc_pair,
    })
}
