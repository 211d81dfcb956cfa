//! A complete run description: waveguide, grids, input fields for each
//! process and the signal/idler/pump wavenumbers the ratios refer to.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::ProcessInputs;
use crate::model::{Band, CoherentInput, Waveform, WaveformShape};
use crate::observables::{
    dfg_spectrum, pair_density, sfg_spectrum, spdc_biphoton, BiphotonAmplitude, NumberDensityReport, Simulation,
    SpectralAmplitude,
};
use crate::quadrature::{Grid1D, QuadratureConfig};
use crate::ratios::{dfg_ratio_from, narrowness_warnings, sfg_ratio_from, NarrownessWarning, RatioReport};

/// One input field, independent of any particular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputSpec {
    pub z: Complex64,
    pub shape: WaveformShape,
    pub center: f64,
}

impl InputSpec {
    pub fn new(z: Complex64, shape: WaveformShape, center: f64) -> Self {
        Self { z, shape, center }
    }

    pub fn on(&self, band: Band, grid: Grid1D) -> Result<CoherentInput> {
        Ok(CoherentInput::new(Waveform::new(band, self.center, self.shape, grid)?, self.z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    pub ks: f64,
    pub ki: f64,
    pub kp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub simulation: Simulation,
    pub spdc_pump: Option<InputSpec>,
    pub dfg_seed: Option<InputSpec>,
    pub dfg_pump: Option<InputSpec>,
    pub sfg_signal: Option<InputSpec>,
    pub sfg_idler: Option<InputSpec>,
    pub targets: Targets,
}

/// Everything one pass over a scenario produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub dfg: Option<SpectralAmplitude>,
    pub sfg: Option<SpectralAmplitude>,
    pub spdc: Option<BiphotonAmplitude>,
    pub densities: NumberDensityReport,
}

fn require(spec: Option<InputSpec>, name: &str) -> Result<InputSpec> {
    spec.ok_or_else(|| Error::param(name, "section is required for this process"))
}

impl Scenario {
    fn input(&self, spec: Option<InputSpec>, name: &str, band: Band) -> Result<CoherentInput> {
        require(spec, name)?.on(band, *self.simulation.grid(band))
    }

    pub fn spdc_inputs(&self) -> Result<ProcessInputs> {
        ProcessInputs::spdc(self.input(self.spdc_pump, "spdc.pump", Band::SH)?)
    }

    pub fn dfg_inputs(&self) -> Result<ProcessInputs> {
        ProcessInputs::dfg(
            self.input(self.dfg_seed, "dfg.seed", Band::F)?,
            self.input(self.dfg_pump, "dfg.pump", Band::SH)?,
        )
    }

    pub fn sfg_inputs(&self) -> Result<ProcessInputs> {
        ProcessInputs::sfg(
            self.input(self.sfg_signal, "sfg.signal", Band::F)?,
            self.input(self.sfg_idler, "sfg.idler", Band::F)?,
        )
    }

    pub fn has_dfg(&self) -> bool {
        self.dfg_seed.is_some() && self.dfg_pump.is_some()
    }

    pub fn has_sfg(&self) -> bool {
        self.sfg_signal.is_some() && self.sfg_idler.is_some()
    }

    pub fn has_spdc(&self) -> bool {
        self.spdc_pump.is_some()
    }

    pub fn with_grids(&self, f: Grid1D, sh: Grid1D) -> Result<Self> {
        Ok(Self {
            simulation: self.simulation.with_grids(f, sh)?,
            ..self.clone()
        })
    }

    pub fn with_quadrature(&self, quadrature: QuadratureConfig) -> Self {
        let mut out = self.clone();
        out.simulation.quadrature = quadrature;
        out
    }

    /// Spectra of every process the scenario defines, and the densities at the targets.
    pub fn run(&self) -> Result<ScenarioRun> {
        let sim = &self.simulation;
        let Targets { ks, ki, kp } = self.targets;
        let dfg = if self.has_dfg() {
            Some(dfg_spectrum(sim, &self.dfg_inputs()?)?)
        } else {
            None
        };
        let sfg = if self.has_sfg() {
            Some(sfg_spectrum(sim, &self.sfg_inputs()?)?)
        } else {
            None
        };
        let spdc = if self.has_spdc() {
            Some(spdc_biphoton(sim, &self.spdc_inputs()?)?)
        } else {
            None
        };
        let densities = NumberDensityReport {
            dfg_single: dfg.as_ref().map(|a| a.amplitude(ki).map(|v| v.norm_sqr())).transpose()?,
            sfg_single: sfg.as_ref().map(|a| a.amplitude(kp).map(|v| v.norm_sqr())).transpose()?,
            spdc_pair: spdc.as_ref().map(|g| pair_density(g, ks, ki)).transpose()?,
        };
        Ok(ScenarioRun {
            dfg,
            sfg,
            spdc,
            densities,
        })
    }

    pub fn densities(&self) -> Result<NumberDensityReport> {
        Ok(self.run()?.densities)
    }

    /// R^DFG and R^SFG for whichever classical processes are defined.
    pub fn ratios(&self) -> Result<(Option<RatioReport>, Option<RatioReport>)> {
        if !self.has_spdc() {
            return Err(Error::param("spdc.pump", "ratios need the SPDC pump"));
        }
        if !self.has_dfg() && !self.has_sfg() {
            return Err(Error::param("dfg", "ratios need DFG or SFG inputs"));
        }
        let run = self.run()?;
        self.ratios_from(&run)
    }

    pub fn ratios_from(&self, run: &ScenarioRun) -> Result<(Option<RatioReport>, Option<RatioReport>)> {
        let sim = &self.simulation;
        let Targets { ks, ki, kp } = self.targets;
        let spdc = self.spdc_inputs()?;
        let biphoton = run
            .spdc
            .as_ref()
            .ok_or_else(|| Error::param("spdc.pump", "ratios need the SPDC pump"))?;
        let dfg = match &run.dfg {
            Some(spectrum) => Some(dfg_ratio_from(sim, &spdc, &self.dfg_inputs()?, spectrum, biphoton, ks, ki)?),
            None => None,
        };
        let sfg = match &run.sfg {
            Some(spectrum) => Some(sfg_ratio_from(sim, &spdc, &self.sfg_inputs()?, spectrum, biphoton, ks, ki, kp)?),
            None => None,
        };
        Ok((dfg, sfg))
    }

    /// Fields wider than 1/20 of the narrowest model feature.
    pub fn narrowness_warnings(&self) -> Result<Vec<NarrownessWarning>> {
        let sim = &self.simulation;
        let mut fields = Vec::new();
        for (name, spec, band) in [
            ("spdc.pump", self.spdc_pump, Band::SH),
            ("dfg.seed", self.dfg_seed, Band::F),
            ("dfg.pump", self.dfg_pump, Band::SH),
            ("sfg.signal", self.sfg_signal, Band::F),
            ("sfg.idler", self.sfg_idler, Band::F),
        ] {
            if let Some(spec) = spec {
                fields.push((name, spec.on(band, *sim.grid(band))?.waveform));
            }
        }
        let roles: Vec<(&str, &Waveform)> = fields.iter().map(|(n, w)| (*n, w)).collect();
        Ok(narrowness_warnings(&sim.model, &roles))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::*;

    /// Gaussian-field lossless scenario with energy matching at the targets.
    pub(crate) fn g1(loss: LossProfile) -> Scenario {
        let model = WaveguideModel::new(
            DispersionRelation::uniform(1.0).unwrap(),
            loss,
            CouplingModel::new(1.0, Envelope::Constant, 0.0).unwrap(),
            InteractionWindow::symmetric(1.0).unwrap(),
            UnitMode::Nondimensional,
        );
        let sim = Simulation::new(
            model,
            Grid1D::new(-12.0, 12.0, 97).unwrap(),
            Grid1D::new(-10.0, 10.0, 81).unwrap(),
            QuadratureConfig::new(1e-10, 6, 64).unwrap(),
        )
        .unwrap();
        let one = Complex64::new(1.0, 0.0);
        let g = WaveformShape::Gaussian { sigma: 1.0 };
        Scenario {
            simulation: sim,
            spdc_pump: Some(InputSpec::new(one, g, 0.0)),
            dfg_seed: Some(InputSpec::new(one, g, -2.0)),
            dfg_pump: Some(InputSpec::new(one, g, 0.0)),
            sfg_signal: Some(InputSpec::new(one, g, -2.0)),
            sfg_idler: Some(InputSpec::new(one, g, 2.0)),
            targets: Targets {
                ks: -2.0,
                ki: 2.0,
                kp: 0.0,
            },
        }
    }

    #[test]
    fn run_fills_every_density() {
        let s = g1(LossProfile::lossless());
        let d = s.densities().unwrap();
        assert_eq!(d.values().count(), 3);
        assert!(d.values().all(|v| v > 0.0));
    }

    #[test]
    fn missing_sections_are_named() {
        let mut s = g1(LossProfile::lossless());
        s.sfg_idler = None;
        match s.sfg_inputs() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "sfg.idler"),
            other => panic!("{other:?}"),
        }
        let (dfg, sfg) = s.ratios().unwrap();
        assert!(dfg.is_some() && sfg.is_none());
        s.spdc_pump = None;
        assert!(s.ratios().is_err());
    }

    #[test]
    fn wide_gaussians_trigger_narrowness_warnings() {
        let s = g1(LossProfile::lossless());
        let w = s.narrowness_warnings().unwrap();
        assert_eq!(w.len(), 5);
        assert!(w.iter().all(|w| w.feature == "interaction-window phase"));
    }

    #[test]
    fn refined_grids_keep_targets() {
        let s = g1(LossProfile::lossless());
        let f = s.simulation.grid(Band::F).refined();
        let sh = s.simulation.grid(Band::SH).refined();
        let r = s.with_grids(f, sh).unwrap();
        assert_eq!(r.simulation.grid(Band::F).len(), 193);
        assert!(r.densities().is_ok());
    }
}
