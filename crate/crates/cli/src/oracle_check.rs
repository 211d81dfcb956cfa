//! The `oracle-check` table: Fock-space fixtures, library-versus-Fock
//! density checks at the scenario targets, and the refined recompute.

use std::fmt::Write as _;
use std::path::Path;

use chi2sim::observables::{dfg_spectrum, pair_density, photon_density, sfg_spectrum, spdc_biphoton, SpectralAmplitude};
use chi2sim::oracle::{
    coherent_number_expectation, fock_pair_density, fock_photon_density, oracle_recompute, pair_number_expectation,
    DiscreteModeSystem, COHERENT_CUTOFF,
};
use chi2sim::scenario::Scenario;
use chi2sim::Result;
use num_complex::Complex64;

use crate::config::{parse_scenario, ConfigError};
use crate::output::num;

const FIXTURE_TOLERANCE: f64 = 1e-10;
const PAIR_TOLERANCE: f64 = 1e-12;
const PHOTON_TOLERANCE: f64 = 1e-10;
const RECOMPUTE_TOLERANCE: f64 = 1e-4;
/// Largest single-bin coherent amplitude used for the photon-density check.
const MAX_BIN_AMPLITUDE: f64 = 0.9;

const G1: &str = include_str!("../scenarios/g1.scenario");

pub fn bundled_g1() -> std::result::Result<Scenario, ConfigError> {
    parse_scenario(G1, "bundled g1.scenario", Path::new("."))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl CheckRow {
    fn new(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            tolerance,
        }
    }

    pub fn relative_error(&self) -> f64 {
        let diff = (self.value - self.reference).abs();
        if self.reference == 0.0 {
            diff
        } else {
            diff / self.reference.abs()
        }
    }

    pub fn passed(&self) -> bool {
        self.relative_error() <= self.tolerance
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckTable {
    pub rows: Vec<CheckRow>,
}

impl CheckTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,value,reference,relative_error,tolerance,status\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.name,
                num(r.value),
                num(r.reference),
                num(r.relative_error()),
                num(r.tolerance),
                if r.passed() { "PASS" } else { "FAIL" }
            );
        }
        out
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fixtures(table: &mut CheckTable) -> Result<()> {
    let half = DiscreteModeSystem::coherent(&[c(0.5, 0.0)], COHERENT_CUTOFF)?;
    table.rows.push(CheckRow::new(
        "coherent_mean_z0.5",
        coherent_number_expectation(&half, 0)?,
        0.25,
        FIXTURE_TOLERANCE,
    ));
    let phased = DiscreteModeSystem::coherent(&[c(0.6, -0.8)], COHERENT_CUTOFF)?;
    table.rows.push(CheckRow::new(
        "coherent_mean_unit_modulus",
        coherent_number_expectation(&phased, 0)?,
        1.0,
        FIXTURE_TOLERANCE,
    ));
    let alone = DiscreteModeSystem::coherent(&[c(0.3, 0.2), c(0.0, 0.0)], 12)?;
    let paired = DiscreteModeSystem::coherent(&[c(0.3, 0.2), c(0.7, -0.5)], 12)?;
    table.rows.push(CheckRow::new(
        "coherent_mode_independence",
        coherent_number_expectation(&paired, 0)?,
        coherent_number_expectation(&alone, 0)?,
        FIXTURE_TOLERANCE,
    ));
    let g = c(0.3, -0.4);
    let zero = c(0.0, 0.0);
    let same_bin = DiscreteModeSystem::two_photon(&[vec![g, zero], vec![zero, zero]], 2)?;
    table.rows.push(CheckRow::new(
        "same_bin_coincidence",
        pair_number_expectation(&same_bin, 0, 0)?,
        2.0 * g.norm_sqr(),
        PAIR_TOLERANCE,
    ));
    Ok(())
}

/// Factor that brings the single-bin coherent amplitude at `k` down to
/// [`MAX_BIN_AMPLITUDE`], or 1 if it is already below.
fn weakening(spec: &SpectralAmplitude, k: f64) -> Result<f64> {
    let z = spec.amplitude(k)?.norm() * spec.grid.delta().sqrt();
    Ok(if z > MAX_BIN_AMPLITUDE { MAX_BIN_AMPLITUDE / z } else { 1.0 })
}

fn photon_check(name: &str, spec: &SpectralAmplitude, k: f64) -> Result<CheckRow> {
    Ok(CheckRow::new(name, fock_photon_density(spec, k)?, photon_density(spec, k)?, PHOTON_TOLERANCE))
}

fn library_checks(table: &mut CheckTable, scenario: &Scenario) -> Result<()> {
    let sim = &scenario.simulation;
    let t = scenario.targets;
    if scenario.has_spdc() {
        let bi = spdc_biphoton(sim, &scenario.spdc_inputs()?)?;
        table.rows.push(CheckRow::new(
            "spdc_pair_density_fock",
            fock_pair_density(&bi, t.ks, t.ki)?,
            pair_density(&bi, t.ks, t.ki)?,
            PAIR_TOLERANCE,
        ));
    }
    if scenario.has_dfg() {
        let mut weak = scenario.clone();
        let spec = dfg_spectrum(sim, &weak.dfg_inputs()?)?;
        let s = weakening(&spec, t.ki)?;
        if let Some(p) = weak.dfg_pump.as_mut() {
            p.z *= s;
        }
        let spec = dfg_spectrum(sim, &weak.dfg_inputs()?)?;
        table.rows.push(photon_check("dfg_photon_density_fock", &spec, t.ki)?);
    }
    if scenario.has_sfg() {
        let mut weak = scenario.clone();
        let spec = sfg_spectrum(sim, &weak.sfg_inputs()?)?;
        let s = weakening(&spec, t.kp)?;
        if let Some(a) = weak.sfg_signal.as_mut() {
            a.z *= s;
        }
        let spec = sfg_spectrum(sim, &weak.sfg_inputs()?)?;
        table.rows.push(photon_check("sfg_photon_density_fock", &spec, t.kp)?);
    }
    Ok(())
}

fn recompute_checks(table: &mut CheckTable, scenario: &Scenario) -> Result<()> {
    let main = scenario.densities()?;
    let oracle = oracle_recompute(scenario)?;
    let tolerance = RECOMPUTE_TOLERANCE.max(scenario.simulation.quadrature.tolerance);
    for (name, m, o) in [
        ("dfg_density_recompute", main.dfg_single, oracle.dfg_single),
        ("sfg_density_recompute", main.sfg_single, oracle.sfg_single),
        ("spdc_pair_density_recompute", main.spdc_pair, oracle.spdc_pair),
    ] {
        if let (Some(m), Some(o)) = (m, o) {
            table.rows.push(CheckRow::new(name, m, o, tolerance));
        }
    }
    Ok(())
}

pub fn run_checks(scenario: &Scenario) -> Result<CheckTable> {
    let mut table = CheckTable::default();
    fixtures(&mut table)?;
    library_checks(&mut table, scenario)?;
    recompute_checks(&mut table, scenario)?;
    Ok(table)
}
