//! CSV and JSON writers. Every float is printed with 17 significant digits.

use std::fmt::Write as _;

use chi2sim::convergence::ConvergenceTable;
use chi2sim::observables::{BiphotonAmplitude, SpectralAmplitude};
use chi2sim::ratios::{DeltaCurve, RatioReport};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn spectrum_csv(a: &SpectralAmplitude) -> String {
    let mut out = String::from("k,re_A,im_A,density\n");
    for (k, v) in a.grid.points().zip(&a.values) {
        let _ = writeln!(out, "{},{},{},{}", num(k), num(v.re), num(v.im), num(v.norm_sqr()));
    }
    out
}

pub fn biphoton_csv(g: &BiphotonAmplitude) -> String {
    let n = g.grid.len();
    let mut out = String::from("k1,k2,re_G,im_G,pair_density\n");
    for i in 0..n {
        let k1 = num(g.grid.point(i));
        for j in 0..n {
            let v = g.at(i, j);
            let _ = writeln!(
                out,
                "{k1},{},{},{},{}",
                num(g.grid.point(j)),
                num(v.re),
                num(v.im),
                num(g.coincidence_density_at(i, j))
            );
        }
    }
    out
}

pub fn figure2_csv(c: &DeltaCurve) -> String {
    let mut out = String::from("beta_over_betaSH,delta_minus,delta_plus,scaled_abs_difference\n");
    for p in &c.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(p.beta_ratio),
            num(p.delta_minus),
            num(p.delta_plus),
            num(p.scaled_difference)
        );
    }
    out
}

pub fn convergence_csv(t: &ConvergenceTable) -> String {
    let mut out = String::from(
        "refinement,level,F_n,SH_n,t_base_nodes,t_nodes,dfg_density,sfg_density,spdc_pair_density,relative_change\n",
    );
    for r in &t.rows {
        let d = &r.densities;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.refinement,
            r.level,
            r.f_points,
            r.sh_points,
            r.t_base_nodes,
            r.t_nodes,
            opt(d.dfg_single),
            opt(d.sfg_single),
            opt(d.spdc_pair),
            opt(r.relative_change)
        );
    }
    out
}

/// A float emitted in JSON with the same 17-digit text as the CSV output;
/// non-finite values become `null`.
#[derive(Debug, Clone, Copy)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(num(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Serialize)]
pub struct RatioJson {
    pub process: String,
    pub ratio: Sig17,
    pub ideal: Sig17,
    pub correction_factor: Sig17,
    pub narrow_field_approximation: Sig17,
    pub approximation_flagged: bool,
    pub classical_density: Sig17,
    pub pair_density: Sig17,
    pub ks: Sig17,
    pub ki: Sig17,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp: Option<Sig17>,
    #[serde(rename = "dk_F")]
    pub dk_f: Sig17,
    #[serde(rename = "dk_SH")]
    pub dk_sh: Sig17,
    pub t_nodes: usize,
}

impl From<&RatioReport> for RatioJson {
    fn from(r: &RatioReport) -> Self {
        Self {
            process: r.process.to_string(),
            ratio: Sig17(r.ratio),
            ideal: Sig17(r.ideal),
            correction_factor: Sig17(r.correction),
            narrow_field_approximation: Sig17(r.approximation),
            approximation_flagged: r.approximation_flagged,
            classical_density: Sig17(r.classical_density),
            pair_density: Sig17(r.pair_density),
            ks: Sig17(r.ks),
            ki: Sig17(r.ki),
            kp: r.kp.map(Sig17),
            dk_f: Sig17(r.dk_f),
            dk_sh: Sig17(r.dk_sh),
            t_nodes: r.t_nodes,
        }
    }
}

#[derive(Serialize)]
pub struct AchievedTolerance {
    pub dfg: Option<Sig17>,
    pub sfg: Option<Sig17>,
    pub spdc: Option<Sig17>,
}

#[derive(Serialize)]
pub struct RatiosJson {
    pub dfg: Option<RatioJson>,
    pub sfg: Option<RatioJson>,
    pub achieved_tolerance: AchievedTolerance,
    pub requested_tolerance: Sig17,
    pub narrowness_warnings: Vec<String>,
}
