//! Self-refinement study: rerun a scenario on finer k grids, with more time
//! nodes, and with both, and report how much the target densities move.

use std::fmt;

use crate::error::Result;
use crate::model::Band;
use crate::observables::NumberDensityReport;
use crate::quadrature::QuadratureConfig;
use crate::scenario::{Scenario, ScenarioRun};

/// Refinement levels run per axis.
pub const LEVELS: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    Base,
    K,
    T,
    Both,
}

impl fmt::Display for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refinement::Base => "base",
            Refinement::K => "k",
            Refinement::T => "t",
            Refinement::Both => "k+t",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub refinement: Refinement,
    /// Number of halvings of the grid spacing along the refined axis.
    pub level: u32,
    pub f_points: usize,
    pub sh_points: usize,
    pub t_base_nodes: usize,
    /// Largest node count the adaptive time rule settled on.
    pub t_nodes: usize,
    pub densities: NumberDensityReport,
    /// Max relative change of any density against the previous row on the
    /// same axis (the base row for `Both`); `None` for the base row.
    pub relative_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub tolerance: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn max_change(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.relative_change).fold(0.0, f64::max)
    }

    /// Change when both k spacing and time spacing are halved once.
    pub fn joint_change(&self) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.refinement == Refinement::Both)
            .and_then(|r| r.relative_change)
    }

    pub fn converged(&self) -> bool {
        self.max_change() < self.tolerance
    }
}

fn t_nodes(run: &ScenarioRun) -> usize {
    [
        run.dfg.as_ref().map(|a| a.t_nodes),
        run.sfg.as_ref().map(|a| a.t_nodes),
        run.spdc.as_ref().map(|g| g.t_nodes),
    ]
    .into_iter()
    .flatten()
    .max()
    .unwrap_or(0)
}

fn row(scenario: &Scenario, refinement: Refinement, level: u32, previous: Option<&NumberDensityReport>) -> Result<ConvergenceRow> {
    let run = scenario.run()?;
    let sim = &scenario.simulation;
    Ok(ConvergenceRow {
        refinement,
        level,
        f_points: sim.grid(Band::F).len(),
        sh_points: sim.grid(Band::SH).len(),
        t_base_nodes: sim.quadrature.base_nodes,
        t_nodes: t_nodes(&run),
        relative_change: previous.map(|p| p.max_relative_change(&run.densities)),
        densities: run.densities,
    })
}

fn refine(scenario: &Scenario, config: &QuadratureConfig, k_level: u32, t_level: u32) -> Result<Scenario> {
    let sim = &scenario.simulation;
    let factor = 1usize << k_level;
    let f = sim.grid(Band::F).refined_by(factor);
    let sh = sim.grid(Band::SH).refined_by(factor);
    let quadrature = QuadratureConfig {
        base_nodes: config.base_nodes << t_level,
        ..*config
    };
    Ok(scenario.with_grids(f, sh)?.with_quadrature(quadrature))
}

/// Base row, then [`LEVELS`] halvings of the k spacing, [`LEVELS`] doublings
/// of the base time-node count, and one joint refinement.
pub fn convergence_report(scenario: &Scenario, config: &QuadratureConfig) -> Result<ConvergenceTable> {
    let base = row(&refine(scenario, config, 0, 0)?, Refinement::Base, 0, None)?;
    let mut rows = vec![base];
    for (axis, k_step, t_step) in [(Refinement::K, 1, 0), (Refinement::T, 0, 1)] {
        let mut previous = rows[0].densities;
        for level in 1..=LEVELS {
            let r = row(&refine(scenario, config, k_step * level, t_step * level)?, axis, level, Some(&previous))?;
            previous = r.densities;
            rows.push(r);
        }
    }
    let base_densities = rows[0].densities;
    rows.push(row(&refine(scenario, config, 1, 1)?, Refinement::Both, 1, Some(&base_densities))?);
    Ok(ConvergenceTable {
        tolerance: config.tolerance,
        rows,
    })
}
