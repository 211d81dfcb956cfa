//! Integration engine for the wavenumber and time integrals.
//!
//! Wavenumber integrals run on fixed uniform grids with the trapezoid rule,
//! so that the same grids can carry waveform samples and per-bin densities.
//! Time integrals use Gauss-Legendre rules whose node count is doubled until
//! successive estimates agree to the requested relative tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::InteractionWindow;

/// Uniform grid `min, min + delta, ..., max` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    min: f64,
    max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::param("grid", "bounds must be finite"));
        }
        if n < 2 {
            return Err(Error::param("grid.n", format!("need at least 2 points, got {n}")));
        }
        if max <= min {
            return Err(Error::param("grid.max", format!("max {max} must exceed min {min}")));
        }
        Ok(Self { min, max, n })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bin width.
    pub fn delta(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.delta()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.delta()
        } else {
            self.delta()
        }
    }

    /// Index of the node at `k`, if `k` lies on the grid (to 1e-9 of a bin).
    pub fn index_of(&self, k: f64) -> Option<usize> {
        let pos = (k - self.min) / self.delta();
        let i = pos.round();
        if i < 0.0 || i > (self.n - 1) as f64 || (pos - i).abs() > 1e-9 {
            return None;
        }
        Some(i as usize)
    }

    pub fn require_index(&self, k: f64) -> Result<usize> {
        self.index_of(k).ok_or(Error::OffGrid {
            k,
            min: self.min,
            max: self.max,
        })
    }

    /// Same interval with half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }

    /// Same interval with the spacing divided by `factor`.
    pub fn refined_by(&self, factor: usize) -> Self {
        Self {
            n: factor * (self.n - 1) + 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub tolerance: f64,
    pub max_doublings: u32,
    pub base_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_doublings: 6,
            base_nodes: 64,
        }
    }
}

impl QuadratureConfig {
    pub fn new(tolerance: f64, max_doublings: u32, base_nodes: usize) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::param("quadrature.tolerance", "must be positive"));
        }
        if base_nodes < 1 {
            return Err(Error::param("quadrature.nodes", "need at least one node"));
        }
        Ok(Self {
            tolerance,
            max_doublings,
            base_nodes,
        })
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on the three-term Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, p_prev) = legendre_pair(n, x);
                let dp = nf * (x * p - p_prev) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (p, p_prev) = legendre_pair(n, x);
            let dp = nf * (x * p - p_prev) / (x * x - 1.0);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<Complex64>
    where
        F: FnMut(f64) -> Complex64,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, w) in self.mapped(a, b) {
            let v = f(t);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NumericalDomain { abscissa: t });
            }
            acc += v * w;
        }
        Ok(acc)
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut p_prev = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Trapezoid rule over `grid`.
pub fn integrate_1d<F>(mut f: F, grid: &Grid1D) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..grid.len() {
        let k = grid.point(i);
        let v = f(k);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NumericalDomain { abscissa: k });
        }
        acc += v * grid.weight(i);
    }
    Ok(acc)
}

/// Result of an adaptive time integration.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeIntegral<T> {
    pub value: T,
    /// Relative change between the last two node counts; `None` when only
    /// one rule was evaluated (zero doublings allowed).
    pub achieved_tolerance: Option<f64>,
    pub nodes: usize,
    pub doublings: u32,
}

/// Scalar changes below this fraction of the absolute-integrand mass are
/// treated as roundoff, so integrals that cancel to zero still converge.
const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Integrates `f` over the interaction window, doubling the Gauss-Legendre
/// node count until the relative change drops below `config.tolerance`.
pub fn integrate_t_window<F>(
    mut f: F,
    window: &InteractionWindow,
    config: &QuadratureConfig,
) -> Result<TimeIntegral<Complex64>>
where
    F: FnMut(f64) -> Complex64,
{
    let (t0, t1) = (window.t0(), window.t1());
    let mut nodes = config.base_nodes;
    let mut previous: Option<Complex64> = None;
    let mut achieved = None;
    for doubling in 0..=config.max_doublings {
        let rule = GaussLegendre::new(nodes);
        let mut value = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (t, w) in rule.mapped(t0, t1) {
            let v = f(t);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NumericalDomain { abscissa: t });
            }
            value += v * w;
            mass += v.norm() * w;
        }
        if let Some(prev) = previous {
            let scale = value.norm().max(ROUNDOFF_FLOOR * mass);
            let change = if scale == 0.0 {
                0.0
            } else {
                (value - prev).norm() / scale
            };
            achieved = Some(change);
            if change < config.tolerance {
                return Ok(TimeIntegral {
                    value,
                    achieved_tolerance: achieved,
                    nodes,
                    doublings: doubling,
                });
            }
        }
        previous = Some(value);
        if doubling == config.max_doublings {
            break;
        }
        nodes *= 2;
    }
    let best = previous.expect("at least one rule evaluated");
    match achieved {
        None => Ok(TimeIntegral {
            value: best,
            achieved_tolerance: None,
            nodes,
            doublings: 0,
        }),
        Some(achieved) => Err(Error::ConvergenceFailure {
            best: vec![best],
            achieved,
            requested: config.tolerance,
            nodes,
        }),
    }
}

/// Vector-valued counterpart of [`integrate_t_window`]. `eval` receives a
/// Gauss-Legendre rule and returns the integrals of every component under
/// that rule. The relative change is measured in the max norm over components.
pub fn refine_t_window<F>(
    window: &InteractionWindow,
    config: &QuadratureConfig,
    mut eval: F,
) -> Result<TimeIntegral<Vec<Complex64>>>
where
    F: FnMut(&GaussLegendre, f64, f64) -> Result<Vec<Complex64>>,
{
    let (t0, t1) = (window.t0(), window.t1());
    let mut nodes = config.base_nodes;
    let mut previous: Option<Vec<Complex64>> = None;
    let mut achieved = None;
    for doubling in 0..=config.max_doublings {
        let rule = GaussLegendre::new(nodes);
        let value = eval(&rule, t0, t1)?;
        if let Some(prev) = &previous {
            let scale = value.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let diff = value
                .iter()
                .zip(prev)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let change = if diff == 0.0 { 0.0 } else { diff / scale };
            achieved = Some(change);
            if change < config.tolerance {
                return Ok(TimeIntegral {
                    value,
                    achieved_tolerance: achieved,
                    nodes,
                    doublings: doubling,
                });
            }
        }
        previous = Some(value);
        if doubling == config.max_doublings {
            break;
        }
        nodes *= 2;
    }
    let best = previous.expect("at least one rule evaluated");
    match achieved {
        None => Ok(TimeIntegral {
            value: best,
            achieved_tolerance: None,
            nodes,
            doublings: 0,
        }),
        Some(achieved) => Err(Error::ConvergenceFailure {
            best,
            achieved,
            requested: config.tolerance,
            nodes,
        }),
    }
}
