//! Multinomial likelihoods, priors, grid and Laplace posteriors, the
//! Shannon-Jaynes entropy and information gain.
//!
//! Densities live on cell-centred uniform grids over a chart's coordinate
//! box. Node `k` of a one-dimensional axis sits at `lo + (k + ½)h`, so the
//! quadrature never evaluates a density on the simplex boundary, where the
//! information-gain prior is singular in several charts.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::pairwise_sum;
use crate::simplex::{unit_ball_surface_area, ChartKind, ParamChart, ProbVector};

/// Smallest accepted grid resolution per chart coordinate.
pub const MIN_RESOLUTION: usize = 64;
/// Default resolution per coordinate for `M ≤ 3`.
pub const DEFAULT_RESOLUTION: usize = 1024;
const MAX_NODES: usize = 50_000_000;

/// Outcome counts from `n` interrogations of an `M`-outcome source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    counts: Vec<u64>,
    n: u64,
}

impl CountRecord {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::param("a count record needs at least two outcomes"));
        }
        let n = counts.iter().sum();
        Ok(Self { counts, n })
    }

    /// Deterministic idealized data `m ≈ nP`: floors plus largest-remainder
    /// correction so that `Σm = n`. Ties go to the lower index.
    pub fn idealized(p: &ProbVector<f64>, n: u64) -> Result<Self> {
        let raw: Vec<f64> = p.entries().iter().map(|&x| x * n as f64).collect();
        let mut counts: Vec<u64> = raw.iter().map(|x| x.floor() as u64).collect();
        let assigned: u64 = counts.iter().sum();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = raw[a] - raw[a].floor();
            let fb = raw[b] - raw[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().take(n.saturating_sub(assigned) as usize) {
            counts[i] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn outcomes(&self) -> usize {
        self.counts.len()
    }

    /// Frequencies `m/n`; `None` when no data has been taken.
    pub fn frequencies(&self) -> Option<ProbVector<f64>> {
        (self.n > 0).then(|| {
            ProbVector::new(self.counts.iter().map(|&m| m as f64 / self.n as f64).collect())
                .expect("frequencies form a probability vector")
        })
    }
}

/// Log of the multinomial probability of `data` given `p`, in nats.
/// Returns `-∞` when an observed outcome has probability zero.
pub fn log_likelihood(data: &CountRecord, p: &ProbVector<f64>) -> Result<f64> {
    Error::check_dim(data.outcomes(), p.len())?;
    Ok(ln_multinomial(data) + kernel(data.counts(), p.entries()))
}

fn ln_multinomial(data: &CountRecord) -> f64 {
    ln_factorial(data.n) - data.counts.iter().map(|&m| ln_factorial(m)).sum::<f64>()
}

fn kernel(counts: &[u64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&m, &pi) in counts.iter().zip(p) {
        if m > 0 {
            if pi <= 0.0 {
                return f64::NEG_INFINITY;
            }
            s += m as f64 * pi.ln();
        }
    }
    s
}

/// Large-`n` form of the log-likelihood obtained from Stirling's formula:
/// `ln[(2πn)^{(1-M)/2} / √(Πfᵢ)] - n Σ fᵢ ln(fᵢ/Pᵢ)`.
pub fn stirling_log_likelihood(data: &CountRecord, p: &ProbVector<f64>) -> Result<f64> {
    Error::check_dim(data.outcomes(), p.len())?;
    let f = data.frequencies().ok_or_else(|| Error::Domain("no data".into()))?;
    if let Some(i) = f.entries().iter().position(|&x| x == 0.0) {
        return Err(Error::Domain(format!("frequency {i} is zero")));
    }
    let n = data.n as f64;
    let m = data.outcomes() as f64;
    let prefactor = 0.5 * (1.0 - m) * (2.0 * std::f64::consts::PI * n).ln()
        - 0.5 * f.entries().iter().map(|x| x.ln()).sum::<f64>();
    let mut rel = 0.0;
    for (&fi, &pi) in f.entries().iter().zip(p.entries()) {
        if pi <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        rel += fi * (fi / pi).ln();
    }
    Ok(prefactor - n * rel)
}

/// Cell-centred uniform grid over a chart's coordinate box.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGrid {
    pub chart: ParamChart,
    pub resolution: usize,
}

impl ChartGrid {
    pub fn new(chart: ParamChart, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::param(format!(
                "resolution {resolution} below minimum {MIN_RESOLUTION}"
            )));
        }
        if chart.kind == ChartKind::HypersphericalFull {
            return Err(Error::param("simplex densities need an orthant or simplex chart"));
        }
        let nodes = resolution
            .checked_pow(chart.dim() as u32)
            .filter(|&n| n <= MAX_NODES)
            .ok_or_else(|| Error::param("grid too large"))?;
        let _ = nodes;
        Ok(Self { chart, resolution })
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.chart.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.chart
            .domain::<f64>()
            .into_iter()
            .map(|(lo, hi)| (hi - lo) / self.resolution as f64)
            .collect()
    }

    /// Quadrature weight of every node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().into_iter().product()
    }

    /// Coordinates of node `idx`; the first coordinate varies slowest.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        let d = self.chart.dim();
        let dom = self.chart.domain::<f64>();
        let mut out = vec![0.0; d];
        let mut rest = idx;
        for l in (0..d).rev() {
            let k = rest % self.resolution;
            rest /= self.resolution;
            let (lo, hi) = dom[l];
            out[l] = lo + (k as f64 + 0.5) * (hi - lo) / self.resolution as f64;
        }
        out
    }

    /// Index of the node nearest to `x` (per-axis rounding).
    pub fn nearest(&self, x: &[f64]) -> usize {
        let dom = self.chart.domain::<f64>();
        x.iter().zip(dom).fold(0, |acc, (&v, (lo, hi))| {
            let h = (hi - lo) / self.resolution as f64;
            let k = (((v - lo) / h) - 0.5).round().clamp(0.0, (self.resolution - 1) as f64);
            acc * self.resolution + k as usize
        })
    }

    fn map_nodes<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        (0..self.len()).into_par_iter().map(|i| f(&self.node(i))).collect()
    }

    /// `∫ g` over the chart box with the midpoint rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        pairwise_sum(values) * self.cell_volume()
    }
}

/// A tabulated prior density over the nodes of a [`ChartGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPrior {
    pub grid: ChartGrid,
    pub values: Vec<f64>,
}

impl TabulatedPrior {
    pub fn new(grid: ChartGrid, values: Vec<f64>) -> Result<Self> {
        Error::check_dim(grid.len(), values.len())?;
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invariant("prior density must be finite and nonnegative".into()));
        }
        let z = grid.integrate(&values);
        if (z - 1.0).abs() > 1e-6 {
            return Err(Error::Normalization(format!("prior integrates to {z}")));
        }
        Ok(Self { grid, values })
    }
}

/// Prior over the outcome probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    /// Uniform over the simplex: density `(M-1)!` in `P_1..P_{M-1}`.
    UniformSimplex,
    /// Uniform over the positive orthant of the Q-sphere; in probability
    /// coordinates `(2/A_{M-1}) / √(P_1⋯P_M)`.
    InfoGain,
    Tabulated(TabulatedPrior),
}

impl PriorSpec {
    /// Density with respect to `dP_1⋯dP_{M-1}`.
    pub fn density_over_simplex(&self, p: &ProbVector<f64>) -> Result<f64> {
        let m = p.len();
        match self {
            PriorSpec::UniformSimplex => Ok(ln_gamma(m as f64).exp()),
            PriorSpec::InfoGain => {
                let prod: f64 = p.entries().iter().product();
                Ok(2.0 / unit_ball_surface_area::<f64>(m) / prod.sqrt())
            }
            PriorSpec::Tabulated(_) => {
                Err(Error::param("tabulated priors are only defined on their grid"))
            }
        }
    }

    /// Density in chart coordinates at `x`.
    pub fn density_in_chart(&self, chart: &ParamChart, x: &[f64]) -> Result<f64> {
        let m = chart.outcomes;
        match self {
            PriorSpec::UniformSimplex => {
                Ok(ln_gamma(m as f64).exp() * chart.simplex_volume_element(x)?)
            }
            PriorSpec::InfoGain => {
                let orthant_density = 2f64.powi(m as i32) / unit_ball_surface_area::<f64>(m);
                Ok(orthant_density * chart.area_element(x)?)
            }
            PriorSpec::Tabulated(t) => {
                if t.grid.chart != *chart {
                    return Err(Error::param("tabulated prior lives on a different chart"));
                }
                Ok(t.values[t.grid.nearest(x)])
            }
        }
    }

    /// Prior density on every node of `grid`.
    pub fn on_grid(&self, grid: &ChartGrid) -> Result<Vec<f64>> {
        if let PriorSpec::Tabulated(t) = self {
            if t.grid != *grid {
                return Err(Error::param("tabulated prior lives on a different grid"));
            }
            return Ok(t.values.clone());
        }
        let chart = grid.chart;
        // domain errors cannot occur on cell centres
        Ok(grid.map_nodes(|x| self.density_in_chart(&chart, x).unwrap_or(f64::NAN)))
    }

    /// `Pr(P | n, I)`. The number of trials is chosen by the experimenter
    /// independently of `P`, so conditioning on it changes nothing.
    pub fn given_trials(&self, _n: u64) -> PriorSpec {
        self.clone()
    }

    /// Quadrature integral of the prior over a grid.
    pub fn normalization(&self, grid: &ChartGrid) -> Result<f64> {
        Ok(grid.integrate(&self.on_grid(grid)?))
    }
}

/// A normalized density tabulated on a chart grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    pub grid: ChartGrid,
    pub density: Vec<f64>,
}

impl PosteriorGrid {
    /// Tabulates and normalizes an arbitrary nonnegative function.
    pub fn from_fn<F>(grid: ChartGrid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let vals = grid.map_nodes(f);
        let z = grid.integrate(&vals);
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Normalization(format!("integral {z}")));
        }
        let density = vals.into_iter().map(|v| v / z).collect();
        Ok(Self { grid, density })
    }

    /// Normalizes log-density values given per node.
    fn from_log(grid: ChartGrid, log_vals: Vec<f64>) -> Result<Self> {
        let max = log_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::DegenerateData);
        }
        let vals: Vec<f64> = log_vals.into_iter().map(|l| (l - max).exp()).collect();
        let z = grid.integrate(&vals);
        let density = vals.into_iter().map(|v| v / z).collect();
        Ok(Self { grid, density })
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.density)
    }

    /// Coordinates of the highest-density node.
    pub fn mode(&self) -> Vec<f64> {
        let (idx, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        self.grid.node(idx)
    }

    /// Total-variation distance `½∫|F - G|` to another density on the same
    /// grid.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        let diffs: Vec<f64> = self.density.iter().zip(other).map(|(a, b)| (a - b).abs()).collect();
        0.5 * self.grid.integrate(&diffs)
    }
}

/// Posterior `∝ likelihood × prior` tabulated on a chart grid.
pub fn posterior_grid(
    prior: &PriorSpec,
    data: &CountRecord,
    chart: &ParamChart,
    resolution: usize,
) -> Result<PosteriorGrid> {
    Error::check_dim(chart.outcomes, data.outcomes())?;
    let grid = ChartGrid::new(*chart, resolution)?;
    let prior_vals = prior.given_trials(data.n()).on_grid(&grid)?;
    let counts = data.counts();
    let log_vals: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let pr = prior_vals[i];
            if !(pr > 0.0) {
                return f64::NEG_INFINITY;
            }
            let p = chart.to_prob::<f64>(&grid.node(i)).expect("cell centres lie in the domain");
            kernel(counts, p.entries()) + pr.ln()
        })
        .collect();
    PosteriorGrid::from_log(grid, log_vals)
}

/// Gaussian approximation of the posterior in chart coordinates, with
/// precision matrix `B_{ll'} = 1/σ²_{ll'}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    pub mean: Vec<f64>,
    pub precision: DMatrix<f64>,
}

impl GaussianPosterior {
    pub fn new(mean: Vec<f64>, precision: DMatrix<f64>) -> Result<Self> {
        Error::check_dim(mean.len(), precision.nrows())?;
        let asym = (&precision - precision.transpose()).amax();
        if asym > 1e-12 * (1.0 + precision.amax()) {
            return Err(Error::Invariant("precision matrix not symmetric".into()));
        }
        if precision.clone().cholesky().is_none() {
            return Err(Error::Invariant("precision matrix not positive-definite".into()));
        }
        Ok(Self { mean, precision })
    }

    /// Standard deviations `1/√B_ll` along each coordinate.
    pub fn sigmas(&self) -> Vec<f64> {
        self.precision.diagonal().iter().map(|b| 1.0 / b.sqrt()).collect()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.precision.clone().try_inverse().expect("positive-definite")
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        let det = self.precision.determinant();
        let mut q = 0.0;
        for l in 0..d {
            for k in 0..d {
                q += (x[l] - self.mean[l]) * self.precision[(l, k)] * (x[k] - self.mean[k]);
            }
        }
        det.sqrt() / (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0) * (-0.5 * q).exp()
    }

    pub fn on_grid(&self, grid: &ChartGrid) -> Vec<f64> {
        grid.map_nodes(|x| self.density(x))
    }
}

/// Leading-order (Laplace) posterior about the chart point reproducing the
/// observed frequencies.
pub fn laplace_posterior(data: &CountRecord, chart: &ParamChart) -> Result<GaussianPosterior> {
    Error::check_dim(chart.outcomes, data.outcomes())?;
    let f = data.frequencies().ok_or_else(|| Error::Domain("no data".into()))?;
    if let Some(index) = f.entries().iter().position(|&x| x == 0.0) {
        return Err(Error::Boundary { index });
    }
    let mean = chart.from_prob(&f)?;
    let j = chart.prob_jacobian(&mean)?;
    let n = data.n() as f64;
    let d = chart.dim();
    let mut b = DMatrix::zeros(d, d);
    for l in 0..d {
        for k in l..d {
            let s: f64 = (0..chart.outcomes).map(|i| j[(i, l)] * j[(i, k)] / f.entries()[i]).sum();
            b[(l, k)] = n * s;
            b[(k, l)] = n * s;
        }
    }
    GaussianPosterior::new(mean, b)
}

/// Posterior widths along the chart coordinates converted to arc length on
/// the Q-sphere, `σ_l · ∂s/∂λ_l`.
pub fn arc_length_sigmas(post: &GaussianPosterior, chart: &ParamChart) -> Result<Vec<f64>> {
    let jq = chart.q_jacobian(&post.mean)?;
    Ok(post
        .sigmas()
        .into_iter()
        .enumerate()
        .map(|(l, s)| s * jq.column(l).norm())
        .collect())
}

/// `H[F] = -∫ F ln(F / prior)` in nats.
pub fn shannon_jaynes_entropy(density: &PosteriorGrid, prior: &PriorSpec) -> Result<f64> {
    let prior_vals = prior.on_grid(&density.grid)?;
    let mut terms = Vec::with_capacity(density.density.len());
    for (node, (&f, &p)) in density.density.iter().zip(&prior_vals).enumerate() {
        if f > 0.0 {
            if !(p > 0.0) {
                return Err(Error::Support { node });
            }
            terms.push(f * (f / p).ln());
        }
    }
    Ok(-density.grid.integrate(&terms))
}

/// Information gain `ΔK = H[prior] - H[posterior]` in nats. The prior's
/// entropy relative to itself is zero, so this is `∫ post ln(post/prior)`.
/// For improper-in-spirit charts the value depends on the coordinate box,
/// which is `chart.domain()`.
pub fn info_gain(
    prior: &PriorSpec,
    data: &CountRecord,
    chart: &ParamChart,
    resolution: usize,
) -> Result<f64> {
    let post = posterior_grid(prior, data, chart, resolution)?;
    Ok(-shannon_jaynes_entropy(&post, prior)?)
}
