//! The information gain condition and its consequences: flatness of ΔK
//! under the orthant-uniform prior, the cos² outcome law, and the arcsine
//! marginal of the hidden conditional probabilities.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{info_gain, CountRecord, PriorSpec};
use crate::simplex::{sample_uniform_orthant, unit_ball_surface_area, ParamChart, ProbVector};
use crate::stats::{arcsine_cdf, ks_one_sample};

/// `½ ln(n/2πe) - ½ ln(f₁(1-f₁))`: the large-`n` gain for a uniform prior on
/// the two-outcome simplex.
pub fn closed_form_gain_uniform(n: u64, f1: f64) -> Result<f64> {
    if !(f1 > 0.0 && f1 < 1.0) {
        return Err(Error::Domain(format!("f1 = {f1} must lie strictly inside (0, 1)")));
    }
    let n = n as f64;
    Ok(0.5 * (n / (2.0 * std::f64::consts::PI * std::f64::consts::E)).ln()
        - 0.5 * (f1 * (1.0 - f1)).ln())
}

/// Large-`n` gain under the orthant-uniform prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoGainClosedForm {
    /// `((M-1)/2) ln(2n/πe)`
    pub leading: f64,
    /// `ln(A_{M-1}/2^M)`, the log of the orthant area, fixed by the prior's
    /// normalization.
    pub prior_constant: f64,
}

impl InfoGainClosedForm {
    pub fn total(&self) -> f64 {
        self.leading + self.prior_constant
    }
}

pub fn closed_form_gain_infogain_prior(m: usize, n: u64) -> Result<InfoGainClosedForm> {
    if m < 2 {
        return Err(Error::param("need at least two outcomes"));
    }
    let leading = (m as f64 - 1.0) / 2.0
        * (2.0 * n as f64 / (std::f64::consts::PI * std::f64::consts::E)).ln();
    let prior_constant = (unit_ball_surface_area::<f64>(m) / 2f64.powi(m as i32)).ln();
    Ok(InfoGainClosedForm { leading, prior_constant })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessPoint {
    pub truth: Vec<f64>,
    pub counts: Vec<u64>,
    pub delta_k: f64,
    /// Richardson estimate of the quadrature error, from a rerun at half
    /// resolution.
    pub quadrature_error: f64,
}

/// ΔK evaluated across a grid of true probability tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub n: u64,
    pub outcomes: usize,
    pub resolution: usize,
    /// Coordinate box of the chart in which ΔK was computed.
    pub chart_domain: Vec<(f64, f64)>,
    pub points: Vec<FlatnessPoint>,
    pub spread: f64,
    /// Mean ΔK over the grid.
    pub fitted_constant: f64,
    pub max_quadrature_error: f64,
}

/// Computes ΔK with idealized counts `m = round(nP)` at every grid point,
/// in the orthant hyperspherical chart.
pub fn verify_flatness(
    prior: &PriorSpec,
    m: usize,
    n: u64,
    grid: &[ProbVector<f64>],
    resolution: usize,
) -> Result<FlatnessReport> {
    if m < 2 {
        return Err(Error::param("need at least two outcomes"));
    }
    if grid.is_empty() {
        return Err(Error::param("empty probability grid"));
    }
    for p in grid {
        Error::check_dim(m, p.len())?;
        if !p.is_interior() {
            return Err(Error::Domain("flatness grid points must be interior".into()));
        }
    }
    let chart = ParamChart::hyperspherical(m);
    let points = grid
        .par_iter()
        .map(|p| {
            let data = CountRecord::idealized(p, n)?;
            let delta_k = info_gain(prior, &data, &chart, resolution)?;
            let coarse = info_gain(prior, &data, &chart, (resolution / 2).max(2))?;
            Ok(FlatnessPoint {
                truth: p.entries().to_vec(),
                counts: data.counts().to_vec(),
                delta_k,
                quadrature_error: (delta_k - coarse).abs() / 3.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.delta_k), hi.max(p.delta_k)));
    let fitted_constant = points.iter().map(|p| p.delta_k).sum::<f64>() / points.len() as f64;
    Ok(FlatnessReport {
        n,
        outcomes: m,
        resolution,
        chart_domain: chart.domain::<f64>(),
        spread: hi - lo,
        fitted_constant,
        max_quadrature_error: points.iter().map(|p| p.quadrature_error).fold(0.0, f64::max),
        points,
    })
}

/// Two-outcome grid `P₁ ∈ {0.1, …, 0.9}`.
pub fn two_outcome_grid() -> Vec<ProbVector<f64>> {
    (1..=9)
        .map(|k| {
            let p = k as f64 / 10.0;
            ProbVector::new(vec![p, 1.0 - p]).unwrap()
        })
        .collect()
}

/// Three-outcome interior grid built from a 5×5 lattice of orthant angles.
pub fn three_outcome_grid() -> Vec<ProbVector<f64>> {
    let chart = ParamChart::hyperspherical(3);
    let step = std::f64::consts::FRAC_PI_2 / 6.0;
    let mut out = Vec::with_capacity(25);
    for a in 1..=5 {
        for b in 1..=5 {
            out.push(chart.to_prob(&[a as f64 * step, b as f64 * step]).unwrap());
        }
    }
    out
}

/// Parameters of the outcome law `cos²(aλ + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FFunctionParams {
    pub a: f64,
    pub b: f64,
    pub sign_f: i8,
    pub sign_ftilde: i8,
}

impl FFunctionParams {
    pub fn new(a: f64, b: f64, sign_f: i8, sign_ftilde: i8) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::param("a must be nonzero: the amplitude function is not constant"));
        }
        if sign_f.abs() != 1 || sign_ftilde.abs() != 1 {
            return Err(Error::param("signs must be ±1"));
        }
        Ok(Self { a, b, sign_f, sign_ftilde })
    }

    pub fn positive(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 1, 1)
    }

    pub fn f(&self, x: f64) -> f64 {
        self.sign_f as f64 * (self.a * x + self.b).cos()
    }

    pub fn f_tilde(&self, x: f64) -> f64 {
        self.sign_ftilde as f64 * (self.a * x + self.b).sin()
    }
}

/// `P₁ = cos²(aλ₁ + b)`.
pub fn malus_law(lambda1: f64, params: &FFunctionParams) -> f64 {
    (params.a * lambda1 + params.b).cos().powi(2)
}

/// Maximum over `grid` of `| |dP₁/dλ₁| - 2|a|√(P₁(1-P₁)) |`, with the
/// derivative taken analytically.
pub fn malus_ode_residual(params: &FFunctionParams, grid: &[f64]) -> f64 {
    grid.iter().fold(0.0_f64, |m, &l| {
        let phase = params.a * l + params.b;
        let p = phase.cos().powi(2);
        let dp = -params.a * (2.0 * phase).sin();
        let r = (dp.abs() - 2.0 * params.a.abs() * (p * (1.0 - p)).max(0.0).sqrt()).abs();
        m.max(r)
    })
}

/// RK4 step size for the outcome-law integrator.
pub const MALUS_STEP: f64 = 1e-3;
/// Width, in phase units, of the band next to `P₁ ∈ {0, 1}` where the
/// square-root right-hand side is not Lipschitz.
pub const MALUS_GUARD: f64 = 0.01;

/// Tabulated trajectory `P₁(λ₁)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MalusTrajectory {
    pub lambda: Vec<f64>,
    pub p1: Vec<f64>,
    /// True when integration stopped at the guard band of a boundary.
    pub reached_boundary: bool,
}

impl MalusTrajectory {
    pub fn max_deviation(&self, exact: impl Fn(f64) -> f64) -> f64 {
        self.lambda
            .iter()
            .zip(&self.p1)
            .fold(0.0_f64, |m, (&l, &p)| m.max((p - exact(l)).abs()))
    }
}

/// Integrates `dP₁/dλ₁ = -2a√(P₁(1-P₁))` from `P₁(0) = cos²b` with classic
/// RK4 at step [`MALUS_STEP`] until the trajectory enters the guard band
/// of the boundary it is heading to.
///
/// On a boundary the right-hand side vanishes and the equation admits the
/// stationary solution; there the integrator leaves along the only
/// non-stationary branch, integrating `w = √(distance to boundary)`, which
/// obeys the regular equation `dw/dλ = |a|√(1-w²)`, until it clears the
/// guard band.
pub fn solve_malus_ivp(a: f64, b: f64) -> Result<MalusTrajectory> {
    solve_malus_ivp_to(a, b, f64::INFINITY)
}

/// As [`solve_malus_ivp`], stopping at `lambda_max` at the latest.
pub fn solve_malus_ivp_to(a: f64, b: f64, lambda_max: f64) -> Result<MalusTrajectory> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::param("a must be nonzero"));
    }
    let guard = MALUS_GUARD.sin().powi(2);
    let h = MALUS_STEP;
    let rate = 2.0 * a.abs();
    let mut lambda = vec![0.0];
    let mut p1 = vec![b.cos().powi(2)];
    let mut p = p1[0];
    let mut l = 0.0;

    // direction of travel: +1 towards P₁ = 1, -1 towards 0
    let dist = p.min(1.0 - p);
    let mut dir = if a > 0.0 { -1.0 } else { 1.0 };
    if dist < guard {
        let at_top = p > 0.5;
        dir = if at_top { -1.0 } else { 1.0 };
        // regularized start-up: w = √(distance), dw/dλ = |a|√(1-w²)
        let mut w = dist.sqrt();
        let g = |w: f64| 0.5 * rate * (1.0 - w * w).max(0.0).sqrt();
        while w * w < guard && l < lambda_max {
            let k1 = g(w);
            let k2 = g(w + 0.5 * h * k1);
            let k3 = g(w + 0.5 * h * k2);
            let k4 = g(w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            l += h;
            p = if at_top { 1.0 - w * w } else { w * w };
            lambda.push(l);
            p1.push(p);
        }
    }

    let f = |p: f64| dir * rate * (p * (1.0 - p)).max(0.0).sqrt();
    let mut reached_boundary = false;
    while l < lambda_max {
        let k1 = f(p);
        let k2 = f(p + 0.5 * h * k1);
        let k3 = f(p + 0.5 * h * k2);
        let k4 = f(p + h * k3);
        let next = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let target_dist = if dir > 0.0 { 1.0 - next } else { next };
        if target_dist < guard {
            reached_boundary = true;
            break;
        }
        p = next;
        l += h;
        lambda.push(l);
        p1.push(p);
    }
    Ok(MalusTrajectory { lambda, p1, reached_boundary })
}

/// Draws `samples` points uniformly from the positive orthant of
/// `S^{2N-1}` and compares each hidden conditional
/// `P_{a|i} = P̃_{2i-1}/(P̃_{2i-1}+P̃_{2i})` with the arcsine law.
/// Returns one KS distance per index `i`.
pub fn hidden_marginal_prior_check<R: Rng + ?Sized>(
    n_outcomes: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_outcomes < 1 {
        return Err(Error::param("N must be positive"));
    }
    let mut cols = vec![Vec::with_capacity(samples); n_outcomes];
    for _ in 0..samples {
        let q = sample_uniform_orthant::<f64, _>(2 * n_outcomes, rng);
        let e = q.entries();
        for (i, col) in cols.iter_mut().enumerate() {
            let a = e[2 * i] * e[2 * i];
            let b = e[2 * i + 1] * e[2 * i + 1];
            col.push(a / (a + b));
        }
    }
    Ok(cols.iter().map(|c| ks_one_sample(c, arcsine_cdf)).collect())
}

/// Outcome of solving the phase-law equation numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FFamilyCheck {
    pub params: FFunctionParams,
    /// Sup-norm distance between the numerical solution and `cos²(aχ+b)`.
    pub max_deviation: f64,
    /// `max |f² + f̃² - 1|` over the sampled phases.
    pub pythagorean_residual: f64,
}

/// Solves `dF/dχ = -c√(F(1-F))` from `F(0) = F0` numerically and certifies
/// the solution is `cos²(aχ + b)` with `a = c/2`, `b = arccos √F0`. Also
/// checks `f² + f̃² = 1` for all four sign branches at `phases`.
pub fn solve_f_from_uniform_chi(c: f64, f0: f64, phases: &[f64]) -> Result<FFamilyCheck> {
    if !(0.0..=1.0).contains(&f0) {
        return Err(Error::Domain("F(0) must be a probability".into()));
    }
    let a = c / 2.0;
    let b = f0.sqrt().acos();
    let params = FFunctionParams::positive(a, b)?;
    let traj = solve_malus_ivp(a, b)?;
    let max_deviation = traj.max_deviation(|x| malus_law(x, &params));
    let mut pythagorean_residual = 0.0_f64;
    for sf in [-1, 1] {
        for st in [-1, 1] {
            let pr = FFunctionParams::new(a, b, sf, st)?;
            for &x in phases {
                let r = (pr.f(x).powi(2) + pr.f_tilde(x).powi(2) - 1.0).abs();
                pythagorean_residual = pythagorean_residual.max(r);
            }
        }
    }
    Ok(FFamilyCheck { params, max_deviation, pythagorean_residual })
}
