//! Monte Carlo model of the idealized set-up: source, preparation,
//! interaction and measurement, with optional revealed hidden outcomes.
//!
//! Run `r` draws from `stream(child_seed(seed, r), purpose)` for each
//! purpose in [`crate::rng::purpose`], so a log is independent of thread
//! count and of how many draws other runs consumed. The final outcome of a
//! run consumes exactly one uniform.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{arg, inner};
use crate::error::{Error, Result};
use crate::measurement::{collapse, outcome_probs, MeasurementOp};
use crate::rng::{child_seed, purpose, stream};
use crate::simplex::arc_distance;
use crate::state::{from_big_q, sample_state_prior, to_big_q, to_complex, BigQ, QuantumState, Sign, StateVectorC};
use crate::stats::chi_square_homogeneity;
use crate::transform::ComplexMap;

/// Upper bound on rejected source draws per run.
pub const MAX_RETRIES: u64 = 1_000_000;
/// Cells with fewer counts than this give no reliable majority sign.
pub const SIGN_MIN_COUNT: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Fixed(QuantumState<f64>),
    Prior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub measurement: MeasurementOp<f64>,
    pub outcome: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dim: usize,
    pub source: Source,
    /// `None` disables selection: every source output is passed on.
    pub preparation: Option<Preparation>,
    pub interaction: Option<ComplexMap<f64>>,
    pub measurement: MeasurementOp<f64>,
    pub runs: usize,
    pub seed: u64,
    pub reveal_hidden: bool,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::param("dimension must be positive"));
        }
        if self.runs == 0 {
            return Err(Error::param("need at least one run"));
        }
        if let Source::Fixed(s) = &self.source {
            Error::check_dim(n, s.dim())?;
        }
        if let Some(p) = &self.preparation {
            Error::check_dim(n, p.measurement.dim())?;
            if p.outcome >= p.measurement.outcomes() {
                return Err(Error::param(format!("preparation outcome {} out of range", p.outcome)));
            }
        }
        if let Some(m) = &self.interaction {
            Error::check_dim(n, m.dim())?;
        }
        Error::check_dim(n, self.measurement.dim())?;
        if self.reveal_hidden && self.measurement.is_degenerate() {
            return Err(Error::param("hidden outcomes need a non-degenerate final measurement"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HiddenLabel {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub outcome: usize,
    pub hidden: Option<(HiddenLabel, Sign)>,
    pub retries: u64,
}

/// Index of `(outcome, label, sign)` in the `4N` hidden alphabet.
pub fn hidden_cell(outcome: usize, label: HiddenLabel, sign: Sign) -> usize {
    4 * outcome + 2 * usize::from(label == HiddenLabel::B) + usize::from(sign == Sign::Minus)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub dim: usize,
    pub records: Vec<RunRecord>,
    /// Counts per final-measurement outcome.
    pub counts: Vec<u64>,
    /// Counts over the `4N` alphabet of [`hidden_cell`], if revealed.
    pub hidden_counts: Option<Vec<u64>>,
}

impl RunLog {
    pub fn from_records(dim: usize, outcomes: usize, records: Vec<RunRecord>, reveal: bool) -> Result<Self> {
        let mut counts = vec![0u64; outcomes];
        let mut hidden = reveal.then(|| vec![0u64; 4 * dim]);
        for r in &records {
            if r.outcome >= outcomes {
                return Err(Error::param(format!("run {}: outcome {} out of range", r.run, r.outcome)));
            }
            counts[r.outcome] += 1;
            match (hidden.as_mut(), r.hidden) {
                (Some(h), Some((l, s))) => h[hidden_cell(r.outcome, l, s)] += 1,
                (None, None) => {}
                _ => return Err(Error::param(format!("run {}: hidden outcome presence mismatch", r.run))),
            }
        }
        Ok(Self { dim, records, counts, hidden_counts: hidden })
    }

    pub fn runs(&self) -> usize {
        self.records.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.runs() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn mean_retries(&self) -> f64 {
        self.records.iter().map(|r| r.retries as f64).sum::<f64>() / self.runs() as f64
    }

    /// Counts over the `2N` alphabet `(outcome, label)`, summed over signs.
    pub fn label_counts(&self) -> Option<Vec<u64>> {
        self.hidden_counts.as_ref().map(|h| h.chunks(2).map(|c| c[0] + c[1]).collect())
    }
}

/// Per-run view of the state reaching the final measurement.
struct FinalStage {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    /// `(P_{a|i}, sign of cos χ_i, sign of sin χ_i)` in the final basis.
    hidden: Vec<(f64, Sign, Sign)>,
}

impl FinalStage {
    fn new(cfg: &PipelineConfig, v: &StateVectorC<f64>) -> Result<Self> {
        let p = outcome_probs(&cfg.measurement, v)?;
        let mut acc = 0.0;
        let cumulative = p
            .entries()
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        let hidden = if cfg.reveal_hidden {
            cfg.measurement
                .basis()
                .iter()
                .map(|b| {
                    let chi = arg(inner(b, v.as_vector()));
                    let c = chi.cos();
                    (c * c, Sign::of(c), Sign::of(chi.sin()))
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self { probs: p.into_inner(), cumulative, hidden })
    }

    fn sample_outcome(&self, u: f64) -> usize {
        let last = self.cumulative.len() - 1;
        let u = u * self.cumulative[last];
        self.cumulative.iter().position(|&c| u < c).unwrap_or(last)
    }
}

fn apply_opt(m: Option<&ComplexMap<f64>>, v: StateVectorC<f64>) -> Result<StateVectorC<f64>> {
    match m {
        Some(m) => m.apply(&v),
        None => Ok(v),
    }
}

struct Prepared<'a> {
    cfg: &'a PipelineConfig,
    pre: Option<&'a ComplexMap<f64>>,
    /// Set when the state reaching the measurement is the same every run.
    fixed: Option<(FinalStage, f64)>,
}

impl<'a> Prepared<'a> {
    fn new(cfg: &'a PipelineConfig, pre: Option<&'a ComplexMap<f64>>) -> Result<Self> {
        cfg.validate()?;
        if let Some(m) = pre {
            Error::check_dim(cfg.dim, m.dim())?;
        }
        let fixed = match &cfg.source {
            Source::Fixed(s) => {
                let v = apply_opt(pre, to_complex(s))?;
                let (v, p_sel) = match &cfg.preparation {
                    Some(p) => {
                        let p_sel = outcome_probs(&p.measurement, &v)?.entries()[p.outcome];
                        if p_sel < 1e-12 {
                            return Err(Error::UnreachablePreparation { outcome: p.outcome });
                        }
                        (collapse(&p.measurement, &v, p.outcome)?, p_sel)
                    }
                    None => (v, 1.0),
                };
                let v = apply_opt(cfg.interaction.as_ref(), v)?;
                Some((FinalStage::new(cfg, &v)?, p_sel))
            }
            Source::Prior => None,
        };
        Ok(Self { cfg, pre, fixed })
    }

    fn run(&self, r: usize) -> Result<RunRecord> {
        let seed = child_seed(self.cfg.seed, r as u64);
        let mut prep_rng = stream(seed, purpose::PREPARATION);
        let mut retries = 0u64;
        let owned;
        let stage = match &self.fixed {
            Some((stage, p_sel)) => {
                if self.cfg.preparation.is_some() {
                    while prep_rng.random::<f64>() >= *p_sel {
                        retries += 1;
                        if retries > MAX_RETRIES {
                            let outcome = self.cfg.preparation.as_ref().map_or(0, |p| p.outcome);
                            return Err(Error::UnreachablePreparation { outcome });
                        }
                    }
                }
                stage
            }
            None => {
                let mut src_rng = stream(seed, purpose::SOURCE);
                let v = loop {
                    let s = sample_state_prior::<f64, _>(self.cfg.dim, &mut src_rng);
                    let v = apply_opt(self.pre, to_complex(&s))?;
                    let Some(p) = &self.cfg.preparation else { break v };
                    let probs = outcome_probs(&p.measurement, &v)?;
                    let u: f64 = prep_rng.random();
                    let mut acc = 0.0;
                    let got = probs
                        .entries()
                        .iter()
                        .position(|&x| {
                            acc += x;
                            u < acc
                        })
                        .unwrap_or(probs.len() - 1);
                    if got == p.outcome {
                        break collapse(&p.measurement, &v, p.outcome)?;
                    }
                    retries += 1;
                    if retries > MAX_RETRIES {
                        return Err(Error::UnreachablePreparation { outcome: p.outcome });
                    }
                };
                let v = apply_opt(self.cfg.interaction.as_ref(), v)?;
                owned = FinalStage::new(self.cfg, &v)?;
                &owned
            }
        };
        let u: f64 = stream(seed, purpose::FINAL_OUTCOME).random();
        let outcome = stage.sample_outcome(u);
        let hidden = if self.cfg.reveal_hidden {
            let (p_a, sa, sb) = stage.hidden[outcome];
            let h: f64 = stream(seed, purpose::HIDDEN_LABEL).random();
            Some(if h < p_a { (HiddenLabel::A, sa) } else { (HiddenLabel::B, sb) })
        } else {
            None
        };
        Ok(RunRecord { run: r, outcome, hidden, retries })
    }
}

/// Outcome probabilities of the final measurement when the source is
/// fixed; `None` for a random source.
pub fn predicted_outcome_probs(cfg: &PipelineConfig) -> Result<Option<Vec<f64>>> {
    Ok(Prepared::new(cfg, None)?.fixed.map(|(stage, _)| stage.probs))
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunLog> {
    run_pipeline_with_pre(cfg, None)
}

/// Runs the pipeline with an extra interaction applied to the source
/// output before preparation.
pub fn run_pipeline_with_pre(cfg: &PipelineConfig, pre: Option<&ComplexMap<f64>>) -> Result<RunLog> {
    let prepared = Prepared::new(cfg, pre)?;
    let records = (0..cfg.runs).into_par_iter().map(|r| prepared.run(r)).collect::<Result<Vec<_>>>()?;
    RunLog::from_records(cfg.dim, cfg.measurement.outcomes(), records, cfg.reveal_hidden)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub passed: bool,
    pub alpha: f64,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub counts: Vec<Vec<u64>>,
}

/// Runs the pipeline once per pre-preparation interaction and tests the
/// observed count vectors for homogeneity at level `alpha`.
pub fn completeness_check(
    cfg: &PipelineConfig,
    pre_interactions: &[ComplexMap<f64>],
    alpha: f64,
) -> Result<CompletenessReport> {
    if pre_interactions.len() < 2 {
        return Err(Error::param("need at least two pre-preparation interactions"));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::param("alpha must lie in [0, 1)"));
    }
    let counts = pre_interactions
        .iter()
        .map(|m| run_pipeline_with_pre(cfg, Some(m)).map(|log| log.counts))
        .collect::<Result<Vec<_>>>()?;
    let chi = chi_square_homogeneity(&counts);
    Ok(CompletenessReport {
        passed: chi.p_value >= alpha,
        alpha,
        statistic: chi.statistic,
        dof: chi.dof,
        p_value: chi.p_value,
        counts,
    })
}

/// Posterior over `S^{2N-1}` concentrated in one orthant: a symmetric
/// Gaussian of width `sigma` around `mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePosterior {
    pub mean: BigQ<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferredState {
    /// Sign per `2N` cell; 0 for empty cells.
    pub orthant: Vec<i8>,
    pub posterior: SpherePosterior,
    /// Estimate in the coordinates of the final measurement basis.
    pub map_state: QuantumState<f64>,
    /// Cells whose few counts leave the sign undetermined.
    pub ambiguous_cells: Vec<usize>,
    pub runs: u64,
}

impl InferredState {
    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguous_cells.is_empty()
    }
}

/// Reads amplitudes and signs of the `2N` cells off a log with revealed
/// hidden outcomes.
pub fn infer_state(log: &RunLog) -> Result<InferredState> {
    let hidden = log
        .hidden_counts
        .as_ref()
        .ok_or_else(|| Error::param("inference needs revealed hidden outcomes"))?;
    let n: u64 = hidden.iter().sum();
    if n < 100 {
        return Err(Error::param(format!("need at least 100 runs, got {n}")));
    }
    let mut q = Vec::with_capacity(2 * log.dim);
    let mut orthant = Vec::with_capacity(2 * log.dim);
    let mut ambiguous = Vec::new();
    for (cell, pair) in hidden.chunks(2).enumerate() {
        let (plus, minus) = (pair[0], pair[1]);
        let total = plus + minus;
        let sign: i8 = match total {
            0 => 0,
            _ if minus > plus => -1,
            _ => 1,
        };
        if total > 0 && (total < SIGN_MIN_COUNT || plus == minus) {
            ambiguous.push(cell);
        }
        orthant.push(sign);
        let amp = (total as f64 / n as f64).sqrt();
        q.push(if sign < 0 { -amp } else { amp });
    }
    let mean = BigQ::new(q.clone()).or_else(|_| {
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        BigQ::new(q.iter().map(|x| x / norm).collect())
    })?;
    let map_state = from_big_q(&mean);
    Ok(InferredState {
        orthant,
        posterior: SpherePosterior { mean, sigma: 0.5 / (n as f64).sqrt() },
        map_state,
        ambiguous_cells: ambiguous,
        runs: n,
    })
}

/// `to_big_q` of `s` written in the basis of `m`.
pub fn state_in_basis(m: &MeasurementOp<f64>, v: &StateVectorC<f64>) -> Result<QuantumState<f64>> {
    let coords = m.basis_matrix().adjoint() * v.as_vector();
    crate::state::from_complex(&StateVectorC::new(coords)?)
}

/// Arc distance between two states on `S^{2N-1}`.
pub fn state_distance(a: &QuantumState<f64>, b: &QuantumState<f64>) -> f64 {
    arc_distance(to_big_q(a).point(), to_big_q(b).point())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyResult {
    pub runs: usize,
    pub distance: f64,
    /// Inferred from data on the transformed state.
    pub path_a: QuantumState<f64>,
    /// Inferred from data on the original state, then transformed.
    pub path_b: QuantumState<f64>,
}

fn direct_config(s: &QuantumState<f64>, meas: &MeasurementOp<f64>, runs: usize, seed: u64) -> PipelineConfig {
    PipelineConfig {
        dim: s.dim(),
        source: Source::Fixed(s.clone()),
        preparation: None,
        interaction: None,
        measurement: meas.clone(),
        runs,
        seed,
        reveal_hidden: true,
    }
}

/// Compares inference after transformation with transformation after
/// inference; both paths use independent data.
pub fn consistency_check(
    s: &QuantumState<f64>,
    m: &ComplexMap<f64>,
    meas: &MeasurementOp<f64>,
    runs: usize,
    seed: u64,
) -> Result<ConsistencyResult> {
    Error::check_dim(s.dim(), m.dim())?;
    Error::check_dim(s.dim(), meas.dim())?;
    let basis = meas.basis_matrix();
    let transformed = crate::state::from_complex(&m.apply(&to_complex(s))?)?;
    let log_a = run_pipeline(&direct_config(&transformed, meas, runs, child_seed(seed, 1)))?;
    let path_a = infer_state(&log_a)?.map_state;

    let log_b = run_pipeline(&direct_config(s, meas, runs, child_seed(seed, 2)))?;
    let est = infer_state(&log_b)?.map_state;
    let est_v = StateVectorC::new(&basis * to_complex(&est).as_vector())?;
    let path_b = state_in_basis(meas, &m.apply(&est_v)?)?;
    Ok(ConsistencyResult { runs, distance: state_distance(&path_a, &path_b), path_a, path_b })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub runs: usize,
    pub mean_distance: f64,
}

/// Mean consistency distance over `reps` seeds for each run count.
pub fn consistency_scaling(
    s: &QuantumState<f64>,
    m: &ComplexMap<f64>,
    meas: &MeasurementOp<f64>,
    run_counts: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<ScalingPoint>> {
    run_counts
        .iter()
        .enumerate()
        .map(|(i, &runs)| {
            let d = (0..reps)
                .map(|k| {
                    let sd = child_seed(child_seed(seed, i as u64), k as u64);
                    consistency_check(s, m, meas, runs, sd).map(|r| r.distance)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ScalingPoint { runs, mean_distance: d.iter().sum::<f64>() / reps as f64 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::C;
    use crate::rng::seeded;
    use crate::state::full_outcome_distribution;
    use crate::transform::{haar_unitary, Sigma};
    use nalgebra::DMatrix;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard() -> ComplexMap<f64> {
        let r = FRAC_1_SQRT_2;
        let u = DMatrix::from_row_slice(2, 2, &[C::new(r, 0.0), C::new(r, 0.0), C::new(r, 0.0), C::new(-r, 0.0)]);
        ComplexMap::new(u, Sigma::Unitary).unwrap()
    }

    fn cfg(source: Source, runs: usize) -> PipelineConfig {
        PipelineConfig {
            dim: 2,
            source,
            preparation: None,
            interaction: None,
            measurement: MeasurementOp::standard(2, None).unwrap(),
            runs,
            seed: 7,
            reveal_hidden: false,
        }
    }

    #[test]
    fn repetition_consistency() {
        let mut rng = seeded(1);
        let prep = MeasurementOp::from_columns(haar_unitary::<f64, _>(3, &mut rng).u(), vec![0.0, 1.0, 2.0]).unwrap();
        let c = PipelineConfig {
            dim: 3,
            source: Source::Prior,
            preparation: Some(Preparation { measurement: prep.clone(), outcome: 2 }),
            interaction: None,
            measurement: prep,
            runs: 2000,
            seed: 3,
            reveal_hidden: false,
        };
        let log = run_pipeline(&c).unwrap();
        assert_eq!(log.counts, vec![0, 0, 2000]);
        assert!(log.mean_retries() > 0.5);
    }

    #[test]
    fn hadamard_gives_even_split() {
        let mut c = cfg(Source::Fixed(QuantumState::basis(2, 0)), 10_000);
        c.interaction = Some(hadamard());
        let f = run_pipeline(&c).unwrap().frequencies();
        assert!((f[0] - 0.5).abs() < 0.015, "{f:?}");
    }

    #[test]
    fn zero_phases_give_label_a_plus() {
        let s = QuantumState::from_parts(vec![0.3, 0.7], vec![0.0, 0.0]).unwrap();
        let mut c = cfg(Source::Fixed(s), 500);
        c.reveal_hidden = true;
        let log = run_pipeline(&c).unwrap();
        assert!(log.records.iter().all(|r| r.hidden == Some((HiddenLabel::A, Sign::Plus))));
    }

    #[test]
    fn unreachable_preparation_is_reported() {
        let mut c = cfg(Source::Fixed(QuantumState::basis(2, 0)), 10);
        c.preparation = Some(Preparation { measurement: MeasurementOp::standard(2, None).unwrap(), outcome: 1 });
        assert_eq!(run_pipeline(&c), Err(Error::UnreachablePreparation { outcome: 1 }));
    }

    #[test]
    fn logs_are_reproducible() {
        let mut c = cfg(Source::Prior, 3000);
        c.reveal_hidden = true;
        c.preparation = Some(Preparation { measurement: MeasurementOp::standard(2, None).unwrap(), outcome: 0 });
        c.interaction = Some(hadamard());
        assert_eq!(run_pipeline(&c).unwrap(), run_pipeline(&c).unwrap());
    }

    #[test]
    fn hidden_frequencies_follow_full_distribution() {
        let mut rng = seeded(2);
        let s = sample_state_prior::<f64, _>(3, &mut rng);
        let u = haar_unitary::<f64, _>(3, &mut rng);
        let c = PipelineConfig {
            dim: 3,
            source: Source::Fixed(s.clone()),
            preparation: None,
            interaction: Some(u.clone()),
            measurement: MeasurementOp::standard(3, None).unwrap(),
            runs: 50_000,
            seed: 11,
            reveal_hidden: true,
        };
        let log = run_pipeline(&c).unwrap();
        let after = crate::state::from_complex(&u.apply(&to_complex(&s)).unwrap()).unwrap();
        let expect = full_outcome_distribution(&after);
        let got = log.label_counts().unwrap();
        for (g, p) in got.iter().zip(expect.entries()) {
            let f = *g as f64 / 50_000.0;
            assert!((f - p).abs() <= 4.0 * (p * (1.0 - p) / 50_000.0).sqrt() + 1e-12, "{f} vs {p}");
        }
    }

    #[test]
    fn completeness_examples() {
        let mut rng = seeded(4);
        let s = sample_state_prior::<f64, _>(3, &mut rng);
        let pres: Vec<_> = (0..3).map(|_| haar_unitary::<f64, _>(3, &mut rng)).collect();
        let prep = MeasurementOp::from_columns(haar_unitary::<f64, _>(3, &mut rng).u(), vec![0.0, 1.0, 2.0]).unwrap();
        let mut c = PipelineConfig {
            dim: 3,
            source: Source::Fixed(s),
            preparation: Some(Preparation { measurement: prep, outcome: 1 }),
            interaction: None,
            measurement: MeasurementOp::standard(3, None).unwrap(),
            runs: 10_000,
            seed: 5,
            reveal_hidden: false,
        };
        assert!(completeness_check(&c, &pres, 0.01).unwrap().passed);
        let same = vec![pres[0].clone(), pres[0].clone()];
        assert!(completeness_check(&c, &same, 0.01).unwrap().passed);
        c.preparation = None;
        assert!(!completeness_check(&c, &pres, 0.01).unwrap().passed);
        assert!(completeness_check(&c, &pres[..1], 0.01).is_err());
    }

    #[test]
    fn inference_recovers_state() {
        let s = QuantumState::from_parts(vec![0.3, 0.7], vec![0.4, 2.0]).unwrap();
        let mut c = cfg(Source::Fixed(s.clone()), 100_000);
        c.reveal_hidden = true;
        let inf = infer_state(&run_pipeline(&c).unwrap()).unwrap();
        let bound = 3.0 / (2.0 * 100_000f64.sqrt());
        assert!(state_distance(&inf.map_state, &s) < bound);
        assert!((inf.posterior.sigma - 0.5 / 100_000f64.sqrt()).abs() < 1e-15);
        assert!(!inf.is_ambiguous());
        assert_eq!(inf.orthant, vec![1, 1, -1, 1]);
    }

    #[test]
    fn zero_phase_state_is_recovered_with_zero_phases() {
        let s = QuantumState::from_parts(vec![0.6, 0.4], vec![0.0, 0.0]).unwrap();
        let mut c = cfg(Source::Fixed(s), 100_000);
        c.reveal_hidden = true;
        let inf = infer_state(&run_pipeline(&c).unwrap()).unwrap();
        assert!(inf.map_state.phases().iter().all(|x| x.abs() < 0.02));
        assert_eq!(inf.orthant, vec![1, 0, 1, 0]);
    }

    #[test]
    fn inference_needs_hidden_outcomes() {
        let log = run_pipeline(&cfg(Source::Prior, 200)).unwrap();
        assert!(infer_state(&log).is_err());
    }

    #[test]
    fn consistency_identity_and_decay() {
        let mut rng = seeded(6);
        let s = sample_state_prior::<f64, _>(2, &mut rng);
        let meas = MeasurementOp::standard(2, None).unwrap();
        let id = consistency_check(&s, &ComplexMap::identity(2), &meas, 10_000, 1).unwrap();
        assert!(id.distance < 4.0 * 3f64.sqrt() / (2.0 * 100.0));
        let u = haar_unitary::<f64, _>(2, &mut rng);
        let r = consistency_check(&s, &u, &meas, 100_000, 2).unwrap();
        assert!(r.distance < 0.02, "{}", r.distance);
    }
}
