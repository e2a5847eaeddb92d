//! JSON forms of states, maps, operators and pipeline configurations, and
//! the CSV number format.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::C;
use crate::error::{Error, Result};
use crate::measurement::{eigen_measurement, MeasurementOp};
use crate::sim::{PipelineConfig, Preparation, Source};
use crate::state::QuantumState;
use crate::transform::{embed_complex, ComplexMap, OrthoMap, Sigma};

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub n: usize,
    pub probs: Vec<f64>,
    pub phases: Vec<f64>,
}

impl StateJson {
    pub fn to_state(&self) -> Result<QuantumState<f64>> {
        Error::check_dim(self.n, self.probs.len())?;
        QuantumState::from_parts(self.probs.clone(), self.phases.clone())
    }

    pub fn from_state(s: &QuantumState<f64>) -> Self {
        Self { n: s.dim(), probs: s.probs().entries().to_vec(), phases: s.phases().to_vec() }
    }
}

/// Row-major real and imaginary parts; `im` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

fn real_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::param("matrix rows must be nonempty and of equal length"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ComplexMatrixJson {
    pub fn to_matrix(&self) -> Result<DMatrix<C<f64>>> {
        let re = real_matrix(&self.re)?;
        let im = match &self.im {
            Some(im) => real_matrix(im)?,
            None => DMatrix::zeros(re.nrows(), re.ncols()),
        };
        if re.shape() != im.shape() {
            return Err(Error::param("re and im parts differ in shape"));
        }
        Ok(re.zip_map(&im, C::new))
    }

    pub fn from_matrix(m: &DMatrix<C<f64>>) -> Self {
        Self { re: rows_of(&m.map(|z| z.re)), im: Some(rows_of(&m.map(|z| z.im))) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapJson {
    Complex {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
        sigma: Sigma,
    },
    Orthogonal {
        matrix: Vec<Vec<f64>>,
    },
}

impl MapJson {
    pub fn from_complex(c: &ComplexMap<f64>) -> Self {
        let m = ComplexMatrixJson::from_matrix(c.u());
        MapJson::Complex { re: m.re, im: m.im, sigma: c.sigma() }
    }

    /// Raw real matrix, before the orthogonality check.
    pub fn real_matrix(&self) -> Result<DMatrix<f64>> {
        match self {
            MapJson::Orthogonal { matrix } => real_matrix(matrix),
            MapJson::Complex { re, im, sigma } => {
                let u = ComplexMatrixJson { re: re.clone(), im: im.clone() }.to_matrix()?;
                let c = ComplexMap::new(u, *sigma)?;
                Ok(embed_complex(&c).matrix().clone())
            }
        }
    }

    pub fn to_ortho(&self) -> Result<OrthoMap<f64>> {
        OrthoMap::new(self.real_matrix()?)
    }

    pub fn to_complex(&self) -> Result<ComplexMap<f64>> {
        match self {
            MapJson::Complex { re, im, sigma } => {
                ComplexMap::new(ComplexMatrixJson { re: re.clone(), im: im.clone() }.to_matrix()?, *sigma)
            }
            MapJson::Orthogonal { .. } => {
                crate::transform::recast_to_complex(&self.to_ortho()?, crate::transform::INVARIANT_TOL)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorJson {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Option<Vec<f64>>,
}

impl VectorJson {
    pub fn to_vector(&self) -> Result<DVector<C<f64>>> {
        let im = self.im.clone().unwrap_or_else(|| vec![0.0; self.re.len()]);
        Error::check_dim(self.re.len(), im.len())?;
        Ok(DVector::from_iterator(self.re.len(), self.re.iter().zip(&im).map(|(&a, &b)| C::new(a, b))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorJson {
    Hermitian {
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
    Basis {
        vectors: Vec<VectorJson>,
        values: Vec<f64>,
    },
    Standard {
        n: usize,
        #[serde(default)]
        values: Option<Vec<f64>>,
    },
}

impl OperatorJson {
    pub fn to_measurement(&self) -> Result<MeasurementOp<f64>> {
        match self {
            OperatorJson::Hermitian { re, im } => {
                eigen_measurement(&ComplexMatrixJson { re: re.clone(), im: im.clone() }.to_matrix()?)
            }
            OperatorJson::Basis { vectors, values } => {
                MeasurementOp::new(vectors.iter().map(VectorJson::to_vector).collect::<Result<_>>()?, values.clone())
            }
            OperatorJson::Standard { n, values } => MeasurementOp::standard(*n, values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceJson {
    Fixed { state: StateJson },
    Prior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationJson {
    pub measurement: OperatorJson,
    pub outcome: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineJson {
    pub n: usize,
    pub source: SourceJson,
    #[serde(default)]
    pub preparation: Option<PreparationJson>,
    #[serde(default)]
    pub interaction: Option<MapJson>,
    pub measurement: OperatorJson,
    pub runs: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub reveal_hidden: bool,
}

impl PipelineJson {
    pub fn to_config(&self, seed_override: Option<u64>) -> Result<PipelineConfig> {
        let source = match &self.source {
            SourceJson::Fixed { state } => Source::Fixed(state.to_state()?),
            SourceJson::Prior => Source::Prior,
        };
        let preparation = self
            .preparation
            .as_ref()
            .map(|p| Ok::<_, Error>(Preparation { measurement: p.measurement.to_measurement()?, outcome: p.outcome }))
            .transpose()?;
        let cfg = PipelineConfig {
            dim: self.n,
            source,
            preparation,
            interaction: self.interaction.as_ref().map(MapJson::to_complex).transpose()?,
            measurement: self.measurement.to_measurement()?,
            runs: self.runs,
            seed: seed_override.or(self.seed).unwrap_or(0),
            reveal_hidden: self.reveal_hidden,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
