//! Synthetic prediction datasets.

use bidsynth::{DiscretePrediction, Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbMode {
    /// Every point has probability `1/k`.
    UniformEqual,
    /// Independent `U[0,1]` weights scaled to sum to one.
    IidUniformNormalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValueMode {
    Uniform,
    /// Normal values, redrawn until they land inside the support.
    Gaussian { center: f64, sigma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub k: usize,
    pub low: f64,
    pub high: f64,
    pub prob_mode: ProbMode,
    pub value_mode: ValueMode,
    pub samples: usize,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.samples == 0 {
            return Err(Error::Invalid("k and samples must be positive".into()));
        }
        if !(self.low >= 1.0 && self.high > self.low && self.high.is_finite()) {
            return Err(Error::Invalid(format!("bad support [{}, {}]", self.low, self.high)));
        }
        if let ValueMode::Gaussian { sigma, center } = self.value_mode {
            if !(sigma > 0.0 && sigma.is_finite() && center.is_finite()) {
                return Err(Error::Invalid(format!("bad gaussian ({center}, {sigma})")));
            }
        }
        Ok(())
    }
}

/// The six datasets of the benchmark: two probability modes times uniform and
/// two truncated Gaussian value modes, `k = 4` points in `[1, 10^4]`.
pub fn standard_datasets(samples: usize, k: usize) -> Vec<DatasetSpec> {
    let values = [
        ("uniform", ValueMode::Uniform),
        ("gauss2000", ValueMode::Gaussian { center: 5000.0, sigma: 2000.0 }),
        ("gauss4000", ValueMode::Gaussian { center: 5000.0, sigma: 4000.0 }),
    ];
    let probs = [("equal", ProbMode::UniformEqual), ("random", ProbMode::IidUniformNormalized)];
    probs
        .iter()
        .flat_map(|&(pn, prob_mode)| {
            values.iter().map(move |&(vn, value_mode)| DatasetSpec {
                name: format!("{pn}-{vn}"),
                k,
                low: 1.0,
                high: 1e4,
                prob_mode,
                value_mode,
                samples,
            })
        })
        .collect()
}

fn draw_value<R: Rng + ?Sized>(spec: &DatasetSpec, normal: Option<&Normal<f64>>, rng: &mut R) -> f64 {
    match normal {
        None => rng.random_range(spec.low..=spec.high),
        Some(n) => loop {
            let v = n.sample(rng);
            if (spec.low..=spec.high).contains(&v) {
                break v;
            }
        },
    }
}

pub fn gen_dataset<R: Rng + ?Sized>(spec: &DatasetSpec, rng: &mut R) -> Result<Vec<DiscretePrediction>> {
    spec.validate()?;
    let normal = match spec.value_mode {
        ValueMode::Uniform => None,
        ValueMode::Gaussian { center, sigma } => {
            Some(Normal::new(center, sigma).map_err(|e| Error::Invalid(e.to_string()))?)
        }
    };
    let mut out = Vec::with_capacity(spec.samples);
    while out.len() < spec.samples {
        let mut values: Vec<f64> = (0..spec.k).map(|_| draw_value(spec, normal.as_ref(), rng)).collect();
        values.sort_by(f64::total_cmp);
        let probs: Vec<f64> = match spec.prob_mode {
            ProbMode::UniformEqual => vec![1.0 / spec.k as f64; spec.k],
            ProbMode::IidUniformNormalized => {
                let w: Vec<f64> = (0..spec.k).map(|_| rng.random::<f64>()).collect();
                let total: f64 = w.iter().sum();
                w.iter().map(|x| x / total).collect()
            }
        };
        if values.windows(2).any(|w| w[1] <= w[0]) {
            continue;
        }
        let pairs: Vec<(f64, f64)> = values.into_iter().zip(probs).collect();
        out.push(DiscretePrediction::from_pairs(&pairs)?);
    }
    Ok(out)
}
