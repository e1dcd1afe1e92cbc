use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{DistKind, ParametricDist, WEIGHT_SUM_TOL};
use crate::error::{Error, Result};
use crate::mc::{BoxMuller, Provenance, SampleSet};
use crate::rng::RngHandle;

/// The physical entropy source feeding Spot.
#[derive(Debug, Clone)]
pub enum NoiseSource {
    /// Gaussian(μ₀, σ₀) noise drawn with Box-Muller.
    Simulated {
        mu0: f64,
        sigma0: f64,
        rng: RngHandle,
        bm: BoxMuller,
    },
    /// Recorded measurements, consumed in order.
    Replay { values: Vec<f64>, pos: usize },
}

impl NoiseSource {
    pub fn simulated(mu0: f64, sigma0: f64, seed: u64) -> Result<Self> {
        if !(sigma0 > 0.0 && sigma0.is_finite()) || !mu0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma0",
                value: sigma0,
                reason: "noise source needs a finite mean and positive std-dev",
            });
        }
        Ok(NoiseSource::Simulated {
            mu0,
            sigma0,
            rng: RngHandle::seeded(seed),
            bm: BoxMuller::default(),
        })
    }

    pub fn standard(seed: u64) -> Self {
        Self::simulated(0.0, 1.0, seed).expect("valid parameters")
    }

    pub fn replay(values: Vec<f64>) -> Self {
        NoiseSource::Replay { values, pos: 0 }
    }

    /// Loads a recording in the sample-set CSV format.
    pub fn replay_file(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(Self::replay(SampleSet::read_csv(f)?.into_values()))
    }

    #[inline]
    pub fn draw(&mut self) -> Result<f64> {
        match self {
            NoiseSource::Simulated { mu0, sigma0, rng, bm } => Ok(*mu0 + *sigma0 * bm.next(rng)),
            NoiseSource::Replay { values, pos } => {
                let v = *values.get(*pos).ok_or(Error::SourceDepleted(*pos))?;
                *pos += 1;
                Ok(v)
            }
        }
    }

    /// `(μ₀, σ₀)` for simulated sources; the sample moments are not used for
    /// replays, which are assumed standardized.
    pub fn moments(&self) -> (f64, f64) {
        match self {
            NoiseSource::Simulated { mu0, sigma0, .. } => (*mu0, *sigma0),
            NoiseSource::Replay { .. } => (0.0, 1.0),
        }
    }

    fn describe(&self) -> String {
        match self {
            NoiseSource::Simulated { mu0, sigma0, .. } => format!("spot-noise({mu0},{sigma0})"),
            NoiseSource::Replay { values, .. } => format!("spot-replay({})", values.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotComponent {
    pub weight: f64,
    pub scale: f64,
    pub offset: f64,
}

/// A list of weighted affine maps applied to source draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProgram")]
pub struct SpotProgram {
    components: Vec<SpotComponent>,
}

#[derive(Deserialize)]
struct RawProgram {
    components: Vec<SpotComponent>,
}

impl TryFrom<RawProgram> for SpotProgram {
    type Error = Error;

    fn try_from(raw: RawProgram) -> Result<Self> {
        Self::new(raw.components)
    }
}

impl SpotProgram {
    pub fn new(components: Vec<SpotComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::argument("a Spot program needs at least one component"));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.weight > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "weight",
                    value: c.weight,
                    reason: "component weights must be positive",
                });
            }
            if !(c.scale.is_finite() && c.offset.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "scale",
                    value: c.scale,
                    reason: "scale and offset must be finite",
                });
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter {
                name: "weight",
                value: total,
                reason: "component weights must sum to 1",
            });
        }
        Ok(Self { components })
    }

    /// Single component `a·z + b`.
    pub fn affine(scale: f64, offset: f64) -> Result<Self> {
        Self::new(vec![SpotComponent {
            weight: 1.0,
            scale,
            offset,
        }])
    }

    /// Program that turns Gaussian(μ₀, σ₀) source draws into `target`, which
    /// must be a Gaussian or a Gaussian mixture.
    pub fn for_target(target: &ParametricDist, mu0: f64, sigma0: f64) -> Result<Self> {
        let map = |weight: f64, mean: f64, sd: f64| {
            let scale = sd / sigma0;
            SpotComponent {
                weight,
                scale,
                offset: mean - scale * mu0,
            }
        };
        match target.kind() {
            DistKind::Gaussian { mean, std_dev } => Self::new(vec![map(1.0, *mean, *std_dev)]),
            DistKind::GaussianMixture { components } => {
                Self::new(components.iter().map(|c| map(c.weight, c.mean, c.std_dev)).collect())
            }
            _ => Err(Error::argument(format!(
                "Spot can only target Gaussians and Gaussian mixtures, not {}",
                target.id()
            ))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn components(&self) -> &[SpotComponent] {
        &self.components
    }
}

/// Draws `n` variates: pick a component with one uniform draw from
/// `selector`, then emit `aᵢ·z + bᵢ` for the next source draw `z`.
///
/// Single-component programs skip the selection draw, so their output is the
/// source stream mapped elementwise.
pub fn spot_sample(src: &mut NoiseSource, prog: &SpotProgram, selector: &mut RngHandle, n: usize) -> Result<SampleSet> {
    let comps = prog.components();
    let mut values = Vec::with_capacity(n);
    if let [c] = comps {
        for _ in 0..n {
            values.push(c.scale * src.draw()? + c.offset);
        }
    } else {
        let mut cumulative = Vec::with_capacity(comps.len());
        let mut acc = 0.0;
        for c in comps {
            acc += c.weight;
            cumulative.push(acc);
        }
        let last = comps.len() - 1;
        for _ in 0..n {
            let u = selector.next_f64();
            let c = &comps[cumulative.iter().position(|&w| u < w).unwrap_or(last)];
            values.push(c.scale * src.draw()? + c.offset);
        }
    }
    Ok(SampleSet::new(
        values,
        Provenance::new(selector.algorithm().id(), selector.seed(), src.describe()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_component_is_affine_of_source() {
        let prog = SpotProgram::affine(0.5, 2.0).unwrap();
        let mut src = NoiseSource::standard(11);
        let mut shadow = NoiseSource::standard(11);
        let s = spot_sample(&mut src, &prog, &mut RngHandle::seeded(5), 1000).unwrap();
        for &v in s.values() {
            assert_eq!(v, 0.5 * shadow.draw().unwrap() + 2.0);
        }
    }

    #[test]
    fn zero_scale_is_constant() {
        let prog = SpotProgram::affine(0.0, 3.25).unwrap();
        let s = spot_sample(&mut NoiseSource::standard(1), &prog, &mut RngHandle::seeded(2), 100).unwrap();
        assert!(s.values().iter().all(|&v| v == 3.25));
    }

    #[test]
    fn gaussian_program_moments() {
        let (mu, sigma, n) = (1.5, 2.0, 1_000_000);
        let prog = SpotProgram::for_target(&ParametricDist::gaussian(mu, sigma).unwrap(), 0.0, 1.0).unwrap();
        let s = spot_sample(&mut NoiseSource::standard(9), &prog, &mut RngHandle::seeded(1), n).unwrap();
        let mean = s.values().iter().sum::<f64>() / n as f64;
        assert!((mean - mu).abs() < 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn program_for_nonstandard_source() {
        let target = ParametricDist::convergence_challenge_input();
        let prog = SpotProgram::for_target(&target, 3.0, 0.25).unwrap();
        let c = prog.components()[0];
        assert_eq!(c.weight, 0.6);
        // A source draw at μ₀ + σ₀ lands one component std-dev above its mean.
        assert!((c.scale * 3.25 + c.offset - 2.5).abs() < 1e-12);
    }

    #[test]
    fn replay_exhaustion() {
        let prog = SpotProgram::affine(1.0, 0.0).unwrap();
        let mut src = NoiseSource::replay(vec![0.1, 0.2]);
        let err = spot_sample(&mut src, &prog, &mut RngHandle::seeded(0), 3).unwrap_err();
        assert!(matches!(err, Error::SourceDepleted(2)));
    }

    #[test]
    fn invalid_programs() {
        assert!(SpotProgram::new(vec![]).is_err());
        let c = |w| SpotComponent {
            weight: w,
            scale: 1.0,
            offset: 0.0,
        };
        assert!(SpotProgram::new(vec![c(0.5), c(0.6)]).is_err());
        assert!(SpotProgram::new(vec![c(0.0), c(1.0)]).is_err());
        assert!(SpotProgram::for_target(&ParametricDist::uniform(0.0, 1.0).unwrap(), 0.0, 1.0).is_err());
    }

    #[test]
    fn toml_config() {
        let text = r#"
[[components]]
weight = 0.6
scale = 0.5
offset = 2.0

[[components]]
weight = 0.4
scale = 1.0
offset = -1.0
"#;
        let prog = SpotProgram::from_toml(text).unwrap();
        assert_eq!(
            prog,
            SpotProgram::for_target(&ParametricDist::convergence_challenge_input(), 0.0, 1.0).unwrap()
        );
        assert!(SpotProgram::from_toml("[[components]]\nweight = 0.5\nscale = 1.0\noffset = 0.0\n").is_err());
    }
}
