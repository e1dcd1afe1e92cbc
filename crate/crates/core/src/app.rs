//! The built-in benchmark applications and the per-method pipelines that
//! produce their outputs.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::dirac::DiracMixture;
use crate::dist::ParametricDist;
use crate::error::{Error, Result};
use crate::expr::{convergence_expr, eval_expr, poiseuille_expr, ExprNode};
use crate::mc::{buffon_samples, evaluate_multi, sample_dist, SampleSet};
use crate::pprvg::grappa::{build_basis, fit_icdf, gfet_family, grappa_sample, IcdfApprox, DEFAULT_GRID};
use crate::pprvg::spot::{spot_sample, NoiseSource, SpotProgram};
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AppId {
    ConvergenceChallenge,
    Poiseuille,
    Buffon,
}

impl AppId {
    pub const ALL: [AppId; 3] = [AppId::ConvergenceChallenge, AppId::Poiseuille, AppId::Buffon];

    pub fn id(self) -> &'static str {
        match self {
            AppId::ConvergenceChallenge => "convergence-challenge",
            AppId::Poiseuille => "poiseuille",
            AppId::Buffon => "buffon",
        }
    }
}

impl fmt::Display for AppId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AppId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AppId::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown application `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MonteCarlo,
    DiracProp,
    Spot,
    Grappa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::MonteCarlo, Method::DiracProp, Method::Spot, Method::Grappa];

    pub fn id(self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte-carlo",
            Method::DiracProp => "dirac-prop",
            Method::Spot => "spot",
            Method::Grappa => "grappa",
        }
    }

    /// Whether the method's parameter is a representation size rather than
    /// a sample count.
    pub fn is_representation(self) -> bool {
        self == Method::DiracProp
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Inputs, expression and output units of an application.
#[derive(Debug, Clone)]
pub struct AppSpec {
    pub id: AppId,
    /// Named inputs in sampling order.
    pub inputs: Vec<(&'static str, ParametricDist)>,
    pub expr: Arc<ExprNode>,
    pub units: &'static str,
}

impl AppSpec {
    /// `None` for Buffon's needle, which has no expression form.
    pub fn of(app: AppId) -> Option<Self> {
        match app {
            AppId::ConvergenceChallenge => Some(Self {
                id: app,
                inputs: vec![("x", ParametricDist::convergence_challenge_input())],
                expr: convergence_expr(),
                units: "1",
            }),
            AppId::Poiseuille => Some(Self {
                id: app,
                inputs: poiseuille_inputs(),
                expr: poiseuille_expr(),
                units: "cm^3/s",
            }),
            AppId::Buffon => None,
        }
    }

    fn names(&self) -> Vec<&'static str> {
        self.inputs.iter().map(|(n, _)| *n).collect()
    }

    fn evaluate(&self, samples: &[SampleSet]) -> Result<SampleSet> {
        let names = self.names();
        let f = self.expr.compile(&names)?;
        let bound: Vec<(&str, &SampleSet)> = names.iter().copied().zip(samples).collect();
        evaluate_multi(&bound, |row| f(row))
    }
}

/// Pressure difference (mPa), viscosity (mPa·s), cannula length and radius
/// (cm). With these units the flow rate comes out in cm³/s.
pub fn poiseuille_inputs() -> Vec<(&'static str, ParametricDist)> {
    vec![
        ("dp", ParametricDist::gaussian(5.5e6, 36_000.0).expect("valid")),
        ("mu", ParametricDist::uniform(3.88, 4.12).expect("valid")),
        ("l", ParametricDist::uniform(6.95, 7.05).expect("valid")),
        ("r", ParametricDist::uniform(0.0845, 0.0855).expect("valid")),
    ]
}

fn spec_for(app: AppId, method: Method) -> Result<AppSpec> {
    AppSpec::of(app).ok_or_else(|| Error::Config(format!("application `{app}` does not support method `{method}`")))
}

/// Monte Carlo: sample every input, then evaluate per sample. Buffon's
/// needle returns 0/1 crossing indicators.
pub fn monte_carlo(app: AppId, rng: &mut RngHandle, n: usize) -> Result<SampleSet> {
    let Some(spec) = AppSpec::of(app) else {
        return buffon_samples(rng, n);
    };
    let samples = spec
        .inputs
        .iter()
        .map(|(_, d)| sample_dist(rng, d, n))
        .collect::<Result<Vec<_>>>()?;
    spec.evaluate(&samples)
}

/// Builds the inputs at representation size `r` and propagates them.
pub fn dirac_prop(app: AppId, r: usize) -> Result<DiracMixture> {
    let spec = spec_for(app, Method::DiracProp)?;
    let mut inputs = HashMap::with_capacity(spec.inputs.len());
    for (name, d) in &spec.inputs {
        inputs.insert(name.to_string(), DiracMixture::from_dist(d, r)?);
    }
    eval_expr(&spec.expr, &inputs, r)
}

/// Spot programs for every input; only Gaussian-family inputs qualify.
pub fn spot_programs(app: AppId) -> Result<Vec<SpotProgram>> {
    let spec = spec_for(app, Method::Spot)?;
    spec.inputs
        .iter()
        .map(|(_, d)| SpotProgram::for_target(d, 0.0, 1.0))
        .collect()
}

/// Spot-generated inputs, then per-sample evaluation. Each input gets its
/// own simulated source and selector, forked from `rng`.
pub fn spot(app: AppId, programs: &[SpotProgram], rng: &mut RngHandle, n: usize) -> Result<SampleSet> {
    let spec = spec_for(app, Method::Spot)?;
    let samples = programs
        .iter()
        .map(|p| {
            let mut src = NoiseSource::standard(rng.next_u64());
            let mut selector = RngHandle::seeded(rng.next_u64());
            spot_sample(&mut src, p, &mut selector, n)
        })
        .collect::<Result<Vec<_>>>()?;
    spec.evaluate(&samples)
}

pub const DEFAULT_GRAPPA_K: usize = 8;

/// Fits every input's quantile function in a `k`-term surrogate basis.
pub fn grappa_fits(app: AppId, k: usize) -> Result<Vec<IcdfApprox>> {
    let spec = spec_for(app, Method::Grappa)?;
    let family = gfet_family(k);
    let basis = Arc::new(build_basis(&family, k, DEFAULT_GRID)?);
    spec.inputs.iter().map(|(_, d)| fit_icdf(basis.clone(), d)).collect()
}

pub fn grappa(app: AppId, fits: &[IcdfApprox], rng: &mut RngHandle, n: usize) -> Result<SampleSet> {
    let spec = spec_for(app, Method::Grappa)?;
    let samples: Vec<SampleSet> = fits.iter().map(|f| grappa_sample(f, rng, n)).collect();
    spec.evaluate(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for a in AppId::ALL {
            assert_eq!(a.id().parse::<AppId>().unwrap(), a);
        }
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
        }
        assert!("heat".parse::<AppId>().unwrap_err().is_config());
    }

    #[test]
    fn buffon_is_monte_carlo_only() {
        assert!(dirac_prop(AppId::Buffon, 16).unwrap_err().is_config());
        assert!(spot_programs(AppId::Poiseuille).is_err());
    }

    #[test]
    fn challenge_pipelines_agree_roughly() {
        let n = 20_000;
        let mc = monte_carlo(AppId::ConvergenceChallenge, &mut RngHandle::seeded(1), n).unwrap();
        let mean = mc.values().iter().sum::<f64>() / n as f64;
        let d = dirac_prop(AppId::ConvergenceChallenge, 64).unwrap();
        assert!((d.mean() - mean).abs() < 0.01);
        let progs = spot_programs(AppId::ConvergenceChallenge).unwrap();
        let s = spot(AppId::ConvergenceChallenge, &progs, &mut RngHandle::seeded(2), n).unwrap();
        assert!((s.values().iter().sum::<f64>() / n as f64 - mean).abs() < 0.01);
        let fits = grappa_fits(AppId::ConvergenceChallenge, DEFAULT_GRAPPA_K).unwrap();
        let g = grappa(AppId::ConvergenceChallenge, &fits, &mut RngHandle::seeded(3), n).unwrap();
        assert!((g.values().iter().sum::<f64>() / n as f64 - mean).abs() < 0.02);
    }
}
