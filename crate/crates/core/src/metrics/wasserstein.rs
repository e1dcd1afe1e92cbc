//! One-dimensional Wasserstein-1 distance between empirical and discrete
//! distributions, computed exactly as `∫ |F_a − F_b|` over the merged
//! breakpoints of the two step CDFs.

use crate::dirac::DiracMixture;
use crate::error::{Error, Result};
use crate::mc::{CompensatedSum, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WassersteinMethod {
    EmpiricalVsEmpirical,
    DiscreteVsEmpirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WassersteinResult {
    pub distance: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub method: WassersteinMethod,
}

/// Samples sorted once, for repeated comparisons against the same reference.
#[derive(Debug, Clone)]
pub struct SortedSamples {
    values: Vec<f64>,
}

impl SortedSamples {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("Wasserstein distance needs non-empty inputs"));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::argument(format!("sample {i} is NaN")));
        }
        let mut values = values.to_vec();
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn from_set(s: &SampleSet) -> Result<Self> {
        Self::new(s.values())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(1/√n) ∫ √(F(1 − F)) dt` of the empirical CDF: the scale of the W1
    /// error incurred by using these samples in place of their source.
    pub fn std_error(&self) -> f64 {
        let n = self.values.len();
        let mut acc = CompensatedSum::default();
        for (i, w) in self.values.windows(2).enumerate() {
            let f = (i + 1) as f64 / n as f64;
            acc.add((f * (1.0 - f)).sqrt() * (w[1] - w[0]));
        }
        acc.value() / (n as f64).sqrt()
    }
}

/// Integrates `|F_a − F_b|` for two step CDFs given as sorted breakpoints.
/// `gap(i, j)` is the CDF difference after consuming `i` points of `a` and
/// `j` of `b`.
fn merged_integral(a: &[f64], b: &[f64], gap: impl Fn(usize, usize) -> f64) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut acc = CompensatedSum::default();
    let mut t = f64::min(a[0], b[0]);
    // Consume every point equal to the current breakpoint on both sides
    // before integrating, so the walk is symmetric in (a, b).
    loop {
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        acc.add(gap(i, j) * (next - t));
        t = next;
    }
    acc.value()
}

fn sorted_w1(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as u64, b.len() as u64);
    let scale = 1.0 / (n as f64 * m as f64);
    merged_integral(a, b, |i, j| (i as u64 * m).abs_diff(j as u64 * n) as f64 * scale)
}

/// W1 between two empirical distributions; sizes may differ.
pub fn wasserstein1(a: &SampleSet, b: &SampleSet) -> Result<WassersteinResult> {
    let (sa, sb) = (SortedSamples::from_set(a)?, SortedSamples::from_set(b)?);
    Ok(wasserstein1_sorted(&sa, &sb))
}

pub fn wasserstein1_sorted(a: &SortedSamples, b: &SortedSamples) -> WassersteinResult {
    WassersteinResult {
        distance: sorted_w1(&a.values, &b.values),
        n_left: a.len(),
        n_right: b.len(),
        method: WassersteinMethod::EmpiricalVsEmpirical,
    }
}

/// W1 between the discrete CDF of `d` and an empirical CDF.
pub fn wasserstein1_discrete(d: &DiracMixture, b: &SampleSet) -> Result<WassersteinResult> {
    Ok(wasserstein1_discrete_sorted(d, &SortedSamples::from_set(b)?))
}

pub fn wasserstein1_discrete_sorted(d: &DiracMixture, b: &SortedSamples) -> WassersteinResult {
    let atoms = d.atoms();
    let positions: Vec<f64> = atoms.iter().map(|a| a.position).collect();
    let equal_mass = atoms.iter().all(|a| a.mass == atoms[0].mass);
    let distance = if equal_mass {
        sorted_w1(&positions, &b.values)
    } else {
        let mut cumulative = Vec::with_capacity(atoms.len() + 1);
        let mut acc = CompensatedSum::default();
        cumulative.push(0.0);
        for a in atoms {
            acc.add(a.mass);
            cumulative.push(acc.value());
        }
        let total = acc.value();
        let m = b.len() as f64;
        merged_integral(&positions, &b.values, |i, j| {
            (cumulative[i] / total - j as f64 / m).abs()
        })
    };
    WassersteinResult {
        distance,
        n_left: atoms.len(),
        n_right: b.len(),
        method: WassersteinMethod::DiscreteVsEmpirical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::Atom;
    use crate::dist::ParametricDist;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::from_values(v.to_vec())
    }

    #[test]
    fn examples() {
        let a = set(&[0.3, -1.0, 2.5]);
        assert_eq!(wasserstein1(&a, &a).unwrap().distance, 0.0);
        assert_eq!(wasserstein1(&set(&[0.0]), &set(&[1.0])).unwrap().distance, 1.0);
        assert!(wasserstein1(&set(&[]), &a).is_err());
    }

    #[test]
    fn unequal_sizes() {
        // F_a jumps to 1 at 0; F_b is ½ on [0, 1). W1 = ½.
        let d = wasserstein1(&set(&[0.0]), &set(&[0.0, 1.0])).unwrap();
        assert_eq!(d.distance, 0.5);
        assert_eq!((d.n_left, d.n_right), (1, 2));
    }

    #[test]
    fn discrete_examples() {
        let point = DiracMixture::point(3.0);
        assert_eq!(wasserstein1_discrete(&point, &set(&[3.0])).unwrap().distance, 0.0);
        let u = DiracMixture::from_dist(&ParametricDist::uniform(0.0, 1.0).unwrap(), 16).unwrap();
        let same: Vec<f64> = u.atoms().iter().map(|a| a.position).collect();
        assert_eq!(wasserstein1_discrete(&u, &set(&same)).unwrap().distance, 0.0);
    }

    #[test]
    fn weighted_atoms() {
        let d = DiracMixture::from_atoms(vec![Atom::new(0.0, 0.25), Atom::new(1.0, 0.75)]).unwrap();
        // Against a point mass at 1 the whole 0.25 moves a distance 1.
        let w = wasserstein1_discrete(&d, &set(&[1.0])).unwrap().distance;
        assert!((w - 0.25).abs() < 1e-15);
    }

    #[test]
    fn std_error_of_uniform_grid() {
        // Dense uniform grid on [0,1]: ∫√(t(1−t)) dt = π/8.
        let n = 100_000;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let se = SortedSamples::new(&v).unwrap().std_error();
        assert!((se * (n as f64).sqrt() - std::f64::consts::PI / 8.0).abs() < 1e-4);
    }
}
