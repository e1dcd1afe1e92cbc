//! Univariate maps with optional analytic inverse and derivative.

use std::fmt;
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    NonMonotone,
}

#[derive(Clone)]
pub struct Transform {
    name: String,
    forward: RealFn,
    inverse: Option<RealFn>,
    derivative: Option<RealFn>,
    monotonicity: Monotonicity,
    /// Open interval containing every output, when known in closed form.
    codomain: Option<(f64, f64)>,
    /// `(a, b)` when the map is exactly `a·x + b`.
    affine: Option<(f64, f64)>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform")
            .field("name", &self.name)
            .field("monotonicity", &self.monotonicity)
            .field("has_inverse", &self.inverse.is_some())
            .field("has_derivative", &self.derivative.is_some())
            .field("codomain", &self.codomain)
            .finish()
    }
}

impl Transform {
    /// A forward-only map; attach the rest with the `with_*` builders.
    pub fn new<F>(name: impl Into<String>, forward: F, monotonicity: Monotonicity) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            forward: Arc::new(forward),
            inverse: None,
            derivative: None,
            monotonicity,
            codomain: None,
            affine: None,
        }
    }

    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_codomain(mut self, lo: f64, hi: f64) -> Self {
        self.codomain = Some((lo, hi));
        self
    }

    pub fn identity() -> Self {
        Self::affine(1.0, 0.0)
    }

    /// `x ↦ scale·x + offset`. A zero scale is allowed but has no inverse.
    pub fn affine(scale: f64, offset: f64) -> Self {
        let mono = if scale > 0.0 {
            Monotonicity::Increasing
        } else if scale < 0.0 {
            Monotonicity::Decreasing
        } else {
            Monotonicity::NonMonotone
        };
        let name = if scale == 1.0 && offset == 0.0 {
            "identity".to_string()
        } else {
            format!("affine({scale},{offset})")
        };
        let mut t = Self::new(name, move |x| scale * x + offset, mono).with_derivative(move |_| scale);
        if scale != 0.0 {
            t = t.with_inverse(move |y| (y - offset) / scale);
        }
        t.affine = Some((scale, offset));
        t
    }

    /// The convergence-challenge transform `x ↦ 1 / (1 + e^{−(x−1)})`,
    /// with inverse `1 + ln(y / (1 − y))`.
    pub fn sigmoid() -> Self {
        Self::new("sigmoid", sigmoid, Monotonicity::Increasing)
            .with_inverse(logit)
            .with_derivative(|x| {
                let s = sigmoid(x);
                s * (1.0 - s)
            })
            .with_codomain(0.0, 1.0)
    }

    pub fn square() -> Self {
        Self::new("square", |x| x * x, Monotonicity::NonMonotone).with_derivative(|x| 2.0 * x)
    }

    pub fn exp() -> Self {
        Self::new("exp", f64::exp, Monotonicity::Increasing)
            .with_inverse(f64::ln)
            .with_derivative(f64::exp)
            .with_codomain(0.0, f64::INFINITY)
    }

    /// `x ↦ x^k` for a positive integer `k`; increasing for odd `k`.
    pub fn powi(k: i32) -> Self {
        assert!(k >= 1, "power must be a positive integer");
        let mono = if k == 1 || k % 2 == 1 {
            Monotonicity::Increasing
        } else {
            Monotonicity::NonMonotone
        };
        let mut t =
            Self::new(format!("pow{k}"), move |x| x.powi(k), mono).with_derivative(move |x| k as f64 * x.powi(k - 1));
        if k % 2 == 1 {
            t = t.with_inverse(move |y| y.signum() * y.abs().powf(1.0 / k as f64));
        }
        t
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    pub fn inverse(&self, y: f64) -> Option<f64> {
        self.inverse.as_ref().map(|f| f(y))
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|f| f(x))
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn codomain(&self) -> Option<(f64, f64)> {
        self.codomain
    }

    pub fn as_affine(&self) -> Option<(f64, f64)> {
        self.affine
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-(x - 1.0)).exp())
}

#[inline]
pub fn logit(y: f64) -> f64 {
    1.0 + (y / (1.0 - y)).ln()
}

/// Output-unit conversions applied to the Poiseuille flow rate `Q`, which the
/// model produces in cm³/s.
pub fn poiseuille_report_transforms() -> Vec<Transform> {
    let rename = |mut t: Transform, name: &str| {
        t.name = name.to_string();
        t
    };
    vec![
        rename(Transform::identity(), "cm3_per_s"),
        rename(Transform::affine(60.0, 0.0), "ml_per_min"),
        rename(Transform::affine(3600.0, 0.0), "ml_per_h"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> impl Iterator<Item = f64> {
        (-80..=80).map(|i| i as f64 / 10.0)
    }

    #[test]
    fn sigmoid_examples() {
        let t = Transform::sigmoid();
        assert_eq!(t.apply(1.0), 0.5);
        assert_eq!(t.inverse(0.5), Some(1.0));
        assert_eq!(t.apply(3.0), 1.0 / (1.0 + (-2.0f64).exp()));
    }

    #[test]
    fn inverses_round_trip() {
        for t in [
            Transform::sigmoid(),
            Transform::affine(-2.5, 0.3),
            Transform::exp(),
            Transform::powi(3),
        ] {
            for x in grid() {
                let back = t.inverse(t.apply(x)).unwrap();
                assert!(
                    (back - x).abs() <= 1e-10 * x.abs().max(1.0),
                    "{}: {x} -> {back}",
                    t.name()
                );
            }
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        for t in [
            Transform::sigmoid(),
            Transform::affine(-2.5, 0.3),
            Transform::exp(),
            Transform::powi(3),
            Transform::square(),
        ] {
            for x in grid() {
                let h = 1e-5 * x.abs().max(1.0);
                let fd = (t.apply(x + h) - t.apply(x - h)) / (2.0 * h);
                let d = t.derivative(x).unwrap();
                let scale = d.abs().max(1e-300);
                if d.abs() < 1e-12 {
                    assert!(fd.abs() < 1e-9);
                } else {
                    assert!(((fd - d) / scale).abs() < 1e-6, "{}: x={x} {d} vs {fd}", t.name());
                }
            }
        }
    }

    #[test]
    fn sigmoid_derivative_matches_closed_form() {
        let t = Transform::sigmoid();
        for x in grid() {
            let e = (-(x - 1.0)).exp();
            let closed = e / (1.0 + e).powi(2);
            assert!((t.derivative(x).unwrap() - closed).abs() < 1e-15);
        }
    }

    #[test]
    fn report_transforms_convert_flow_units() {
        let ts = poiseuille_report_transforms();
        let names: Vec<&str> = ts.iter().map(|t| t.name()).collect();
        assert_eq!(names, ["cm3_per_s", "ml_per_min", "ml_per_h"]);
        assert_eq!(ts[1].apply(2.0), 120.0);
    }

    #[test]
    fn affine_metadata() {
        let t = Transform::affine(2.0, 3.0);
        assert_eq!(t.as_affine(), Some((2.0, 3.0)));
        assert_eq!(t.monotonicity(), Monotonicity::Increasing);
        assert!(Transform::affine(0.0, 1.0).inverse(1.0).is_none());
    }
}
