//! Expression DAGs over named uncertain inputs, evaluated on Dirac mixtures.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::dirac::{combine, BinaryOp, DiracMixture};
use crate::error::{Error, Result};
use crate::transform::Transform;

#[derive(Clone)]
pub enum ExprNode {
    Const(f64),
    Input(String),
    Binary(BinaryOp, Arc<ExprNode>, Arc<ExprNode>),
    /// `position ↦ positionᵏ` applied to one operand; not a repeated product.
    PowInt(Arc<ExprNode>, i32),
    Exp(Arc<ExprNode>),
    Neg(Arc<ExprNode>),
    Affine {
        a: f64,
        b: f64,
        arg: Arc<ExprNode>,
    },
    Apply(Transform, Arc<ExprNode>),
}

impl fmt::Debug for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprNode::Const(c) => write!(f, "{c}"),
            ExprNode::Input(name) => f.write_str(name),
            ExprNode::Binary(op, l, r) => write!(f, "({l:?} {} {r:?})", op.symbol()),
            ExprNode::PowInt(x, k) => write!(f, "{x:?}^{k}"),
            ExprNode::Exp(x) => write!(f, "exp({x:?})"),
            ExprNode::Neg(x) => write!(f, "-{x:?}"),
            ExprNode::Affine { a, b, arg } => write!(f, "({a}·{arg:?} + {b})"),
            ExprNode::Apply(t, x) => write!(f, "{}({x:?})", t.name()),
        }
    }
}

/// A compiled expression over a positional argument slice.
pub type Compiled = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub fn constant(c: f64) -> Arc<ExprNode> {
    Arc::new(ExprNode::Const(c))
}

pub fn input(name: &str) -> Arc<ExprNode> {
    Arc::new(ExprNode::Input(name.to_string()))
}

pub fn binary(op: BinaryOp, l: Arc<ExprNode>, r: Arc<ExprNode>) -> Arc<ExprNode> {
    Arc::new(ExprNode::Binary(op, l, r))
}

pub fn add(l: Arc<ExprNode>, r: Arc<ExprNode>) -> Arc<ExprNode> {
    binary(BinaryOp::Add, l, r)
}

pub fn sub(l: Arc<ExprNode>, r: Arc<ExprNode>) -> Arc<ExprNode> {
    binary(BinaryOp::Sub, l, r)
}

pub fn mul(l: Arc<ExprNode>, r: Arc<ExprNode>) -> Arc<ExprNode> {
    binary(BinaryOp::Mul, l, r)
}

pub fn div(l: Arc<ExprNode>, r: Arc<ExprNode>) -> Arc<ExprNode> {
    binary(BinaryOp::Div, l, r)
}

pub fn powi(x: Arc<ExprNode>, k: i32) -> Arc<ExprNode> {
    Arc::new(ExprNode::PowInt(x, k))
}

pub fn exp(x: Arc<ExprNode>) -> Arc<ExprNode> {
    Arc::new(ExprNode::Exp(x))
}

pub fn neg(x: Arc<ExprNode>) -> Arc<ExprNode> {
    Arc::new(ExprNode::Neg(x))
}

pub fn affine(a: f64, b: f64, arg: Arc<ExprNode>) -> Arc<ExprNode> {
    Arc::new(ExprNode::Affine { a, b, arg })
}

pub fn apply(t: Transform, x: Arc<ExprNode>) -> Arc<ExprNode> {
    Arc::new(ExprNode::Apply(t, x))
}

impl ExprNode {
    /// Input names with their reference counts, in name order.
    pub fn inputs(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.collect_inputs(&mut out);
        out
    }

    fn collect_inputs(&self, out: &mut BTreeMap<String, usize>) {
        match self {
            ExprNode::Const(_) => {}
            ExprNode::Input(name) => *out.entry(name.clone()).or_default() += 1,
            ExprNode::Binary(_, l, r) => {
                l.collect_inputs(out);
                r.collect_inputs(out);
            }
            ExprNode::PowInt(x, _)
            | ExprNode::Exp(x)
            | ExprNode::Neg(x)
            | ExprNode::Affine { arg: x, .. }
            | ExprNode::Apply(_, x) => x.collect_inputs(out),
        }
    }

    /// Plain scalar evaluation, used by the Monte Carlo path.
    pub fn eval_scalar(&self, env: &HashMap<&str, f64>) -> Result<f64> {
        Ok(match self {
            ExprNode::Const(c) => *c,
            ExprNode::Input(name) => *env
                .get(name.as_str())
                .ok_or_else(|| Error::propagation(name.clone(), "unbound input"))?,
            ExprNode::Binary(op, l, r) => op.apply(l.eval_scalar(env)?, r.eval_scalar(env)?),
            ExprNode::PowInt(x, k) => x.eval_scalar(env)?.powi(*k),
            ExprNode::Exp(x) => x.eval_scalar(env)?.exp(),
            ExprNode::Neg(x) => -x.eval_scalar(env)?,
            ExprNode::Affine { a, b, arg } => a * arg.eval_scalar(env)? + b,
            ExprNode::Apply(t, x) => t.apply(x.eval_scalar(env)?),
        })
    }

    /// Compiles to a closure over a positional argument slice whose order is
    /// given by `names`. Avoids map lookups in per-sample loops.
    pub fn compile(&self, names: &[&str]) -> Result<Compiled> {
        Ok(match self {
            ExprNode::Const(c) => {
                let c = *c;
                Arc::new(move |_: &[f64]| c)
            }
            ExprNode::Input(name) => {
                let i = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::propagation(name.clone(), "unbound input"))?;
                Arc::new(move |xs: &[f64]| xs[i])
            }
            ExprNode::Binary(op, l, r) => {
                let (op, l, r) = (*op, l.compile(names)?, r.compile(names)?);
                Arc::new(move |xs: &[f64]| op.apply(l(xs), r(xs)))
            }
            ExprNode::PowInt(x, k) => {
                let (x, k) = (x.compile(names)?, *k);
                Arc::new(move |xs: &[f64]| x(xs).powi(k))
            }
            ExprNode::Exp(x) => {
                let x = x.compile(names)?;
                Arc::new(move |xs: &[f64]| x(xs).exp())
            }
            ExprNode::Neg(x) => {
                let x = x.compile(names)?;
                Arc::new(move |xs: &[f64]| -x(xs))
            }
            ExprNode::Affine { a, b, arg } => {
                let (a, b, x) = (*a, *b, arg.compile(names)?);
                Arc::new(move |xs: &[f64]| a * x(xs) + b)
            }
            ExprNode::Apply(t, x) => {
                let (t, x) = (t.clone(), x.compile(names)?);
                Arc::new(move |xs: &[f64]| t.apply(x(xs)))
            }
        })
    }
}

/// Either a scalar (from constant subtrees) or a distribution.
enum Value {
    Scalar(f64),
    Dist(DiracMixture),
}

/// Evaluates `expr` bottom-up, requantizing to `r` after every binary node
/// with two uncertain operands. Unary nodes and operations against constants
/// move atoms without requantizing.
///
/// Operands are treated as independent. An input referenced more than once
/// is therefore decorrelated from itself; a warning is logged in that case.
pub fn eval_expr(expr: &ExprNode, inputs: &HashMap<String, DiracMixture>, r: usize) -> Result<DiracMixture> {
    for (name, count) in expr.inputs() {
        if count > 1 {
            log::warn!("input `{name}` is referenced {count} times; uses are treated as independent");
        }
    }
    match eval_node(expr, inputs, r, "root")? {
        Value::Dist(d) => Ok(d),
        Value::Scalar(c) => Ok(DiracMixture::point(c)),
    }
}

fn eval_node(node: &ExprNode, inputs: &HashMap<String, DiracMixture>, r: usize, path: &str) -> Result<Value> {
    let wrap = |e: Error| match e {
        Error::Propagation { at, detail } => Error::propagation(format!("{path}: {at}"), detail),
        Error::Singularity(msg) => Error::propagation(path.to_string(), msg),
        other => other,
    };
    let unary = |x: Value, f: &dyn Fn(f64) -> f64, what: &str| -> Result<Value> {
        match x {
            Value::Scalar(c) => {
                let y = f(c);
                if y.is_finite() {
                    Ok(Value::Scalar(y))
                } else {
                    Err(Error::propagation(path.to_string(), format!("`{what}` of {c} is {y}")))
                }
            }
            Value::Dist(d) => d.map_positions(f, what).map(Value::Dist).map_err(wrap),
        }
    };
    match node {
        ExprNode::Const(c) => Ok(Value::Scalar(*c)),
        ExprNode::Input(name) => inputs
            .get(name)
            .cloned()
            .map(Value::Dist)
            .ok_or_else(|| Error::propagation(format!("{path}/{name}"), "unbound input")),
        ExprNode::Binary(op, l, rhs) => {
            let op = *op;
            let lv = eval_node(l, inputs, r, &format!("{path}/{}L", op.symbol()))?;
            let rv = eval_node(rhs, inputs, r, &format!("{path}/{}R", op.symbol()))?;
            match (lv, rv) {
                (Value::Scalar(a), Value::Scalar(b)) => unary(Value::Scalar(a), &|x| op.apply(x, b), op.symbol()),
                (Value::Dist(d), Value::Scalar(b)) => {
                    if op == BinaryOp::Div && b == 0.0 {
                        return Err(Error::propagation(path.to_string(), "division by constant 0"));
                    }
                    unary(Value::Dist(d), &|x| op.apply(x, b), op.symbol())
                }
                (Value::Scalar(a), Value::Dist(d)) => {
                    if op == BinaryOp::Div {
                        if let Some(i) = d.atoms().iter().position(|at| at.position == 0.0) {
                            return Err(Error::propagation(
                                path.to_string(),
                                format!("divisor atom {i} is at 0"),
                            ));
                        }
                    }
                    unary(Value::Dist(d), &|x| op.apply(a, x), op.symbol())
                }
                (Value::Dist(a), Value::Dist(b)) => combine(&a, &b, op, r).map(Value::Dist).map_err(wrap),
            }
        }
        ExprNode::PowInt(x, k) => {
            let k = *k;
            let v = eval_node(x, inputs, r, &format!("{path}/pow{k}"))?;
            unary(v, &|p| p.powi(k), &format!("pow{k}"))
        }
        ExprNode::Exp(x) => unary(eval_node(x, inputs, r, &format!("{path}/exp"))?, &f64::exp, "exp"),
        ExprNode::Neg(x) => unary(eval_node(x, inputs, r, &format!("{path}/neg"))?, &|p| -p, "neg"),
        ExprNode::Affine { a, b, arg } => {
            let (a, b) = (*a, *b);
            unary(
                eval_node(arg, inputs, r, &format!("{path}/affine"))?,
                &|p| a * p + b,
                "affine",
            )
        }
        ExprNode::Apply(t, x) => {
            let v = eval_node(x, inputs, r, &format!("{path}/{}", t.name()))?;
            unary(v, &|p| t.apply(p), t.name())
        }
    }
}

/// `Q = π r⁴ ΔP / (8 μ l)` over inputs `dp`, `mu`, `l`, `r`.
pub fn poiseuille_expr() -> Arc<ExprNode> {
    let numerator = mul(powi(input("r"), 4), input("dp"));
    let denominator = mul(input("mu"), input("l"));
    affine(PI / 8.0, 0.0, div(numerator, denominator))
}

/// The single sigmoid node of the convergence challenge, over input `x`.
pub fn convergence_expr() -> Arc<ExprNode> {
    apply(Transform::sigmoid(), input("x"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ParametricDist;

    fn env(pairs: &[(&str, DiracMixture)]) -> HashMap<String, DiracMixture> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn input_passes_through() {
        let d = DiracMixture::from_dist(&ParametricDist::gaussian(1.0, 2.0).unwrap(), 32).unwrap();
        assert_eq!(eval_expr(&input("x"), &env(&[("x", d.clone())]), 32).unwrap(), d);
    }

    #[test]
    fn challenge_expr_is_apply_unary() {
        let d = DiracMixture::from_dist(&ParametricDist::convergence_challenge_input(), 64).unwrap();
        let via_expr = eval_expr(&convergence_expr(), &env(&[("x", d.clone())]), 64).unwrap();
        assert_eq!(via_expr, d.apply_unary(&Transform::sigmoid()).unwrap());
    }

    #[test]
    fn unbound_input_names_path() {
        let e = add(input("x"), input("y"));
        let d = DiracMixture::point(1.0);
        let err = eval_expr(&e, &env(&[("x", d)]), 4).unwrap_err();
        assert!(err.to_string().contains("y"), "{err}");
    }

    #[test]
    fn constants_fold_without_requantizing() {
        let d = DiracMixture::from_dist(&ParametricDist::uniform(0.0, 1.0).unwrap(), 8).unwrap();
        let out = eval_expr(&mul(constant(2.0), input("x")), &env(&[("x", d.clone())]), 4).unwrap();
        assert_eq!(out.r(), 8);
        assert_eq!(out.atoms()[0].position, 2.0 * d.atoms()[0].position);
    }

    #[test]
    fn division_by_zero_atom_reports_path() {
        let z = DiracMixture::from_atoms(vec![
            crate::dirac::Atom::new(0.0, 0.5),
            crate::dirac::Atom::new(1.0, 0.5),
        ])
        .unwrap();
        let err = eval_expr(&div(input("a"), input("b")), &env(&[("a", z.clone()), ("b", z)]), 2).unwrap_err();
        assert!(
            matches!(err, Error::Propagation { ref at, .. } if at.starts_with("root")),
            "{err}"
        );
    }

    #[test]
    fn poiseuille_at_means() {
        let e = poiseuille_expr();
        let vals: HashMap<&str, f64> = [("dp", 5.5e6), ("mu", 4.0), ("l", 7.0), ("r", 0.085)].into();
        let q = e.eval_scalar(&vals).unwrap();
        let expected = PI * 0.085f64.powi(4) * 5.5e6 / (8.0 * 4.0 * 7.0);
        assert!((q - expected).abs() < 1e-12 * expected);
        assert!((q - 4.0266).abs() < 1e-4);
        let f = e.compile(&["dp", "mu", "l", "r"]).unwrap();
        assert_eq!(f(&[5.5e6, 4.0, 7.0, 0.085]), q);
    }

    #[test]
    fn inputs_are_counted() {
        let counts = mul(input("x"), input("x")).inputs();
        assert_eq!(counts["x"], 2);
        assert_eq!(poiseuille_expr().inputs().len(), 4);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let ins = env(&[
            (
                "dp",
                DiracMixture::from_dist(&ParametricDist::gaussian(5.5e6, 36000.0).unwrap(), 32).unwrap(),
            ),
            (
                "mu",
                DiracMixture::from_dist(&ParametricDist::uniform(3.88, 4.12).unwrap(), 32).unwrap(),
            ),
            (
                "l",
                DiracMixture::from_dist(&ParametricDist::uniform(6.95, 7.05).unwrap(), 32).unwrap(),
            ),
            (
                "r",
                DiracMixture::from_dist(&ParametricDist::uniform(0.0845, 0.0855).unwrap(), 32).unwrap(),
            ),
        ]);
        let a = eval_expr(&poiseuille_expr(), &ins, 32).unwrap();
        let b = eval_expr(&poiseuille_expr(), &ins, 32).unwrap();
        assert_eq!(a, b);
        assert!((a.mean() - 4.027).abs() < 0.02, "{}", a.mean());
    }
}
