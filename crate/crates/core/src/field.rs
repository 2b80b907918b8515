//! Conformal factors on Rⁿ: scalar fields with high-order derivative
//! oracles, a finite-difference fallback, and the catalog of analytic test
//! metrics addressable by string id.

use crate::error::{QflatError, Result};
use crate::jet::{self, Jet};
use std::fmt;
use std::sync::Arc;

/// Default cap on the derivative order a field supports.
pub const DEFAULT_MAX_ORDER: usize = 5;

/// Multi-index α = (α₁, …, α_n) with |α| = Σ α_j.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: Vec<u8>) -> Self {
        MultiIndex(exponents)
    }

    pub fn unit(n: usize, axis: usize) -> Self {
        let mut e = vec![0u8; n];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// How a field's derivative oracle is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Closed-form jets; derivatives exact to roundoff.
    Analytic,
    /// Derivatives by nested central differences of the evaluator.
    FiniteDifference,
    /// Derivatives by differentiating a convolution kernel.
    Convolution,
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type JetFn = dyn Fn(&[f64], usize) -> Jet + Send + Sync;
type DerivFn = dyn Fn(&MultiIndex, &[f64]) -> f64 + Send + Sync;

/// A scalar field with pointwise evaluation and a multi-index derivative
/// oracle. Values are immutable after construction and safe to share across
/// threads.
#[derive(Clone)]
pub struct ScalarField {
    n: usize,
    max_order: usize,
    eval: Arc<EvalFn>,
    jet: Option<Arc<JetFn>>,
    deriv: Option<Arc<DerivFn>>,
    provenance: Provenance,
    fd_step: f64,
    id: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("n", &self.n)
            .field("id", &self.id)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl ScalarField {
    /// Analytic field backed by a jet evaluator.
    pub fn from_jet_fn(
        n: usize,
        id: impl Into<String>,
        jet_fn: impl Fn(&[f64], usize) -> Jet + Send + Sync + 'static,
    ) -> Self {
        let jet_fn: Arc<JetFn> = Arc::new(jet_fn);
        let eval_jet = jet_fn.clone();
        ScalarField {
            n,
            max_order: DEFAULT_MAX_ORDER,
            eval: Arc::new(move |x| eval_jet(x, 0).value()),
            jet: Some(jet_fn),
            deriv: None,
            provenance: Provenance::Analytic,
            fd_step: 1e-2,
            id: id.into(),
        }
    }

    /// Same, but with a separate cheap evaluator for quadrature hot loops.
    pub fn from_eval_and_jet(
        n: usize,
        id: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        jet_fn: impl Fn(&[f64], usize) -> Jet + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            n,
            max_order: DEFAULT_MAX_ORDER,
            eval: Arc::new(eval),
            jet: Some(Arc::new(jet_fn)),
            deriv: None,
            provenance: Provenance::Analytic,
            fd_step: 1e-2,
            id: id.into(),
        }
    }

    /// Field defined by an evaluator only; derivatives fall back to nested
    /// central differences with Richardson extrapolation.
    pub fn from_eval(
        n: usize,
        id: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            n,
            max_order: DEFAULT_MAX_ORDER,
            eval: Arc::new(eval),
            jet: None,
            deriv: None,
            provenance: Provenance::FiniteDifference,
            fd_step: 1e-2,
            id: id.into(),
        }
    }

    /// Field with a custom derivative oracle (convolution kernels).
    pub fn from_eval_and_deriv(
        n: usize,
        id: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(&MultiIndex, &[f64]) -> f64 + Send + Sync + 'static,
        provenance: Provenance,
    ) -> Self {
        ScalarField {
            n,
            max_order: DEFAULT_MAX_ORDER,
            eval: Arc::new(eval),
            jet: None,
            deriv: Some(Arc::new(deriv)),
            provenance,
            fd_step: 0.08,
            id: id.into(),
        }
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Full jet at `x` when the field is analytic.
    pub fn jet_at(&self, x: &[f64], order: usize) -> Option<Jet> {
        self.jet.as_ref().map(|j| j(x, order))
    }

    /// Value, gradient and Hessian (row-major n×n) in one pass.
    pub fn value_grad_hessian(&self, x: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let n = self.n;
        if let Some(j) = self.jet_at(x, 2) {
            let mut grad = vec![0.0; n];
            let mut hess = vec![0.0; n * n];
            let mut e = vec![0u8; n];
            for i in 0..n {
                e[i] = 1;
                grad[i] = j.partial(&e);
                e[i] = 0;
            }
            for i in 0..n {
                for k in i..n {
                    e[i] += 1;
                    e[k] += 1;
                    let v = j.partial(&e);
                    hess[i * n + k] = v;
                    hess[k * n + i] = v;
                    e[i] -= 1;
                    e[k] -= 1;
                }
            }
            return Ok((j.value(), grad, hess));
        }
        let value = self.eval(x);
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            grad[i] = self.derivative(&MultiIndex::unit(n, i), x)?;
        }
        for i in 0..n {
            for k in i..n {
                let mut e = vec![0u8; n];
                e[i] += 1;
                e[k] += 1;
                let v = self.derivative(&MultiIndex(e), x)?;
                hess[i * n + k] = v;
                hess[k * n + i] = v;
            }
        }
        Ok((value, grad, hess))
    }

    /// `∂^α f(x)` through the field's oracle.
    pub fn derivative(&self, alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
        if alpha.dim() != self.n {
            return Err(QflatError::invalid("multi-index dimension mismatch"));
        }
        let order = alpha.order();
        if order > self.max_order {
            return Err(QflatError::UnsupportedOrder {
                max: self.max_order,
                got: order,
            });
        }
        if order == 0 {
            return Ok(self.eval(x));
        }
        if let Some(jet_fn) = &self.jet {
            let j = jet_fn(x, order);
            return Ok(j.partial(&alpha.0));
        }
        if let Some(deriv) = &self.deriv {
            return Ok(deriv(alpha, x));
        }
        self.fd_fallback(alpha, x)
    }

    /// Finite-difference oracle with Richardson extrapolation, O(h⁴). Pure
    /// first and second derivatives use dedicated central stencils; mixed
    /// and higher orders peel one direction at a time.
    fn fd_fallback(&self, alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
        let h = self.fd_step;
        let order = alpha.order();
        if order == 1 {
            let axis = alpha.0.iter().position(|&e| e > 0).unwrap();
            let d = |step: f64| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[axis] += step;
                xm[axis] -= step;
                (self.eval(&xp) - self.eval(&xm)) / (2.0 * step)
            };
            return Ok((4.0 * d(h / 2.0) - d(h)) / 3.0);
        }
        if order == 2 && alpha.0.iter().any(|&e| e == 2) {
            let axis = alpha.0.iter().position(|&e| e == 2).unwrap();
            let f0 = self.eval(x);
            let d = |step: f64| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[axis] += step;
                xm[axis] -= step;
                (self.eval(&xp) - 2.0 * f0 + self.eval(&xm)) / (step * step)
            };
            return Ok((4.0 * d(h / 2.0) - d(h)) / 3.0);
        }
        // peel the first active axis and differentiate the lower-order oracle
        let axis = alpha.0.iter().position(|&e| e > 0).unwrap();
        let mut rest = alpha.clone();
        rest.0[axis] -= 1;
        let d = |step: f64| -> Result<f64> {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[axis] += step;
            xm[axis] -= step;
            Ok((self.derivative(&rest, &xp)? - self.derivative(&rest, &xm)?) / (2.0 * step))
        };
        Ok((4.0 * d(h / 2.0)? - d(h)?) / 3.0)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.n)
            .map(|i| self.derivative(&MultiIndex::unit(self.n, i), x))
            .collect()
    }

    /// Flat Laplacian `Σ ∂²_i f`.
    pub fn laplacian0(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut e = vec![0u8; self.n];
            e[i] = 2;
            acc += self.derivative(&MultiIndex(e), x)?;
        }
        Ok(acc)
    }

    /// Flat bi-Laplacian `Σ_{i,j} ∂²_i ∂²_j f`.
    pub fn bilaplacian0(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let mut e = vec![0u8; self.n];
                e[i] += 2;
                e[j] += 2;
                acc += self.derivative(&MultiIndex(e), x)?;
            }
        }
        Ok(acc)
    }

    /// Pointwise sum; the derivative oracle is exactly linear.
    pub fn sum(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.n, other.n);
        let a = self.clone();
        let b = other.clone();
        let a2 = self.clone();
        let b2 = other.clone();
        ScalarField {
            n: self.n,
            max_order: self.max_order.min(other.max_order),
            eval: Arc::new(move |x| a.eval(x) + b.eval(x)),
            jet: None,
            deriv: Some(Arc::new(move |alpha, x| {
                a2.derivative(alpha, x).unwrap() + b2.derivative(alpha, x).unwrap()
            })),
            provenance: if self.provenance == Provenance::Analytic
                && other.provenance == Provenance::Analytic
            {
                Provenance::Analytic
            } else {
                Provenance::FiniteDifference
            },
            fd_step: self.fd_step.max(other.fd_step),
            id: format!("{}+{}", self.id, other.id),
        }
    }
}

/// Nested central differences with two-level Richardson extrapolation,
/// O(h⁴) error per direction. The designated independent oracle for every
/// analytic derivative in the crate.
pub fn fd_derivative(field: &ScalarField, alpha: &MultiIndex, x: &[f64], h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Err(QflatError::invalid("fd step must be positive"));
    }
    if alpha.order() > field.max_order() {
        return Err(QflatError::UnsupportedOrder {
            max: field.max_order(),
            got: alpha.order(),
        });
    }
    let f = |x: &[f64]| field.eval(x);
    Ok(fd_recursive(&f, &alpha.0, x, h))
}

fn fd_recursive(f: &dyn Fn(&[f64]) -> f64, alpha: &[u8], x: &[f64], h: f64) -> f64 {
    let axis = match alpha.iter().position(|&e| e > 0) {
        Some(a) => a,
        None => return f(x),
    };
    let mut rest = alpha.to_vec();
    rest[axis] -= 1;
    let d = |step: f64| -> f64 {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[axis] += step;
        xm[axis] -= step;
        (fd_recursive(f, &rest, &xp, h) - fd_recursive(f, &rest, &xm, h)) / (2.0 * step)
    };
    let coarse = d(h);
    let fine = d(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Metric `g = e^{2w} |dx|²` described by its conformal factor.
#[derive(Clone, Debug)]
pub struct ConformalMetric {
    pub w: ScalarField,
}

impl ConformalMetric {
    pub fn new(w: ScalarField) -> Self {
        ConformalMetric { w }
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// Volume density `e^{nw}`, positive everywhere.
    pub fn volume_density(&self, x: &[f64]) -> f64 {
        (self.dim() as f64 * self.w.eval(x)).exp()
    }

    pub fn metric_component(&self, x: &[f64], i: usize, j: usize) -> f64 {
        if i == j {
            (2.0 * self.w.eval(x)).exp()
        } else {
            0.0
        }
    }
}

// ---------------------------------------------------------------------------
// Catalog

/// `w ≡ 0`: the flat model.
pub fn field_flat(n: usize) -> ScalarField {
    ScalarField::from_eval_and_jet(
        n,
        "flat",
        |_x| 0.0,
        move |x, order| Jet::constant(jet::table(x.len(), order), 0.0),
    )
}

/// Pull-back of the round metric under stereographic projection:
/// `w(x) = log 2 − log(1 + |x|²)`.
pub fn field_sphere_stereographic(n: usize) -> Result<ScalarField> {
    if n % 2 != 0 {
        return Err(QflatError::UnsupportedDimension { need: "even n", got: n });
    }
    Ok(ScalarField::from_eval_and_jet(
        n,
        "sphere",
        |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            2f64.ln() - (1.0 + r2).ln()
        },
        move |x, order| {
            let t = jet::table(x.len(), order);
            jet::radius_squared(&t, x)
                .add_scalar(1.0)
                .ln()
                .scale(-1.0)
                .add_scalar(2f64.ln())
        },
    ))
}

/// Smoothed cone `w(x) = (β/2) log(1 + |x|²)`, asymptotically `β log |x|`.
pub fn field_smoothed_cone(beta: f64, n: usize) -> Result<ScalarField> {
    if beta <= -1.0 {
        return Err(QflatError::invalid(format!(
            "cone exponent beta = {beta} must exceed -1"
        )));
    }
    Ok(ScalarField::from_eval_and_jet(
        n,
        format!("cone:beta={beta}"),
        move |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            0.5 * beta * (1.0 + r2).ln()
        },
        move |x, order| {
            let t = jet::table(x.len(), order);
            jet::radius_squared(&t, x)
                .add_scalar(1.0)
                .ln()
                .scale(0.5 * beta)
        },
    ))
}

/// Gaussian profile `a · exp(−|x − c|² / s²)`.
pub fn field_bump(center: Vec<f64>, amplitude: f64, width: f64) -> Result<ScalarField> {
    if width <= 0.0 {
        return Err(QflatError::invalid("bump width must be positive"));
    }
    let n = center.len();
    let c_eval = center.clone();
    let inv_s2 = 1.0 / (width * width);
    Ok(ScalarField::from_eval_and_jet(
        n,
        format!("bump:amp={amplitude},width={width}"),
        move |x| {
            let d2: f64 = x
                .iter()
                .zip(&c_eval)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum();
            amplitude * (-d2 * inv_s2).exp()
        },
        move |x, order| {
            let t = jet::table(x.len(), order);
            let mut d2 = Jet::constant(t.clone(), 0.0);
            for (i, (&xi, &ci)) in x.iter().zip(&center).enumerate() {
                let v = Jet::variable(t.clone(), i, xi).add_scalar(-ci);
                d2 = d2.add(&v.mul(&v));
            }
            d2.scale(-inv_s2).exp().scale(amplitude)
        },
    ))
}

/// `w = a · x₁ x₂`: a bi-harmonic quadratic, the model non-normal factor.
pub fn field_quadratic_xy(n: usize, amplitude: f64) -> Result<ScalarField> {
    if n < 2 {
        return Err(QflatError::UnsupportedDimension { need: "n >= 2", got: n });
    }
    Ok(ScalarField::from_eval_and_jet(
        n,
        format!("xy:amp={amplitude}"),
        move |x| amplitude * x[0] * x[1],
        move |x, order| {
            let t = jet::table(x.len(), order);
            Jet::variable(t.clone(), 0, x[0])
                .mul(&Jet::variable(t, 1, x[1]))
                .scale(amplitude)
        },
    ))
}

/// Resolve a catalog id like `"sphere"`, `"cone:beta=-0.25"`, or
/// `"bump:amp=0.25,width=1.2"`.
pub fn field_by_id(id: &str, n: usize) -> Result<ScalarField> {
    let (head, params) = match id.split_once(':') {
        Some((h, p)) => (h, Some(p)),
        None => (id, None),
    };
    match head {
        "flat" => Ok(field_flat(n)),
        "sphere" => field_sphere_stereographic(n),
        "cone" => {
            let beta = parse_param(params, "beta")?
                .ok_or_else(|| QflatError::invalid("cone requires beta=<value>"))?;
            field_smoothed_cone(beta, n)
        }
        "bump" => {
            let amp = parse_param(params, "amp")?.unwrap_or(0.25);
            let width = parse_param(params, "width")?.unwrap_or(1.2);
            field_bump(vec![0.0; n], amp, width)
        }
        "xy" => {
            let amp = parse_param(params, "amp")?.unwrap_or(1.0);
            field_quadratic_xy(n, amp)
        }
        other => Err(QflatError::invalid(format!("unknown metric id '{other}'"))),
    }
}

/// Metric catalog ids exposed to the CLI.
pub fn catalog_ids() -> Vec<&'static str> {
    vec!["flat", "sphere", "cone:beta=-0.25", "bump", "xy"]
}

pub(crate) fn parse_param(params: Option<&str>, key: &str) -> Result<Option<f64>> {
    let Some(params) = params else {
        return Ok(None);
    };
    for piece in params.split(',') {
        if let Some((k, v)) = piece.split_once('=') {
            if k == key {
                let parsed: f64 = v
                    .parse()
                    .map_err(|_| QflatError::invalid(format!("bad value for {key}: '{v}'")))?;
                return Ok(Some(parsed));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn deriv(f: &ScalarField, alpha: Vec<u8>, x: &[f64]) -> f64 {
        f.derivative(&MultiIndex(alpha), x).unwrap()
    }

    #[test]
    fn flat_field() {
        let w = field_flat(4);
        assert_eq!(w.eval(&[3.0, -1.0, 0.5, 2.0]), 0.0);
        assert_eq!(deriv(&w, vec![1, 0, 0, 0], &[1.0, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!((4.0 * w.eval(&[0.2; 4])).exp(), 1.0);
    }

    #[test]
    fn sphere_field_values() {
        let w = field_sphere_stereographic(4).unwrap();
        assert_relative_eq!(w.eval(&[0.0; 4]), 2f64.ln(), epsilon = 1e-15);

        // w + 2 log |x| -> 0 far out
        let far = [1e6, 0.0, 0.0, 0.0];
        let drift = w.eval(&far) + 2.0 * 1e6f64.ln();
        assert!(drift.abs() < 1e-5, "drift {drift}");

        // flat Laplacian at origin against the finite-difference oracle
        let mut lap_fd = 0.0;
        for i in 0..4 {
            let mut e = vec![0u8; 4];
            e[i] = 2;
            lap_fd += fd_derivative(&w, &MultiIndex(e), &[0.0; 4], 1e-2).unwrap();
        }
        assert_relative_eq!(w.laplacian0(&[0.0; 4]).unwrap(), lap_fd, epsilon = 1e-8);
        assert_relative_eq!(w.laplacian0(&[0.0; 4]).unwrap(), -8.0, epsilon = 1e-12);

        assert!(field_sphere_stereographic(3).is_err());
    }

    #[test]
    fn cone_field_values() {
        let w0 = field_smoothed_cone(0.0, 4).unwrap();
        let flat = field_flat(4);
        for p in [[0.5, 1.0, -2.0, 0.3], [3.0, 0.0, 0.0, 0.0]] {
            assert_eq!(w0.eval(&p), flat.eval(&p));
        }

        let beta = -0.25;
        let w = field_smoothed_cone(beta, 4).unwrap();
        let r = 1e6;
        assert!((w.eval(&[r, 0.0, 0.0, 0.0]) / r.ln() - beta).abs() < 1e-4);
        assert_relative_eq!(
            deriv(&w, vec![1, 0, 0, 0], &[1.0, 0.0, 0.0, 0.0]),
            beta / 2.0,
            epsilon = 1e-13
        );

        assert!(field_smoothed_cone(-1.0, 4).is_err());
    }

    #[test]
    fn bump_field_values() {
        let a = 0.7;
        let s = 0.9;
        let c = vec![1.0, -0.5, 0.0, 0.25];
        let w = field_bump(c.clone(), a, s).unwrap();
        assert_relative_eq!(w.eval(&c), a, epsilon = 1e-15);

        let mut far = c.clone();
        far[0] += 10.0 * s;
        assert!(w.eval(&far) < a * (-100.0f64).exp() * 1.0001 + 1e-300);

        // derivative oracle vs finite differences, |alpha| <= 4
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..5 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
            for alpha in [vec![1, 0, 0, 0], vec![1, 1, 0, 0], vec![2, 0, 1, 0], vec![2, 2, 0, 0]] {
                let exact = deriv(&w, alpha.clone(), &x);
                let fd = fd_derivative(&w, &MultiIndex(alpha), &x, 1e-2).unwrap();
                assert!(
                    (exact - fd).abs() <= 1e-6 * (1.0 + exact.abs().max(fd.abs())),
                    "exact {exact} fd {fd}"
                );
            }
        }

        assert!(field_bump(vec![0.0; 4], 1.0, 0.0).is_err());
    }

    #[test]
    fn fd_examples() {
        let flat = field_flat(4);
        assert_eq!(
            fd_derivative(&flat, &MultiIndex(vec![2, 1, 0, 0]), &[0.3; 4], 1e-2).unwrap(),
            0.0
        );

        // quadratic: exact
        let q = ScalarField::from_eval(4, "x1sq", |x| x[0] * x[0]);
        let d = fd_derivative(&q, &MultiIndex(vec![2, 0, 0, 0]), &[0.7, 0.0, 0.0, 0.0], 1e-2)
            .unwrap();
        assert_relative_eq!(d, 2.0, epsilon = 1e-8);

        // mixed derivative of the sphere factor vs closed form:
        // ∂1∂2 w = 4 x1 x2 / (1+|x|²)²
        let w = field_sphere_stereographic(4).unwrap();
        let x = [1.0, 1.0, 0.0, 0.0];
        let expect = 4.0 * 1.0 * 1.0 / (3.0f64 * 3.0);
        let fd = fd_derivative(&w, &MultiIndex(vec![1, 1, 0, 0]), &x, 1e-2).unwrap();
        assert!((fd - expect).abs() < 1e-6);
        let exact = deriv(&w, vec![1, 1, 0, 0], &x);
        assert_relative_eq!(exact, expect, epsilon = 1e-12);
    }

    #[test]
    fn oracle_consistency_all_catalog_fields() {
        let fields = vec![
            field_flat(4),
            field_sphere_stereographic(4).unwrap(),
            field_smoothed_cone(-0.25, 4).unwrap(),
            field_bump(vec![0.0; 4], 0.25, 1.2).unwrap(),
            field_quadratic_xy(4, 1.0).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alphas: Vec<Vec<u8>> = vec![
            vec![1, 0, 0, 0],
            vec![0, 0, 0, 1],
            vec![1, 1, 0, 0],
            vec![2, 0, 0, 0],
            vec![2, 1, 0, 0],
            vec![1, 1, 1, 1],
            vec![2, 2, 0, 0],
            vec![0, 3, 1, 0],
        ];
        for f in &fields {
            for _ in 0..20 {
                let x: Vec<f64> = (0..4)
                    .map(|_| rng.gen_range(-1.0..1.0) * 5.0 / 4f64.sqrt())
                    .collect();
                for a in &alphas {
                    let exact = f.derivative(&MultiIndex(a.clone()), &x).unwrap();
                    let fd = fd_derivative(f, &MultiIndex(a.clone()), &x, 1e-2).unwrap();
                    assert!(
                        (exact - fd).abs() <= 1e-6 * (1.0 + exact.abs().max(fd.abs())),
                        "field {} alpha {:?} exact {exact} fd {fd}",
                        f.id(),
                        a
                    );
                }
            }
        }
    }

    #[test]
    fn sum_fields_linear() {
        let a = field_sphere_stereographic(4).unwrap();
        let b = field_bump(vec![0.5, 0.0, 0.0, 0.0], 0.3, 1.0).unwrap();
        let s = a.sum(&b);
        let x = [0.4, -0.2, 0.9, 0.1];
        let alpha = MultiIndex(vec![1, 2, 0, 0]);
        let lhs = s.derivative(&alpha, &x).unwrap();
        let rhs = a.derivative(&alpha, &x).unwrap() + b.derivative(&alpha, &x).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn catalog_parsing() {
        assert!(field_by_id("sphere", 4).is_ok());
        assert!(field_by_id("cone:beta=-0.25", 4).is_ok());
        assert!(field_by_id("cone:beta=-2", 4).is_err());
        assert!(field_by_id("bump:amp=0.5,width=2", 4).is_ok());
        assert!(field_by_id("nope", 4).is_err());
        assert_eq!(field_by_id("cone:beta=-0.5", 4).unwrap().id(), "cone:beta=-0.5");
    }
}
