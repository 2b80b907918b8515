//! Normal-metric machinery: conformal factors built from Q-curvature
//! densities through the log kernel, the normality residual, kernel
//! derivative bounds, annulus gradient estimates, and the exact-rational
//! Hölder exponent construction.

use crate::constants::c_n;
use crate::curvature::ConformalGeometry;
use crate::error::{QflatError, Result};
use crate::field::{parse_param, MultiIndex, Provenance, ScalarField};
use crate::quadrature::singular::{
    log_potential, log_potential_derivative, singular_kernel_integral, AngularKind, DensityFn,
    KernelKind,
};
use crate::quadrature::{self, QuadratureSpec, Region};
use num::{BigRational, FromPrimitive, One, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// A continuous, integrable density with declared support and mass.
#[derive(Clone)]
pub struct QDensity {
    pub n: usize,
    pub support_radius: f64,
    pub mass: f64,
    pub id: String,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for QDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QDensity")
            .field("n", &self.n)
            .field("id", &self.id)
            .field("mass", &self.mass)
            .finish()
    }
}

impl QDensity {
    pub fn new(
        n: usize,
        support_radius: f64,
        mass: f64,
        id: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        QDensity {
            n,
            support_radius,
            mass,
            id: id.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn density_fn(&self) -> DensityFn<'_> {
        DensityFn {
            n: self.n,
            support_center: vec![0.0; self.n],
            support_radius: self.support_radius,
            f: &*self.f,
        }
    }

    /// Quadrature check of the declared mass (1e−6 relative).
    pub fn verify_mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        let measured = quadrature::integrate(
            |x: &[f64]| self.eval(x),
            &Region::Ball {
                center: vec![0.0; self.n],
                radius: self.support_radius,
            },
            spec,
        )?
        .value;
        let scale = 1.0 + self.mass.abs();
        if (measured - self.mass).abs() > 1e-6 * scale {
            return Err(QflatError::invalid(format!(
                "declared mass {} differs from quadrature {}",
                self.mass, measured
            )));
        }
        Ok(measured)
    }
}

/// Conformal factor realized as a log-kernel potential of its density.
#[derive(Clone, Debug)]
pub struct NormalMetricField {
    pub field: ScalarField,
    pub density: QDensity,
}

type ConvCache = Mutex<HashMap<(Vec<u64>, Vec<u8>), f64>>;

fn cache_key(x: &[f64], alpha: &[u8]) -> (Vec<u64>, Vec<u8>) {
    (x.iter().map(|v| v.to_bits()).collect(), alpha.to_vec())
}

/// `w(x) = (1/c_n) ∫ log(|y|/|x−y|) P(y) dy` with kernel-differentiated
/// derivatives through order two and finite differences above.
pub fn normal_factor_from_density(p: &QDensity, spec: &QuadratureSpec) -> Result<NormalMetricField> {
    let n = p.n;
    let cn = c_n(n);
    let base = log_potential(&p.density_fn(), &vec![0.0; n], spec)?.value;
    let cache: Arc<ConvCache> = Arc::new(Mutex::new(HashMap::new()));

    let p_eval = p.clone();
    let spec_eval = spec.clone();
    let cache_eval = cache.clone();
    let eval = move |x: &[f64]| -> f64 {
        let key = cache_key(x, &[]);
        if let Some(v) = cache_eval.lock().unwrap().get(&key) {
            return *v;
        }
        let v = (log_potential(&p_eval.density_fn(), x, &spec_eval)
            .expect("log potential")
            .value
            - base)
            / cn;
        cache_eval.lock().unwrap().insert(key, v);
        v
    };

    let p_deriv = p.clone();
    let spec_deriv = spec.clone();
    let cache_deriv = cache.clone();
    let h = 0.08;
    let deriv = move |alpha: &MultiIndex, x: &[f64]| -> f64 {
        kernel_derivative_rec(
            &p_deriv,
            &spec_deriv,
            &cache_deriv,
            cn,
            &alpha.0,
            x,
            h,
        )
    };

    let field = ScalarField::from_eval_and_deriv(
        n,
        format!("normal({})", p.id),
        eval,
        deriv,
        Provenance::Convolution,
    )
    .with_fd_step(h);
    Ok(NormalMetricField {
        field,
        density: p.clone(),
    })
}

fn kernel_derivative_rec(
    p: &QDensity,
    spec: &QuadratureSpec,
    cache: &ConvCache,
    cn: f64,
    alpha: &[u8],
    x: &[f64],
    h: f64,
) -> f64 {
    let order: usize = alpha.iter().map(|&e| e as usize).sum();
    if order <= 2 {
        let key = cache_key(x, alpha);
        if let Some(v) = cache.lock().unwrap().get(&key) {
            return *v;
        }
        let v = log_potential_derivative(&p.density_fn(), x, alpha, spec)
            .expect("kernel derivative")
            .value
            / cn;
        cache.lock().unwrap().insert(key, v);
        return v;
    }
    let axis = alpha.iter().position(|&e| e > 0).unwrap();
    let mut rest = alpha.to_vec();
    rest[axis] -= 1;
    let d = |step: f64| -> f64 {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[axis] += step;
        xm[axis] -= step;
        (kernel_derivative_rec(p, spec, cache, cn, &rest, &xp, h)
            - kernel_derivative_rec(p, spec, cache, cn, &rest, &xm, h))
            / (2.0 * step)
    };
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Max over probe pairs of `|(w(x₁)−w(x₂)) − (conv(x₁)−conv(x₂))|`, where
/// `conv` is the log-kernel potential of the metric's own Q-density. The
/// pair differencing removes the free additive constant.
pub fn normality_residual(
    w: &ScalarField,
    probes: &[Vec<f64>],
    r_max: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = w.dim();
    if n != 4 {
        return Err(QflatError::UnsupportedDimension { need: "n = 4", got: n });
    }
    if probes.len() < 2 {
        return Err(QflatError::invalid("need at least two probe points"));
    }
    let geom = ConformalGeometry::new(w.clone());
    let q_density = move |y: &[f64]| geom.q_density(y).expect("q density");
    let density = DensityFn {
        n,
        support_center: vec![0.0; n],
        support_radius: r_max,
        f: &q_density,
    };
    let cn = c_n(n);
    let potentials = crate::parallel::map_slice(probes, |x| {
        log_potential(&density, x, spec).map(|e| e.value / cn)
    });
    let mut pots = Vec::with_capacity(probes.len());
    for p in potentials {
        pots.push(p?);
    }
    let mut worst = 0.0f64;
    for i in 0..probes.len() {
        for j in i + 1..probes.len() {
            let dw = w.eval(&probes[i]) - w.eval(&probes[j]);
            let dc = pots[i] - pots[j];
            worst = worst.max((dw - dc).abs());
        }
    }
    Ok(worst)
}

/// Kernel derivative bound `|∂^α w(x)| ≤ (1/c_n) ∫ |x−y|^{−|α|} |P(y)| dy`.
#[derive(Clone, Copy, Debug)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn derivative_bound_check(
    nf: &NormalMetricField,
    alpha: &MultiIndex,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<BoundCheck> {
    let order = alpha.order();
    if order == 0 {
        return Err(QflatError::invalid("bound requires |alpha| >= 1"));
    }
    let lhs = nf.field.derivative(alpha, x)?.abs();
    let p = &nf.density;
    let abs_p = |y: &[f64]| p.eval(y).abs();
    let density = DensityFn {
        n: p.n,
        support_center: vec![0.0; p.n],
        support_radius: p.support_radius,
        f: &abs_p,
    };
    let rhs = singular_kernel_integral(
        &density,
        x,
        KernelKind::Power(order as u32),
        AngularKind::One,
        spec,
    )?
    .value
        / c_n(p.n);
    Ok(BoundCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 1e-6) + 1e-12,
    })
}

/// `(1/ρ²) ∫_{B(0,2ρ)∖B(0,ρ)} |∇w|² dx`.
pub fn annulus_gradient_ratio(w: &ScalarField, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = w.dim();
    let est = quadrature::integrate(
        |x: &[f64]| {
            let g = w.gradient(x).expect("gradient");
            g.iter().map(|v| v * v).sum::<f64>()
        },
        &Region::Annulus {
            center: vec![0.0; n],
            r_inner: rho,
            r_outer: 2.0 * rho,
        },
        spec,
    )?;
    Ok(est.value / (rho * rho))
}

/// Exact-rational solution of the Hölder-exponent conditions.
#[derive(Clone, Debug)]
pub struct ExponentSolution {
    pub n: usize,
    pub a: u32,
    pub alpha_norms: Vec<u32>,
    pub q: Vec<BigRational>,
    pub epsilon: BigRational,
}

impl ExponentSolution {
    /// Re-verify all three conditions in exact arithmetic.
    pub fn verify(&self) -> bool {
        let bound = holder_bound(self.n);
        let one = BigRational::one();
        if self.q.iter().any(|q| *q <= one) {
            return false;
        }
        let sum: BigRational = self.q.iter().map(|q| q.recip()).sum();
        if sum != one {
            return false;
        }
        self.alpha_norms
            .iter()
            .zip(&self.q)
            .all(|(&a, q)| BigRational::from_u32(a).unwrap() * q < bound)
    }

    pub fn q_f64(&self) -> Vec<f64> {
        self.q
            .iter()
            .map(|q| rational_to_f64(q))
            .collect()
    }

    pub fn epsilon_f64(&self) -> f64 {
        rational_to_f64(&self.epsilon)
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    let num = q.numer();
    let den = q.denom();
    let nf: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}

/// `(n−1)(n−2)/n` as an exact rational.
fn holder_bound(n: usize) -> BigRational {
    let n = n as i64;
    BigRational::new(((n - 1) * (n - 2)).into(), n.into())
}

/// Construct exponents `q_k = (n−1)(n−2)/(n |α^k|) − ε` for k < p and close
/// the family with `1/q_p = 1 − Σ 1/q_k`, choosing ε as the largest dyadic
/// rational `1/2^m` that satisfies all three conditions exactly.
///
/// `p = 1` is rejected: a single exponent would have to equal 1.
pub fn holder_exponents(alpha_norms: &[u32], n: usize, a: u32) -> Result<ExponentSolution> {
    if n < 4 || n % 2 != 0 {
        return Err(QflatError::UnsupportedDimension { need: "even n >= 4", got: n });
    }
    if a < 1 {
        return Err(QflatError::invalid("need a >= 1"));
    }
    let p = alpha_norms.len();
    if p == 1 {
        return Err(QflatError::invalid(
            "p = 1 is degenerate: the single exponent is forced to 1",
        ));
    }
    if p == 0 || alpha_norms.iter().any(|&v| v == 0) {
        return Err(QflatError::invalid("all |alpha^k| must be at least 1"));
    }
    let total: u32 = alpha_norms.iter().sum();
    if total as i64 != n as i64 - 2 - a as i64 {
        return Err(QflatError::invalid(format!(
            "Σ|alpha^k| = {total} must equal n - 2 - a = {}",
            n as i64 - 2 - a as i64
        )));
    }
    let bound = holder_bound(n);
    let one = BigRational::one();
    for m in 1..=60u32 {
        let eps = BigRational::new(1.into(), num::BigInt::from(2u64).pow(m));
        let mut q: Vec<BigRational> = Vec::with_capacity(p);
        let mut ok = true;
        let mut sum_inv = BigRational::zero();
        for &ak in &alpha_norms[..p - 1] {
            let qk = &bound / BigRational::from_u32(ak).unwrap() - &eps;
            if qk <= one {
                ok = false;
                break;
            }
            sum_inv += qk.recip();
            q.push(qk);
        }
        if !ok || sum_inv >= one {
            continue;
        }
        let qp = (&one - &sum_inv).recip();
        q.push(qp);
        let candidate = ExponentSolution {
            n,
            a,
            alpha_norms: alpha_norms.to_vec(),
            q,
            epsilon: eps,
        };
        if candidate.verify() {
            return Ok(candidate);
        }
    }
    Err(QflatError::invalid(
        "no dyadic epsilon satisfies the exponent conditions",
    ))
}

// ---------------------------------------------------------------------------
// Density catalog

/// Smooth compact bump `c (1 − (r/R)²)³` on the ball of radius R, scaled to
/// the requested mass (dimension four).
pub fn density_poly_ball(mass: f64, radius: f64) -> Result<QDensity> {
    if radius <= 0.0 {
        return Err(QflatError::invalid("radius must be positive"));
    }
    let c = 20.0 * mass / (std::f64::consts::PI.powi(2) * radius.powi(4));
    let r2max = radius * radius;
    Ok(QDensity::new(
        4,
        radius,
        mass,
        format!("density:ball:mass={mass},radius={radius}"),
        move |y: &[f64]| {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            if r2 >= r2max {
                0.0
            } else {
                let t = 1.0 - r2 / r2max;
                c * t * t * t
            }
        },
    ))
}

/// Gaussian density truncated at 8 widths (truncated mass error < 1e−26).
pub fn density_gaussian(mass: f64, width: f64) -> Result<QDensity> {
    if width <= 0.0 {
        return Err(QflatError::invalid("width must be positive"));
    }
    let c = mass / (std::f64::consts::PI.powi(2) * width.powi(4));
    let inv_s2 = 1.0 / (width * width);
    Ok(QDensity::new(
        4,
        8.0 * width,
        mass,
        format!("density:gaussian:mass={mass},width={width}"),
        move |y: &[f64]| {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            c * (-r2 * inv_s2).exp()
        },
    ))
}

/// Near-uniform ball density with a quintic rolloff on the outer tenth of
/// the radius, keeping the profile continuous.
pub fn density_uniform_ball(mass: f64, radius: f64) -> Result<QDensity> {
    if radius <= 0.0 {
        return Err(QflatError::invalid("radius must be positive"));
    }
    let profile = move |t: f64| -> f64 {
        if t <= 0.9 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            1.0 - crate::quadrature::smoothstep_quintic((t - 0.9) / 0.1)
        }
    };
    // normalize by a radial quadrature of the profile
    let shape = quadrature::integrate_radial(
        move |r: f64| profile(r / radius),
        0.0,
        radius,
        4,
        &QuadratureSpec::with_tols(1e-12, 1e-14),
    )?
    .value;
    let c = mass / shape;
    Ok(QDensity::new(
        4,
        radius,
        mass,
        format!("density:uniform-ball:mass={mass},radius={radius}"),
        move |y: &[f64]| {
            let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            c * profile(r / radius)
        },
    ))
}

/// Resolve a density id like `"density:gaussian:mass=39.48,width=0.8"`.
pub fn density_by_id(id: &str) -> Result<QDensity> {
    let rest = id
        .strip_prefix("density:")
        .ok_or_else(|| QflatError::invalid(format!("unknown density id '{id}'")))?;
    let (kind, params) = match rest.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (rest, None),
    };
    let mass = parse_param(params, "mass")?.unwrap_or(4.0 * std::f64::consts::PI.powi(2));
    match kind {
        "ball" => density_poly_ball(mass, parse_param(params, "radius")?.unwrap_or(2.0)),
        "gaussian" => density_gaussian(mass, parse_param(params, "width")?.unwrap_or(0.8)),
        "uniform-ball" => {
            density_uniform_ball(mass, parse_param(params, "radius")?.unwrap_or(2.0))
        }
        other => Err(QflatError::invalid(format!("unknown density kind '{other}'"))),
    }
}

pub fn density_catalog_ids() -> Vec<&'static str> {
    vec!["density:ball", "density:gaussian", "density:uniform-ball"]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{field_quadratic_xy, field_sphere_stereographic};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::with_tols(1e-8, 1e-11)
    }

    #[test]
    fn density_masses_verify() {
        let s = spec();
        for d in [
            density_poly_ball(4.0 * PI * PI, 2.0).unwrap(),
            density_gaussian(20.0, 0.8).unwrap(),
            density_uniform_ball(10.0, 1.5).unwrap(),
        ] {
            let measured = d.verify_mass(&s).unwrap();
            assert_relative_eq!(measured, d.mass, epsilon = 1e-6 * (1.0 + d.mass));
        }
    }

    #[test]
    fn normal_factor_zero_density() {
        let zero = QDensity::new(4, 1.0, 0.0, "zero", |_y| 0.0);
        let nf = normal_factor_from_density(&zero, &spec()).unwrap();
        assert_eq!(nf.field.eval(&[0.7, 0.1, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn normal_factor_far_field_log_coefficient() {
        // mass 4π² gives w(x) ≈ −log|x| far out
        let d = density_poly_ball(4.0 * PI * PI, 1.5).unwrap();
        let nf = normal_factor_from_density(&d, &spec()).unwrap();
        let r = 1000.0;
        let w = nf.field.eval(&[r, 0.0, 0.0, 0.0]);
        assert!(
            (w + r.ln()).abs() < 1e-2,
            "w + log r = {}",
            w + r.ln()
        );
    }

    #[test]
    fn bilaplacian_reproduces_density() {
        // Δ₀² w = 2P at interior points
        let d = density_poly_ball(30.0, 2.0).unwrap();
        let nf = normal_factor_from_density(&d, &spec()).unwrap();
        for x in [[0.4, 0.0, 0.0, 0.0], [0.0, 0.8, 0.3, 0.0]] {
            let lhs = nf.field.bilaplacian0(&x).unwrap();
            let rhs = 2.0 * d.eval(&x);
            assert!(
                (lhs - rhs).abs() < 1e-3 * (1.0 + rhs.abs()),
                "bilaplacian {lhs} vs 2P {rhs}"
            );
        }
    }

    #[test]
    fn roundtrip_q_density_matches_p() {
        let d = density_gaussian(25.0, 0.9).unwrap();
        let nf = normal_factor_from_density(&d, &spec()).unwrap();
        let geom = ConformalGeometry::new(nf.field.clone());
        for x in [[0.3, 0.2, 0.0, 0.0], [0.0, 0.0, 0.6, 0.4]] {
            let q_density = geom.q_density(&x).unwrap();
            let p = d.eval(&x);
            assert!(
                (q_density - p).abs() < 1e-3 * (1.0 + p.abs()),
                "Q e^{{4w}} = {q_density} vs P = {p}"
            );
        }
    }

    #[test]
    fn normality_residuals() {
        let s = spec();
        let probes: Vec<Vec<f64>> = vec![
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![-0.8, 0.4, 0.3, 0.0],
            vec![0.2, -0.2, 0.9, 0.5],
        ];
        // self-consistency of a kernel-built factor
        let d = density_poly_ball(20.0, 2.0).unwrap();
        let nf = normal_factor_from_density(&d, &s).unwrap();
        let r = normality_residual(&nf.field, &probes, 30.0, &s).unwrap();
        assert!(r < 1e-3, "normal-field residual {r}");

        // bi-harmonic quadratic is detected as non-normal
        let xy = field_quadratic_xy(4, 1.0).unwrap();
        let probes_xy: Vec<Vec<f64>> = vec![
            vec![1.5, 1.5, 0.0, 0.0],
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let r = normality_residual(&xy, &probes_xy, 20.0, &s).unwrap();
        assert!(r > 0.1, "xy residual {r} should be large");
    }

    #[test]
    fn sphere_field_is_normal() {
        let s = QuadratureSpec::with_tols(1e-7, 1e-10);
        let w = field_sphere_stereographic(4).unwrap();
        let probes: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, -1.5, 0.5, 0.0],
        ];
        let r = normality_residual(&w, &probes, 60.0, &s).unwrap();
        assert!(r < 1e-2, "sphere normality residual {r}");
    }

    #[test]
    fn derivative_bounds_hold() {
        let s = spec();
        let d = density_poly_ball(12.0, 1.5).unwrap();
        let nf = normal_factor_from_density(&d, &s).unwrap();
        let x = [5.0, 0.0, 0.0, 0.0];
        for alpha in [
            MultiIndex(vec![1, 0, 0, 0]),
            MultiIndex(vec![0, 1, 1, 0]),
            MultiIndex(vec![2, 0, 0, 0]),
            MultiIndex(vec![1, 1, 1, 0]),
        ] {
            let b = derivative_bound_check(&nf, &alpha, &x, &s).unwrap();
            assert!(b.ok, "bound fails for {alpha:?}: {} > {}", b.lhs, b.rhs);
        }
        // near the support the bound is weak but still valid
        let near = [1.0, 0.5, 0.0, 0.0];
        let b = derivative_bound_check(&nf, &MultiIndex(vec![2, 0, 0, 0]), &near, &s).unwrap();
        assert!(b.ok);
        // zero density: 0 <= 0
        let zero = QDensity::new(4, 1.0, 0.0, "zero", |_y| 0.0);
        let nfz = normal_factor_from_density(&zero, &s).unwrap();
        let b = derivative_bound_check(&nfz, &MultiIndex(vec![1, 0, 0, 0]), &x, &s).unwrap();
        assert!(b.ok);
    }

    #[test]
    fn annulus_ratios() {
        let s = QuadratureSpec::with_tols(1e-9, 1e-12);
        let flat = crate::field::field_flat(4);
        assert_eq!(annulus_gradient_ratio(&flat, 5.0, &s).unwrap(), 0.0);

        // cone: ratio approaches 12π²β² and consecutive doublings stay close
        let beta = -0.25f64;
        let cone = crate::field::field_smoothed_cone(beta, 4).unwrap();
        let mut prev = None;
        for rho in [10.0, 20.0, 40.0, 80.0] {
            let r = annulus_gradient_ratio(&cone, rho, &s).unwrap();
            if let Some(p) = prev {
                let ratio: f64 = r / p;
                assert!((0.5..=2.0).contains(&ratio), "doubling ratio {ratio}");
            }
            prev = Some(r);
        }
        let limit = 12.0 * PI * PI * beta * beta;
        assert_relative_eq!(prev.unwrap(), limit, epsilon = 0.01 * limit);

        // sphere factor: ratio stays bounded (approaches 12π² from below)
        let w = field_sphere_stereographic(4).unwrap();
        let r10 = annulus_gradient_ratio(&w, 10.0, &s).unwrap();
        let r80 = annulus_gradient_ratio(&w, 80.0, &s).unwrap();
        assert!(r10 < 12.0 * PI * PI && r80 < 12.0 * PI * PI);
        assert!((r80 - 12.0 * PI * PI).abs() < (r10 - 12.0 * PI * PI).abs());
    }

    #[test]
    fn holder_exponent_examples() {
        // n = 6, a = 1, |alpha| = (1, 2)
        let sol = holder_exponents(&[1, 2], 6, 1).unwrap();
        assert!(sol.verify());
        let q = sol.q_f64();
        assert!(q[0] < 10.0 / 3.0 && q[0] > 1.0);
        assert!(q[1] < 5.0 / 3.0 && q[1] > 1.0);
        assert_relative_eq!(1.0 / q[0] + 1.0 / q[1], 1.0, epsilon = 1e-12);

        // p = 1 is rejected
        assert!(holder_exponents(&[3], 6, 1).is_err());

        // n = 8, a = 2, |alpha| = (1, 1, 2)
        let sol = holder_exponents(&[1, 1, 2], 8, 2).unwrap();
        assert!(sol.verify());

        // inconsistent totals rejected
        assert!(holder_exponents(&[1, 1], 6, 2).is_err());
        assert!(holder_exponents(&[1, 2], 5, 1).is_err());
    }

    #[test]
    fn density_ids() {
        assert!(density_by_id("density:gaussian:mass=10,width=0.5").is_ok());
        assert!(density_by_id("density:uniform-ball").is_ok());
        assert!(density_by_id("density:nope").is_err());
        assert!(density_by_id("sphere").is_err());
    }
}
