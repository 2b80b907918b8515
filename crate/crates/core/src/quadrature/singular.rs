//! Singular-kernel integrals: the log-kernel potential, its first and second
//! kernel derivatives, and sphere averages of inverse-power kernels.
//!
//! The kernel is split at a radius δ around the singular point with a C²
//! cutoff. The inner piece is integrated in polar form — the radial factor
//! `r^{n−1} log(1/r)` (or `r^{n−1−q}`) goes through a dedicated interpolatory
//! rule with exact moments — and the outer piece is smooth everywhere, so it
//! goes through the ordinary adaptive cubature.

use crate::error::{QflatError, Result};
use crate::linalg;
use crate::quadrature::gauss::{self, gauss_legendre};
use crate::quadrature::genz_malik;
use crate::quadrature::smoothstep_quintic;
use crate::quadrature::sphere::SphereRule;
use crate::quadrature::{Estimate, QuadratureSpec};

/// Radial singularity type of the kernel at the base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// `log(1/r)`
    Log,
    /// `r^{-q}`
    Power(u32),
}

/// Angular factor of the kernel, as a function of ω = (y − x)/|y − x|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AngularKind {
    One,
    /// ω_i (first kernel derivative along axis i)
    Axis(usize),
    /// 2 ω_i ω_j − δ_{ij} (second kernel derivative)
    Second(usize, usize),
}

impl AngularKind {
    #[inline]
    fn eval(&self, omega: &[f64]) -> f64 {
        match *self {
            AngularKind::One => 1.0,
            AngularKind::Axis(i) => omega[i],
            AngularKind::Second(i, j) => {
                let d = if i == j { 1.0 } else { 0.0 };
                2.0 * omega[i] * omega[j] - d
            }
        }
    }
}

/// A density P with declared compact support, integrable against kernels.
pub struct DensityFn<'a> {
    pub n: usize,
    pub support_center: Vec<f64>,
    pub support_radius: f64,
    pub f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

/// Interpolatory rule with weight `r^s` (times `log(1/r)` when requested) on
/// `[0, d]`: nodes r_i with weights W_i exact for polynomials of degree ≤ 7.
fn weighted_radial_rule(d: f64, s: i32, log_weight: bool) -> Vec<(f64, f64)> {
    let k = 8usize;
    let (gl, _) = gauss_legendre(k);
    let t: Vec<f64> = gl.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let mut mat = vec![0.0; k * k];
    for row in 0..k {
        for (col, tv) in t.iter().enumerate() {
            mat[row * k + col] = tv.powi(row as i32);
        }
    }
    let lu = linalg::lu_decompose(&mat, k).expect("radial rule Vandermonde");
    let rhs: Vec<f64> = (0..k)
        .map(|kk| {
            let m = (s + kk as i32 + 1) as f64;
            let scale = d.powi(s + 1);
            if log_weight {
                scale * ((1.0 / d).ln() / m + 1.0 / (m * m))
            } else {
                scale / m
            }
        })
        .collect();
    let w = lu.solve(&rhs);
    t.iter().map(|tv| tv * d).zip(w).collect()
}

fn kernel_radial(kind: KernelKind, r: f64) -> f64 {
    match kind {
        KernelKind::Log => (1.0 / r).ln(),
        KernelKind::Power(q) => r.powi(-(q as i32)),
    }
}

/// ∫ K(|y−x|) A(ω) P(y) dy with K singular at x.
pub fn singular_kernel_integral(
    p: &DensityFn<'_>,
    x: &[f64],
    kind: KernelKind,
    angular: AngularKind,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let n = p.n;
    if x.len() != n {
        return Err(QflatError::invalid("point dimension mismatch"));
    }
    if let KernelKind::Power(q) = kind {
        if q as usize >= n {
            return Err(QflatError::invalid(
                "kernel power must stay integrable (q < n)",
            ));
        }
    }
    let delta = (p.support_radius / 4.0).min(0.5);
    let half = delta * 0.5;

    // Does the singular ball meet the support box at all?
    let mut ball_touches_box = true;
    for i in 0..n {
        if (x[i] - p.support_center[i]).abs() - delta > p.support_radius {
            ball_touches_box = false;
            break;
        }
    }

    let sphere_level = spec.sphere_level.unwrap_or(4);
    let rule = SphereRule::shared(n, sphere_level);
    let fine_rule = SphereRule::shared(n, sphere_level * 2);
    let shell = |r: f64, rl: &SphereRule| -> f64 {
        let mut y = vec![0.0; n];
        rl.nodes
            .iter()
            .zip(&rl.weights)
            .map(|(node, w)| {
                for i in 0..n {
                    y[i] = x[i] + r * node[i];
                }
                w * angular.eval(node) * (p.f)(&y)
            })
            .sum()
    };

    let mut near = 0.0;
    let mut near_err = 0.0;
    if ball_touches_box {
        // [0, δ/2]: cutoff ≡ 1, dedicated weighted rule.
        let s_pow = match kind {
            KernelKind::Log => n as i32 - 1,
            KernelKind::Power(q) => n as i32 - 1 - q as i32,
        };
        let wr = weighted_radial_rule(half, s_pow, kind == KernelKind::Log);
        let mut inner = 0.0;
        let mut inner_fine = 0.0;
        for &(r, w) in &wr {
            inner += w * shell(r, &rule);
            inner_fine += w * shell(r, &fine_rule);
        }
        near_err += (inner - inner_fine).abs();
        near += inner_fine;

        // [δ/2, δ]: kernel still active but no singularity; cutoff ramps down.
        let ramp = |r: f64| -> f64 {
            let theta = 1.0 - smoothstep_quintic((r - half) / half);
            r.powi(n as i32 - 1) * kernel_radial(kind, r) * theta * shell(r, &fine_rule)
        };
        let est = gauss::adaptive_auto(&ramp, half, delta, spec.rel_tol, spec.abs_tol, 40)?;
        near += est.value;
        near_err += est.error;
    }

    // Far part: smooth integrand (cutoff vanishes below δ/2) over the support box.
    let cutoff_far = move |r: f64| -> f64 {
        if r <= half {
            0.0
        } else if r >= delta {
            1.0
        } else {
            smoothstep_quintic((r - half) / half)
        }
    };
    let far_f = |y: &[f64]| -> f64 {
        let mut r2 = 0.0;
        for i in 0..n {
            let d = y[i] - x[i];
            r2 += d * d;
        }
        let r = r2.sqrt();
        let c = cutoff_far(r);
        if c == 0.0 {
            return 0.0;
        }
        let mut omega = vec![0.0; n];
        for i in 0..n {
            omega[i] = (y[i] - x[i]) / r;
        }
        c * kernel_radial(kind, r) * angular.eval(&omega) * (p.f)(y)
    };
    let lo: Vec<f64> = p
        .support_center
        .iter()
        .map(|c| c - p.support_radius)
        .collect();
    let hi: Vec<f64> = p
        .support_center
        .iter()
        .map(|c| c + p.support_radius)
        .collect();
    let far = genz_malik::integrate_box(&far_f, &lo, &hi, spec.rel_tol, spec.abs_tol, spec.max_depth)?;

    Ok(Estimate {
        value: near + far.value,
        error: near_err + far.error,
        converged: far.converged,
    })
}

/// Log potential `∫ log(1/|x−y|) P(y) dy`.
pub fn log_potential(p: &DensityFn<'_>, x: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    singular_kernel_integral(p, x, KernelKind::Log, AngularKind::One, spec)
}

/// The normal-metric kernel integral `(1/c_n) ∫ log(|y|/|x−y|) P(y) dy`.
pub fn log_kernel_convolution(
    p: &DensityFn<'_>,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let n = p.n;
    let cn = crate::constants::c_n(n);
    let at_x = log_potential(p, x, spec)?;
    let at_origin = log_potential(p, &vec![0.0; n], spec)?;
    Ok(Estimate {
        value: (at_x.value - at_origin.value) / cn,
        error: (at_x.error + at_origin.error) / cn,
        converged: at_x.converged && at_origin.converged,
    })
}

/// `∂^α_x ∫ log(1/|x−y|) P(y) dy` for 1 ≤ |α| ≤ 2, by differentiating the
/// kernel under the integral.
pub fn log_potential_derivative(
    p: &DensityFn<'_>,
    x: &[f64],
    alpha: &[u8],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let order: u32 = alpha.iter().map(|&e| e as u32).sum();
    let axes: Vec<usize> = alpha
        .iter()
        .enumerate()
        .flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize))
        .collect();
    match order {
        1 => singular_kernel_integral(p, x, KernelKind::Power(1), AngularKind::Axis(axes[0]), spec),
        2 => singular_kernel_integral(
            p,
            x,
            KernelKind::Power(2),
            AngularKind::Second(axes[0], axes[1]),
            spec,
        ),
        _ => Err(QflatError::UnsupportedOrder {
            max: 2,
            got: order as usize,
        }),
    }
}

/// Average of `|x − y|^{−s}` over the sphere ∂B(0, r), with the ratio to
/// `r^{−s}` reported alongside.
#[derive(Clone, Copy, Debug)]
pub struct KernelAverage {
    pub average: f64,
    pub ratio_to_center_value: f64,
}

pub fn kernel_sphere_average(
    n: usize,
    r: f64,
    y: &[f64],
    s: f64,
    spec: &QuadratureSpec,
) -> Result<KernelAverage> {
    if r <= 0.0 {
        return Err(QflatError::invalid("sphere radius must be positive"));
    }
    let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (rho - r).abs() < 1e-9 * r && s >= n as f64 - 1.0 {
        return Err(QflatError::invalid(
            "kernel exponent must satisfy s < n-1 when y lies on the sphere",
        ));
    }
    // distance depends only on the polar angle between x and y
    let k = n as i32 - 2;
    let f = |theta: f64| -> f64 {
        let d2 = r * r + rho * rho - 2.0 * r * rho * theta.cos();
        d2.powf(-0.5 * s) * theta.sin().powi(k)
    };
    let norm = |theta: f64| -> f64 { theta.sin().powi(k) };
    let top = gauss::adaptive_auto(&f, 0.0, std::f64::consts::PI, spec.rel_tol, spec.abs_tol, 60)?;
    let bottom =
        gauss::adaptive_auto(&norm, 0.0, std::f64::consts::PI, spec.rel_tol, spec.abs_tol, 60)?;
    let average = top.value / bottom.value;
    Ok(KernelAverage {
        average,
        ratio_to_center_value: average * r.powf(s),
    })
}
