//! Deterministic adaptive integration over balls, annuli, spheres and boxes
//! in Rⁿ, with radial fast paths and log-singular kernel convolution.
//!
//! Subdivision patterns and summation order are functions of the inputs
//! alone; rerunning an integral (at any thread count) reproduces the same
//! bits. Monte Carlo appears only in test oracles, never here.

pub mod gauss;
pub mod genz_malik;
pub mod singular;
pub mod sphere;

use crate::error::{QflatError, Result};
use crate::constants::sphere_surface;
use serde::{Deserialize, Serialize};
use sphere::SphereRule;

/// Integration domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r_inner: f64, r_outer: f64 },
    /// The sphere surface ∂B(center, radius).
    Sphere { center: Vec<f64>, radius: f64 },
    /// Axis-aligned cube of the given half-width.
    Box { center: Vec<f64>, half_width: f64 },
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. }
            | Region::Annulus { center, .. }
            | Region::Sphere { center, .. }
            | Region::Box { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Region::Ball { radius, .. } => *radius > 0.0 && radius.is_finite(),
            Region::Annulus { r_inner, r_outer, .. } => {
                *r_inner > 0.0 && r_outer.is_finite() && r_inner < r_outer
            }
            Region::Sphere { radius, .. } => *radius > 0.0 && radius.is_finite(),
            Region::Box { half_width, .. } => *half_width > 0.0 && half_width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(QflatError::invalid("region radii must be positive and ordered"))
        }
    }
}

/// Tolerances and limits for adaptive integration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
    /// Fixed sphere-rule level; `None` selects one automatically by probing.
    pub sphere_level: Option<usize>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_depth: 48,
            sphere_level: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tols(rel: f64, abs: f64) -> Self {
        QuadratureSpec {
            rel_tol: rel,
            abs_tol: abs,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rel_tol > 0.0 && self.abs_tol > 0.0 {
            Ok(())
        } else {
            Err(QflatError::invalid("tolerances must be positive"))
        }
    }
}

/// Value with an error estimate and a convergence flag.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    /// Convert a tolerance-not-met flag into an error.
    pub fn expect_converged(self) -> Result<Estimate> {
        if self.converged {
            Ok(self)
        } else {
            Err(QflatError::ToleranceNotMet {
                value: self.value,
                error: self.error,
            })
        }
    }
}

/// Pick a sphere level by doubling until two consecutive levels agree at a
/// set of probe radii.
fn auto_sphere_level<F>(f: &F, center: &[f64], radii: &[f64], n: usize, rel_tol: f64) -> usize
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let shell_sum = |level: usize, r: f64| -> f64 {
        let rule = SphereRule::shared(n, level);
        let mut x = vec![0.0; n];
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(node, w)| {
                for i in 0..n {
                    x[i] = center[i] + r * node[i];
                }
                w * f(&x)
            })
            .sum()
    };
    let mut level = 2usize;
    while level < 32 {
        let next = level * 2;
        let mut worst = 0.0f64;
        for &r in radii {
            let a = shell_sum(level, r);
            let b = shell_sum(next, r);
            let scale = 1.0 + a.abs().max(b.abs());
            worst = worst.max((a - b).abs() / scale);
        }
        if worst < 0.1 * rel_tol.max(1e-13) {
            return level;
        }
        level = next;
    }
    32
}

fn polar_integral<F>(
    f: &F,
    center: &[f64],
    r_inner: f64,
    r_outer: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = center.len();
    let level = match spec.sphere_level {
        Some(l) => l,
        None => {
            let probes: Vec<f64> = (1..=5)
                .map(|k| r_inner + (r_outer - r_inner) * k as f64 / 5.0)
                .collect();
            auto_sphere_level(f, center, &probes, n, spec.rel_tol)
        }
    };
    let rule = SphereRule::shared(n, level);
    let radial = |r: f64| -> f64 {
        let mut x = vec![0.0; n];
        let shell: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(node, w)| {
                for i in 0..n {
                    x[i] = center[i] + r * node[i];
                }
                w * f(&x)
            })
            .sum();
        shell * r.powi(n as i32 - 1)
    };
    let est = gauss::adaptive_auto(
        &radial,
        r_inner,
        r_outer,
        spec.rel_tol,
        spec.abs_tol,
        spec.max_depth.max(50),
    )?;
    Ok(Estimate {
        value: est.value,
        error: est.error,
        converged: est.converged,
    })
}

/// Adaptive integral of `f` over a region.
pub fn integrate<F>(f: F, region: &Region, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    region.validate()?;
    spec.validate()?;
    match region {
        Region::Ball { center, radius } => polar_integral(&f, center, 0.0, *radius, spec),
        Region::Annulus {
            center,
            r_inner,
            r_outer,
        } => polar_integral(&f, center, *r_inner, *r_outer, spec),
        Region::Sphere { center, radius } => {
            let n = center.len();
            let shell = |level: usize| -> Result<f64> {
                let rule = SphereRule::shared(n, level);
                let mut acc = 0.0;
                let mut x = vec![0.0; n];
                for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                    for i in 0..n {
                        x[i] = center[i] + radius * node[i];
                    }
                    let v = f(&x);
                    if !v.is_finite() {
                        return Err(QflatError::IntegrandNotFinite { location: x });
                    }
                    acc += w * v;
                }
                Ok(acc * radius.powi(n as i32 - 1))
            };
            let mut level = spec.sphere_level.unwrap_or(4);
            let mut prev = shell(level)?;
            loop {
                let next_level = level * 2;
                if next_level > 64 {
                    return Ok(Estimate {
                        value: prev,
                        error: f64::INFINITY,
                        converged: false,
                    });
                }
                let next = shell(next_level)?;
                let err = (next - prev).abs();
                if err <= spec.abs_tol.max(spec.rel_tol * next.abs()) {
                    return Ok(Estimate {
                        value: next,
                        error: err,
                        converged: true,
                    });
                }
                prev = next;
                level = next_level;
            }
        }
        Region::Box { center, half_width } => {
            let lo: Vec<f64> = center.iter().map(|c| c - half_width).collect();
            let hi: Vec<f64> = center.iter().map(|c| c + half_width).collect();
            let est = genz_malik::integrate_box(&f, &lo, &hi, spec.rel_tol, spec.abs_tol, spec.max_depth)?;
            Ok(Estimate {
                value: est.value,
                error: est.error,
                converged: est.converged,
            })
        }
    }
}

/// Radial fast path: `|∂B(0,1)| ∫ φ(r) r^{n−1} dr`.
pub fn integrate_radial<F>(
    phi: F,
    r_inner: f64,
    r_outer: f64,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    spec.validate()?;
    if !(r_inner >= 0.0 && r_inner < r_outer) {
        return Err(QflatError::invalid("radial bounds must satisfy 0 <= r1 < r2"));
    }
    let area = sphere_surface(n - 1);
    let g = |r: f64| phi(r) * r.powi(n as i32 - 1);
    let est = gauss::adaptive_auto(&g, r_inner, r_outer, spec.rel_tol, spec.abs_tol, 60)?;
    Ok(Estimate {
        value: area * est.value,
        error: area * est.error,
        converged: est.converged,
    })
}

/// Integral over all of Rⁿ of a decaying integrand, truncated at `r_max`.
///
/// The tail is estimated from the measured decay between shells at `r_max/2`
/// and `r_max` and folded into the error estimate.
pub fn integrate_decaying<F>(f: F, n: usize, r_max: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let center = vec![0.0; n];
    let inner = polar_integral(&f, &center, 0.0, r_max, spec)?;
    // measured decay exponent from shell averages of |f|
    let rule = SphereRule::shared(n, 4);
    let shell_avg = |r: f64| -> f64 {
        let mut x = vec![0.0; n];
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(node, w)| {
                for i in 0..n {
                    x[i] = r * node[i];
                }
                w * f(&x).abs()
            })
            .sum();
        s / sphere_surface(n - 1)
    };
    let a_half = shell_avg(0.5 * r_max);
    let a_full = shell_avg(r_max);
    let tail = if a_full <= 0.0 {
        0.0
    } else {
        let p = (a_half / a_full).log2().max(n as f64 + 0.5);
        // ∫_{r_max}^∞ c r^{n-1-p} dr with c = a_full r_max^p
        a_full * sphere_surface(n - 1) * r_max.powi(n as i32) / (p - n as f64)
    };
    Ok(Estimate {
        value: inner.value,
        error: inner.error + tail,
        converged: inner.converged,
    })
}

pub use singular::{kernel_sphere_average, log_kernel_convolution, KernelAverage};

/// Quintic smoothstep: 0 at t ≤ 0, 1 at t ≥ 1, C² everywhere.
pub(crate) fn smoothstep_quintic(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ball_volume_r4() {
        let region = Region::Ball {
            center: vec![0.0; 4],
            radius: 1.0,
        };
        let est = integrate(|_x| 1.0, &region, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(est.value, PI * PI / 2.0, epsilon = 1e-8);
        assert!(est.converged);
    }

    #[test]
    fn sphere_area_r4() {
        let region = Region::Sphere {
            center: vec![0.0; 4],
            radius: 1.0,
        };
        let est = integrate(|_x| 1.0, &region, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(est.value, 2.0 * PI * PI, epsilon = 1e-8);
    }

    #[test]
    fn round_sphere_volume_from_conformal_factor() {
        // ∫_{R^4} e^{4w} dx = vol(S^4) = 8π²/3 for the stereographic factor
        let w = field::field_sphere_stereographic(4).unwrap();
        let spec = QuadratureSpec::with_tols(1e-9, 1e-12);
        let est = integrate_decaying(|x| (4.0 * w.eval(x)).exp(), 4, 150.0, &spec).unwrap();
        assert_relative_eq!(est.value, 8.0 * PI * PI / 3.0, epsilon = 1e-6 * 26.0);
    }

    #[test]
    fn radial_examples() {
        let spec = QuadratureSpec::default();
        // φ = 1 over [0,1] in R^4: ball volume
        let est = integrate_radial(|_r| 1.0, 0.0, 1.0, 4, &spec).unwrap();
        assert_relative_eq!(est.value, PI * PI / 2.0, epsilon = 1e-10);

        // shell volumes of r^{4β}
        let beta: f64 = -0.25;
        let est = integrate_radial(|r: f64| r.powf(4.0 * beta), 0.0, 2.0, 4, &spec).unwrap();
        let expect = 2.0 * PI * PI * 2.0f64.powf(4.0 * beta + 4.0) / (4.0 * beta + 4.0);
        assert_relative_eq!(est.value, expect, epsilon = 1e-8 * expect);

        // integrable endpoint singularity r^{-1/2}
        let est = integrate_radial(|r: f64| r.powf(-0.5), 0.0, 1.0, 4, &spec).unwrap();
        let expect = 2.0 * PI * PI / 3.5;
        assert!(((est.value - expect) / expect).abs() < 1e-8);
    }

    #[test]
    fn annulus_additivity() {
        let f = |x: &[f64]| (x[0] - 0.3 * x[1]).cos() + x[2] * x[2] * 0.1;
        let spec = QuadratureSpec::with_tols(1e-10, 1e-13);
        let c = vec![0.0; 4];
        let whole = integrate(
            &f,
            &Region::Annulus {
                center: c.clone(),
                r_inner: 0.5,
                r_outer: 2.0,
            },
            &spec,
        )
        .unwrap();
        let a = integrate(
            &f,
            &Region::Annulus {
                center: c.clone(),
                r_inner: 0.5,
                r_outer: 1.2,
            },
            &spec,
        )
        .unwrap();
        let b = integrate(
            &f,
            &Region::Annulus {
                center: c,
                r_inner: 1.2,
                r_outer: 2.0,
            },
            &spec,
        )
        .unwrap();
        assert_relative_eq!(whole.value, a.value + b.value, epsilon = 1e-8);
    }

    #[test]
    fn radial_consistency_with_general_path() {
        let spec = QuadratureSpec::default();
        let phi = |r: f64| (-(r * r)).exp() * (1.0 + r);
        let general = integrate(
            |x: &[f64]| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                phi(r)
            },
            &Region::Annulus {
                center: vec![0.0; 4],
                r_inner: 0.25,
                r_outer: 3.0,
            },
            &spec,
        )
        .unwrap();
        let radial = integrate_radial(phi, 0.25, 3.0, 4, &spec).unwrap();
        assert_relative_eq!(general.value, radial.value, epsilon = 1e-8);
    }

    #[test]
    fn determinism_same_bits() {
        let f = |x: &[f64]| (1.3 * x[0]).sin() + (0.4 - x[1]).exp() * 0.01 + x[3];
        let region = Region::Ball {
            center: vec![0.1, -0.2, 0.0, 0.4],
            radius: 1.7,
        };
        let spec = QuadratureSpec::default();
        let a = integrate(&f, &region, &spec).unwrap();
        let b = integrate(&f, &region, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }

    #[test]
    fn rejects_bad_regions() {
        assert!(Region::Ball {
            center: vec![0.0; 4],
            radius: -1.0
        }
        .validate()
        .is_err());
        assert!(Region::Annulus {
            center: vec![0.0; 4],
            r_inner: 2.0,
            r_outer: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn non_finite_integrand_reports_location() {
        let region = Region::Ball {
            center: vec![0.0; 2],
            radius: 1.0,
        };
        let res = integrate(
            |x: &[f64]| if x[0] > 0.3 { f64::NAN } else { 1.0 },
            &region,
            &QuadratureSpec::default(),
        );
        match res {
            Err(QflatError::IntegrandNotFinite { location }) => assert_eq!(location.len(), 2),
            other => panic!("expected integrand error, got {other:?}"),
        }
    }
}
