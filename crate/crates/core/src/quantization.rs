//! End-to-end checks: total Q-curvature integrals and their integrality,
//! dimensional constants, the Gauss–Bonnet–Chern value, isoperimetric
//! profiles, deficit consistency, and annulus flux decay.

use crate::constants::{c_n, pfaffian_coefficient, quantization_modulus, sphere_surface};
use crate::curvature::ConformalGeometry;
use crate::error::{QflatError, Result};
use crate::field::ScalarField;
use crate::quadrature::{self, smoothstep_quintic, Estimate, QuadratureSpec, Region};
use num::{BigInt, BigRational, One};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Total integral, nearest multiple of the modulus, and the residual.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuantizationReport {
    pub total: f64,
    /// `2 c_n`, which is 8π² in dimension four.
    pub modulus: f64,
    pub multiple: i64,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub euler: Option<i64>,
}

/// `modulus = 2 c_n`, `m = round(total/modulus)`, `residual = |total − m·modulus|`.
pub fn quantization_report(total: f64, n: usize) -> Result<QuantizationReport> {
    if n < 4 || n % 2 != 0 {
        return Err(QflatError::UnsupportedDimension { need: "even n >= 4", got: n });
    }
    let modulus = quantization_modulus(n);
    let multiple = (total / modulus).round() as i64;
    Ok(QuantizationReport {
        total,
        modulus,
        multiple,
        residual: (total - multiple as f64 * modulus).abs(),
        euler: None,
    })
}

/// The dimensional constants of the quantization statement, with the exact
/// identity `A (n−1)!! |Sⁿ| = 2 c_n` checked in rational arithmetic.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DimensionalConstants {
    pub n: usize,
    pub c_n: f64,
    pub two_c_n: f64,
    pub pfaffian_coefficient: f64,
    pub sphere_volume: f64,
    pub identity_ok: bool,
}

pub fn dimensional_constants(n: usize) -> Result<DimensionalConstants> {
    if n < 4 || n % 2 != 0 {
        return Err(QflatError::UnsupportedDimension { need: "even n >= 4", got: n });
    }
    // rational coefficients of π^{n/2}
    let h = (n - 2) / 2;
    let fact_h: BigInt = (1..=h as u64).product::<u64>().max(1).into();
    let double_fact: BigInt = {
        let mut v: u64 = 1;
        let mut k = n as u64 - 1;
        while k > 1 {
            v *= k;
            k -= 2;
        }
        v.into()
    };
    let two = BigInt::from(2u64);
    let c_coeff = BigRational::from(two.pow(n as u32 - 2) * &fact_h);
    let a_coeff = BigRational::from(two.pow(n as u32 / 2 - 2) * &fact_h);
    let sphere_coeff = BigRational::new(two.pow(n as u32 / 2 + 1), double_fact.clone());
    let lhs = &a_coeff * BigRational::from(double_fact) * &sphere_coeff;
    let rhs = BigRational::from(BigInt::from(2u64)) * &c_coeff;
    let identity_ok = lhs == rhs && BigRational::one() > BigRational::from(BigInt::from(0u64));
    Ok(DimensionalConstants {
        n,
        c_n: c_n(n),
        two_c_n: quantization_modulus(n),
        pfaffian_coefficient: pfaffian_coefficient(n),
        sphere_volume: sphere_surface(n),
        identity_ok,
    })
}

/// `∫_{R⁴} Q e^{4w} dx`, truncated at `r_max` with the tail folded into the
/// error estimate.
pub fn total_q_integral(w: &ScalarField, spec: &QuadratureSpec, r_max: f64) -> Result<Estimate> {
    if w.dim() != 4 {
        return Err(QflatError::UnsupportedDimension { need: "n = 4", got: w.dim() });
    }
    let geom = ConformalGeometry::new(w.clone());
    quadrature::integrate_decaying(
        |x: &[f64]| geom.q_density(x).expect("q density"),
        4,
        r_max,
        spec,
    )
}

/// Default truncation radius for total-Q integrals.
pub const DEFAULT_R_MAX: f64 = 120.0;

/// Gauss–Bonnet–Chern value `(1/4π²)(total|W|²/8 + totalQ)`.
pub fn gbc_check(total_q: f64, total_weyl_sq: f64) -> f64 {
    (total_weyl_sq / 8.0 + total_q) / (4.0 * PI * PI)
}

/// One radius of an isoperimetric profile.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProfileEntry {
    pub r: f64,
    pub vol_boundary: f64,
    pub vol_ball: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RadialProfile {
    pub metric: String,
    pub entries: Vec<ProfileEntry>,
}

/// Per radius: `vol_g(∂B⁰(0,r)) = ∫ e^{3w} dσ₀`, `vol_g(B⁰(0,r)) = ∫ e^{4w} dx`,
/// and the ratio `vol∂^{4/3} / (4 (2π²)^{1/3} vol)`.
pub fn isoperimetric_profile(
    w: &ScalarField,
    radii: &[f64],
    spec: &QuadratureSpec,
) -> Result<RadialProfile> {
    if w.dim() != 4 {
        return Err(QflatError::UnsupportedDimension { need: "n = 4", got: w.dim() });
    }
    let mut entries = Vec::with_capacity(radii.len());
    for &r in radii {
        let vol_boundary = quadrature::integrate(
            |x: &[f64]| (3.0 * w.eval(x)).exp(),
            &Region::Sphere {
                center: vec![0.0; 4],
                radius: r,
            },
            spec,
        )?
        .value;
        let vol_ball = quadrature::integrate(
            |x: &[f64]| (4.0 * w.eval(x)).exp(),
            &Region::Ball {
                center: vec![0.0; 4],
                radius: r,
            },
            spec,
        )?
        .value;
        let ratio = vol_boundary.powf(4.0 / 3.0)
            / (4.0 * (2.0 * PI * PI).powf(1.0 / 3.0) * vol_ball);
        entries.push(ProfileEntry {
            r,
            vol_boundary,
            vol_ball,
            ratio,
        });
    }
    Ok(RadialProfile {
        metric: w.id().to_string(),
        entries,
    })
}

/// Both sides of the deficit identity: `1 − ∫Q/4π²` against the
/// isoperimetric ratio at the largest ladder radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeficitReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub total_q: f64,
}

pub fn deficit_consistency(w: &ScalarField, spec: &QuadratureSpec) -> Result<DeficitReport> {
    let total_q = total_q_integral(w, spec, DEFAULT_R_MAX)?.value;
    let lhs = 1.0 - total_q / (4.0 * PI * PI);
    let profile = isoperimetric_profile(w, &[1000.0], spec)?;
    let rhs = profile.entries[0].ratio;
    Ok(DeficitReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        total_q,
    })
}

/// Radial cutoff family: 1 on B(0,ρ), 0 outside B(0,2ρ), quintic-smoothstep
/// profile in between, with the derivative-bound constants reported.
#[derive(Clone, Copy, Debug)]
pub struct CutoffFamily {
    pub rho: f64,
    /// sup |η'|·ρ, sup |η''|·ρ², sup |η'''|·ρ³ over the transition annulus.
    pub derivative_constants: [f64; 3],
}

impl CutoffFamily {
    pub fn new(rho: f64) -> Self {
        // quintic smoothstep S on [0,1]: max |S'| = 15/8, max |S''| = 10/√3,
        // max |S'''| = 60
        CutoffFamily {
            rho,
            derivative_constants: [15.0 / 8.0, 10.0 / 3f64.sqrt(), 60.0],
        }
    }

    pub fn eta(&self, x: &[f64]) -> f64 {
        let t = norm(x) / self.rho;
        1.0 - smoothstep_quintic(t - 1.0)
    }

    /// dS/dt of the quintic profile evaluated at t − 1.
    fn profile_slope(&self, t: f64) -> f64 {
        let s = t - 1.0;
        if !(0.0..1.0).contains(&s) {
            0.0
        } else {
            30.0 * s * s * (s - 1.0) * (s - 1.0)
        }
    }

    fn profile_curvature(&self, t: f64) -> f64 {
        let s = t - 1.0;
        if !(0.0..1.0).contains(&s) {
            0.0
        } else {
            60.0 * s * (s - 1.0) * (2.0 * s - 1.0)
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let t = r / self.rho;
        let slope = -self.profile_slope(t) / self.rho;
        x.iter().map(|&v| slope * v / r).collect()
    }

    /// Flat Laplacian `Δ₀ η = η''(r) + (n−1) η'(r)/r`.
    pub fn laplacian0(&self, x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let t = r / self.rho;
        let d1 = -self.profile_slope(t) / self.rho;
        let d2 = -self.profile_curvature(t) / (self.rho * self.rho);
        d2 + (n - 1.0) * d1 / r
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// One scale of the annulus flux profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FluxEntry {
    pub rho: f64,
    pub value: f64,
}

/// `F(ρ) = ∫_{B(0,2ρ)∖B(0,ρ)} R_g Δ_g η_ρ dv_g`, computed through the
/// divergence form `Δ_g η dv_g = ∂_i(e^{2w} ∂_i η) dx` in dimension four.
pub fn flux_decay_profile(
    w: &ScalarField,
    scales: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<FluxEntry>> {
    let geom = ConformalGeometry::new(w.clone());
    scales
        .iter()
        .map(|&rho| {
            let (i, ii) = term_split(&geom, rho, spec)?;
            Ok(FluxEntry {
                rho,
                value: i + ii,
            })
        })
        .collect()
}

/// The two annulus integrals `I = ∫ R_g Δ₀η e^{2w} dx` and
/// `II = ∫ R_g ∂_i(e^{2w}) ∂_i η dx`; their sum is the flux F(ρ).
pub fn term_split_i_ii(w: &ScalarField, rho: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let geom = ConformalGeometry::new(w.clone());
    term_split(&geom, rho, spec)
}

fn term_split(geom: &ConformalGeometry, rho: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let n = geom.dim();
    if n != 4 {
        return Err(QflatError::UnsupportedDimension { need: "n = 4", got: n });
    }
    let cutoff = CutoffFamily::new(rho);
    let region = Region::Annulus {
        center: vec![0.0; n],
        r_inner: rho,
        r_outer: 2.0 * rho,
    };
    let term_i = quadrature::integrate(
        |x: &[f64]| {
            let r = geom.scalar(x).expect("scalar curvature");
            let e2w = (2.0 * geom.w.eval(x)).exp();
            r * e2w * cutoff.laplacian0(x)
        },
        &region,
        spec,
    )?;
    let term_ii = quadrature::integrate(
        |x: &[f64]| {
            let r = geom.scalar(x).expect("scalar curvature");
            let e2w = (2.0 * geom.w.eval(x)).exp();
            let wgrad = geom.w.gradient(x).expect("gradient");
            let eta_grad = cutoff.gradient(x);
            let dot: f64 = wgrad.iter().zip(&eta_grad).map(|(a, b)| a * b).sum();
            r * 2.0 * e2w * dot
        },
        &region,
        spec,
    )?;
    Ok((term_i.value, term_ii.value))
}

/// Analytic large-ρ limit of the cone flux:
/// `∫ Δ_g R_g dv_g = 2π² · 12 β(β+1)(β+2)` for `w = (β/2) log(1+|x|²)`.
///
/// Nonzero for β ∉ {0, −1, −2}: the smoothed cone genuinely violates the
/// flux-vanishing conclusion because it is not an immersion with integrable
/// |L|⁴, and this value is the oracle the flux machinery is checked against.
pub fn cone_flux_limit(beta: f64) -> f64 {
    2.0 * PI * PI * 12.0 * beta * (beta + 1.0) * (beta + 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{
        field_flat, field_smoothed_cone, field_sphere_stereographic,
    };
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::with_tols(1e-9, 1e-12)
    }

    #[test]
    fn quantization_reports() {
        let r = quantization_report(8.0 * PI * PI, 4).unwrap();
        assert_eq!(r.multiple, 1);
        assert!(r.residual < 1e-12);

        let r = quantization_report(0.0, 4).unwrap();
        assert_eq!(r.multiple, 0);

        // cone value π² is far from any multiple
        let r = quantization_report(PI * PI, 4).unwrap();
        assert_eq!(r.multiple, 0);
        assert_relative_eq!(r.residual, PI * PI, epsilon = 1e-12);

        assert!(quantization_report(1.0, 3).is_err());
    }

    #[test]
    fn constants_for_each_dimension() {
        let c4 = dimensional_constants(4).unwrap();
        assert!(c4.identity_ok);
        assert_relative_eq!(c4.c_n, 4.0 * PI * PI, epsilon = 1e-12);
        assert_relative_eq!(c4.pfaffian_coefficient, 1.0);
        assert_relative_eq!(c4.sphere_volume, 8.0 * PI * PI / 3.0, epsilon = 1e-12);

        let c6 = dimensional_constants(6).unwrap();
        assert!(c6.identity_ok);
        assert_relative_eq!(c6.c_n, 32.0 * PI.powi(3), epsilon = 1e-9);
        assert_relative_eq!(c6.pfaffian_coefficient, 4.0);
        assert_relative_eq!(c6.sphere_volume, 16.0 * PI.powi(3) / 15.0, epsilon = 1e-12);

        assert!(dimensional_constants(8).unwrap().identity_ok);
        assert!(dimensional_constants(5).is_err());
    }

    #[test]
    fn total_q_flat_and_sphere() {
        let s = spec();
        let flat = field_flat(4);
        let est = total_q_integral(&flat, &s, 50.0).unwrap();
        assert!(est.value.abs() < 1e-8);

        let w = field_sphere_stereographic(4).unwrap();
        let est = total_q_integral(&w, &s, DEFAULT_R_MAX).unwrap();
        let expect = 8.0 * PI * PI;
        assert!(
            ((est.value - expect) / expect).abs() < 1e-4,
            "total {} vs {}",
            est.value,
            expect
        );
    }

    #[test]
    fn total_q_cone() {
        let s = spec();
        let beta = -0.25;
        let w = field_smoothed_cone(beta, 4).unwrap();
        let est = total_q_integral(&w, &s, DEFAULT_R_MAX).unwrap();
        let expect = -4.0 * PI * PI * beta;
        assert!(
            ((est.value - expect) / expect).abs() < 1e-3,
            "cone total {} vs {}",
            est.value,
            expect
        );
    }

    #[test]
    fn gbc_values() {
        assert_relative_eq!(gbc_check(8.0 * PI * PI, 0.0), 2.0, epsilon = 1e-12);
        assert_eq!(gbc_check(0.0, 0.0), 0.0);
    }

    #[test]
    fn isoperimetric_flat_is_one() {
        let flat = field_flat(4);
        let profile = isoperimetric_profile(&flat, &[1.0, 10.0, 100.0], &spec()).unwrap();
        for e in &profile.entries {
            assert_relative_eq!(e.ratio, 1.0, epsilon = 1e-8);
        }
        // volumes strictly increasing
        for pair in profile.entries.windows(2) {
            assert!(pair[1].vol_ball > pair[0].vol_ball);
            assert!(pair[1].vol_boundary > pair[0].vol_boundary);
        }
    }

    #[test]
    fn isoperimetric_cone_and_sphere() {
        let s = spec();
        let beta = -0.25;
        let cone = field_smoothed_cone(beta, 4).unwrap();
        let profile = isoperimetric_profile(&cone, &[1000.0], &s).unwrap();
        assert!(
            (profile.entries[0].ratio - (1.0 + beta)).abs() < 0.01 * (1.0 + beta),
            "cone ratio {}",
            profile.entries[0].ratio
        );

        let w = field_sphere_stereographic(4).unwrap();
        let profile = isoperimetric_profile(&w, &[5.0, 20.0, 80.0], &s).unwrap();
        for pair in profile.entries.windows(2) {
            assert!(pair[1].ratio < pair[0].ratio);
        }
    }

    #[test]
    fn deficit_consistency_cones() {
        let s = QuadratureSpec::with_tols(1e-8, 1e-11);
        for beta in [-0.5, -0.25, -0.125] {
            let cone = field_smoothed_cone(beta, 4).unwrap();
            let rep = deficit_consistency(&cone, &s).unwrap();
            assert_relative_eq!(rep.lhs, 1.0 + beta, epsilon = 2e-3);
            assert!(rep.gap < 0.02, "beta {beta}: gap {}", rep.gap);
        }
        let flat = field_flat(4);
        let rep = deficit_consistency(&flat, &s).unwrap();
        assert_relative_eq!(rep.lhs, 1.0, epsilon = 1e-8);
        assert_relative_eq!(rep.rhs, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn cutoff_family_bounds() {
        let rho = 7.0;
        let c = CutoffFamily::new(rho);
        assert_eq!(c.eta(&[0.5 * rho, 0.0, 0.0, 0.0]), 1.0);
        assert_eq!(c.eta(&[2.5 * rho, 0.0, 0.0, 0.0]), 0.0);
        let mid = c.eta(&[1.5 * rho, 0.0, 0.0, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
        // |∇η| ≤ C1/ρ on the annulus
        for k in 0..20 {
            let r = rho * (1.0 + k as f64 / 19.0);
            let g = c.gradient(&[r, 0.0, 0.0, 0.0]);
            let gn: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(gn <= c.derivative_constants[0] / rho * (1.0 + 1e-12));
        }
    }

    #[test]
    fn flux_flat_is_zero() {
        let flat = field_flat(4);
        let f = flux_decay_profile(&flat, &[10.0, 20.0], &spec()).unwrap();
        for e in &f {
            assert_eq!(e.value, 0.0);
        }
    }

    #[test]
    fn flux_split_adds_up() {
        let s = QuadratureSpec::with_tols(1e-10, 3e-10);
        let cone = field_smoothed_cone(-0.25, 4).unwrap();
        let rho = 10.0;
        let (i, ii) = term_split_i_ii(&cone, rho, &s).unwrap();
        let f = flux_decay_profile(&cone, &[rho], &s).unwrap();
        assert_relative_eq!(i + ii, f[0].value, epsilon = 1e-8);
    }

    #[test]
    fn flux_sphere_decays() {
        let s = QuadratureSpec::with_tols(1e-10, 1e-13);
        let w = field_sphere_stereographic(4).unwrap();
        let f = flux_decay_profile(&w, &[10.0, 20.0, 40.0, 80.0], &s).unwrap();
        for pair in f.windows(2) {
            assert!(
                pair[1].value.abs() < pair[0].value.abs(),
                "flux not decreasing: {:?}",
                f
            );
        }
        assert!(f.last().unwrap().value.abs() < 1e-3);
    }

    #[test]
    fn flux_cone_approaches_analytic_limit() {
        let s = QuadratureSpec::with_tols(1e-10, 1e-12);
        let beta = -0.25;
        let cone = field_smoothed_cone(beta, 4).unwrap();
        let f = flux_decay_profile(&cone, &[20.0, 80.0], &s).unwrap();
        let limit = cone_flux_limit(beta);
        // converges like O(ρ^{-2}) to a nonzero limit
        assert!(
            (f[1].value - limit).abs() < 0.02 * limit.abs(),
            "flux {} vs limit {limit}",
            f[1].value
        );
        assert!((f[1].value - limit).abs() < (f[0].value - limit).abs());
    }
}
