//! Pointwise curvature of `g = e^{2w} |dx|²`: Christoffel symbols, the
//! curvature tensor by two independent routes, the Laplace–Beltrami
//! operator, four-dimensional Q-curvature through both of its expressions,
//! and the Paneitz operator.

use crate::error::{QflatError, Result};
use crate::field::ScalarField;
use crate::quadrature::sphere::SphereRule;
use crate::tensor::Riemann4;

/// Christoffel symbols `Γ^s_{jk}` (n³ entries, symmetric in jk).
#[derive(Clone, Debug)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, s: usize, j: usize, k: usize) -> f64 {
        self.data[(s * self.n + j) * self.n + k]
    }
}

/// `Γ^s_{jk} = w_k δ_{sj} + w_j δ_{sk} − w_s δ_{jk}` for `g = e^{2w}|dx|²`.
pub fn christoffel_conformal(w: &ScalarField, x: &[f64]) -> Result<Christoffel> {
    let n = w.dim();
    let grad = w.gradient(x)?;
    let mut data = vec![0.0; n * n * n];
    for s in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                if s == j {
                    v += grad[k];
                }
                if s == k {
                    v += grad[j];
                }
                if j == k {
                    v -= grad[s];
                }
                data[(s * n + j) * n + k] = v;
            }
        }
    }
    Ok(Christoffel { n, data })
}

/// Covariant curvature tensor of `e^{2w}|dx|²` in closed form.
///
/// With `T_{ab} = w_{ab} − w_a w_b`:
/// `R_{ijkl} = e^{2w} [ T_{jk} δ_{il} + T_{il} δ_{jk} − T_{ik} δ_{jl} − T_{jl} δ_{ik}
///              − |∇w|² (δ_{ik} δ_{jl} − δ_{il} δ_{jk}) ]`.
pub fn riemann_conformal(w: &ScalarField, x: &[f64]) -> Result<Riemann4> {
    let n = w.dim();
    let (value, grad, hess) = w.value_grad_hessian(x)?;
    let e2w = (2.0 * value).exp();
    let grad2: f64 = grad.iter().map(|v| v * v).sum();
    let t =
        |a: usize, b: usize| -> f64 { hess[a * n + b] - grad[a] * grad[b] };
    let d = |a: usize, b: usize| -> f64 { if a == b { 1.0 } else { 0.0 } };
    let mut rm = Riemann4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t(j, k) * d(i, l) + t(i, l) * d(j, k)
                        - t(i, k) * d(j, l)
                        - t(j, l) * d(i, k)
                        - grad2 * (d(i, k) * d(j, l) - d(i, l) * d(j, k));
                    rm.set(i, j, k, l, e2w * v);
                }
            }
        }
    }
    Ok(rm)
}

/// Same tensor assembled from Christoffel symbols, with the ∂Γ terms taken
/// by Richardson-extrapolated central differences. Kept permanently as the
/// mutual oracle for [`riemann_conformal`].
pub fn riemann_conformal_via_christoffel(w: &ScalarField, x: &[f64], h: f64) -> Result<Riemann4> {
    let n = w.dim();
    let gamma = christoffel_conformal(w, x)?;
    // dGamma[i][s][j][k] = ∂_i Γ^s_{jk}, O(h^4)
    let dgamma_at = |axis: usize, step: f64| -> Result<Vec<f64>> {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[axis] += step;
        xm[axis] -= step;
        let gp = christoffel_conformal(w, &xp)?;
        let gm = christoffel_conformal(w, &xm)?;
        Ok(gp
            .data
            .iter()
            .zip(&gm.data)
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect())
    };
    let mut dgamma = Vec::with_capacity(n);
    for axis in 0..n {
        let coarse = dgamma_at(axis, h)?;
        let fine = dgamma_at(axis, h / 2.0)?;
        let extr: Vec<f64> = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| (4.0 * f - c) / 3.0)
            .collect();
        dgamma.push(extr);
    }
    let dg = |i: usize, s: usize, j: usize, k: usize| dgamma[i][(s * n + j) * n + k];
    let e2w = (2.0 * w.eval(x)).exp();
    let mut rm = Riemann4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    // mixed tensor M^l_{kij} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}
                    let mut m = dg(i, l, j, k) - dg(j, l, i, k);
                    for p in 0..n {
                        m += gamma.get(l, i, p) * gamma.get(p, j, k)
                            - gamma.get(l, j, p) * gamma.get(p, i, k);
                    }
                    // lower and orient to the Gauss-equation sign convention
                    rm.set(i, j, k, l, -e2w * m);
                }
            }
        }
    }
    Ok(rm)
}

/// Scalar curvature of `e^{2w}|dx|²`:
/// `R = −e^{−2w} [ 2(n−1) Δ₀w + (n−1)(n−2) |∇w|² ]`.
pub fn scalar_curvature(w: &ScalarField, x: &[f64]) -> Result<f64> {
    let n = w.dim() as f64;
    let (value, grad, hess) = w.value_grad_hessian(x)?;
    let lap: f64 = (0..w.dim()).map(|i| hess[i * w.dim() + i]).sum();
    let grad2: f64 = grad.iter().map(|v| v * v).sum();
    Ok(-(-2.0 * value).exp() * (2.0 * (n - 1.0) * lap + (n - 1.0) * (n - 2.0) * grad2))
}

/// Laplace–Beltrami of `f` in the metric `e^{2w}|dx|²`:
/// `Δ_g f = e^{−2w} (Δ₀ f + (n−2) ∇w·∇f)`.
pub fn laplace_beltrami(w: &ScalarField, f: &ScalarField, x: &[f64]) -> Result<f64> {
    let n = w.dim();
    if f.dim() != n {
        return Err(QflatError::invalid("field dimension mismatch"));
    }
    let wv = w.eval(x);
    let wgrad = w.gradient(x)?;
    let (_, fgrad, fhess) = f.value_grad_hessian(x)?;
    let flap: f64 = (0..n).map(|i| fhess[i * n + i]).sum();
    let dot: f64 = wgrad.iter().zip(&fgrad).map(|(a, b)| a * b).sum();
    Ok((-2.0 * wv).exp() * (flap + (n as f64 - 2.0) * dot))
}

/// Q-curvature at a point by both of its four-dimensional expressions.
#[derive(Clone, Copy, Debug)]
pub struct QReport {
    /// `(1/12)(−Δ_g R + R²/4 − 3|E|²)`
    pub q_def: f64,
    /// `−(1/12) Δ_g R + 2 σ₂(A)`
    pub q_sigma: f64,
    pub residual: f64,
}

/// Pointwise curvature engine for one conformal factor. Builds the derived
/// scalar-curvature field once; share it read-only across evaluations.
pub struct ConformalGeometry {
    pub w: ScalarField,
    r_field: ScalarField,
}

impl ConformalGeometry {
    pub fn new(w: ScalarField) -> Self {
        let wc = w.clone();
        let r_field = ScalarField::from_eval(w.dim(), format!("scalar-curvature({})", w.id()), move |x| {
            scalar_curvature(&wc, x).expect("scalar curvature evaluation")
        })
        .with_fd_step(w.fd_step());
        ConformalGeometry { w, r_field }
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// The derived scalar-curvature field (finite-difference provenance).
    pub fn scalar_field(&self) -> &ScalarField {
        &self.r_field
    }

    pub fn scalar(&self, x: &[f64]) -> Result<f64> {
        scalar_curvature(&self.w, x)
    }

    /// `Δ_g R_g` by finite-difference sampling of the derived field.
    pub fn laplacian_scalar(&self, x: &[f64]) -> Result<f64> {
        laplace_beltrami(&self.w, &self.r_field, x)
    }

    /// Ricci tensor components (coordinate frame, fully covariant).
    fn ricci_components(&self, x: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
        // returns (w value, Ric components, scalar R)
        let n = self.dim();
        let nf = n as f64;
        let (wv, grad, hess) = self.w.value_grad_hessian(x)?;
        let lap: f64 = (0..n).map(|i| hess[i * n + i]).sum();
        let grad2: f64 = grad.iter().map(|v| v * v).sum();
        let mut ric = vec![0.0; n * n];
        for j in 0..n {
            for l in 0..n {
                let t = hess[j * n + l] - grad[j] * grad[l];
                let mut v = -(nf - 2.0) * t;
                if j == l {
                    v -= lap + (nf - 2.0) * grad2;
                }
                ric[j * n + l] = v;
            }
        }
        let scalar = (-2.0 * wv).exp() * (0..n).map(|i| ric[i * n + i]).sum::<f64>();
        Ok((wv, ric, scalar))
    }

    /// Q-curvature via the defining formula and via σ₂ of the Schouten
    /// tensor; dimension four only.
    pub fn q_report(&self, x: &[f64]) -> Result<QReport> {
        let n = self.dim();
        if n != 4 {
            return Err(QflatError::UnsupportedDimension { need: "n = 4", got: n });
        }
        let (wv, ric, scalar) = self.ricci_components(x)?;
        let e2w = (2.0 * wv).exp();
        let em4w = (-4.0 * wv).exp();
        // |E|² with E = Ric − (R/4) g, norms in g
        let mut e_norm2 = 0.0;
        for j in 0..n {
            for l in 0..n {
                let mut e = ric[j * n + l];
                if j == l {
                    e -= scalar / 4.0 * e2w;
                }
                e_norm2 += e * e;
            }
        }
        e_norm2 *= em4w;
        // σ₂(A) with A = ½(Ric − (R/6) g)
        let mut tr_a = 0.0;
        let mut a_norm2 = 0.0;
        for j in 0..n {
            for l in 0..n {
                let mut a = 0.5 * ric[j * n + l];
                if j == l {
                    a -= scalar / 12.0 * e2w;
                }
                if j == l {
                    tr_a += a * (-2.0 * wv).exp();
                }
                a_norm2 += a * a;
            }
        }
        a_norm2 *= em4w;
        let sigma2 = 0.5 * (tr_a * tr_a - a_norm2);
        let lap_r = self.laplacian_scalar(x)?;
        let q_def = (-lap_r + 0.25 * scalar * scalar - 3.0 * e_norm2) / 12.0;
        let q_sigma = -lap_r / 12.0 + 2.0 * sigma2;
        Ok(QReport {
            q_def,
            q_sigma,
            residual: (q_def - q_sigma).abs(),
        })
    }

    pub fn q_value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.q_report(x)?.q_def)
    }

    /// Q-curvature density `Q e^{4w}`, the natural integrand on R⁴.
    pub fn q_density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.q_value(x)? * (4.0 * self.w.eval(x)).exp())
    }
}

pub fn q_curvature_4d(w: &ScalarField, x: &[f64]) -> Result<QReport> {
    ConformalGeometry::new(w.clone()).q_report(x)
}

/// Paneitz operator `P f = Δ_g² f + δ((2/3) R g − 2 Ric) d f` of the
/// background `e^{2w₀}|dx|²` applied to `f`; dimension four.
pub fn paneitz_apply(w0: &ScalarField, f: &ScalarField, x: &[f64]) -> Result<f64> {
    let n = w0.dim();
    if n != 4 {
        return Err(QflatError::UnsupportedDimension { need: "n = 4", got: n });
    }
    if f.dim() != n {
        return Err(QflatError::invalid("field dimension mismatch"));
    }
    let geom = ConformalGeometry::new(w0.clone());

    // bi-Laplacian: Δ_g of the derived field u = Δ_g f
    let w_inner = w0.clone();
    let f_inner = f.clone();
    let u = ScalarField::from_eval(n, "laplace-beltrami(f)", move |y| {
        laplace_beltrami(&w_inner, &f_inner, y).expect("inner laplacian")
    })
    .with_fd_step(w0.fd_step().max(f.fd_step()));
    let bi = laplace_beltrami(w0, &u, x)?;

    // δ(S df) = −e^{−4w} ∂_m ( e^{4w} S^{mk} ∂_k f ), S = (2/3) R g − 2 Ric
    let w_v = w0.clone();
    let f_v = f.clone();
    let flux = move |y: &[f64], m: usize| -> f64 {
        let (wv, _, _) = w_v.value_grad_hessian(y).expect("w jet");
        let (_, ric, scalar) = ConformalGeometry::new(w_v.clone())
            .ricci_components(y)
            .expect("ricci");
        let fgrad = f_v.gradient(y).expect("f gradient");
        let em2w = (-2.0 * wv).exp();
        let em4w = em2w * em2w;
        // S^{mk} = (2/3) R e^{-2w} δ_{mk} − 2 e^{-4w} Ric_{mk}
        let mut v = 0.0;
        for k in 0..4 {
            let mut s = -2.0 * em4w * ric[m * 4 + k];
            if m == k {
                s += 2.0 / 3.0 * scalar * em2w;
            }
            v += s * fgrad[k];
        }
        (4.0 * wv).exp() * v
    };
    let mut divergence = 0.0;
    let h = w0.fd_step().max(f.fd_step());
    for m in 0..n {
        let d = |step: f64| -> f64 {
            let mut yp = x.to_vec();
            let mut ym = x.to_vec();
            yp[m] += step;
            ym[m] -= step;
            (flux(&yp, m) - flux(&ym, m)) / (2.0 * step)
        };
        let coarse = d(h);
        let fine = d(h / 2.0);
        divergence += (4.0 * fine - coarse) / 3.0;
    }
    let delta_term = -(-4.0 * w0.eval(x)).exp() * divergence;
    let _ = geom;
    Ok(bi + delta_term)
}

/// Residual of the fourth-order transformation law on a flat background:
/// `|Δ₀² w − 2 Q_w e^{4w}|`.
pub fn paneitz_law_residual(w: &ScalarField, x: &[f64]) -> Result<f64> {
    let geom = ConformalGeometry::new(w.clone());
    paneitz_law_residual_with(&geom, x)
}

pub fn paneitz_law_residual_with(geom: &ConformalGeometry, x: &[f64]) -> Result<f64> {
    let lhs = geom.w.bilaplacian0(x)?;
    let rhs = 2.0 * geom.q_density(x)?;
    Ok((lhs - rhs).abs())
}

/// Minimum of the scalar curvature over deterministic samples of the shell
/// `r₀ ≤ |x| ≤ 10 r₀`.
#[derive(Clone, Debug)]
pub struct ScalarSignReport {
    pub min_value: f64,
    pub at: Vec<f64>,
    pub nonnegative: bool,
}

pub fn scalar_nonneg_at_infinity(
    w: &ScalarField,
    r0: f64,
    samples: usize,
) -> Result<ScalarSignReport> {
    if r0 <= 0.0 {
        return Err(QflatError::invalid("r0 must be positive"));
    }
    let n = w.dim();
    let rule = SphereRule::shared(n, 3);
    let shells = (samples / rule.nodes.len()).clamp(4, 64);
    let mut min_value = f64::INFINITY;
    let mut at = vec![0.0; n];
    for s in 0..shells {
        let r = r0 * 10f64.powf(s as f64 / (shells as f64 - 1.0));
        for node in &rule.nodes {
            let x: Vec<f64> = node.iter().map(|v| v * r).collect();
            let rg = scalar_curvature(w, &x)?;
            if rg < min_value {
                min_value = rg;
                at = x;
            }
        }
    }
    Ok(ScalarSignReport {
        min_value,
        at,
        nonnegative: min_value >= -1e-8,
    })
}
