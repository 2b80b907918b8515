//! Parametrized immersions Mⁿ ⊂ R^{n+1}: fundamental forms, Gauss map,
//! shape-operator determinant, |L|-integrals, boundary decay scans, and the
//! Gauss-map degree.

use crate::constants::sphere_surface;
use crate::error::{QflatError, Result};
use crate::field::{parse_param, ScalarField};
use crate::jet::{self, Jet};
use crate::linalg;
use crate::quadrature::sphere::SphereRule;
use crate::quadrature::{self, QuadratureSpec, Region};
use crate::tensor::SymTensor2;
use serde::{Deserialize, Serialize};

/// A chart map F: U ⊂ Rⁿ → R^{n+1} with derivatives to order two, plus an
/// orientation sign for the normal field.
#[derive(Clone, Debug)]
pub struct Immersion {
    n: usize,
    components: Vec<ScalarField>,
    orientation: f64,
    id: String,
}

/// First and second fundamental forms with the oriented unit normal.
#[derive(Clone, Debug)]
pub struct FundamentalForms {
    pub metric: SymTensor2,
    pub second_form: SymTensor2,
    pub normal: Vec<f64>,
}

impl Immersion {
    pub fn new(components: Vec<ScalarField>, orientation: f64, id: impl Into<String>) -> Self {
        let n = components.len() - 1;
        debug_assert!(components.iter().all(|c| c.dim() == n));
        Immersion {
            n,
            components,
            orientation,
            id: id.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn reversed(&self) -> Immersion {
        Immersion {
            n: self.n,
            components: self.components.clone(),
            orientation: -self.orientation,
            id: format!("{}:reversed", self.id),
        }
    }

    pub fn position(&self, u: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(u)).collect()
    }

    /// (value, jacobian[a][i] = ∂_i F_a, hessian[a][i][j]) per ambient axis a.
    fn jets(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let n = self.n;
        let mut value = Vec::with_capacity(n + 1);
        let mut jac = Vec::with_capacity(n + 1);
        let mut hess = Vec::with_capacity(n + 1);
        for c in &self.components {
            let (v, g, h) = c.value_grad_hessian(u)?;
            value.push(v);
            jac.push(g);
            hess.push(h);
        }
        Ok((value, jac, hess))
    }
}

/// Generalized cross product of the n columns of the (n+1)×n Jacobian; the
/// unnormalized normal.
fn cross_product(jac: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut normal = vec![0.0; n + 1];
    let mut minor = vec![0.0; n * n];
    for a in 0..=n {
        for (row, jrow) in (0..=n).filter(|&r| r != a).enumerate() {
            for i in 0..n {
                minor[row * n + i] = jac[jrow][i];
            }
        }
        let det = linalg::det(&minor, n).unwrap_or(0.0);
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        normal[a] = sign * det;
    }
    // the expansion above fixes (−1)^a with rows ordered by ambient axis;
    // orient so the formal determinant [e; v₁; …; v_n] convention holds
    normal
}

/// First/second fundamental forms of the chart at `u`.
pub fn fundamental_forms(imm: &Immersion, u: &[f64]) -> Result<FundamentalForms> {
    let n = imm.n;
    let (_, jac, hess) = imm.jets(u)?;
    let metric = SymTensor2::from_fn(n, |i, j| {
        (0..=n).map(|a| jac[a][i] * jac[a][j]).sum()
    });
    if !metric.is_positive_definite() {
        return Err(QflatError::DegenerateImmersion { point: u.to_vec() });
    }
    // columns as rows for the minors
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..=n).map(|a| jac[a][i]).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..=n)
        .map(|a| (0..n).map(|i| cols[i][a]).collect())
        .collect();
    let mut normal = cross_product(&rows, n);
    let norm: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-14 {
        return Err(QflatError::DegenerateImmersion { point: u.to_vec() });
    }
    for v in normal.iter_mut() {
        *v *= imm.orientation / norm;
    }
    let second_form = SymTensor2::from_fn(n, |i, j| {
        (0..=n).map(|a| hess[a][i * n + j] * normal[a]).sum()
    });
    Ok(FundamentalForms {
        metric,
        second_form,
        normal,
    })
}

impl FundamentalForms {
    /// `|L|_g² = tr((g⁻¹ L)²)`.
    pub fn second_form_norm_sq(&self) -> Result<f64> {
        let n = self.metric.dim();
        let ginv = self.metric.inverse()?;
        // S = g^{-1} L
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += ginv.get(i, k) * self.second_form.get(k, j);
                }
                s[i * n + j] = acc;
            }
        }
        let mut tr_s2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                tr_s2 += s[i * n + j] * s[j * n + i];
            }
        }
        Ok(tr_s2)
    }

    pub fn area_density(&self) -> Result<f64> {
        Ok(self.metric.det()?.sqrt())
    }
}

/// Determinant of the shape operator `g⁻¹L`, the Jacobian of the Gauss map
/// relative to the induced volume.
pub fn gauss_jacobian_det(imm: &Immersion, u: &[f64]) -> Result<f64> {
    let ff = fundamental_forms(imm, u)?;
    Ok(ff.second_form.det()? / ff.metric.det()?)
}

/// `∫_region |L|_g^p dv_g` over a chart region.
pub fn total_l_norm(
    imm: &Immersion,
    region: &Region,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if p < 1.0 {
        return Err(QflatError::invalid("exponent p must be at least 1"));
    }
    let est = quadrature::integrate(
        |u: &[f64]| {
            let ff = fundamental_forms(imm, u).expect("fundamental forms");
            let l2 = ff.second_form_norm_sq().expect("second form norm");
            l2.max(0.0).powf(0.5 * p) * ff.area_density().expect("area density")
        },
        region,
        spec,
    )?;
    est.expect_converged().map(|e| e.value)
}

/// Induced area scaling of ω ↦ r ω from the round unit sphere into the chart
/// sphere ∂B(0, r) with the immersed metric.
fn boundary_area_scale(imm: &Immersion, r: f64, omega: &[f64]) -> Result<(FundamentalForms, f64)> {
    let n = imm.n;
    let u: Vec<f64> = omega.iter().map(|v| v * r).collect();
    let ff = fundamental_forms(imm, &u)?;
    // orthonormal tangent basis of ω⊥ by a Householder reflection
    let mut v = omega.to_vec();
    let sgn = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sgn;
    let vnorm2: f64 = v.iter().map(|a| a * a).sum();
    let mut gram = vec![0.0; (n - 1) * (n - 1)];
    let mut basis = Vec::with_capacity(n - 1);
    for a in 1..n {
        // column a of H = I − 2 v vᵀ/|v|²
        let mut col = vec![0.0; n];
        for i in 0..n {
            col[i] = (if i == a { 1.0 } else { 0.0 }) - 2.0 * v[i] * v[a] / vnorm2;
        }
        basis.push(col);
    }
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += basis[a][i] * ff.metric.get(i, j) * basis[b][j];
                }
            }
            gram[a * (n - 1) + b] = acc;
        }
    }
    let det = linalg::det(&gram, n - 1)?;
    Ok((ff, r.powi(n as i32 - 1) * det.max(0.0).sqrt()))
}

/// `∫_{∂B(0,r)} |L|^{n−1} dσ_g` by sphere quadrature with level doubling.
pub fn boundary_l_integral(imm: &Immersion, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    boundary_weighted_integral(imm, r, imm.n as f64 - 1.0, spec)
}

fn boundary_weighted_integral(
    imm: &Immersion,
    r: f64,
    power: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = imm.n;
    let eval = |level: usize| -> Result<f64> {
        let rule = SphereRule::shared(n, level);
        let mut acc = 0.0;
        for (node, wgt) in rule.nodes.iter().zip(&rule.weights) {
            let (ff, scale) = boundary_area_scale(imm, r, node)?;
            let l2 = ff.second_form_norm_sq()?;
            acc += wgt * l2.max(0.0).powf(0.5 * power) * scale;
        }
        Ok(acc)
    };
    let mut level = spec.sphere_level.unwrap_or(4);
    let mut prev = eval(level)?;
    loop {
        let next_level = level * 2;
        if next_level > 64 {
            return Ok(prev);
        }
        let next = eval(next_level)?;
        if (next - prev).abs() <= spec.abs_tol.max(spec.rel_tol * next.abs()) {
            return Ok(next);
        }
        prev = next;
        level = next_level;
    }
}

/// One radius of a boundary-decay scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayEntry {
    pub r: f64,
    pub boundary_integral: f64,
    /// `r^{−1} (∫ |L|^{n−1} dσ_g)^{n/(n−1)}`
    pub holder_lhs: f64,
    /// `σ_g(∂B_r)^{1/(n−1)}/r · ∫ |L|^n dσ_g`
    pub holder_rhs: f64,
    /// lhs/rhs; at most 1 + quadrature noise by the Hölder inequality
    pub holder_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub selected: Vec<DecayEntry>,
    pub scanned: usize,
    /// false when no non-increasing subsequence of the requested length was
    /// found on the grid (a search failure, not an error).
    pub complete: bool,
}

/// Scan a geometric radius grid for `k` radii with non-increasing boundary
/// integrals, reporting the Hölder-bound diagnostics alongside.
pub fn decay_sequence(
    imm: &Immersion,
    r_min: f64,
    r_max: f64,
    k: usize,
    spec: &QuadratureSpec,
) -> Result<DecayReport> {
    if !(r_min > 0.0 && r_min < r_max) {
        return Err(QflatError::invalid("need 0 < r_min < r_max"));
    }
    let n = imm.n;
    let grid = (3 * k).max(12);
    let mut entries = Vec::with_capacity(grid);
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        let r = r_min * (r_max / r_min).powf(t);
        let b = boundary_l_integral(imm, r, spec)?;
        let ln = boundary_weighted_integral(imm, r, n as f64, spec)?;
        let area = boundary_weighted_integral(imm, r, 0.0, spec)?;
        let nf = n as f64;
        let lhs = b.max(0.0).powf(nf / (nf - 1.0)) / r;
        let rhs = area.max(0.0).powf(1.0 / (nf - 1.0)) / r * ln;
        entries.push(DecayEntry {
            r,
            boundary_integral: b,
            holder_lhs: lhs,
            holder_rhs: rhs,
            holder_ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        });
    }
    let mut selected: Vec<DecayEntry> = Vec::with_capacity(k);
    for e in &entries {
        if selected.len() == k {
            break;
        }
        match selected.last() {
            None => selected.push(e.clone()),
            Some(last) if e.boundary_integral <= last.boundary_integral => {
                selected.push(e.clone())
            }
            _ => {}
        }
    }
    let complete = selected.len() == k;
    Ok(DecayReport {
        selected,
        scanned: grid,
        complete,
    })
}

/// A surface whose Gauss-map degree can be integrated: a closed chart atlas
/// or a graph end compactified by truncation.
pub enum SurfaceDomain {
    Closed(ClosedSurface),
    Graph { imm: Immersion, r_max: f64 },
}

pub struct ClosedSurface {
    pub charts: Vec<(Immersion, Region)>,
    pub id: String,
}

impl SurfaceDomain {
    pub fn dim(&self) -> usize {
        match self {
            SurfaceDomain::Closed(c) => c.charts[0].0.dim(),
            SurfaceDomain::Graph { imm, .. } => imm.dim(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            SurfaceDomain::Closed(c) => c.id.clone(),
            SurfaceDomain::Graph { imm, .. } => imm.id().to_string(),
        }
    }

    pub fn reversed(&self) -> SurfaceDomain {
        match self {
            SurfaceDomain::Closed(c) => SurfaceDomain::Closed(ClosedSurface {
                charts: c
                    .charts
                    .iter()
                    .map(|(imm, reg)| (imm.reversed(), reg.clone()))
                    .collect(),
                id: format!("{}:reversed", c.id),
            }),
            SurfaceDomain::Graph { imm, r_max } => SurfaceDomain::Graph {
                imm: imm.reversed(),
                r_max: *r_max,
            },
        }
    }

    /// ∫ f dv_g over the surface, f given pointwise in chart coordinates.
    pub fn integrate<F>(&self, f: F, spec: &QuadratureSpec) -> Result<f64>
    where
        F: Fn(&Immersion, &[f64]) -> f64 + Sync,
    {
        match self {
            SurfaceDomain::Closed(c) => {
                let mut total = 0.0;
                for (imm, region) in &c.charts {
                    let est = quadrature::integrate(
                        |u: &[f64]| {
                            let ff = fundamental_forms(imm, u).expect("forms");
                            f(imm, u) * ff.area_density().expect("density")
                        },
                        region,
                        spec,
                    )?;
                    total += est.value;
                }
                Ok(total)
            }
            SurfaceDomain::Graph { imm, r_max } => {
                let region = Region::Ball {
                    center: vec![0.0; imm.dim()],
                    radius: *r_max,
                };
                let est = quadrature::integrate(
                    |u: &[f64]| {
                        let ff = fundamental_forms(imm, u).expect("forms");
                        f(imm, u) * ff.area_density().expect("density")
                    },
                    &region,
                    spec,
                )?;
                Ok(est.value)
            }
        }
    }
}

/// Gauss-map degree report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DegreeReport {
    pub degree: i64,
    pub raw: f64,
    pub residual: f64,
    /// false when the residual exceeds the 0.1 snap threshold.
    pub reliable: bool,
}

/// `∫ det(dn̂) dv_g / |Sⁿ|` with the nearest-integer snap.
pub fn gauss_map_degree(surface: &SurfaceDomain, spec: &QuadratureSpec) -> Result<DegreeReport> {
    let n = surface.dim();
    let total = surface.integrate(
        |imm, u| gauss_jacobian_det(imm, u).expect("gauss jacobian"),
        spec,
    )?;
    let raw = total / sphere_surface(n);
    let degree = raw.round() as i64;
    let residual = (raw - degree as f64).abs();
    Ok(DegreeReport {
        degree,
        raw,
        residual,
        reliable: residual <= 0.1,
    })
}

// ---------------------------------------------------------------------------
// Catalog

fn coordinate_field(n: usize, axis: usize) -> ScalarField {
    ScalarField::from_eval_and_jet(
        n,
        format!("u{axis}"),
        move |u| u[axis],
        move |u, order| Jet::variable(jet::table(u.len(), order), axis, u[axis]),
    )
}

/// Stereographic chart of the unit sphere Sⁿ ⊂ R^{n+1}.
///
/// `from_north = true` projects from the north pole (chart covers the
/// southern hemisphere for |u| ≤ 1); orientation signs are chosen so both
/// charts produce the inward normal, under which the shape operator is the
/// identity.
pub fn sphere_chart(n: usize, from_north: bool) -> Immersion {
    let mut components = Vec::with_capacity(n + 1);
    for a in 0..n {
        components.push(ScalarField::from_eval_and_jet(
            n,
            format!("sphere-chart-{a}"),
            move |u: &[f64]| {
                let r2: f64 = u.iter().map(|v| v * v).sum();
                2.0 * u[a] / (1.0 + r2)
            },
            move |u, order| {
                let t = jet::table(u.len(), order);
                let denom = jet::radius_squared(&t, u).add_scalar(1.0).recip();
                Jet::variable(t, a, u[a]).scale(2.0).mul(&denom)
            },
        ));
    }
    let sign = if from_north { 1.0 } else { -1.0 };
    components.push(ScalarField::from_eval_and_jet(
        n,
        "sphere-chart-height",
        move |u: &[f64]| {
            let r2: f64 = u.iter().map(|v| v * v).sum();
            sign * (r2 - 1.0) / (1.0 + r2)
        },
        move |u, order| {
            let t = jet::table(u.len(), order);
            let r2 = jet::radius_squared(&t, u);
            let denom = r2.add_scalar(1.0).recip();
            r2.add_scalar(-1.0).mul(&denom).scale(sign)
        },
    ));
    let orientation = if from_north { 1.0 } else { -1.0 };
    Immersion::new(
        components,
        orientation,
        if from_north { "sphere:north-chart" } else { "sphere:south-chart" },
    )
}

/// The unit sphere as a two-chart atlas split at the equator.
pub fn sphere_surface_atlas(n: usize) -> SurfaceDomain {
    let ball = |_: ()| Region::Ball {
        center: vec![0.0; n],
        radius: 1.0,
    };
    SurfaceDomain::Closed(ClosedSurface {
        charts: vec![
            (sphere_chart(n, true), ball(())),
            (sphere_chart(n, false), ball(())),
        ],
        id: "sphere".into(),
    })
}

/// Graph immersion `u ↦ (u, h(u))`, oriented with upward normal.
pub fn graph_immersion(h: ScalarField) -> Immersion {
    let n = h.dim();
    let mut components: Vec<ScalarField> = (0..n).map(|a| coordinate_field(n, a)).collect();
    let id = format!("graph:{}", h.id());
    components.push(h);
    Immersion::new(components, 1.0, id)
}

/// Radial graph with prescribed second-fundamental-form decay `|L| ~ r^{−1−p}`.
pub fn radial_graph(n: usize, p: f64) -> Result<Immersion> {
    if p <= 0.0 {
        return Err(QflatError::invalid("decay exponent p must be positive"));
    }
    let exponent = 0.5 * (1.0 - p);
    let h = ScalarField::from_eval_and_jet(
        n,
        format!("radial:p={p}"),
        move |u: &[f64]| {
            let r2: f64 = u.iter().map(|v| v * v).sum();
            (1.0 + r2).powf(exponent)
        },
        move |u, order| {
            let t = jet::table(u.len(), order);
            let base = jet::radius_squared(&t, u).add_scalar(1.0);
            // base^exponent = exp(exponent · ln base)
            base.ln().scale(exponent).exp()
        },
    );
    Ok(graph_immersion(h))
}

/// Resolve a surface id: `"sphere"`, `"graph:bump"`,
/// `"graph:bump:amp=..,width=.."`, `"graph:radial:p=.."`.
pub fn surface_by_id(id: &str, n: usize, reversed: bool) -> Result<SurfaceDomain> {
    let surface = if id == "sphere" {
        sphere_surface_atlas(n)
    } else if let Some(rest) = id.strip_prefix("graph:") {
        let (kind, params) = match rest.split_once(':') {
            Some((k, p)) => (k, Some(p)),
            None => (rest, None),
        };
        match kind {
            "bump" => {
                let amp = parse_param(params, "amp")?.unwrap_or(1.0);
                let width = parse_param(params, "width")?.unwrap_or(1.0);
                let h = crate::field::field_bump(vec![0.0; n], amp, width)?;
                SurfaceDomain::Graph {
                    imm: graph_immersion(h),
                    r_max: 8.0 * width.max(1.0),
                }
            }
            "radial" => {
                let p = parse_param(params, "p")?
                    .ok_or_else(|| QflatError::invalid("graph:radial requires p=<value>"))?;
                SurfaceDomain::Graph {
                    imm: radial_graph(n, p)?,
                    r_max: 40.0,
                }
            }
            other => return Err(QflatError::invalid(format!("unknown graph kind '{other}'"))),
        }
    } else {
        return Err(QflatError::invalid(format!("unknown surface id '{id}'")));
    };
    Ok(if reversed { surface.reversed() } else { surface })
}

pub fn surface_catalog_ids() -> Vec<&'static str> {
    vec!["sphere", "graph:bump", "graph:radial:p=0.25"]
}
