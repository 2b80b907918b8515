//! Genz–Malik fully symmetric cubature of degree 7 with an embedded degree-5
//! rule, for boxes in dimension 2 ≤ n ≤ 8.
//!
//! Generator radii are the classical values λ₂² = 9/70, λ₃² = λ₄² = 9/10,
//! λ₅² = 9/19; the orbit weights are recovered at startup by solving the
//! moment equations, then cross-checked against the remaining degree-7
//! monomials, which avoids hand-transcribed coefficient tables.

use crate::error::{QflatError, Result};
use crate::linalg;
use crate::parallel;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

const LAMBDA2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const LAMBDA3: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const LAMBDA4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const LAMBDA5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)

pub struct GenzMalikRule {
    n: usize,
    /// Offsets in the reference cube [-1,1]^n.
    points: Vec<Vec<f64>>,
    /// Degree-7 weight per point.
    w7: Vec<f64>,
    /// Degree-5 weight per point (zero on the corner orbit).
    w5: Vec<f64>,
    /// Index of the center point and of the ±λ₂/±λ₃ axis points, per axis,
    /// for the fourth-difference split heuristic.
    center: usize,
    axis2: Vec<(usize, usize)>,
    axis3: Vec<(usize, usize)>,
}

fn orbit_points(n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    // returns points plus orbit id per point: 0 center, 1 λ2-axis, 2 λ3-axis,
    // 3 λ4-pairs, 4 λ5-corners
    let mut pts = Vec::new();
    let mut orbit = Vec::new();
    pts.push(vec![0.0; n]);
    orbit.push(0);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut p = vec![0.0; n];
            p[i] = s * LAMBDA2;
            pts.push(p);
            orbit.push(1);
        }
    }
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut p = vec![0.0; n];
            p[i] = s * LAMBDA3;
            pts.push(p);
            orbit.push(2);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for si in [1.0, -1.0] {
                for sj in [1.0, -1.0] {
                    let mut p = vec![0.0; n];
                    p[i] = si * LAMBDA4;
                    p[j] = sj * LAMBDA4;
                    pts.push(p);
                    orbit.push(3);
                }
            }
        }
    }
    for mask in 0..(1usize << n) {
        let mut p = vec![0.0; n];
        for (i, v) in p.iter_mut().enumerate() {
            *v = if mask >> i & 1 == 1 { LAMBDA5 } else { -LAMBDA5 };
        }
        pts.push(p);
        orbit.push(4);
    }
    (pts, orbit)
}

/// Exact integral of Π x_i^{e_i} over [-1,1]^n.
fn cube_moment(exps: &[u32]) -> f64 {
    let mut m = 1.0;
    for &e in exps {
        if e % 2 == 1 {
            return 0.0;
        }
        m *= 2.0 / (e as f64 + 1.0);
    }
    m
}

fn orbit_monomial_sum(pts: &[Vec<f64>], orbit: &[usize], which: usize, exps: &[u32]) -> f64 {
    let mut acc = 0.0;
    for (p, &o) in pts.iter().zip(orbit) {
        if o != which {
            continue;
        }
        let mut v = 1.0;
        for (x, &e) in p.iter().zip(exps) {
            v *= x.powi(e as i32);
        }
        acc += v;
    }
    acc
}

fn solve_weights(pts: &[Vec<f64>], orbit: &[usize], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut monos7: Vec<Vec<u32>> = vec![
        vec![0; n],
        unit(n, 0, 2),
        unit(n, 0, 4),
        unit(n, 0, 6),
        pair(n, 2, 2),
    ];
    // verification-only monomials
    let mut verify = vec![pair(n, 4, 2)];
    if n >= 3 {
        let mut t = vec![0u32; n];
        t[0] = 2;
        t[1] = 2;
        t[2] = 2;
        verify.push(t);
    }
    let norbits = 5;
    let mut mat = vec![0.0; norbits * norbits];
    let mut rhs = vec![0.0; norbits];
    for (r, m) in monos7.iter().enumerate() {
        for o in 0..norbits {
            mat[r * norbits + o] = orbit_monomial_sum(pts, orbit, o, m);
        }
        rhs[r] = cube_moment(m);
    }
    let lu = linalg::lu_decompose(&mat, norbits).expect("degree-7 moment system");
    let w7 = lu.solve(&rhs);
    for m in &verify {
        let mut acc = 0.0;
        for o in 0..norbits {
            acc += w7[o] * orbit_monomial_sum(pts, orbit, o, m);
        }
        debug_assert!(
            (acc - cube_moment(m)).abs() < 1e-10,
            "degree-7 consistency failed: {acc} vs {}",
            cube_moment(m)
        );
    }
    // embedded degree-5 rule on orbits 0..=3
    monos7.truncate(5);
    let monos5 = [vec![0; n], unit(n, 0, 2), unit(n, 0, 4), pair(n, 2, 2)];
    let mut mat5 = vec![0.0; 16];
    let mut rhs5 = vec![0.0; 4];
    for (r, m) in monos5.iter().enumerate() {
        for o in 0..4 {
            mat5[r * 4 + o] = orbit_monomial_sum(pts, orbit, o, m);
        }
        rhs5[r] = cube_moment(m);
    }
    let lu5 = linalg::lu_decompose(&mat5, 4).expect("degree-5 moment system");
    let mut w5 = lu5.solve(&rhs5);
    w5.push(0.0);
    (w7, w5)
}

fn unit(n: usize, axis: usize, e: u32) -> Vec<u32> {
    let mut v = vec![0u32; n];
    v[axis] = e;
    v
}

fn pair(n: usize, e0: u32, e1: u32) -> Vec<u32> {
    let mut v = vec![0u32; n];
    v[0] = e0;
    v[1] = e1;
    v
}

impl GenzMalikRule {
    fn new(n: usize) -> Self {
        assert!((2..=8).contains(&n), "Genz-Malik rule for 2 <= n <= 8");
        let (points, orbit) = orbit_points(n);
        let (ow7, ow5) = solve_weights(&points, &orbit, n);
        let w7: Vec<f64> = orbit.iter().map(|&o| ow7[o]).collect();
        let w5: Vec<f64> = orbit.iter().map(|&o| ow5[o]).collect();
        let mut axis2 = Vec::new();
        let mut axis3 = Vec::new();
        for i in 0..n {
            // layout: center, then per axis (+,-) for λ2 block, then λ3 block
            let base2 = 1 + 2 * i;
            let base3 = 1 + 2 * n + 2 * i;
            axis2.push((base2, base2 + 1));
            axis3.push((base3, base3 + 1));
        }
        GenzMalikRule {
            n,
            points,
            w7,
            w5,
            center: 0,
            axis2,
            axis3,
        }
    }

    pub fn shared(n: usize) -> Arc<GenzMalikRule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GenzMalikRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GenzMalikRule::new(n)))
            .clone()
    }

    /// Apply the rule pair on a box; returns (I7, I5, split_axis) or the
    /// location of a non-finite sample.
    fn apply<F>(&self, f: &F, lo: &[f64], hi: &[f64]) -> Result<(f64, f64, usize)>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let n = self.n;
        let mut center = vec![0.0; n];
        let mut half = vec![0.0; n];
        for i in 0..n {
            center[i] = 0.5 * (lo[i] + hi[i]);
            half[i] = 0.5 * (hi[i] - lo[i]);
        }
        let scale: f64 = half.iter().product::<f64>();
        let mut x = vec![0.0; n];
        let mut vals = Vec::with_capacity(self.points.len());
        for p in &self.points {
            for i in 0..n {
                x[i] = center[i] + half[i] * p[i];
            }
            let v = f(&x);
            if !v.is_finite() {
                return Err(QflatError::IntegrandNotFinite { location: x });
            }
            vals.push(v);
        }
        let mut i7 = 0.0;
        let mut i5 = 0.0;
        for ((v, w7), w5) in vals.iter().zip(&self.w7).zip(&self.w5) {
            i7 += v * w7;
            i5 += v * w5;
        }
        // fourth-difference split heuristic
        let ratio = (LAMBDA2 / LAMBDA3).powi(2);
        let c = vals[self.center];
        let mut best_axis = 0usize;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let (p2, m2) = self.axis2[i];
            let (p3, m3) = self.axis3[i];
            let d = (vals[p2] + vals[m2] - 2.0 * c) - ratio * (vals[p3] + vals[m3] - 2.0 * c);
            let score = d.abs() * half[i];
            if score > best {
                best = score;
                best_axis = i;
            }
        }
        Ok((i7 * scale, i5 * scale, best_axis))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoxEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub cells: usize,
}

/// Adaptive integration over an axis-aligned box.
pub fn integrate_box<F>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_depth: usize,
) -> Result<BoxEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = lo.len();
    let rule = GenzMalikRule::shared(n);
    let (i7, _, _) = rule.apply(f, lo, hi)?;
    let tol = abs_tol.max(rel_tol * i7.abs());
    rec(&rule, f, lo, hi, tol, max_depth, 0)
}

fn rec<F>(
    rule: &GenzMalikRule,
    f: &F,
    lo: &[f64],
    hi: &[f64],
    budget: f64,
    max_depth: usize,
    depth: usize,
) -> Result<BoxEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (i7, i5, axis) = rule.apply(f, lo, hi)?;
    let err = (i7 - i5).abs();
    if err <= budget || depth >= max_depth {
        return Ok(BoxEstimate {
            value: i7,
            error: err,
            converged: err <= budget,
            cells: 1,
        });
    }
    let mid = 0.5 * (lo[axis] + hi[axis]);
    let mut hi_left = hi.to_vec();
    hi_left[axis] = mid;
    let mut lo_right = lo.to_vec();
    lo_right[axis] = mid;
    let (left, right) = parallel::join(
        || rec(rule, f, lo, &hi_left, budget * 0.5, max_depth, depth + 1),
        || rec(rule, f, &lo_right, hi, budget * 0.5, max_depth, depth + 1),
    );
    let (l, r) = (left?, right?);
    Ok(BoxEstimate {
        value: l.value + r.value,
        error: l.error + r.error,
        converged: l.converged && r.converged,
        cells: l.cells + r.cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_is_degree_seven() {
        let rule = GenzMalikRule::shared(4);
        let polys: Vec<(Box<dyn Fn(&[f64]) -> f64 + Sync>, f64)> = vec![
            (Box::new(|_x: &[f64]| 1.0), 16.0),
            (Box::new(|x: &[f64]| x[0].powi(6)), 2.0 / 7.0 * 8.0),
            (
                Box::new(|x: &[f64]| x[0].powi(4) * x[1] * x[1]),
                (2.0 / 5.0) * (2.0 / 3.0) * 4.0,
            ),
            (
                Box::new(|x: &[f64]| x[0] * x[0] * x[1] * x[1] * x[2] * x[2]),
                (2.0f64 / 3.0).powi(3) * 2.0,
            ),
        ];
        let lo = [-1.0; 4];
        let hi = [1.0; 4];
        for (f, expect) in &polys {
            let (i7, _, _) = rule.apply(f, &lo, &hi).unwrap();
            assert_relative_eq!(i7, *expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn embedded_rule_is_degree_five() {
        let rule = GenzMalikRule::shared(3);
        let f = |x: &[f64]| x[0].powi(4) + x[1] * x[1] * x[2] * x[2];
        let lo = [-1.0; 3];
        let hi = [1.0; 3];
        let (_, i5, _) = rule.apply(&f, &lo, &hi).unwrap();
        let expect = (2.0 / 5.0) * 4.0 + (2.0f64 / 3.0).powi(2) * 2.0;
        assert_relative_eq!(i5, expect, epsilon = 1e-10);
    }

    #[test]
    fn adaptive_gaussian_over_box() {
        // ∫ e^{-|x|^2} over [-6,6]^2 ≈ π
        let f = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp();
        let est = integrate_box(&f, &[-6.0, -6.0], &[6.0, 6.0], 1e-10, 1e-12, 40).unwrap();
        assert_relative_eq!(est.value, std::f64::consts::PI, epsilon = 1e-9);
        assert!(est.converged);
    }

    #[test]
    fn deterministic_repeat() {
        let f = |x: &[f64]| (x[0] * 3.1).sin() * (x[1] - 0.2).cos() + x[2] * x[2];
        let a = integrate_box(&f, &[-1.0; 3], &[2.0; 3], 1e-9, 1e-12, 30).unwrap();
        let b = integrate_box(&f, &[-1.0; 3], &[2.0; 3], 1e-9, 1e-12, 30).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
