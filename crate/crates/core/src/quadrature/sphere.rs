//! Deterministic product rules on unit spheres S^{m} ⊂ R^{m+1}.
//!
//! Polar angles use Gauss–Legendre nodes with the sin-power measure folded
//! into the weights; the azimuth uses equispaced points (trapezoid rule,
//! spectrally accurate for periodic integrands). Weights are normalized so
//! they sum to |S^m| exactly.

use crate::constants::sphere_surface;
use crate::quadrature::gauss::gauss_legendre;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub struct SphereRule {
    /// Ambient dimension n; nodes are unit vectors in Rⁿ on S^{n-1}.
    pub n: usize,
    pub level: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn build(n: usize, level: usize) -> SphereRule {
    assert!(n >= 2);
    let (mut nodes, mut weights) = if n == 2 {
        let m = (4 * level).max(4);
        let mut ns = Vec::with_capacity(m);
        let w = 2.0 * std::f64::consts::PI / m as f64;
        for k in 0..m {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            ns.push(vec![phi.cos(), phi.sin()]);
        }
        (ns, vec![w; m])
    } else {
        let inner = build(n - 1, level);
        let k = (2 * level).max(2);
        let (gl_nodes, gl_weights) = gauss_legendre(k);
        let mut ns = Vec::new();
        let mut ws = Vec::new();
        // theta in [0, pi], measure sin^{n-2}(theta) d(theta)
        for (t, wt) in gl_nodes.iter().zip(gl_weights) {
            let theta = 0.5 * std::f64::consts::PI * (t + 1.0);
            let jac = 0.5 * std::f64::consts::PI;
            let s = theta.sin();
            let c = theta.cos();
            let measure = s.powi(n as i32 - 2) * jac * wt;
            for (inode, iw) in inner.nodes.iter().zip(&inner.weights) {
                let mut p = Vec::with_capacity(n);
                p.push(c);
                for v in inode {
                    p.push(s * v);
                }
                ns.push(p);
                ws.push(measure * iw);
            }
        }
        (ns, ws)
    };
    // normalize: constants integrate exactly
    let total: f64 = weights.iter().sum();
    let target = sphere_surface(n - 1);
    let scale = target / total;
    for w in &mut weights {
        *w *= scale;
    }
    for node in &mut nodes {
        let norm: f64 = node.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in node.iter_mut() {
            *v /= norm;
        }
    }
    SphereRule {
        n,
        level,
        nodes,
        weights,
    }
}

impl SphereRule {
    pub fn shared(n: usize, level: usize) -> Arc<SphereRule> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SphereRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry((n, level))
            .or_insert_with(|| Arc::new(build(n, level)))
            .clone()
    }

    /// Σ w_i f(ω_i) ≈ ∫_{S^{n-1}} f dω.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(node, w)| w * f(node))
            .sum()
    }
}
