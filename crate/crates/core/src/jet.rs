//! Truncated multivariate Taylor ("jet") arithmetic.
//!
//! A [`Jet`] stores all partial-derivative coefficients of a smooth function
//! at a point, up to a total order. Catalog conformal factors evaluate their
//! derivative oracles through jets, so every `∂^α w` is closed-form exact up
//! to roundoff rather than finite-differenced.
//!
//! Coefficients are Taylor coefficients: `c[α] = ∂^α f / α!`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Shared index tables for jets of a given `(vars, order)`.
pub struct JetTable {
    pub vars: usize,
    pub order: usize,
    /// Monomial exponent tuples in graded-lexicographic order.
    pub monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// All (a, b, c) with monomials[a] + monomials[b] = monomials[c].
    products: Vec<(u32, u32, u32)>,
}

fn gen_monomials(vars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut cur = vec![0u8; vars];
        fill(&mut out, &mut cur, 0, total as u8);
    }
    out
}

fn fill(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, left: u8) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for take in (0..=left).rev() {
        cur[pos] = take;
        fill(out, cur, pos + 1, left - take);
    }
    cur[pos] = 0;
}

impl JetTable {
    fn new(vars: usize, order: usize) -> Self {
        let monomials = gen_monomials(vars, order);
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let degree: Vec<usize> = monomials
            .iter()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .collect();
        let mut products = Vec::new();
        let mut sum = vec![0u8; vars];
        for a in 0..monomials.len() {
            for b in 0..monomials.len() {
                if degree[a] + degree[b] > order {
                    continue;
                }
                for v in 0..vars {
                    sum[v] = monomials[a][v] + monomials[b][v];
                }
                let c = index[&sum];
                products.push((a as u32, b as u32, c as u32));
            }
        }
        JetTable {
            vars,
            order,
            monomials,
            index,
            products,
        }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }
}

static TABLES: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetTable>>>> = OnceLock::new();

/// Fetch (building on first use) the shared table for `(vars, order)`.
pub fn table(vars: usize, order: usize) -> Arc<JetTable> {
    let cache = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((vars, order))
        .or_insert_with(|| Arc::new(JetTable::new(vars, order)))
        .clone()
}

/// Truncated Taylor expansion of a scalar function at a point.
#[derive(Clone)]
pub struct Jet {
    pub table: Arc<JetTable>,
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(table: Arc<JetTable>, value: f64) -> Self {
        let mut c = vec![0.0; table.len()];
        c[0] = value;
        Jet { table, c }
    }

    /// The coordinate function `x_i` expanded at `x_i = value`.
    pub fn variable(table: Arc<JetTable>, i: usize, value: f64) -> Self {
        let mut c = vec![0.0; table.len()];
        c[0] = value;
        if table.order >= 1 {
            let mut e = vec![0u8; table.vars];
            e[i] = 1;
            let idx = table.index_of(&e).expect("first-order monomial");
            c[idx] = 1.0;
        }
        Jet { table, c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Extract `∂^α f` (the derivative, not the Taylor coefficient).
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let idx = self
            .table
            .index_of(alpha)
            .expect("multi-index within jet order");
        let mut fact = 1.0;
        for &e in alpha {
            for k in 2..=e as u64 {
                fact *= k as f64;
            }
        }
        self.c[idx] * fact
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let c = self
            .c
            .iter()
            .zip(&rhs.c)
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            table: self.table.clone(),
            c,
        }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        let c = self
            .c
            .iter()
            .zip(&rhs.c)
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            table: self.table.clone(),
            c,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            table: self.table.clone(),
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        let mut c = vec![0.0; self.table.len()];
        for &(a, b, k) in &self.table.products {
            c[k as usize] += self.c[a as usize] * rhs.c[b as usize];
        }
        Jet {
            table: self.table.clone(),
            c,
        }
    }

    /// Compose with a univariate series: `Σ_k coeffs[k] · (self − self.value())^k`.
    fn compose(&self, coeffs: &[f64]) -> Jet {
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut acc = Jet::constant(self.table.clone(), coeffs[0]);
        let mut pow = Jet::constant(self.table.clone(), 1.0);
        for &a in &coeffs[1..] {
            pow = pow.mul(&h);
            if a != 0.0 {
                acc = acc.add(&pow.scale(a));
            }
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.c[0].exp();
        let order = self.table.order;
        let mut coeffs = vec![0.0; order + 1];
        let mut fact = 1.0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *c = e0 / fact;
        }
        self.compose(&coeffs)
    }

    /// Natural log; requires a positive constant term.
    pub fn ln(&self) -> Jet {
        let c0 = self.c[0];
        assert!(c0 > 0.0, "ln of non-positive jet constant term");
        let order = self.table.order;
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c0.ln();
        let mut cpow = c0;
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *c = sign / (k as f64 * cpow);
            cpow *= c0;
        }
        self.compose(&coeffs)
    }

    pub fn recip(&self) -> Jet {
        let c0 = self.c[0];
        assert!(c0 != 0.0, "reciprocal of zero constant term");
        let order = self.table.order;
        let mut coeffs = vec![0.0; order + 1];
        let mut cpow = c0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *c = sign / cpow;
            cpow *= c0;
        }
        self.compose(&coeffs)
    }

    pub fn sqrt(&self) -> Jet {
        let c0 = self.c[0];
        assert!(c0 > 0.0, "sqrt of non-positive constant term");
        let order = self.table.order;
        let root = c0.sqrt();
        // binomial series for (c0 + h)^{1/2}
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = root;
        let mut binom = 0.5;
        let mut cpow = c0;
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            *c = binom * root / cpow;
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
            cpow *= c0;
        }
        self.compose(&coeffs)
    }

    pub fn sin(&self) -> Jet {
        let (s0, c0) = self.c[0].sin_cos();
        let order = self.table.order;
        let cycle = [s0, c0, -s0, -c0];
        let mut coeffs = vec![0.0; order + 1];
        let mut fact = 1.0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *c = cycle[k % 4] / fact;
        }
        self.compose(&coeffs)
    }

    pub fn cos(&self) -> Jet {
        let (s0, c0) = self.c[0].sin_cos();
        let order = self.table.order;
        let cycle = [c0, -s0, -c0, s0];
        let mut coeffs = vec![0.0; order + 1];
        let mut fact = 1.0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *c = cycle[k % 4] / fact;
        }
        self.compose(&coeffs)
    }
}

/// Jets of all coordinates at `x`.
pub fn variables(table: &Arc<JetTable>, x: &[f64]) -> Vec<Jet> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| Jet::variable(table.clone(), i, v))
        .collect()
}

/// `Σ x_i²` as a jet, a common building block for radial fields.
pub fn radius_squared(table: &Arc<JetTable>, x: &[f64]) -> Jet {
    let vars = variables(table, x);
    let mut acc = Jet::constant(table.clone(), 0.0);
    for v in &vars {
        acc = acc.add(&v.mul(v));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_partials_are_exact() {
        // f = x^2 y + 3y^3 at (2, -1)
        let t = table(2, 4);
        let x = Jet::variable(t.clone(), 0, 2.0);
        let y = Jet::variable(t.clone(), 1, -1.0);
        let f = x.mul(&x).mul(&y).add(&y.mul(&y).mul(&y).scale(3.0));
        assert_relative_eq!(f.value(), 4.0 * -1.0 + 3.0 * -1.0);
        assert_relative_eq!(f.partial(&[1, 0]), 2.0 * 2.0 * -1.0);
        assert_relative_eq!(f.partial(&[0, 1]), 4.0 + 9.0);
        assert_relative_eq!(f.partial(&[2, 1]), 2.0);
        assert_relative_eq!(f.partial(&[0, 3]), 18.0);
    }

    #[test]
    fn ln_exp_roundtrip() {
        let t = table(3, 5);
        let x = radius_squared(&t, &[0.3, -0.2, 0.9]).add_scalar(1.0);
        let back = x.ln().exp();
        for (a, b) in back.c.iter().zip(&x.c) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn log_derivatives_match_closed_form() {
        // f = log(1 + x^2), df/dx = 2x/(1+x^2)
        let t = table(1, 5);
        let x0 = 0.7;
        let x = Jet::variable(t, 0, x0);
        let f = x.mul(&x).add_scalar(1.0).ln();
        let denom = 1.0 + x0 * x0;
        assert_relative_eq!(f.partial(&[1]), 2.0 * x0 / denom, epsilon = 1e-13);
        assert_relative_eq!(
            f.partial(&[2]),
            2.0 * (1.0 - x0 * x0) / (denom * denom),
            epsilon = 1e-12
        );
    }

    #[test]
    fn sqrt_and_recip() {
        let t = table(2, 4);
        let x = Jet::variable(t.clone(), 0, 1.3);
        let y = Jet::variable(t, 1, 0.4);
        let f = x.mul(&x).add(&y.mul(&y)).add_scalar(1.0);
        let s = f.sqrt();
        let prod = s.mul(&s);
        for (a, b) in prod.c.iter().zip(&f.c) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let r = f.recip().mul(&f);
        assert_relative_eq!(r.value(), 1.0, epsilon = 1e-13);
        assert!(r.c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sin_cos_identity() {
        let t = table(2, 5);
        let x = Jet::variable(t.clone(), 0, 0.8);
        let y = Jet::variable(t, 1, -0.3);
        let f = x.mul(&y);
        let id = f.sin().mul(&f.sin()).add(&f.cos().mul(&f.cos()));
        assert_relative_eq!(id.value(), 1.0, epsilon = 1e-13);
        assert!(id.c[1..].iter().all(|v| v.abs() < 1e-11));
    }
}
