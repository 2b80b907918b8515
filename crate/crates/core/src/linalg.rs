//! Dense helpers for the small (n ≤ 9) matrices this crate works with.

use crate::error::{QflatError, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// LU factorization with partial pivoting of a row-major n×n matrix.
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    sign: f64,
}

pub fn lu_decompose(a: &[f64], n: usize) -> Result<Lu> {
    let mut lu = a.to_vec();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[col * n + col].abs();
        for row in col + 1..n {
            let v = lu[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(QflatError::SingularMetric);
        }
        if pivot != col {
            for k in 0..n {
                lu.swap(col * n + k, pivot * n + k);
            }
            piv.swap(col, pivot);
            sign = -sign;
        }
        let d = lu[col * n + col];
        for row in col + 1..n {
            let f = lu[row * n + col] / d;
            lu[row * n + col] = f;
            for k in col + 1..n {
                lu[row * n + k] -= f * lu[col * n + k];
            }
        }
    }
    Ok(Lu { n, lu, piv, sign })
}

impl Lu {
    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for k in 0..i {
                x[i] -= self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.lu[i * n + k] * x[k];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for col in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[col] = 1.0;
            let x = self.solve(&e);
            for row in 0..n {
                inv[row * n + col] = x[row];
            }
        }
        inv
    }
}

pub fn det(a: &[f64], n: usize) -> Result<f64> {
    Ok(lu_decompose(a, n)?.det())
}

pub fn inverse(a: &[f64], n: usize) -> Result<Vec<f64>> {
    Ok(lu_decompose(a, n)?.inverse())
}

/// All permutations of `0..n` in lexicographic order, with signs.
pub fn permutations(n: usize) -> Arc<Vec<(Vec<u8>, i8)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(Vec<u8>, i8)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut out = Vec::new();
            let mut cur: Vec<u8> = Vec::with_capacity(n);
            let mut used = vec![false; n];
            gen_perm(n, &mut cur, &mut used, &mut out);
            Arc::new(out)
        })
        .clone()
}

fn gen_perm(n: usize, cur: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<(Vec<u8>, i8)>) {
    if cur.len() == n {
        out.push((cur.clone(), perm_sign(cur)));
        return;
    }
    for v in 0..n {
        if !used[v] {
            used[v] = true;
            cur.push(v as u8);
            gen_perm(n, cur, used, out);
            cur.pop();
            used[v] = false;
        }
    }
}

fn perm_sign(p: &[u8]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}
