//! Dimension-generic dense tensor algebra: generalized Kronecker deltas,
//! curvature tensors with their symmetry checks, Gauss-equation assembly,
//! the Pfaffian contraction, and the Weyl decomposition.
//!
//! Sign convention, fixed once for the whole crate: the fully covariant
//! curvature tensor satisfies the Gauss equation
//! `R_{ijkl} = L_{ik} L_{jl} − L_{il} L_{jk}`,
//! so round spheres have positive sectional curvature and
//! `Ric_{jl} = g^{ik} R_{ijkl}`.

use crate::error::{QflatError, Result};
use crate::linalg;
use crate::parallel;

/// Symmetric rank-2 tensor with dense n×n storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor2 {
    n: usize,
    data: Vec<f64>,
}

impl SymTensor2 {
    pub fn zeros(n: usize) -> Self {
        SymTensor2 {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut t = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            t.data[i * values.len() + i] = v;
        }
        t
    }

    /// Build from a function of (i, j); the (j, i) entry is mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                t.data[i * n + j] = v;
                t.data[j * n + i] = v;
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn det(&self) -> Result<f64> {
        linalg::det(&self.data, self.n)
    }

    pub fn inverse(&self) -> Result<SymTensor2> {
        let inv = linalg::inverse(&self.data, self.n)?;
        Ok(SymTensor2 {
            n: self.n,
            data: inv,
        })
    }

    /// Positive definiteness via the leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        for k in 1..=self.n {
            let mut minor = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    minor[i * k + j] = self.get(i, j);
                }
            }
            match linalg::det(&minor, k) {
                Ok(d) if d > 0.0 => {}
                _ => return false,
            }
        }
        true
    }
}

/// Fully covariant rank-4 curvature tensor `R_{ijkl}`.
#[derive(Clone, Debug)]
pub struct Riemann4 {
    n: usize,
    data: Vec<f64>,
}

impl Riemann4 {
    pub fn zeros(n: usize) -> Self {
        Riemann4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest violation of the antisymmetries, the pair symmetry and the
    /// first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst.max((r + self.get(j, i, k, l)).abs());
                        worst = worst.max((r + self.get(i, j, l, k)).abs());
                        worst = worst.max((r - self.get(k, l, i, j)).abs());
                        let bianchi =
                            r + self.get(i, k, l, j) + self.get(i, l, j, k);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Upper/lower index lists for a generalized Kronecker delta.
#[derive(Clone, Debug)]
pub struct MultiIndexPair {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
}

impl MultiIndexPair {
    pub fn new(upper: Vec<usize>, lower: Vec<usize>) -> Result<Self> {
        if upper.len() != lower.len() {
            return Err(QflatError::invalid("index lists must have equal length"));
        }
        Ok(MultiIndexPair { upper, lower })
    }

    fn validate(&self, n: usize) -> Result<()> {
        for &i in self.upper.iter().chain(self.lower.iter()) {
            if i < 1 || i > n {
                return Err(QflatError::invalid(format!(
                    "index {i} out of range 1..={n}"
                )));
            }
        }
        Ok(())
    }
}

/// Generalized Kronecker delta `δ^{upper}_{lower}` for 1-based indices in `1..=n`.
///
/// Returns the sign of the permutation taking `lower` to `upper` when both
/// lists are repeat-free arrangements of the same index set, and 0 otherwise.
pub fn gen_kronecker(pair: &MultiIndexPair, n: usize) -> Result<i32> {
    pair.validate(n)?;
    let k = pair.upper.len();
    let mut seen_u = vec![false; n + 1];
    let mut seen_l = vec![false; n + 1];
    for idx in 0..k {
        if seen_u[pair.upper[idx]] || seen_l[pair.lower[idx]] {
            return Ok(0);
        }
        seen_u[pair.upper[idx]] = true;
        seen_l[pair.lower[idx]] = true;
    }
    // same index set?
    for v in 1..=n {
        if seen_u[v] != seen_l[v] {
            return Ok(0);
        }
    }
    // sign of the permutation sigma with upper[sigma(t)] = lower[t]
    let mut perm = Vec::with_capacity(k);
    for &lv in &pair.lower {
        let pos = pair.upper.iter().position(|&uv| uv == lv).unwrap();
        perm.push(pos as u8);
    }
    let mut inversions = 0usize;
    for a in 0..k {
        for b in a + 1..k {
            if perm[a] > perm[b] {
                inversions += 1;
            }
        }
    }
    Ok(if inversions % 2 == 0 { 1 } else { -1 })
}

/// Curvature of a hypersurface from its second fundamental form via the
/// Gauss equation `R_{ijkl} = L_{ik} L_{jl} − L_{il} L_{jk}`.
pub fn riemann_from_second_form(l: &SymTensor2) -> Riemann4 {
    let n = l.dim();
    let mut rm = Riemann4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for lx in 0..n {
                    let v = l.get(i, k) * l.get(j, lx) - l.get(i, lx) * l.get(j, k);
                    rm.set(i, j, k, lx, v);
                }
            }
        }
    }
    rm
}

/// Pfaffian of the curvature form by the literal generalized-Kronecker
/// contraction: `Pfaff = (1 / (2^n (n/2)!)) δ^{i…}_{j…} R_{i1 i2 j1 j2} ⋯`.
///
/// The double sum over index tuples runs over all (n!)² permutation pairs;
/// fine through n = 6, O(minutes) at n = 8.
pub fn pfaffian_from_riemann(rm: &Riemann4) -> Result<f64> {
    let n = rm.dim();
    if n % 2 != 0 {
        return Err(QflatError::UnsupportedDimension {
            need: "even n",
            got: n,
        });
    }
    let perms = linalg::permutations(n);
    let pairs = n / 2;
    let data = rm.as_slice();
    let n1 = n;
    let partials = parallel::map_indexed(perms.len(), |si| {
        let (sigma, ssign) = &perms[si];
        let mut acc = 0.0f64;
        for (tau, tsign) in perms.iter() {
            let mut prod = 1.0f64;
            for p in 0..pairs {
                let i1 = sigma[2 * p] as usize;
                let i2 = sigma[2 * p + 1] as usize;
                let j1 = tau[2 * p] as usize;
                let j2 = tau[2 * p + 1] as usize;
                prod *= data[((i1 * n1 + i2) * n1 + j1) * n1 + j2];
                if prod == 0.0 {
                    break;
                }
            }
            acc += (*tsign as f64) * prod;
        }
        (*ssign as f64) * acc
    });
    let sum: f64 = partials.iter().sum();
    let mut half_fact = 1.0f64;
    for k in 2..=pairs {
        half_fact *= k as f64;
    }
    Ok(sum / (2f64.powi(n as i32) * half_fact))
}

/// Ricci, scalar, Schouten and traceless-Ricci contractions of a curvature
/// tensor against a metric.
#[derive(Clone, Debug)]
pub struct CurvatureContractions {
    pub ricci: SymTensor2,
    pub scalar: f64,
    /// Schouten tensor in the four-dimensional normalization
    /// `A = ½(Ric − (R/6) g)`.
    pub schouten: SymTensor2,
    /// Traceless part `E = Ric − (R/n) g`.
    pub traceless_ricci: SymTensor2,
}

pub fn ricci_scalar_schouten(rm: &Riemann4, g: &SymTensor2) -> Result<CurvatureContractions> {
    let n = rm.dim();
    if g.dim() != n {
        return Err(QflatError::invalid("metric dimension mismatch"));
    }
    if !g.is_positive_definite() {
        return Err(QflatError::SingularMetric);
    }
    let ginv = g.inverse()?;
    let ricci = SymTensor2::from_fn(n, |j, l| {
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                s += ginv.get(i, k) * rm.get(i, j, k, l);
            }
        }
        s
    });
    let mut scalar = 0.0;
    for j in 0..n {
        for l in 0..n {
            scalar += ginv.get(j, l) * ricci.get(j, l);
        }
    }
    let schouten = SymTensor2::from_fn(n, |i, j| {
        0.5 * (ricci.get(i, j) - scalar / 6.0 * g.get(i, j))
    });
    let traceless = SymTensor2::from_fn(n, |i, j| {
        ricci.get(i, j) - scalar / n as f64 * g.get(i, j)
    });
    Ok(CurvatureContractions {
        ricci,
        scalar,
        schouten,
        traceless_ricci: traceless,
    })
}

/// Second elementary symmetric function of the eigenvalues of `a` relative
/// to `g`: `σ₂ = ½[(tr_g a)² − |a|_g²]`.
pub fn sigma2(a: &SymTensor2, g: &SymTensor2) -> Result<f64> {
    let n = a.dim();
    if g.dim() != n {
        return Err(QflatError::invalid("tensor dimension mismatch"));
    }
    if !g.is_positive_definite() {
        return Err(QflatError::SingularMetric);
    }
    let ginv = g.inverse()?;
    let mut trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            trace += ginv.get(i, j) * a.get(i, j);
        }
    }
    let mut norm2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    norm2 += a.get(i, j) * a.get(k, l) * ginv.get(i, k) * ginv.get(j, l);
                }
            }
        }
    }
    Ok(0.5 * (trace * trace - norm2))
}

/// Trace-free (Weyl) part of the curvature tensor, n ≥ 3.
pub fn weyl_tensor(rm: &Riemann4, g: &SymTensor2) -> Result<Riemann4> {
    let n = rm.dim();
    if n < 3 {
        return Err(QflatError::UnsupportedDimension { need: "n >= 3", got: n });
    }
    let contr = ricci_scalar_schouten(rm, g)?;
    let ric = &contr.ricci;
    let r = contr.scalar;
    let nf = n as f64;
    let mut w = Riemann4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let ricci_part = (g.get(i, k) * ric.get(j, l) - g.get(i, l) * ric.get(j, k)
                        + g.get(j, l) * ric.get(i, k)
                        - g.get(j, k) * ric.get(i, l))
                        / (nf - 2.0);
                    let scalar_part = r / ((nf - 1.0) * (nf - 2.0))
                        * (g.get(i, k) * g.get(j, l) - g.get(i, l) * g.get(j, k));
                    w.set(i, j, k, l, rm.get(i, j, k, l) - ricci_part + scalar_part);
                }
            }
        }
    }
    Ok(w)
}

/// `|T|_g²` of a rank-4 tensor, all indices raised with `g`.
pub fn riemann_norm_sq(rm: &Riemann4, g: &SymTensor2) -> Result<f64> {
    let n = rm.dim();
    let ginv = g.inverse()?;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut lowered = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            for c in 0..n {
                                for d in 0..n {
                                    lowered += rm.get(a, b, c, d)
                                        * ginv.get(a, i)
                                        * ginv.get(b, j)
                                        * ginv.get(c, k)
                                        * ginv.get(d, l);
                                }
                            }
                        }
                    }
                    total += lowered * rm.get(i, j, k, l);
                }
            }
        }
    }
    Ok(total)
}

/// `|t|_g²` of a rank-2 tensor.
pub fn sym2_norm_sq(t: &SymTensor2, g: &SymTensor2) -> Result<f64> {
    let n = t.dim();
    let ginv = g.inverse()?;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    total += t.get(i, j) * t.get(k, l) * ginv.get(i, k) * ginv.get(j, l);
                }
            }
        }
    }
    Ok(total)
}

pub fn double_factorial(n: usize) -> f64 {
    let mut v = 1.0;
    let mut k = n as i64;
    while k > 1 {
        v *= k as f64;
        k -= 2;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronecker_examples() {
        let d = |u: Vec<usize>, l: Vec<usize>| {
            gen_kronecker(&MultiIndexPair::new(u, l).unwrap(), 4).unwrap()
        };
        assert_eq!(d(vec![1, 2], vec![1, 2]), 1);
        assert_eq!(d(vec![1, 2], vec![2, 1]), -1);
        assert_eq!(d(vec![1, 1, 2], vec![1, 2, 3]), 0);
        assert_eq!(d(vec![1, 2], vec![1, 3]), 0);
        let bad = MultiIndexPair::new(vec![5, 2], vec![1, 2]).unwrap();
        assert!(gen_kronecker(&bad, 4).is_err());
    }

    #[test]
    fn gauss_equation_examples() {
        let rm = riemann_from_second_form(&SymTensor2::identity(4));
        assert_relative_eq!(rm.get(0, 1, 0, 1), 1.0);
        assert_relative_eq!(rm.get(0, 1, 1, 0), -1.0);
        assert_relative_eq!(rm.get(0, 1, 2, 3), 0.0);
        assert!(rm.symmetry_residual() < 1e-12);

        let zero = riemann_from_second_form(&SymTensor2::zeros(4));
        assert_eq!(zero.max_abs(), 0.0);

        let rm = riemann_from_second_form(&SymTensor2::diag(&[2.0, 1.0, 1.0, 1.0]));
        assert_relative_eq!(rm.get(0, 1, 0, 1), 2.0);
        assert_relative_eq!(rm.get(1, 2, 1, 2), 1.0);
        assert!(rm.symmetry_residual() < 1e-12);
    }

    #[test]
    fn pfaffian_examples() {
        // Unit two-sphere: R_{1212} = 1, value is the Gauss curvature.
        let rm = riemann_from_second_form(&SymTensor2::identity(2));
        assert_relative_eq!(pfaffian_from_riemann(&rm).unwrap(), 1.0, epsilon = 1e-12);

        // Unit four-sphere shape operator: 3!! · det I = 3.
        let rm = riemann_from_second_form(&SymTensor2::identity(4));
        assert_relative_eq!(pfaffian_from_riemann(&rm).unwrap(), 3.0, epsilon = 1e-12);

        assert_relative_eq!(
            pfaffian_from_riemann(&Riemann4::zeros(4)).unwrap(),
            0.0
        );

        assert!(pfaffian_from_riemann(&Riemann4::zeros(3)).is_err());
    }

    #[test]
    fn contraction_examples() {
        // Unit S^4 data: Ric = 3I, R = 12, A = I/2, E = 0.
        let rm = riemann_from_second_form(&SymTensor2::identity(4));
        let c = ricci_scalar_schouten(&rm, &SymTensor2::identity(4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 3.0 } else { 0.0 };
                assert_relative_eq!(c.ricci.get(i, j), expect, epsilon = 1e-12);
                let a = if i == j { 0.5 } else { 0.0 };
                assert_relative_eq!(c.schouten.get(i, j), a, epsilon = 1e-12);
                assert_relative_eq!(c.traceless_ricci.get(i, j), 0.0, epsilon = 1e-12);
            }
        }
        assert_relative_eq!(c.scalar, 12.0, epsilon = 1e-12);

        let z = ricci_scalar_schouten(&Riemann4::zeros(4), &SymTensor2::identity(4)).unwrap();
        assert_eq!(z.scalar, 0.0);

        // Scaling: g -> 4g with Rm -> 4Rm divides the scalar by 4.
        let mut rm4 = Riemann4::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        rm4.set(i, j, k, l, 4.0 * rm.get(i, j, k, l));
                    }
                }
            }
        }
        let g4 = SymTensor2::from_fn(4, |i, j| if i == j { 4.0 } else { 0.0 });
        let c4 = ricci_scalar_schouten(&rm4, &g4).unwrap();
        assert_relative_eq!(c4.scalar, 3.0, epsilon = 1e-12);

        let singular = SymTensor2::zeros(4);
        assert!(ricci_scalar_schouten(&rm, &singular).is_err());
    }

    #[test]
    fn sigma2_examples() {
        let g = SymTensor2::identity(4);
        let half = SymTensor2::from_fn(4, |i, j| if i == j { 0.5 } else { 0.0 });
        assert_relative_eq!(sigma2(&half, &g).unwrap(), 1.5, epsilon = 1e-12);
        assert_relative_eq!(sigma2(&SymTensor2::zeros(4), &g).unwrap(), 0.0);
        let d = SymTensor2::diag(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(sigma2(&d, &g).unwrap(), 35.0, epsilon = 1e-12);
    }

    #[test]
    fn weyl_vanishes_on_space_forms() {
        let rm = riemann_from_second_form(&SymTensor2::identity(4));
        let w = weyl_tensor(&rm, &SymTensor2::identity(4)).unwrap();
        assert!(w.max_abs() < 1e-12);
        let w0 = weyl_tensor(&Riemann4::zeros(4), &SymTensor2::identity(4)).unwrap();
        assert!(w0.max_abs() == 0.0);
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(1), 1.0);
        assert_eq!(double_factorial(3), 3.0);
        assert_eq!(double_factorial(5), 15.0);
        assert_eq!(double_factorial(7), 105.0);
    }
}
