//! Dense univariate complex polynomials with companion-matrix root finding.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients in ascending order: `coeffs[k]` multiplies `λ^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        if p.coeffs.is_empty() {
            p.coeffs.push(ZERO);
        }
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Poly { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `λ - root`.
    pub fn linear_root(root: Complex64) -> Self {
        Poly {
            coeffs: vec![-root, ONE],
        }
    }

    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Complex64>) -> Self {
        roots
            .into_iter()
            .fold(Poly::one(), |acc, r| acc.mul(&Poly::linear_root(*r)))
    }

    /// Nominal degree (length - 1), not trimmed.
    pub fn len_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree after ignoring exactly-zero leading terms.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != ZERO)
            .unwrap_or(0)
    }

    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Drops leading coefficients below `rel_tol * scale`.
    pub fn trimmed(&self, rel_tol: f64) -> Poly {
        let cut = rel_tol * self.scale();
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() <= cut) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(ZERO);
        }
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(ZERO)
                    + other.coeffs.get(k).copied().unwrap_or(ZERO)
            })
            .collect();
        Poly { coeffs }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scaled(-ONE))
    }

    pub fn scaled(&self, s: Complex64) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut coeffs = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly { coeffs }
    }

    /// `λ ↦ p(s·λ)`.
    pub fn compose_scale(&self, s: Complex64) -> Poly {
        let mut pow = ONE;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * pow;
                pow *= s;
                out
            })
            .collect();
        Poly { coeffs }
    }

    /// Synthetic division by `λ - root`; returns quotient and remainder.
    pub fn deflate(&self, root: Complex64) -> (Poly, Complex64) {
        let n = self.coeffs.len();
        if n == 1 {
            return (Poly::constant(ZERO), self.coeffs[0]);
        }
        let mut quotient = vec![ZERO; n - 1];
        let mut carry = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            quotient[k] = carry;
            carry = self.coeffs[k] + carry * root;
        }
        (Poly { coeffs: quotient }, carry)
    }

    /// Taylor coefficients `p^{(k)}(x)/k!` for `k = 0..=degree`.
    pub fn taylor_at(&self, x: Complex64) -> Vec<Complex64> {
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = ZERO;
            for j in (k..n).rev() {
                acc = acc * x + work[j];
                work[j] = acc;
            }
            out.push(work[k]);
        }
        out
    }

    /// Newton polish of a root of multiplicity `m` through the simple root of
    /// the `(m−1)`-th derivative; keeps a step only if it reduces the residual.
    pub fn polish_root(&self, z: Complex64, m: usize) -> Complex64 {
        let mut g = self.clone();
        for _ in 1..m {
            g = g.derivative();
        }
        let dg = g.derivative();
        let mut z = z;
        for _ in 0..3 {
            let d = dg.eval(z);
            if d.norm() == 0.0 {
                break;
            }
            let next = z - g.eval(z) / d;
            if !next.is_finite() || g.eval(next).norm() > g.eval(z).norm() {
                break;
            }
            z = next;
        }
        z
    }

    /// All complex roots: eigenvalues of the companion matrix, each followed
    /// by a single Newton step on the original polynomial.
    pub fn roots(&self) -> Vec<Complex64> {
        let p = self.trimmed(1e-14);
        let degree = p.len_degree();
        if degree == 0 {
            return Vec::new();
        }
        let lead = p.coeffs[degree];
        if degree == 1 {
            return vec![-p.coeffs[0] / lead];
        }
        let mut companion = DMatrix::<Complex64>::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = ONE;
        }
        for i in 0..degree {
            companion[(i, degree - 1)] = -p.coeffs[i] / lead;
        }
        let eig = companion
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular");
        let dp = p.derivative();
        eig.iter()
            .map(|&z| {
                let d = dp.eval(z);
                if d.norm() > 0.0 {
                    let step = p.eval(z) / d;
                    let polished = z - step;
                    if polished.is_finite() && p.eval(polished).norm() <= p.eval(z).norm() {
                        return polished;
                    }
                }
                z
            })
            .collect()
    }
}

/// Groups points lying within `radius` of each other (single linkage) and
/// returns each group's centroid together with its size.
pub fn cluster(points: &[Complex64], radius: f64) -> Vec<(Complex64, usize)> {
    let n = points.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                if a != b {
                    group[b] = a;
                }
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let root = find(&mut group, i);
        match out.iter_mut().find(|(r, _, _)| *r == root) {
            Some(entry) => {
                entry.1 += points[i];
                entry.2 += 1;
            }
            None => out.push((root, points[i], 1)),
        }
    }
    out.into_iter()
        .map(|(_, sum, count)| (sum / count as f64, count))
        .collect()
}
