#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::hamiltonian::Tridiagonal;

const MAX_QL_SWEEPS: usize = 60;

/// Eigen-decomposition `H = V Λ Vᵀ` with eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    values: Vec<f64>,
    // vector k occupies vectors[k*n .. (k+1)*n]
    vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[k * n..(k + 1) * n]
    }
}

/// Implicit QL with Wilkinson shifts; accumulates eigenvectors.
pub fn symmetric_eigen(h: &Tridiagonal) -> Result<SymmetricEigen> {
    let n = h.dim();
    let mut d = h.diag().to_vec();
    let mut e = h.off().to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::EigenFailure { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..];
                let zj = &mut hi[..n];
                for k in 0..n {
                    let f = zj[k];
                    zj[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        vectors.extend_from_slice(&z[k * n..(k + 1) * n]);
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Number of eigenvalues strictly below `x` (Sturm sequence).
pub fn eigenvalue_count_below(h: &Tridiagonal, x: f64) -> usize {
    let d = h.diag();
    let e = h.off();
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = d[0] - x;
    for i in 0.. {
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
        if i + 1 == d.len() {
            break;
        }
        q = d[i + 1] - x - e[i] * e[i] / q;
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
pub fn kth_eigenvalue(h: &Tridiagonal, k: usize) -> f64 {
    assert!(k < h.dim(), "eigenvalue index out of range");
    let (mut lo, mut hi) = h.spectral_bounds();
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eigenvalue_count_below(h, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian elimination of a shifted tridiagonal with partial pivoting.
struct PivotedLu {
    // rows of the upper factor: (diag, super, super2)
    u: Vec<[f64; 3]>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    fn new(h: &Tridiagonal, shift: f64) -> Self {
        let n = h.dim();
        let d = h.diag();
        let e = h.off();
        let scale = h.spectral_bounds().1.abs().max(h.spectral_bounds().0.abs()).max(1.0);
        let floor = f64::EPSILON * scale;
        let mut u = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        let mut swapped = Vec::with_capacity(n.saturating_sub(1));
        let mut cur_d = d[0] - shift;
        let mut cur_u = if n > 1 { e[0] } else { 0.0 };
        for i in 0..n.saturating_sub(1) {
            let sub = e[i];
            let next_d = d[i + 1] - shift;
            let next_u = if i + 2 < n { e[i + 1] } else { 0.0 };
            if cur_d.abs() >= sub.abs() {
                let piv = if cur_d == 0.0 { floor } else { cur_d };
                let m = sub / piv;
                u.push([piv, cur_u, 0.0]);
                mult.push(m);
                swapped.push(false);
                cur_d = next_d - m * cur_u;
                cur_u = next_u;
            } else {
                let m = cur_d / sub;
                u.push([sub, next_d, next_u]);
                mult.push(m);
                swapped.push(true);
                cur_d = cur_u - m * next_d;
                cur_u = -m * next_u;
            }
        }
        if cur_d.abs() < floor {
            cur_d = floor.copysign(if cur_d == 0.0 { 1.0 } else { cur_d });
        }
        u.push([cur_d, 0.0, 0.0]);
        Self { u, mult, swapped }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                rhs.swap(i, i + 1);
            }
            rhs[i + 1] -= self.mult[i] * rhs[i];
        }
        for i in (0..n).rev() {
            let [a, b, c] = self.u[i];
            let mut v = rhs[i];
            if i + 1 < n {
                v -= b * rhs[i + 1];
            }
            if i + 2 < n {
                v -= c * rhs[i + 2];
            }
            rhs[i] = v / a;
        }
    }
}

/// Eigenvector for an accurately known eigenvalue `lambda`, orthogonal to
/// every vector in `against`. The sign is fixed so the largest component is
/// positive.
pub fn inverse_iteration(h: &Tridiagonal, lambda: f64, against: &[Vec<f64>]) -> Vec<f64> {
    let n = h.dim();
    let lu = PivotedLu::new(h, lambda);
    // deterministic, non-symmetric start vector
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).sin()).collect();
    for _ in 0..4 {
        for v in against {
            let proj: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi -= proj * vi;
            }
        }
        lu.solve(&mut x);
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
    let mut peak = 0;
    for i in 0..n {
        if x[i].abs() > x[peak].abs() {
            peak = i;
        }
    }
    if x[peak] < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
    x
}

/// The `count` lowest eigenpairs, suitable for large lattices where a full
/// decomposition is wasteful.
pub fn lowest_eigenpairs(h: &Tridiagonal, count: usize) -> Vec<(f64, Vec<f64>)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    for k in 0..count.min(h.dim()) {
        let lambda = kth_eigenvalue(h, k);
        let vecs: Vec<Vec<f64>> = out.iter().map(|(_, v)| v.clone()).collect();
        let v = inverse_iteration(h, lambda, &vecs);
        out.push((lambda, v));
    }
    out
}
