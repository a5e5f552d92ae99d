//! Renormalized Numerov kernels.
//!
//! The three-term Numerov recursion F[i+1] - U[i] F[i] + F[i-1] = 0, with
//! F = (1 - T) phi, T = h^2 Qt / 12 and U = (2 + 10T)/(1 - T), is a symmetric
//! tridiagonal system. Its LDL^T pivots are the renormalized ratios, so the
//! number of negative pivots equals the number of discrete eigenvalues below
//! E (Sylvester's law of inertia). Outward pivots run from the inner end,
//! inward pivots from the outer end, and they meet at a matching node.

use nalgebra::{Matrix2, SymmetricEigen};

/// Largest |T| tolerated when truncating a classically forbidden region.
pub const T_LIMIT: f64 = 0.9;

const TINY: f64 = 1e-300;

#[inline]
fn numerov_u(t: f64) -> f64 {
    (2.0 + 10.0 * t) / (1.0 - t)
}

#[inline]
fn guard(d: f64) -> f64 {
    if d == 0.0 {
        TINY
    } else {
        d
    }
}

/// Single-channel problem with Qt[i](E) = a[i] - b[i] E.
#[derive(Debug, Clone)]
pub struct ScalarProblem {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub h: f64,
}

/// Active node range `[lo, hi]` (Dirichlet at both) and the matching node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
    pub m: usize,
}

impl ScalarProblem {
    #[inline]
    pub fn q(&self, i: usize, e: f64) -> f64 {
        self.a[i] - self.b[i] * e
    }

    #[inline]
    fn t(&self, i: usize, e: f64) -> f64 {
        self.h * self.h * self.q(i, e) / 12.0
    }

    /// Classically allowed span and a window truncated once the WKB decay
    /// action reaches `action` on each side (or T would exceed the limit).
    pub fn window(&self, e: f64, action: f64) -> Option<Window> {
        let n = self.a.len();
        let first = (0..n).find(|&i| self.q(i, e) < 0.0)?;
        let last = (0..n).rev().find(|&i| self.q(i, e) < 0.0)?;
        let mut lo = first;
        let mut s = 0.0;
        while lo > 0 {
            let q = self.q(lo - 1, e);
            if self.t(lo - 1, e) > T_LIMIT {
                break;
            }
            lo -= 1;
            s += q.max(0.0).sqrt() * self.h;
            if s > action {
                break;
            }
        }
        let mut hi = last;
        let mut s = 0.0;
        while hi + 1 < n {
            let q = self.q(hi + 1, e);
            if self.t(hi + 1, e) > T_LIMIT {
                break;
            }
            hi += 1;
            s += q.max(0.0).sqrt() * self.h;
            if s > action {
                break;
            }
        }
        let lo = lo.min(first.saturating_sub(1));
        let hi = hi.max((last + 1).min(n - 1));
        if hi < lo + 2 {
            return None;
        }
        let m = last.clamp(lo + 1, hi - 1);
        Some(Window { lo, hi, m })
    }

    /// Number of discrete eigenvalues below `e` and the matching pivot.
    pub fn count(&self, e: f64, w: Window) -> (usize, f64) {
        let mut neg = 0usize;
        let mut inv = 0.0;
        for i in w.lo + 1..w.m {
            let d = guard(numerov_u(self.t(i, e)) - inv);
            neg += (d < 0.0) as usize;
            inv = 1.0 / d;
        }
        let inv_out = inv;
        let mut inv = 0.0;
        for i in (w.m + 1..w.hi).rev() {
            let s = guard(numerov_u(self.t(i, e)) - inv);
            neg += (s < 0.0) as usize;
            inv = 1.0 / s;
        }
        let pm = numerov_u(self.t(w.m, e)) - inv_out - inv;
        neg += (pm < 0.0) as usize;
        (neg, pm)
    }

    /// Discrete eigenvector at (converged) `e`, returned as phi on all nodes.
    pub fn eigenvector(&self, e: f64, w: Window) -> Vec<f64> {
        let n = self.a.len();
        let mut d = vec![0.0; n];
        let mut inv = 0.0;
        for i in w.lo + 1..w.m {
            d[i] = guard(numerov_u(self.t(i, e)) - inv);
            inv = 1.0 / d[i];
        }
        let mut s = vec![0.0; n];
        let mut inv = 0.0;
        for i in (w.m + 1..w.hi).rev() {
            s[i] = guard(numerov_u(self.t(i, e)) - inv);
            inv = 1.0 / s[i];
        }
        let mut f = vec![0.0; n];
        f[w.m] = 1.0;
        for i in (w.lo + 1..w.m).rev() {
            f[i] = f[i + 1] / d[i];
        }
        for i in w.m + 1..w.hi {
            f[i] = f[i - 1] / s[i];
        }
        (0..n).map(|i| f[i] / (1.0 - self.t(i, e))).collect()
    }

    /// Regular outward solution phi with phi[start] = 0, rescaled to avoid overflow.
    pub fn propagate_outward(&self, e: f64, start: usize) -> Vec<f64> {
        let n = self.a.len();
        let mut f = vec![0.0; n];
        if start + 1 >= n {
            return f;
        }
        f[start + 1] = 1e-30;
        for i in start + 1..n - 1 {
            f[i + 1] = numerov_u(self.t(i, e)) * f[i] - f[i - 1];
            if f[i + 1].abs() > 1e150 {
                for v in &mut f[..=i + 1] {
                    *v *= 1e-150;
                }
            }
        }
        (0..n).map(|i| f[i] / (1.0 - self.t(i, e))).collect()
    }
}

/// Two-channel problem with Qt[i](E) = A[i] - b[i] E I.
#[derive(Debug, Clone)]
pub struct CoupledProblem {
    pub a: Vec<Matrix2<f64>>,
    pub b: Vec<f64>,
    pub h: f64,
}

/// Negative-eigenvalue count of a real symmetric 2x2 matrix.
pub fn negative_count(m: &Matrix2<f64>) -> usize {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let tr = m[(0, 0)] + m[(1, 1)];
    if det < 0.0 {
        1
    } else if det > 0.0 {
        if tr < 0.0 {
            2
        } else {
            0
        }
    } else if tr < 0.0 {
        1
    } else {
        0
    }
}

fn inv2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let det = if det == 0.0 { TINY } else { det };
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
}

fn sym_eigs(m: &Matrix2<f64>) -> (f64, f64) {
    let tr = m[(0, 0)] + m[(1, 1)];
    let diff = m[(0, 0)] - m[(1, 1)];
    let rad = (0.25 * diff * diff + m[(0, 1)] * m[(0, 1)]).sqrt();
    (0.5 * tr - rad, 0.5 * tr + rad)
}

impl CoupledProblem {
    fn t(&self, i: usize, e: f64) -> Matrix2<f64> {
        let mut q = self.a[i];
        q[(0, 0)] -= self.b[i] * e;
        q[(1, 1)] -= self.b[i] * e;
        q * (self.h * self.h / 12.0)
    }

    fn u(&self, i: usize, e: f64) -> Matrix2<f64> {
        let w = Matrix2::identity() - self.t(i, e);
        inv2(&w) * 12.0 - Matrix2::identity() * 10.0
    }

    /// Window based on the most open eigen-channel; truncation when either
    /// the slowest decay action reaches `action` or the stiffest channel
    /// reaches the T limit.
    pub fn window(&self, e: f64, action: f64) -> Option<Window> {
        let n = self.a.len();
        let lowest = |i: usize| sym_eigs(&(self.t(i, e) * (12.0 / (self.h * self.h)))).0;
        let highest_t = |i: usize| sym_eigs(&self.t(i, e)).1;
        let first = (0..n).find(|&i| lowest(i) < 0.0)?;
        let last = (0..n).rev().find(|&i| lowest(i) < 0.0)?;
        let mut lo = first;
        let mut s = 0.0;
        while lo > 0 && highest_t(lo - 1) <= T_LIMIT {
            lo -= 1;
            s += lowest(lo).max(0.0).sqrt() * self.h;
            if s > action {
                break;
            }
        }
        let mut hi = last;
        let mut s = 0.0;
        while hi + 1 < n && highest_t(hi + 1) <= T_LIMIT {
            hi += 1;
            s += lowest(hi).max(0.0).sqrt() * self.h;
            if s > action {
                break;
            }
        }
        let lo = lo.min(first.saturating_sub(1));
        let hi = hi.max((last + 1).min(n - 1));
        if hi < lo + 2 {
            return None;
        }
        Some(Window { lo, hi, m: last.clamp(lo + 1, hi - 1) })
    }

    /// Eigenvalue count below `e` and the smallest |eigenvalue| of the matching pivot.
    pub fn count(&self, e: f64, w: Window) -> (usize, f64) {
        let (d, s) = self.pivots(e, w);
        let mut neg = 0;
        for m in d.iter().chain(s.iter()) {
            neg += negative_count(m);
        }
        let pm = self.matching_pivot(e, w, &d, &s);
        neg += negative_count(&pm);
        let (l0, l1) = sym_eigs(&pm);
        (neg, if l0.abs() < l1.abs() { l0 } else { l1 })
    }

    /// Outward pivots for nodes lo+1..m and inward pivots for m+1..hi, stored by offset.
    fn pivots(&self, e: f64, w: Window) -> (Vec<Matrix2<f64>>, Vec<Matrix2<f64>>) {
        let mut d = Vec::with_capacity(w.m - w.lo);
        let mut inv = Matrix2::zeros();
        for i in w.lo + 1..w.m {
            let p = self.u(i, e) - inv;
            inv = inv2(&p);
            d.push(p);
        }
        let mut s = Vec::with_capacity(w.hi - w.m);
        let mut inv = Matrix2::zeros();
        for i in (w.m + 1..w.hi).rev() {
            let p = self.u(i, e) - inv;
            inv = inv2(&p);
            s.push(p);
        }
        s.reverse();
        (d, s)
    }

    fn matching_pivot(&self, e: f64, w: Window, d: &[Matrix2<f64>], s: &[Matrix2<f64>]) -> Matrix2<f64> {
        let mut pm = self.u(w.m, e);
        if let Some(last) = d.last() {
            pm -= inv2(last);
        }
        if let Some(first) = s.first() {
            pm -= inv2(first);
        }
        pm
    }

    /// Eigenvector (two channel components of phi) at converged `e`.
    pub fn eigenvector(&self, e: f64, w: Window) -> [Vec<f64>; 2] {
        let n = self.a.len();
        let (d, s) = self.pivots(e, w);
        let pm = self.matching_pivot(e, w, &d, &s);
        let eig = SymmetricEigen::new(pm);
        let k = if eig.eigenvalues[0].abs() < eig.eigenvalues[1].abs() { 0 } else { 1 };
        let null = eig.eigenvectors.column(k).into_owned();
        let mut f = vec![nalgebra::Vector2::zeros(); n];
        f[w.m] = null;
        for i in (w.lo + 1..w.m).rev() {
            f[i] = inv2(&d[i - w.lo - 1]) * f[i + 1];
        }
        for i in w.m + 1..w.hi {
            f[i] = inv2(&s[i - w.m - 1]) * f[i - 1];
        }
        let mut out = [vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let phi = inv2(&(Matrix2::identity() - self.t(i, e))) * f[i];
            out[0][i] = phi[0];
            out[1][i] = phi[1];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Particle in a box of unit length, 2m = 1: E_n = (n pi)^2.
    fn box_problem(n: usize) -> ScalarProblem {
        let h = 1.0 / n as f64;
        ScalarProblem { a: vec![0.0; n + 1], b: vec![1.0; n + 1], h }
    }

    #[test]
    fn counts_box_levels() {
        let p = box_problem(400);
        let w = Window { lo: 0, hi: 400, m: 200 };
        let pi2 = std::f64::consts::PI.powi(2);
        assert_eq!(p.count(0.5 * pi2, w).0, 0);
        assert_eq!(p.count(1.5 * pi2, w).0, 1);
        assert_eq!(p.count(5.0 * pi2, w).0, 2);
        assert_eq!(p.count(17.0 * pi2, w).0, 4);
    }

    #[test]
    fn matching_pivot_vanishes_at_eigenvalue() {
        let p = box_problem(800);
        let w = Window { lo: 0, hi: 800, m: 333 };
        let (mut lo, mut hi) = (3.0 * 9.8696, 5.0 * 9.8696);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.count(mid, w).0 >= 2 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let e = 0.5 * (lo + hi);
        assert!((e / (4.0 * std::f64::consts::PI.powi(2)) - 1.0).abs() < 1e-6);
        let phi = p.eigenvector(e, w);
        // sin(2 pi x): node at the middle
        let mid = phi[400] / phi[200];
        assert!(mid.abs() < 1e-6);
    }

    #[test]
    fn coupled_block_reduces_to_two_scalar_problems() {
        let n = 400;
        let h = 1.0 / n as f64;
        let a = vec![Matrix2::new(0.0, 0.0, 0.0, 100.0); n + 1];
        let p = CoupledProblem { a, b: vec![1.0; n + 1], h };
        let w = Window { lo: 0, hi: n, m: 150 };
        let pi2 = std::f64::consts::PI.powi(2);
        // channel 0 levels at k^2 pi^2, channel 1 at k^2 pi^2 + 100
        assert_eq!(p.count(0.5 * pi2, w).0, 0);
        assert_eq!(p.count(pi2 + 1.0, w).0, 1);
        assert_eq!(p.count(4.0 * pi2 + 1.0, w).0, 2);
        assert_eq!(p.count(9.0 * pi2 + 1.0, w).0, 3);
        assert_eq!(p.count(pi2 + 101.0, w).0, 4);
    }

    #[test]
    fn negative_count_cases() {
        assert_eq!(negative_count(&Matrix2::new(-1.0, 0.0, 0.0, -2.0)), 2);
        assert_eq!(negative_count(&Matrix2::new(1.0, 0.0, 0.0, -2.0)), 1);
        assert_eq!(negative_count(&Matrix2::new(1.0, 0.5, 0.5, 2.0)), 0);
        assert_eq!(negative_count(&Matrix2::new(1.0, 2.0, 2.0, 1.0)), 1);
    }
}
