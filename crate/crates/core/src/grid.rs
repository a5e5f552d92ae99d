//! Radial grids uniform in the mapped coordinate x = r + beta ln r.
//!
//! The map packs points against the repulsive wall and relaxes to a linear
//! spacing in the tail. With beta = 0 the grid is uniform in r. The radial
//! equation u'' = Q u transforms to phi'' = Qt phi with u = sqrt(g') phi,
//! g' = dr/dx, and Qt = g'^2 Q + S where S is the Liouville correction.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub beta: f64,
    /// Step in the mapped coordinate.
    pub h: f64,
    pub r: Vec<f64>,
    /// dr/dx at each node.
    pub jac: Vec<f64>,
    /// Liouville correction S(x) at each node.
    pub liouville: Vec<f64>,
}

fn map(r: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        r
    } else {
        r + beta * r.ln()
    }
}

fn unmap(x: f64, beta: f64, guess: f64) -> f64 {
    if beta == 0.0 {
        return x;
    }
    let mut r = guess.max(1e-12);
    for _ in 0..100 {
        let f = r + beta * r.ln() - x;
        let step = f / (1.0 + beta / r);
        let mut next = r - step;
        if next <= 0.0 {
            next = 0.5 * r;
        }
        if (next - r).abs() <= 1e-15 * r {
            return next;
        }
        r = next;
    }
    r
}

impl RadialGrid {
    /// Grid from `r_start` to `r_end` with mapped step no larger than `h_max`.
    pub fn new(r_start: f64, r_end: f64, beta: f64, h_max: f64) -> Result<Self> {
        if !(r_end > r_start) || !(h_max > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bad grid request [{r_start}, {r_end}] with step {h_max}"
            )));
        }
        if beta < 0.0 || (beta > 0.0 && r_start <= 0.0) {
            return Err(Error::InvalidInput("mapped grid needs beta >= 0 and r_start > 0".into()));
        }
        let (x0, x1) = (map(r_start, beta), map(r_end, beta));
        let n = ((x1 - x0) / h_max).ceil().max(2.0) as usize;
        Ok(Self::with_intervals(r_start, r_end, beta, n))
    }

    pub fn with_intervals(r_start: f64, r_end: f64, beta: f64, n: usize) -> Self {
        let (x0, x1) = (map(r_start, beta), map(r_end, beta));
        let h = (x1 - x0) / n as f64;
        let mut r = Vec::with_capacity(n + 1);
        let mut guess = r_start;
        for i in 0..=n {
            let ri = if i == 0 {
                r_start
            } else if i == n {
                r_end
            } else {
                unmap(x0 + h * i as f64, beta, guess)
            };
            guess = ri;
            r.push(ri);
        }
        let jac = r.iter().map(|&ri| if beta == 0.0 { 1.0 } else { ri / (ri + beta) }).collect();
        let liouville = r
            .iter()
            .map(|&ri| {
                if beta == 0.0 {
                    0.0
                } else {
                    let s = ri + beta;
                    beta * (0.25 * beta + ri) / (s * s * s * s)
                }
            })
            .collect();
        Self { beta, h, r, jac, liouville }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.r.len() - 1
    }

    /// Same end points, `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Self {
        Self::with_intervals(self.r[0], *self.r.last().unwrap(), self.beta, self.intervals() * factor)
    }

    /// Trapezoid weights for integrals over r (end weights halved).
    pub fn weights(&self) -> Vec<f64> {
        let n = self.len();
        let mut w: Vec<f64> = self.jac.iter().map(|g| self.h * g).collect();
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
        w
    }

    /// Index of the node nearest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        match self.r.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.len() => self.len() - 1,
            Err(i) => {
                if r - self.r[i - 1] < self.r[i] - r {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_when_beta_zero() {
        let g = RadialGrid::new(0.0, 10.0, 0.0, 0.1).unwrap();
        assert_eq!(g.intervals(), 100);
        assert!((g.r[37] - 3.7).abs() < 1e-12);
        assert!(g.liouville.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn mapped_grid_inverts_map() {
        let g = RadialGrid::new(5.0, 5000.0, 200.0, 0.2).unwrap();
        let x0 = map(5.0, 200.0);
        for i in [1, 10, 100, g.intervals() - 1] {
            assert!((map(g.r[i], 200.0) - (x0 + g.h * i as f64)).abs() < 1e-9);
        }
        // spacing grows outward
        assert!(g.r[2] - g.r[1] < g.r[g.len() - 1] - g.r[g.len() - 2]);
    }

    #[test]
    fn weights_integrate_smooth_functions() {
        let g = RadialGrid::new(1.0, 40.0, 30.0, 0.01).unwrap();
        let w = g.weights();
        let s: f64 = g.r.iter().zip(&w).map(|(r, w)| (-(r - 10.0) * (r - 10.0)).exp() * w).sum();
        assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn liouville_term_matches_finite_difference() {
        // S = 3/4 (g''/g')^2 - 1/2 g'''/g' with derivatives in x.
        let beta = 50.0;
        let g = RadialGrid::new(2.0, 400.0, beta, 0.001).unwrap();
        let i = 3000; // O(h^2) difference error
        let h = g.h;
        let d1 = |k: usize| (g.jac[k + 1] - g.jac[k - 1]) / (2.0 * h);
        let gpp = d1(i);
        let gppp = (g.jac[i + 1] - 2.0 * g.jac[i] + g.jac[i - 1]) / (h * h);
        let s = 0.75 * (gpp / g.jac[i]).powi(2) - 0.5 * gppp / g.jac[i];
        assert!((s - g.liouville[i]).abs() < 1e-5 * g.liouville[i].abs(), "{s} vs {}", g.liouville[i]);
    }
}
