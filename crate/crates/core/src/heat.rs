//! Product Green's function G((z,p),(w,q)) = ∫₀^∞ H_{ℝ²}(z−w, t) H⁰_Y(p,q,t) dt
//! on ℝ² × Tᵈ, with the constant fiber mode removed from the torus heat
//! kernel. The time integral splits at t* = 1: Gaussian image sums carry the
//! small-t regime, eigenmode sums the large-t regime.

use crate::error::{CoreError, Result};
use crate::grid::FiberLattice;

/// 1-D torus heat kernel by Gaussian image sum, accurate for small t.
pub fn torus_heat_images(xi: f64, t: f64, period: f64, shells: usize) -> f64 {
    let norm = 1.0 / (4.0 * std::f64::consts::PI * t).sqrt();
    let mut acc = 0.0;
    for m in -(shells as i64)..=(shells as i64) {
        let d = xi + m as f64 * period;
        acc += (-d * d / (4.0 * t)).exp();
    }
    acc * norm
}

/// 1-D torus heat kernel by eigenmode sum, accurate for large t.
pub fn torus_heat_eigen(xi: f64, t: f64, period: f64, kmax: usize) -> f64 {
    let q = 2.0 * std::f64::consts::PI / period;
    let mut acc = 1.0;
    for k in 1..=kmax {
        let lam = (k as f64 * q).powi(2);
        acc += 2.0 * (-lam * t).exp() * (k as f64 * q * xi).cos();
    }
    acc / period
}

/// Truncation parameters for the product Green's function quadrature.
#[derive(Debug, Clone)]
pub struct ProductGreens {
    pub lattice: FiberLattice,
    /// image-sum radius for t ≤ t_split
    pub image_shells: usize,
    /// eigen-sum cutoff for t > t_split
    pub mode_cutoff: usize,
    pub t_split: f64,
    /// quadrature nodes per unit of log t (doubled internally until settled)
    pub base_resolution: usize,
}

impl ProductGreens {
    pub fn new(lattice: FiberLattice) -> Self {
        // 6 image shells leave an error below e^{−36π²/4} at t = 1
        Self { lattice, image_shells: 6, mode_cutoff: 8, t_split: 1.0, base_resolution: 48 }
    }

    /// Fiber heat kernel minus the constant mode, as a product over the
    /// torus directions; `small_t` selects image sums vs eigen sums.
    pub fn fiber_kernel(&self, dp: [f64; 2], t: f64, small_t: bool) -> f64 {
        let l = self.lattice.period;
        let mut h = 1.0;
        for i in 0..self.lattice.dimension {
            h *= if small_t {
                torus_heat_images(dp[i], t, l, self.image_shells)
            } else {
                torus_heat_eigen(dp[i], t, l, self.mode_cutoff)
            };
        }
        h - 1.0 / self.lattice.volume()
    }

    /// Consistency of the two kernel representations at the splitting time.
    pub fn split_consistency(&self, dp: [f64; 2]) -> f64 {
        let a = self.fiber_kernel(dp, self.t_split, true);
        let b = self.fiber_kernel(dp, self.t_split, false);
        (a - b).abs()
    }

    /// G((z,p),(0,q)) for base separation |z| and fiber points p, q.
    /// Relative accuracy 1e−6 by resolution doubling.
    pub fn green_function(&self, z: f64, p: [f64; 2], q: [f64; 2]) -> Result<f64> {
        let dp = [p[0] - q[0], p[1] - q[1]];
        let dist2 = z * z + dp[0] * dp[0] + dp[1] * dp[1];
        if dist2 < 1e-28 {
            return Err(CoreError::CoincidentPoints);
        }
        let mut res = self.base_resolution;
        let mut prev = f64::NAN;
        for _ in 0..8 {
            let val = self.integrate(z, dp, res);
            if prev.is_finite() && (val - prev).abs() <= 1e-6 * val.abs().max(1e-300) {
                return Ok(val);
            }
            prev = val;
            res *= 2;
        }
        Ok(prev)
    }

    fn integrate(&self, z: f64, dp: [f64; 2], res: usize) -> f64 {
        let base = |t: f64| {
            if z == 0.0 {
                1.0 / (4.0 * std::f64::consts::PI * t)
            } else {
                (-z * z / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t)
            }
        };
        // small t: integrate in τ = log t from where the integrand underflows
        let tau_lo = if z > 0.0 {
            (z * z / (4.0 * 745.0)).ln().min(-3.0)
        } else {
            // pure fiber separation: fiber kernel underflows below this
            let d = (dp[0] * dp[0] + dp[1] * dp[1]).max(1e-28);
            (d / (4.0 * 745.0)).ln().min(-24.0)
        };
        let tau_hi = self.t_split.ln();
        let n1 = ((tau_hi - tau_lo) * res as f64).ceil() as usize;
        let mut acc = 0.0;
        let d1 = (tau_hi - tau_lo) / n1 as f64;
        for j in 0..=n1 {
            let w = if j == 0 || j == n1 { 0.5 } else { 1.0 };
            let t = (tau_lo + j as f64 * d1).exp();
            acc += w * base(t) * self.fiber_kernel(dp, t, true) * t;
        }
        let mut total = acc * d1;
        // large t: fiber kernel decays like e^{−λ₁ t}
        let lam1 = self.lattice.lambda_1();
        let tau_end = (745.0 / lam1).ln().max(tau_hi + 1.0);
        let n2 = ((tau_end - tau_hi) * res as f64).ceil() as usize;
        let d2 = (tau_end - tau_hi) / n2 as f64;
        let mut acc2 = 0.0;
        for j in 0..=n2 {
            let w = if j == 0 || j == n2 { 0.5 } else { 1.0 };
            let t = (tau_hi + j as f64 * d2).exp();
            acc2 += w * base(t) * self.fiber_kernel(dp, t, false) * t;
        }
        total += acc2 * d2;
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lattice() -> FiberLattice {
        FiberLattice::new(2, 2.0 * std::f64::consts::PI, 4).unwrap()
    }

    #[test]
    fn image_and_eigen_sums_agree_at_split() {
        let g = ProductGreens::new(lattice());
        for dp in [[0.0, 0.0], [1.0, 2.0], [3.1, 0.4]] {
            let dev = g.split_consistency(dp);
            assert!(dev < 1e-8, "split mismatch {dev:.3e} at {dp:?}");
        }
    }

    #[test]
    fn fiber_symmetry() {
        let g = ProductGreens::new(lattice());
        let p = [0.7, 1.9];
        let q = [2.4, 0.3];
        let a = g.green_function(3.0, p, q).unwrap();
        let b = g.green_function(3.0, q, p).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn coincident_points_rejected() {
        let g = ProductGreens::new(lattice());
        assert!(matches!(
            g.green_function(0.0, [0.1, 0.2], [0.1, 0.2]),
            Err(CoreError::CoincidentPoints)
        ));
    }

    #[test]
    fn long_distance_bound() {
        // |G| / (e^{−√λ₁ z}/√z) bounded over z ∈ [5, 20] (λ₁ = 1 here)
        let g = ProductGreens::new(lattice());
        let p = [0.3, 0.8];
        let q = [1.1, 2.0];
        let mut cmax = 0.0f64;
        let mut cmin = f64::INFINITY;
        for j in 0..=15 {
            let z = 5.0 + j as f64;
            let val = g.green_function(z, p, q).unwrap().abs();
            let env = (-z).exp() / z.sqrt();
            let ratio = val / env;
            cmax = cmax.max(ratio);
            cmin = cmin.min(ratio);
        }
        assert!(cmax.is_finite() && cmax > 0.0);
        assert!(cmax < 10.0, "bound constant {cmax}");
    }

    #[test]
    fn short_distance_blowup_rate() {
        // 4 real dimensions: d^{n−2} |G| = d² |G| stays bounded as d → 1e−2
        let g = ProductGreens::new(lattice());
        let p = [0.5, 0.5];
        let mut ratios = Vec::new();
        for &d in &[0.3, 0.1, 0.03, 0.01] {
            let val = g.green_function(d, p, p).unwrap();
            ratios.push(val * d * d);
        }
        for r in &ratios {
            assert!(r.is_finite() && *r > 0.0);
        }
        let spread = ratios.iter().cloned().fold(0.0, f64::max)
            / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 3.0, "d²·G ratios not stable: {ratios:?}");
    }
}
