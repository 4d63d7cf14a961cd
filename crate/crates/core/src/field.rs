//! Real-space and spectral fields on the model end (annulus × torus).
//!
//! A `GridField` holds complex samples over (r_j, θ_m, x_p) with uniform θ and
//! torus nodes; `to_spectral` runs an exact DFT in the periodic directions per
//! radial node, producing one radial `ModeProfile` per retained (n, k).

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::{Array4, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};
use crate::grid::{FiberLattice, RadialGrid};

/// Radial profile of one Fourier mode: angular index n, fiber multi-index k.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    pub n: i32,
    pub k: [i32; 2],
    pub values: Vec<Complex64>,
}

impl ModeProfile {
    pub fn zeros(n: i32, k: [i32; 2], len: usize) -> Self {
        Self { n, k, values: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Complex samples over the product grid, row-major in (r, θ, x₁, x₂).
///
/// A one-dimensional fiber is stored with a single x₂ node; plane-only
/// problems use a single node in both fiber directions.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: RadialGrid,
    pub lattice: FiberLattice,
    pub data: Array4<Complex64>,
}

fn is_pow2(n: usize) -> bool {
    n.is_power_of_two()
}

impl GridField {
    pub fn zeros(
        grid: RadialGrid,
        lattice: FiberLattice,
        n_theta: usize,
        n_x: [usize; 2],
    ) -> Result<Self> {
        if !is_pow2(n_theta) {
            return Err(CoreError::NotPowerOfTwo(n_theta, "theta"));
        }
        for (i, &nx) in n_x.iter().enumerate() {
            if !is_pow2(nx) {
                return Err(CoreError::NotPowerOfTwo(nx, if i == 0 { "x1" } else { "x2" }));
            }
        }
        if lattice.dimension == 1 && n_x[1] != 1 {
            return Err(CoreError::DimensionMismatch(
                "1-d fiber must have a single x2 node".into(),
            ));
        }
        let data = Array4::zeros((grid.count, n_theta, n_x[0], n_x[1]));
        Ok(Self { grid, lattice, data })
    }

    pub fn from_fn(
        grid: RadialGrid,
        lattice: FiberLattice,
        n_theta: usize,
        n_x: [usize; 2],
        f: impl Fn(f64, f64, f64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, lattice, n_theta, n_x)?;
        let (thetas, xs1, xs2) = out.periodic_nodes();
        for j in 0..out.grid.count {
            let r = out.grid.r(j);
            for (m, &th) in thetas.iter().enumerate() {
                for (p, &x1) in xs1.iter().enumerate() {
                    for (q, &x2) in xs2.iter().enumerate() {
                        out.data[[j, m, p, q]] = f(r, th, x1, x2);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        let s = self.data.dim();
        (s.0, s.1, s.2, s.3)
    }

    pub fn periodic_nodes(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (_, nt, n1, n2) = self.shape();
        let tau = 2.0 * std::f64::consts::PI;
        let thetas = (0..nt).map(|m| tau * m as f64 / nt as f64).collect();
        let l = self.lattice.period;
        let xs1 = (0..n1).map(|p| l * p as f64 / n1 as f64).collect();
        let xs2 = (0..n2).map(|q| l * q as f64 / n2 as f64).collect();
        (thetas, xs1, xs2)
    }

    /// Fiber mean per (r, θ) node, broadcast back over the fiber.
    /// The remainder f − fiber_average(f) is fiberwise mean-zero by construction.
    pub fn fiber_average(&self) -> GridField {
        let (nr, nt, n1, n2) = self.shape();
        let mut out = self.clone();
        let inv = 1.0 / (n1 * n2) as f64;
        for j in 0..nr {
            for m in 0..nt {
                let mut s = Complex64::new(0.0, 0.0);
                for p in 0..n1 {
                    for q in 0..n2 {
                        s += self.data[[j, m, p, q]];
                    }
                }
                s *= inv;
                for p in 0..n1 {
                    for q in 0..n2 {
                        out.data[[j, m, p, q]] = s;
                    }
                }
            }
        }
        out
    }

    /// Grid L² norm squared: ∫ |f|² r dr dθ dvol_fiber with trapezoid radial
    /// weights and exact periodic quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        let (nr, nt, n1, n2) = self.shape();
        let w = self.grid.area_weights();
        let cell = (2.0 * std::f64::consts::PI / nt as f64)
            * (self.lattice.volume() / (n1 * n2) as f64);
        let mut total = 0.0;
        for j in 0..nr {
            let mut s = 0.0;
            for m in 0..nt {
                for p in 0..n1 {
                    for q in 0..n2 {
                        s += self.data[[j, m, p, q]].norm_sqr();
                    }
                }
            }
            total += w[j] * s * cell;
        }
        total
    }

    /// Radial sup profile: max |f| over each r-slice.
    pub fn sup_profile(&self) -> Vec<f64> {
        self.data
            .axis_iter(Axis(0))
            .map(|slice| slice.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .collect()
    }

    pub fn sup(&self) -> f64 {
        self.sup_profile().into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> GridField {
        let mut out = self.clone();
        out.data.mapv_inplace(|v| v * c);
        out
    }

    pub fn add(&self, other: &GridField) -> GridField {
        let mut out = self.clone();
        out.data += &other.data;
        out
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        let mut out = self.clone();
        out.data -= &other.data;
        out
    }
}

/// Band-limited spectral representation: map (n, k) → radial profile.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: RadialGrid,
    pub lattice: FiberLattice,
    pub angular_cutoff: usize,
    pub profiles: BTreeMap<(i32, i32, i32), ModeProfile>,
}

impl SpectralField {
    pub fn empty(grid: RadialGrid, lattice: FiberLattice, angular_cutoff: usize) -> Self {
        Self { grid, lattice, angular_cutoff, profiles: BTreeMap::new() }
    }

    pub fn insert(&mut self, p: ModeProfile) -> Result<()> {
        if p.values.len() != self.grid.count {
            return Err(CoreError::DimensionMismatch(format!(
                "profile length {} != grid count {}",
                p.values.len(),
                self.grid.count
            )));
        }
        if p.n.unsigned_abs() as usize > self.angular_cutoff
            || p.k[0].unsigned_abs() as usize > self.lattice.mode_cutoff
            || p.k[1].unsigned_abs() as usize > self.lattice.mode_cutoff
        {
            return Err(CoreError::DimensionMismatch(format!(
                "mode (n={}, k={:?}) outside cutoffs (N={}, K={})",
                p.n, p.k, self.angular_cutoff, self.lattice.mode_cutoff
            )));
        }
        if !p.is_finite() {
            return Err(CoreError::Invalid("non-finite profile entries".into()));
        }
        self.profiles.insert((p.n, p.k[0], p.k[1]), p);
        Ok(())
    }

    pub fn get(&self, n: i32, k: [i32; 2]) -> Option<&ModeProfile> {
        self.profiles.get(&(n, k[0], k[1]))
    }

    /// Σ |c_{n,k}(r_j)|² weighted by annulus areas — the spectral side of Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.grid.area_weights();
        let tau = 2.0 * std::f64::consts::PI;
        let fiber_vol = self.lattice.volume();
        let mut total = 0.0;
        for p in self.profiles.values() {
            for (j, v) in p.values.iter().enumerate() {
                total += w[j] * v.norm_sqr();
            }
        }
        total * tau * fiber_vol
    }
}

struct FftSet {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn plan(planner: &mut FftPlanner<f64>, n: usize) -> FftSet {
    FftSet { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
}

fn fft_axis(data: &mut Array4<Complex64>, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = data.shape()[axis];
    if n == 1 {
        return;
    }
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for mut lane in data.lanes_mut(Axis(axis)) {
        for (i, v) in lane.iter().enumerate() {
            scratch[i] = *v;
        }
        fft.process(&mut scratch);
        for (i, v) in lane.iter_mut().enumerate() {
            *v = scratch[i];
        }
    }
}

/// DFT bin for signed frequency m on an axis of length n.
fn bin(m: i32, n: usize) -> usize {
    m.rem_euclid(n as i32) as usize
}

/// Forward transform: exact DFT in θ and the torus directions per radial node.
///
/// Requires Nyquist headroom: the θ count must be at least 2N + 2 and each
/// torus count at least 2K + 1 for the declared cutoffs.
pub fn to_spectral(f: &GridField, angular_cutoff: usize) -> Result<SpectralField> {
    let (_, nt, n1, n2) = f.shape();
    if nt < 2 * angular_cutoff + 2 {
        return Err(CoreError::DimensionMismatch(format!(
            "theta count {nt} < 2N+2 = {}",
            2 * angular_cutoff + 2
        )));
    }
    let kc = f.lattice.mode_cutoff;
    if n1 < 2 * kc + 1 || (f.lattice.dimension == 2 && n2 < 2 * kc + 1) {
        return Err(CoreError::DimensionMismatch(format!(
            "fiber counts {n1}x{n2} below Nyquist for K = {kc}"
        )));
    }

    let mut planner = FftPlanner::new();
    let ffts = [plan(&mut planner, nt), plan(&mut planner, n1), plan(&mut planner, n2)];
    let mut work = f.data.clone();
    for (ax, set) in ffts.iter().enumerate() {
        fft_axis(&mut work, ax + 1, &set.fwd);
    }
    let norm = 1.0 / (nt * n1 * n2) as f64;

    let mut out = SpectralField::empty(f.grid.clone(), f.lattice.clone(), angular_cutoff);
    let nmax = angular_cutoff as i32;
    let kmax = kc as i32;
    let k2_range: Vec<i32> =
        if f.lattice.dimension == 2 { (-kmax..=kmax).collect() } else { vec![0] };
    for n in -nmax..=nmax {
        for k1 in -kmax..=kmax {
            for &k2 in &k2_range {
                let (bm, b1, b2) = (bin(n, nt), bin(k1, n1), bin(k2, n2));
                let mut prof = ModeProfile::zeros(n, [k1, k2], f.grid.count);
                for j in 0..f.grid.count {
                    prof.values[j] = work[[j, bm, b1, b2]] * norm;
                }
                out.insert(prof)?;
            }
        }
    }
    Ok(out)
}

/// Inverse of `to_spectral`: fill the spectrum and run inverse DFTs.
pub fn to_grid(spec: &SpectralField, n_theta: usize, n_x: [usize; 2]) -> Result<GridField> {
    let mut f = GridField::zeros(spec.grid.clone(), spec.lattice.clone(), n_theta, n_x)?;
    let (_, nt, n1, n2) = f.shape();
    for prof in spec.profiles.values() {
        let (bm, b1, b2) = (bin(prof.n, nt), bin(prof.k[0], n1), bin(prof.k[1], n2));
        for j in 0..f.grid.count {
            f.data[[j, bm, b1, b2]] += prof.values[j];
        }
    }
    let mut planner = FftPlanner::new();
    let ffts = [plan(&mut planner, nt), plan(&mut planner, n1), plan(&mut planner, n2)];
    for (ax, set) in ffts.iter().enumerate() {
        fft_axis(&mut f.data, ax + 1, &set.inv);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> (RadialGrid, FiberLattice) {
        let g = RadialGrid::new(1.0, 200.0, 32).unwrap();
        let lat = FiberLattice::new(2, 2.0 * std::f64::consts::PI, 2).unwrap();
        (g, lat)
    }

    fn random_bandlimited(seed: u64, n: usize) -> (SpectralField, GridField) {
        let (g, lat) = small_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = SpectralField::empty(g.clone(), lat.clone(), n);
        let kmax = lat.mode_cutoff as i32;
        for nn in -(n as i32)..=(n as i32) {
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    let mut p = ModeProfile::zeros(nn, [k1, k2], g.count);
                    for v in p.values.iter_mut() {
                        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                    spec.insert(p).unwrap();
                }
            }
        }
        let f = to_grid(&spec, 16, [8, 8]).unwrap();
        (spec, f)
    }

    #[test]
    fn constant_field_is_pure_zero_mode() {
        let (g, lat) = small_grid();
        let f = GridField::from_fn(g, lat, 16, [8, 8], |_, _, _, _| Complex64::new(1.0, 0.0))
            .unwrap();
        let spec = to_spectral(&f, 3).unwrap();
        for ((n, k1, k2), p) in &spec.profiles {
            let sup = p.sup();
            if (*n, *k1, *k2) == (0, 0, 0) {
                for v in &p.values {
                    assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
                    assert!(v.im.abs() < 1e-12);
                }
            } else {
                assert!(sup < 1e-12, "leak into mode ({n},{k1},{k2}): {sup}");
            }
        }
    }

    #[test]
    fn single_angular_mode_lands_in_one_profile() {
        let (g, lat) = small_grid();
        let f = GridField::from_fn(g, lat, 16, [8, 8], |r, th, _, _| {
            Complex64::from_polar(1.0 / r, th)
        })
        .unwrap();
        let spec = to_spectral(&f, 3).unwrap();
        let p = spec.get(1, [0, 0]).unwrap();
        for (j, v) in p.values.iter().enumerate() {
            assert_relative_eq!(v.re, 1.0 / spec.grid.r(j), epsilon = 1e-12);
        }
        for ((n, k1, k2), p) in &spec.profiles {
            if (*n, *k1, *k2) != (1, 0, 0) {
                assert!(p.sup() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval_on_random_fields() {
        for seed in 0..100u64 {
            let (spec, f) = random_bandlimited(seed, 3);
            let back = to_spectral(&f, 3).unwrap();
            for (key, p) in &spec.profiles {
                let q = back.get(p.n, p.k).unwrap();
                for j in 0..p.values.len() {
                    let d = (p.values[j] - q.values[j]).norm();
                    assert!(d < 1e-10, "mode {key:?} node {j}: {d}");
                }
            }
            let a = f.l2_norm_sq();
            let b = spec.l2_norm_sq();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn round_trip_grid_side() {
        let (_, f) = random_bandlimited(7, 3);
        let back = to_grid(&to_spectral(&f, 3).unwrap(), 16, [8, 8]).unwrap();
        let err = f.sub(&back).sup();
        let scale = f.sup();
        assert!(err / scale < 1e-10, "round trip error {err}");
    }

    #[test]
    fn fiber_average_kills_oscillation() {
        let (g, lat) = small_grid();
        let f = GridField::from_fn(g, lat, 16, [8, 8], |r, _, x1, _| {
            Complex64::new(x1.sin() / r, 0.0)
        })
        .unwrap();
        assert!(f.fiber_average().sup() < 1e-12);

        let three =
            GridField::from_fn(f.grid.clone(), f.lattice.clone(), 16, [8, 8], |_, _, _, _| {
                Complex64::new(3.0, 0.0)
            })
            .unwrap();
        assert!((three.fiber_average().sup() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fiber_remainder_is_mean_zero() {
        let (_, f) = random_bandlimited(11, 2);
        let rem = f.sub(&f.fiber_average());
        let avg = rem.fiber_average();
        assert!(avg.sup() < 1e-12);
    }

    #[test]
    fn nyquist_violation_is_reported() {
        let (g, lat) = small_grid();
        let f = GridField::zeros(g, lat, 4, [8, 8]).unwrap();
        assert!(to_spectral(&f, 3).is_err());
    }

    #[test]
    fn non_power_of_two_rejected() {
        let (g, lat) = small_grid();
        assert!(GridField::zeros(g, lat, 12, [8, 8]).is_err());
    }
}
