//! Modified Bessel functions I₀ and K₀ by exponentially convergent trapezoid
//! rules on their integral representations:
//!
//!     I₀(x) = (1/π) ∫₀^π e^{x cos θ} dθ,
//!     K₀(x) = ∫₀^∞ e^{−x cosh u} du.
//!
//! Both integrands are smooth and (even-)periodic or doubly-exponentially
//! decaying, so plain trapezoid sums converge spectrally. These evaluators
//! serve as independent oracles for the screened-kernel quadrature and the
//! convolution checks; the production solvers never call them.

/// Scaled e^{−x} I₀(x), stable for large arguments.
pub fn i0_scaled(x: f64) -> f64 {
    let n = 400;
    let dth = std::f64::consts::PI / n as f64;
    let mut acc = 0.0;
    for j in 0..=n {
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        let th = j as f64 * dth;
        acc += w * (-x * (1.0 - th.cos())).exp();
    }
    acc * dth / std::f64::consts::PI
}

pub fn i0(x: f64) -> f64 {
    i0_scaled(x) * x.exp()
}

/// Scaled e^{x} K₀(x); requires x > 0.
pub fn k0_scaled(x: f64) -> f64 {
    let du = 0.05;
    let mut acc = 0.5; // j = 0 term: e^{-x(cosh 0 - 1)} = 1, half weight
    let mut j = 1;
    loop {
        let u = j as f64 * du;
        let term = (-x * (u.cosh() - 1.0)).exp();
        acc += term;
        if term < 1e-18 && u > 1.0 {
            break;
        }
        j += 1;
        if j > 100_000 {
            break;
        }
    }
    acc * du
}

pub fn k0(x: f64) -> f64 {
    if x > 700.0 {
        return 0.0;
    }
    k0_scaled(x) * (-x).exp()
}
