//! Independent oracles for the integration tests.
//!
//! * `dual_kernel`: Poisson-resummed form of the kernel series,
//!   `K = (1/4c) Σ_m sec(π(L + 2πim)/c) · sec(iτ/2 + L + 2πim)` with `L = log λ`,
//!   whose terms decay geometrically in `m` and share no code with the crate.
//! * `trapezoid_mode`: fixed-step trapezoid rule for the mode integrals.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

fn sec(z: Complex64) -> Complex64 {
    if z.im.abs() > 700.0 {
        return Complex64::new(0.0, 0.0);
    }
    1.0 / z.cos()
}

fn tan(z: Complex64) -> Complex64 {
    if z.im.abs() > 40.0 {
        return Complex64::new(0.0, z.im.signum());
    }
    z.sin() / z.cos()
}

fn m_range(tau: Complex64, lam: Complex64) -> (i64, i64) {
    let arg = lam.arg();
    let lo = (0.0f64).min(-tau.re / 2.0) - arg - 200.0;
    let hi = (0.0f64).max(-tau.re / 2.0) - arg + 200.0;
    ((lo / (2.0 * PI)).floor() as i64, (hi / (2.0 * PI)).ceil() as i64)
}

/// Returns `(K, ∂K/∂τ, ∂K/∂L)`.
pub fn dual_kernel_full(beta: f64, tau: Complex64, lam: Complex64) -> (Complex64, Complex64, Complex64) {
    let c = 2.0 * beta - PI;
    let i = Complex64::new(0.0, 1.0);
    let l = lam.ln();
    let (m0, m1) = m_range(tau, lam);
    let mut k = Complex64::new(0.0, 0.0);
    let mut dt = Complex64::new(0.0, 0.0);
    let mut dl = Complex64::new(0.0, 0.0);
    for m in m0..=m1 {
        let x = l + 2.0 * PI * i * m as f64;
        let a = PI * x / c;
        let b = i * tau / 2.0 + x;
        let (sa, sb) = (sec(a), sec(b));
        let t = sa * sb;
        k += t;
        dt += t * tan(b) * i / 2.0;
        dl += t * (tan(a) * PI / c + tan(b));
    }
    let s = 1.0 / (4.0 * c);
    (k * s, dt * s, dl * s)
}

pub fn dual_kernel(beta: f64, tau: Complex64, lam: Complex64) -> Complex64 {
    dual_kernel_full(beta, tau, lam).0
}

/// `∫ w(ξ) e^{iτξ} / (cosh(πξ) cosh(c(ξ + i·shift − j/2)))` by the trapezoid rule with
/// step `step` on the kink hull widened by `pad`.
pub fn trapezoid_mode(beta: f64, j: i64, tau: Complex64, shift: f64, step: f64, pad: f64) -> Complex64 {
    let c = 2.0 * beta - PI;
    let i = Complex64::new(0.0, 1.0);
    let hj = j as f64 / 2.0;
    let lo = hj.min(0.0) - pad;
    let hi = hj.max(0.0) + pad;
    let n = ((hi - lo) / step).ceil() as usize;
    let h = (hi - lo) / n as f64;
    let g = |x: f64| {
        let z = Complex64::new(x, shift);
        (i * tau * z - log_cosh(PI * z) - log_cosh(c * (z - hj))).exp()
    };
    let mut acc = (g(lo) + g(hi)) * 0.5;
    for k in 1..n {
        acc += g(lo + k as f64 * h);
    }
    acc * h
}

fn log_cosh(w: Complex64) -> Complex64 {
    let s = if w.re >= 0.0 { 1.0 } else { -1.0 };
    s * w + ((1.0 + (-2.0 * s * w).exp()) / 2.0).ln()
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
