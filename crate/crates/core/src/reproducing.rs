//! The reproducing property on the distinguished boundary.
//!
//! For a single-mode test function `F(z) = g(z1) z2^m` the `θ`-integral over each
//! face keeps only the mode-`m` term of the kernel, so
//!
//! `⟨F, K(·,z)⟩ = (z2^m / 8π) Σ_f e^{m b_f} ∫ g(x + i a_f) I_m(z1 − x + i a_f) dx`
//!
//! summed over the four faces `E1..E4` with their `(a_f, b_f)`. The kernel's
//! boundary values are taken at an inward slack `δ` and extrapolated to `δ = 0`.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{violation, DomainParams, FaceKind, Point};
use crate::error::{Result, SzegoError};
use crate::kernel_terms::{base_integral, TermContext};
use crate::quadrature::{integrate_line, Integrand};
use crate::special::I;

/// Default inward slack for boundary values.
pub const DEFAULT_DELTA_B: f64 = 1e-4;

/// Smallest `|F(z)|` accepted by [`reproduce_check`].
pub const MIN_TEST_VALUE: f64 = 1e-8;

/// Default relative accuracy of the boundary `x`-integrals.
const PAIR_TOL: f64 = 1e-10;

/// `F(z1, z2) = g(z1) z2^m` with `g(ζ) = exp(−(ζ − center)² / (2 width²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub mode: i64,
    pub center: f64,
    pub width: f64,
}

impl TestFunction {
    pub fn new(mode: i64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center.is_finite()) {
            return Err(SzegoError::InvalidPath(format!(
                "test function needs a finite center and a positive width, got ({center}, {width})"
            )));
        }
        Ok(Self { mode, center, width })
    }

    /// Negative powers of `z2` are admissible on the annulus but are not exercised
    /// by the default checks.
    pub fn is_experimental(&self) -> bool {
        self.mode < 0
    }

    pub fn profile(&self, zeta: Complex64) -> Complex64 {
        let d = zeta - self.center;
        (-d * d / (2.0 * self.width * self.width)).exp()
    }

    pub fn eval(&self, p: &Point) -> Complex64 {
        self.profile(p.z1) * p.z2.powi(self.mode as i32)
    }

    /// Bound for `|g(x + iy)|`: `e^{y²/(2s²)} e^{−(x−c)²/(2s²)}`.
    fn line_bound(&self, y: f64) -> f64 {
        (y * y / (2.0 * self.width * self.width)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub value: Complex64,
    /// Contributions of E1, E2, E3, E4 in that order.
    pub per_face: [Complex64; 4],
    pub err_est: f64,
}

const FACES: [FaceKind; 4] = [FaceKind::E1, FaceKind::E2, FaceKind::E3, FaceKind::E4];

fn face_ab(params: &DomainParams, face: FaceKind) -> (f64, f64) {
    let bm = params.b_max();
    match face {
        FaceKind::E1 => (params.beta, bm),
        FaceKind::E2 => (params.beta - PI, bm),
        FaceKind::E3 => (-params.beta, -bm),
        _ => (-(params.beta - PI), -bm),
    }
}

/// One face contribution with the kernel point retreated by `delta`, together with
/// the quadrature error.
fn face_term(
    params: &DomainParams,
    f: &TestFunction,
    z: &Point,
    face: FaceKind,
    delta: f64,
) -> Result<(Complex64, f64)> {
    let (a_f, b_f) = face_ab(params, face);
    let (da, db) = face.inward();
    let (a_k, b_k) = (a_f + delta * da, b_f + delta * db);
    let m = f.mode;
    let weight = (0.5 * m as f64 * (b_f + b_k)).exp();

    // |I_m(τ)| ≤ I_m(i Im τ) bounds the kernel factor along the whole line.
    let im_tau = z.z1.im + a_k;
    let inner_bound = base_integral(&TermContext::from_tau(*params, m, Complex64::new(0.0, im_tau)))?
        .value
        .re
        .abs();
    // e^{−(x−c)²/(2s²)} ≤ e^{s²/2} e^{−|x−c|}.
    let scale = weight * f.line_bound(a_f) * (0.5 * f.width * f.width).exp() * inner_bound;

    let failure: Mutex<Option<SzegoError>> = Mutex::new(None);
    let eval = |x: f64| {
        let tau = z.z1 - x + I * a_k;
        match base_integral(&TermContext::from_tau(*params, m, tau)) {
            Ok(q) => weight * f.profile(Complex64::new(x, a_f)) * q.value,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let osc = a_f.abs() / (f.width * f.width) + 1.0;
    let integrand = Integrand::new(eval, 1.0, scale, osc, vec![f.center, z.z1.re]);
    let q = integrate_line(&integrand, PAIR_TOL * scale);
    drop(integrand);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let q = q?;
    Ok((q.value, q.err_est + params.tol_quad * scale))
}

/// Pairing with the kernel point at slack `delta` on every face.
fn pair_at(params: &DomainParams, f: &TestFunction, z: &Point, delta: f64) -> Result<([Complex64; 4], f64)> {
    let prefactor = z.z2.powi(f.mode as i32) / (8.0 * PI);
    let parts: Vec<(Complex64, f64)> = FACES
        .par_iter()
        .map(|&face| face_term(params, f, z, face, delta))
        .collect::<Result<_>>()?;
    let mut per_face = [Complex64::new(0.0, 0.0); 4];
    let mut err = 0.0;
    for (slot, (v, e)) in per_face.iter_mut().zip(parts) {
        *slot = prefactor * v;
        err += prefactor.norm() * e;
    }
    Ok((per_face, err))
}

/// `⟨F, K(·,z)⟩` over the four faces of the distinguished boundary.
///
/// The value is the linear extrapolation `2P(δ/2) − P(δ)`; a third offset `δ/4`
/// supplies the extrapolation error estimate.
pub fn pair(params: &DomainParams, f: &TestFunction, z: &Point, delta_b: f64) -> Result<PairingResult> {
    if let Some(v) = violation(params, z) {
        return Err(SzegoError::OutsideDomain { violated: v });
    }
    if !(delta_b > 0.0 && delta_b < 0.1) {
        return Err(SzegoError::InvalidTolerance(delta_b));
    }
    let offsets = [delta_b, delta_b / 2.0, delta_b / 4.0];
    let runs: Vec<([Complex64; 4], f64)> = offsets
        .par_iter()
        .map(|&d| pair_at(params, f, z, d))
        .collect::<Result<_>>()?;
    let (p1, e1) = &runs[0];
    let (p2, e2) = &runs[1];
    let (p4, e4) = &runs[2];
    let mut per_face = [Complex64::new(0.0, 0.0); 4];
    let mut fine = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        per_face[k] = 2.0 * p2[k] - p1[k];
        fine += 2.0 * p4[k] - p2[k];
    }
    let value: Complex64 = per_face.iter().sum();
    let extrapolation = 4.0 / 3.0 * (fine - value).norm();
    Ok(PairingResult {
        value,
        per_face,
        err_est: extrapolation + 2.0 * e2 + e1 + e4,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub residual: f64,
    pub err_est: f64,
    pub pairing: PairingResult,
    pub expected: Complex64,
}

/// Relative residual `|⟨F, K(·,z)⟩ − F(z)| / |F(z)|` with its error estimate.
pub fn reproduce_check(params: &DomainParams, f: &TestFunction, z: &Point) -> Result<ReproduceReport> {
    let expected = f.eval(z);
    if expected.norm() < MIN_TEST_VALUE {
        return Err(SzegoError::TestPointDegenerate(expected.norm()));
    }
    let pairing = pair(params, f, z, DEFAULT_DELTA_B)?;
    Ok(ReproduceReport {
        residual: (pairing.value - expected).norm() / expected.norm(),
        err_est: pairing.err_est / expected.norm(),
        pairing,
        expected,
    })
}
