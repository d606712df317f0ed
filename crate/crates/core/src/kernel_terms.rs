//! Per-mode quantities of the kernel series and their closed-form sums.
//!
//! For `g_j(ζ) = e^{iτζ} / (cosh(πζ) cosh(c(ζ − j/2)))`, `c = 2β − π`:
//!
//! * `I_j = ∫ g_j(ξ) dξ` is the mode-`j` coefficient of the kernel;
//! * shifting the line to `Im ζ = ±h` captures the single pole at `j/2 ± iν/2`,
//!   giving `I_j = R_j + J_j`;
//! * `J_j = 4 e^{∓τh} (M_j − E¹_j − E²_j + E³_j)` splits the shifted integral into
//!   an elementary part and three exponentially small corrections.
//!
//! The upper sign applies when `Re τ ≥ 0`, the lower one otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainParams, TauLambda};
use crate::error::{Result, SzegoError};
use crate::quadrature::{integrate_line, Integrand, QuadResult};
use crate::special::{cosh_floor, exprel_half, ln_cosh, logistic_tail, sgn, I};

/// Branch of the contour shift: upward for `Re τ ≥ 0`, downward otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(re_tau: f64) -> Self {
        if sgn(re_tau) > 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermContext {
    pub params: DomainParams,
    pub j: i64,
    pub tl: TauLambda,
    pub sign: Sign,
}

impl TermContext {
    pub fn new(params: DomainParams, j: i64, tl: TauLambda) -> Self {
        Self {
            params,
            j,
            tl,
            sign: Sign::of(tl.tau.re),
        }
    }

    /// Context for a bare `τ`; `λ` is set to 1.
    pub fn from_tau(params: DomainParams, j: i64, tau: Complex64) -> Self {
        Self::new(params, j, TauLambda::new(&params, tau, Complex64::new(1.0, 0.0)))
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    fn h_signed(&self) -> f64 {
        self.sign.value() * self.params.h
    }

    fn nu_signed(&self) -> f64 {
        self.sign.value() * self.params.nu
    }
}

/// Extra polynomial weight inserted into a line integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weight {
    One,
    /// `iζ`, the `τ`-derivative of `e^{iτζ}`.
    IZeta,
}

/// `∫ w(ζ) e^{L} g_j(ζ) dξ` over `ζ = ξ + i·shift`, with a constant log-weight `L`
/// folded into the exponent so that `λ^j`-scaled terms never overflow.
pub(crate) fn line_integral(
    params: &DomainParams,
    j: i64,
    tau: Complex64,
    shift: f64,
    log_weight: Complex64,
    weight: Weight,
) -> Result<QuadResult> {
    let c = params.c();
    let half_j = j as f64 / 2.0;
    let a = 2.0 * params.beta - tau.im.abs();
    if !(a > 0.0) {
        return Err(SzegoError::NoDecay(a));
    }
    let phi = |x: f64| -tau.im * x - PI * x.abs() - c * (x - half_j).abs();
    let (k0, k1) = (half_j.min(0.0), half_j.max(0.0));
    let m = cosh_floor(PI * shift) * cosh_floor(c * shift);
    let mut log_scale = log_weight.re - tau.re * shift + (4.0 / m).ln() + phi(k0).max(phi(k1));
    let mut decay = a;
    if weight == Weight::IZeta {
        let r = k0.abs().max(k1.abs()) + shift.abs();
        log_scale += (r + 2.0 / (a * std::f64::consts::E)).ln();
        decay = a / 2.0;
    }
    let scale = log_scale.exp();
    let f = move |x: f64| {
        let zeta = Complex64::new(x, shift);
        let e = (log_weight + I * tau * zeta - ln_cosh(PI * zeta) - ln_cosh(c * (zeta - half_j))).exp();
        match weight {
            Weight::One => e,
            Weight::IZeta => I * zeta * e,
        }
    };
    let kinks = if j == 0 { vec![0.0] } else { vec![k0, k1] };
    let integrand = Integrand::new(f, decay, scale, tau.re.abs(), kinks);
    // Tolerance relative to the envelope's L¹ mass, the floor for double-precision cancellation.
    let mass = scale * (k1 - k0 + 2.0 / decay);
    integrate_line(&integrand, params.tol_quad * mass)
}

/// `I_j(τ) = ∫ e^{iτξ} / (cosh(πξ) cosh(c(ξ − j/2))) dξ`.
pub fn base_integral(ctx: &TermContext) -> Result<QuadResult> {
    line_integral(&ctx.params, ctx.j, ctx.tl.tau, 0.0, Complex64::new(0.0, 0.0), Weight::One)
}

/// `J_j(τ) = ∫ g_j(ξ ± ih) dξ`, shifted past the first pole row.
pub fn shifted_integral(ctx: &TermContext) -> Result<QuadResult> {
    line_integral(
        &ctx.params,
        ctx.j,
        ctx.tl.tau,
        ctx.h_signed(),
        Complex64::new(0.0, 0.0),
        Weight::One,
    )
}

/// The captured pole `j/2 ± iν/2`.
pub fn captured_pole(ctx: &TermContext) -> Complex64 {
    Complex64::new(ctx.j as f64 / 2.0, ctx.nu_signed() / 2.0)
}

/// `log R_j` (finite for any `j`).
pub(crate) fn ln_residue_term(params: &DomainParams, j: i64, tau: Complex64, sign: Sign) -> Complex64 {
    let zeta = Complex64::new(j as f64 / 2.0, sign.value() * params.nu / 2.0);
    (2.0 * params.nu).ln() + I * tau * zeta - ln_cosh(PI * zeta)
}

/// `R_j = ±2πi Res(g_j, j/2 ± iν/2) = 2ν e^{iτζ} / cosh(πζ)` at the captured pole.
pub fn residue_term(ctx: &TermContext) -> Complex64 {
    ln_residue_term(&ctx.params, ctx.j, ctx.tl.tau, ctx.sign).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleFamily {
    /// `i(1/2 + k)`, zeros of `cosh(πζ)`.
    Sech,
    /// `j/2 + iν(1/2 + k)`, zeros of `cosh(c(ζ − j/2))`.
    Shifted,
    /// Both families coincide (double pole).
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub location: Complex64,
    pub order: u32,
    pub family: PoleFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleList {
    pub poles: Vec<Pole>,
    /// Residues of `g_j` at `j/2 + iν/2` and `j/2 − iν/2`.
    pub residues_at_first_row: (Complex64, Complex64),
}

/// Residue of `g_j` at `j/2 + iσν/2` for `σ = ±1`.
pub fn first_row_residue(params: &DomainParams, j: i64, tau: Complex64, sigma: f64) -> Complex64 {
    let zeta = Complex64::new(j as f64 / 2.0, sigma * params.nu / 2.0);
    sigma * (I * tau * zeta - ln_cosh(PI * zeta)).exp() / (I * params.c())
}

pub fn poles_and_residues(ctx: &TermContext, window: f64) -> PoleList {
    let nu = ctx.params.nu;
    let half_j = ctx.j as f64 / 2.0;
    let mut poles: Vec<Pole> = Vec::new();
    let kmax = (window + 1.0).ceil() as i64;
    for k in -kmax - 1..=kmax {
        let y = 0.5 + k as f64;
        if y.abs() <= window + 1e-12 {
            poles.push(Pole {
                location: Complex64::new(0.0, y),
                order: 1,
                family: PoleFamily::Sech,
            });
        }
    }
    let kmax = (window / nu + 1.0).ceil() as i64;
    for k in -kmax - 1..=kmax {
        let loc = Complex64::new(half_j, nu * (0.5 + k as f64));
        if loc.im.abs() > window + 1e-12 {
            continue;
        }
        match poles.iter_mut().find(|p| (p.location - loc).norm() < 1e-12) {
            Some(p) => {
                p.order += 1;
                p.family = PoleFamily::Both;
            }
            None => poles.push(Pole {
                location: loc,
                order: 1,
                family: PoleFamily::Shifted,
            }),
        }
    }
    poles.sort_by(|p, q| {
        p.location
            .im
            .total_cmp(&q.location.im)
            .then(p.location.re.total_cmp(&q.location.re))
    });
    let tau = ctx.tl.tau;
    PoleList {
        poles,
        residues_at_first_row: (
            first_row_residue(&ctx.params, ctx.j, tau, 1.0),
            first_row_residue(&ctx.params, ctx.j, tau, -1.0),
        ),
    }
}

/// The correction terms of the shifted-integral split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correction {
    First,
    Second,
    Third,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bracket {
    One,
    Corr(Correction),
}

fn split_integral(ctx: &TermContext, bracket: Bracket) -> Result<QuadResult> {
    let p = &ctx.params;
    let c = p.c();
    let tau = ctx.tl.tau;
    let hs = ctx.h_signed();
    let half_j = ctx.j as f64 / 2.0;
    let a = 2.0 * p.beta - tau.im.abs();
    if !(a > 0.0) {
        return Err(SzegoError::NoDecay(a));
    }
    let phi = |x: f64| -tau.im * x - PI * x.abs() - c * (x - half_j).abs();
    let (k0, k1) = (half_j.min(0.0), half_j.max(0.0));
    let (m1, m2) = (cosh_floor(PI * hs), cosh_floor(c * hs));
    let bound = match bracket {
        Bracket::One => 1.0,
        Bracket::Corr(Correction::First) => 1.0 / m1,
        Bracket::Corr(Correction::Second) => 1.0 / m2,
        Bracket::Corr(Correction::Third) => 1.0 / (m1 * m2),
    };
    let scale = bound * phi(k0).max(phi(k1)).exp();
    let f = move |x: f64| {
        let s0 = sgn(x);
        let s1 = sgn(x - half_j);
        let sigma = Complex64::new(0.0, -(s0 * PI * hs + s1 * c * hs)).exp();
        let base = sigma * (I * tau * x - PI * x.abs() - c * (x - half_j).abs()).exp();
        let x1 = || logistic_tail(PI * Complex64::new(x, hs));
        let x2 = || logistic_tail(c * Complex64::new(x - half_j, hs));
        match bracket {
            Bracket::One => base,
            Bracket::Corr(Correction::First) => base * x1(),
            Bracket::Corr(Correction::Second) => base * x2(),
            Bracket::Corr(Correction::Third) => base * x1() * x2(),
        }
    };
    let kinks = if ctx.j == 0 { vec![0.0] } else { vec![k0, k1] };
    let integrand = Integrand::new(f, a, scale, tau.re.abs(), kinks);
    integrate_line(&integrand, p.tol_quad * scale * (k1 - k0 + 2.0 / a))
}

/// `M_j = ∫ σ(ξ) e^{iτξ − π|ξ| − c|ξ − j/2|} dξ` by quadrature.
pub fn envelope_integral(ctx: &TermContext) -> Result<QuadResult> {
    split_integral(ctx, Bracket::One)
}

/// `E^{(k)}_j`: the `M_j` integrand times `X₁`, `X₂` or `X₁X₂`.
pub fn correction_integral(ctx: &TermContext, k: Correction) -> Result<QuadResult> {
    split_integral(ctx, Bracket::Corr(k))
}

/// `M_j` in closed form (elementary integration of the piecewise exponential).
pub fn envelope_integral_closed(ctx: &TermContext) -> Complex64 {
    let p = &ctx.params;
    let beta = p.beta;
    let c = p.c();
    let tau = ctx.tl.tau;
    let h = ctx.h_signed();
    let j = ctx.j as f64;
    let lp = I * tau + 2.0 * beta;
    let lm = I * tau - 2.0 * beta;
    let e = |z: Complex64| z.exp();
    let ph = |k: f64| Complex64::new(0.0, k * h).exp();
    if ctx.j > 0 {
        let x = I * tau + 2.0 * beta - 2.0 * PI;
        let one = ph(2.0 * beta) * (-c * j / 2.0).exp() / lp;
        let two = ph(2.0 * (beta - PI)) * (-c * j / 2.0).exp() * j * exprel_half(j * x);
        let three = -ph(-2.0 * beta) * e((I * tau - PI) * j / 2.0) / lm;
        one + two + three
    } else if ctx.j < 0 {
        let y = I * tau - 2.0 * beta + 2.0 * PI;
        let one = ph(2.0 * beta) * e((I * tau + PI) * j / 2.0) / lp;
        let two = -ph(-2.0 * (beta - PI)) * (c * j / 2.0).exp() * j * exprel_half(j * y);
        let three = -ph(-2.0 * beta) * (c * j / 2.0).exp() / lm;
        one + two + three
    } else {
        ph(2.0 * beta) / lp - ph(-2.0 * beta) / lm
    }
}

/// Geometric-type series summed term by term until the terms fall below `tol`
/// relative to the running sum.
fn geometric_sum(term: impl Fn(i64) -> Complex64, tol: f64) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..100_000 {
        let t = term(k);
        acc += t;
        let r = t.norm();
        if r <= tol * acc.norm().max(1e-300) && r <= last {
            // terms decay at least like e^{-π k}; bound the tail by the last term
            return (acc, r);
        }
        last = r;
    }
    (acc, last)
}

/// Closed form of `Σ_j R_j λ^j` and its parts.
///
/// `value = 4ν · prefactor · (oblique_pole + oblique_geometric + constant − correction)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueSum {
    pub value: Complex64,
    pub prefactor: Complex64,
    /// `e^{±iπν/2} / (λ e^{(iτ+π)/2} − 1)`: from the modes `j < 0`.
    pub oblique_pole: Complex64,
    /// `e^{∓iπν/2} λe^{(iτ−π)/2} / (1 − λe^{(iτ−π)/2})`: from the modes `j > 0`.
    pub oblique_geometric: Complex64,
    /// `1 / (2 cosh(iπν/2))`: half of the `j = 0` mode.
    pub constant: Complex64,
    /// The explicit exponentially small series `E(τ, λ)`.
    pub correction: Complex64,
    pub correction_tail: f64,
}

pub fn residue_sum(params: &DomainParams, tl: &TauLambda) -> Result<ResidueSum> {
    residue_sum_signed(params, tl, Sign::of(tl.tau.re))
}

pub fn residue_sum_signed(params: &DomainParams, tl: &TauLambda, sign: Sign) -> Result<ResidueSum> {
    let tau = tl.tau;
    let lam = tl.lam;
    let nu = sign.value() * params.nu;
    let p = lam * ((I * tau - PI) / 2.0).exp();
    let u = lam * ((I * tau + PI) / 2.0).exp();
    if p.norm() >= 1.0 {
        return Err(SzegoError::SeriesDiverged { ratio: p.norm() });
    }
    if u.norm() <= 1.0 {
        return Err(SzegoError::SeriesDiverged { ratio: 1.0 / u.norm() });
    }
    let ph = |k: f64| Complex64::new(0.0, k * PI * nu / 2.0).exp();
    let oblique_pole = ph(1.0) / (u - 1.0);
    let oblique_geometric = ph(-1.0) * p / (1.0 - p);
    let constant = 0.5 / Complex64::new(0.0, PI * nu / 2.0).cosh();
    let ln_lam = lam.ln();
    let tol = params.tol_series * 1e-3;
    let (neg, t1) = geometric_sum(
        |k| {
            let j = -(k as f64);
            ph(3.0) * (j * ln_lam + j * (I * tau + 3.0 * PI) / 2.0).exp()
                / (1.0 + (PI * Complex64::new(j, nu)).exp())
        },
        tol,
    );
    let (pos, t2) = geometric_sum(
        |k| {
            let j = k as f64;
            ph(-3.0) * (j * ln_lam + j * (I * tau - 3.0 * PI) / 2.0).exp()
                / (1.0 + (-PI * Complex64::new(j, nu)).exp())
        },
        tol,
    );
    let correction = neg + pos;
    let prefactor = (-tau * nu / 2.0).exp();
    let value = 4.0 * params.nu * prefactor * (oblique_pole + oblique_geometric + constant - correction);
    Ok(ResidueSum {
        value,
        prefactor,
        oblique_pole,
        oblique_geometric,
        constant,
        correction,
        correction_tail: t1 + t2,
    })
}

/// Closed form of `4 e^{∓τh} Σ_j M_j λ^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSumParts {
    /// In order:
    /// `e^{2βih}/(iτ+2β)`, `−e^{−2βih}/(iτ−2β)`,
    /// `−e^{2βih}/((iτ+2β)(1−u))`, `e^{−2βih}/((iτ−2β)(1−s))`,
    /// `ψ₁/((iτ+2β)(1−q))`, `ψ₂/((iτ−2β)(1−p))`, `ψ₃/((1−p)(1−q))`, `ψ₄/((1−s)(1−u))`,
    /// with `p = λe^{(iτ−π)/2}`, `q = λe^{−(β−π/2)}`, `u = λe^{(iτ+π)/2}`, `s = λe^{β−π/2}`.
    pub summands: [Complex64; 8],
    pub psi: [Complex64; 4],
    /// `4 e^{∓τh}`.
    pub prefactor: Complex64,
    pub total: Complex64,
}

pub fn envelope_sum(params: &DomainParams, tl: &TauLambda) -> Result<MSumParts> {
    envelope_sum_signed(params, tl, Sign::of(tl.tau.re))
}

pub fn envelope_sum_signed(params: &DomainParams, tl: &TauLambda, sign: Sign) -> Result<MSumParts> {
    let beta = params.beta;
    let bm = params.b_max();
    let h = sign.value() * params.h;
    let tau = tl.tau;
    let lam = tl.lam;
    let p = lam * ((I * tau - PI) / 2.0).exp();
    let q = lam * (-bm).exp();
    let u = lam * ((I * tau + PI) / 2.0).exp();
    let s = lam * bm.exp();
    for (ratio, converges) in [(p.norm(), p.norm() < 1.0), (q.norm(), q.norm() < 1.0)] {
        if !converges {
            return Err(SzegoError::SeriesDiverged { ratio });
        }
    }
    for r in [u.norm(), s.norm()] {
        if r <= 1.0 {
            return Err(SzegoError::SeriesDiverged { ratio: 1.0 / r });
        }
    }
    let ph = |k: f64| Complex64::new(0.0, k * h).exp();
    let lp = I * tau + 2.0 * beta;
    let lm = I * tau - 2.0 * beta;
    let one = Complex64::new(1.0, 0.0);
    let psi1 = lam * ph(2.0 * beta) * (-bm).exp();
    let psi2 = -lam * ph(-2.0 * beta) * ((I * tau - PI) / 2.0).exp();
    let psi3 = lam * (-bm).exp() * ph(2.0 * (beta - PI)) * exprel_half(I * tau + 2.0 * beta - 2.0 * PI);
    let psi4 = lam * ph(-2.0 * (beta - PI)) * bm.exp() * exprel_half(I * tau - 2.0 * beta + 2.0 * PI);
    let summands = [
        ph(2.0 * beta) / lp,
        -ph(-2.0 * beta) / lm,
        -ph(2.0 * beta) / (lp * (one - u)),
        ph(-2.0 * beta) / (lm * (one - s)),
        psi1 / (lp * (one - q)),
        psi2 / (lm * (one - p)),
        psi3 / ((one - p) * (one - q)),
        psi4 / ((one - s) * (one - u)),
    ];
    let prefactor = 4.0 * (-tau * h).exp();
    let total = prefactor * summands.iter().sum::<Complex64>();
    Ok(MSumParts {
        summands,
        psi: [psi1, psi2, psi3, psi4],
        prefactor,
        total,
    })
}

/// `e^{|a|} / cosh(a + ib)` computed directly.
pub fn fundamental_lhs(a: f64, b: f64) -> Complex64 {
    a.abs().exp() / Complex64::new(a, b).cosh()
}

/// `2 e^{−i sgn(a) b} (1 − e^{−2 sgn(a)(a+ib)} / (1 + e^{−2 sgn(a)(a+ib)}))`.
pub fn fundamental_rhs(a: f64, b: f64) -> Complex64 {
    let s = sgn(a);
    2.0 * Complex64::new(0.0, -s * b).exp() * (1.0 - logistic_tail(Complex64::new(a, b)))
}
