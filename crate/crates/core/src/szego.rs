//! The assembled kernel, its first derivatives, the explicit leading term and
//! the decay of the remainder.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{fit_line, ExponentFit};
use crate::domain::{reduced_violation, violation, DomainParams, Point, PointPair, TauLambda};
use crate::error::{Result, SzegoError};
use crate::kernel_terms::{line_integral, residue_sum_signed, Sign, Weight};
use crate::series::{sum_bilateral, SeriesOutcome, SeriesPlan};

/// Relative gap below which the two contour branches are averaged on `Re τ = 0`.
const BRANCH_GAP: f64 = 1e-9;
/// A main denominator smaller than this switches the series to near-pole mode.
const NEAR_POLE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    /// `(1/8π) Σ_j λ^j I_j(τ)`.
    DirectSeries,
    /// `(1/8π) (Σ_j λ^j R_j + Σ_j λ^j J_j)` with the residue sum in closed form.
    ResiduePlusContour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    W1,
    W2,
    ConjZ1,
    ConjZ2,
}

impl std::str::FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "w1" => Ok(Variable::W1),
            "w2" => Ok(Variable::W2),
            "conj_z1" | "conjz1" | "zbar1" | "z1bar" => Ok(Variable::ConjZ1),
            "conj_z2" | "conjz2" | "zbar2" | "z2bar" => Ok(Variable::ConjZ2),
            _ => Err(format!("unknown variable '{s}' (expected w1, w2, conj_z1, conj_z2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Largest `|j|` included in the truncated series.
    pub n_terms: i64,
    pub tail_bound: f64,
    /// Accumulated quadrature error of the included terms.
    pub quad_err: f64,
    pub route: Route,
    pub near_pole: bool,
    /// Relative gap between the two contour branches when `Re τ = 0` and they disagree.
    pub branch_gap: Option<f64>,
}

impl KernelValue {
    pub fn err_est(&self) -> f64 {
        self.tail_bound + self.quad_err
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingParts {
    pub oblique_pole: Complex64,
    pub oblique_geometric: Complex64,
    pub constant: Complex64,
    pub correction: Complex64,
}

/// The explicit part `(1/8π) Σ_j λ^j R_j` of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingTerm {
    pub value: Complex64,
    pub parts: LeadingParts,
    /// `e^{−sgn(Re τ) τ ν/2}`.
    pub prefactor: Complex64,
    pub err_est: f64,
}

/// Asymptotic geometric rates of the kernel series for `j → ±∞`.
pub(crate) fn series_rates(params: &DomainParams, tl: &TauLambda) -> (f64, f64) {
    let r = tl.lam.norm();
    let bm = params.b_max();
    let pos = (r * (-(tl.tau.im + PI) / 2.0).exp()).max(r * (-bm).exp());
    let neg = (((tl.tau.im - PI) / 2.0).exp() / r).max((-bm).exp() / r);
    (pos, neg)
}

/// Smallest of the four main denominators `|1 − p|`, `|1 − 1/u|`, `|1 − q|`, `|1 − 1/s|`.
pub fn main_denominator(params: &DomainParams, tl: &TauLambda) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let lam = tl.lam;
    let tau = tl.tau;
    let bm = params.b_max();
    let p = lam * ((i * tau - PI) / 2.0).exp();
    let u = lam * ((i * tau + PI) / 2.0).exp();
    [
        (one - p).norm(),
        (one - one / u).norm(),
        (one - lam * (-bm).exp()).norm(),
        (one - one / (lam * bm.exp())).norm(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn plan_for(params: &DomainParams, tl: &TauLambda) -> SeriesPlan {
    let (rate_pos, rate_neg) = series_rates(params, tl);
    SeriesPlan {
        rate_pos,
        rate_neg,
        tol: params.tol_series,
        abs_floor: 1e-300,
        near_pole: main_denominator(params, tl) < NEAR_POLE,
    }
}

fn term_sum(
    params: &DomainParams,
    tl: &TauLambda,
    shift: f64,
    weight: Weight,
    j_weighted: bool,
) -> Result<SeriesOutcome> {
    let ln_lam = tl.lam.ln();
    let tau = tl.tau;
    let plan = plan_for(params, tl);
    sum_bilateral(
        |j| {
            let r = line_integral(params, j, tau, shift, ln_lam * j as f64, weight)?;
            let f = if j_weighted { j as f64 } else { 1.0 };
            Ok((r.value * f, r.err_est * f.abs()))
        },
        &plan,
    )
}

fn scaled(out: SeriesOutcome, route: Route, near_pole: bool) -> KernelValue {
    let k = 1.0 / (8.0 * PI);
    KernelValue {
        value: out.value * k,
        n_terms: out.n_terms,
        tail_bound: out.tail_bound * k,
        quad_err: out.quad_err * k,
        route,
        near_pole,
        branch_gap: None,
    }
}

fn check_points(params: &DomainParams, w: &Point, z: &Point) -> Result<()> {
    if let Some(v) = violation(params, w) {
        return Err(SzegoError::OutsideDomain { violated: format!("w: {v}") });
    }
    if let Some(v) = violation(params, z) {
        return Err(SzegoError::OutsideDomain { violated: format!("z: {v}") });
    }
    Ok(())
}

fn check_reduced(params: &DomainParams, tl: &TauLambda) -> Result<()> {
    match reduced_violation(params, tl.tau, tl.lam) {
        Some(v) => Err(SzegoError::OutsideDomain { violated: v }),
        None => Ok(()),
    }
}

/// `K(w, z)` by the direct series.
pub fn kernel(params: &DomainParams, w: &Point, z: &Point) -> Result<KernelValue> {
    kernel_via(params, w, z, Route::DirectSeries)
}

pub fn kernel_via(params: &DomainParams, w: &Point, z: &Point, route: Route) -> Result<KernelValue> {
    check_points(params, w, z)?;
    kernel_reduced(params, &crate::domain::reduce(params, w, z), route)
}

/// Kernel as a function of the reduced variables; `λ = 0` keeps only the `j = 0` mode.
pub fn kernel_reduced(params: &DomainParams, tl: &TauLambda, route: Route) -> Result<KernelValue> {
    let k = 1.0 / (8.0 * PI);
    if tl.lam == Complex64::new(0.0, 0.0) {
        let r = line_integral(params, 0, tl.tau, 0.0, Complex64::new(0.0, 0.0), Weight::One)?;
        return Ok(KernelValue {
            value: r.value * k,
            n_terms: 0,
            tail_bound: 0.0,
            quad_err: r.err_est * k,
            route,
            near_pole: false,
            branch_gap: None,
        });
    }
    check_reduced(params, tl)?;
    let near_pole = main_denominator(params, tl) < NEAR_POLE;
    match route {
        Route::DirectSeries => Ok(scaled(term_sum(params, tl, 0.0, Weight::One, false)?, route, near_pole)),
        Route::ResiduePlusContour => {
            let plus = contour_branch(params, tl, Sign::Plus, near_pole);
            if tl.tau.re != 0.0 {
                let sign = Sign::of(tl.tau.re);
                return if sign == Sign::Plus { plus } else { contour_branch(params, tl, sign, near_pole) };
            }
            let plus = plus?;
            let minus = contour_branch(params, tl, Sign::Minus, near_pole)?;
            let gap = (plus.value - minus.value).norm() / plus.value.norm().max(1e-300);
            let mut out = plus;
            if gap < BRANCH_GAP {
                out.value = (plus.value + minus.value) / 2.0;
                out.tail_bound = plus.tail_bound.max(minus.tail_bound);
                out.quad_err = plus.quad_err.max(minus.quad_err);
            } else {
                out.branch_gap = Some(gap);
            }
            Ok(out)
        }
    }
}

fn contour_branch(params: &DomainParams, tl: &TauLambda, sign: Sign, near_pole: bool) -> Result<KernelValue> {
    let res = residue_sum_signed(params, tl, sign)?;
    let j = term_sum(params, tl, sign.value() * params.h, Weight::One, false)?;
    let mut out = scaled(j, Route::ResiduePlusContour, near_pole);
    let k = 1.0 / (8.0 * PI);
    out.value += res.value * k;
    out.tail_bound += 4.0 * params.nu * res.prefactor.norm() * res.correction_tail * k;
    Ok(out)
}

/// `(1/8π) Σ_j λ^j J_j`: the part of the kernel beyond the explicit leading term.
pub fn remainder_reduced(params: &DomainParams, tl: &TauLambda) -> Result<KernelValue> {
    check_reduced(params, tl)?;
    let sign = Sign::of(tl.tau.re);
    let near_pole = main_denominator(params, tl) < NEAR_POLE;
    Ok(scaled(
        term_sum(params, tl, sign.value() * params.h, Weight::One, false)?,
        Route::ResiduePlusContour,
        near_pole,
    ))
}

/// First derivative of `K` in one of its holomorphic / antiholomorphic variables.
pub fn kernel_derivative(params: &DomainParams, var: Variable, w: &Point, z: &Point) -> Result<KernelValue> {
    check_points(params, w, z)?;
    kernel_derivative_reduced(params, var, w.z1 - z.z1.conj(), w.z2, z.z2.conj())
}

/// Derivative from `τ`, `w2` and `conj z2` directly; allows `λ = 0`.
pub fn kernel_derivative_reduced(
    params: &DomainParams,
    var: Variable,
    tau: Complex64,
    w2: Complex64,
    conj_z2: Complex64,
) -> Result<KernelValue> {
    let tl = TauLambda::new(params, tau, w2 * conj_z2);
    let k = 1.0 / (8.0 * PI);
    let zero = Complex64::new(0.0, 0.0);
    if tl.lam == zero {
        let (j, weight, factor) = match var {
            Variable::W1 => (0, Weight::IZeta, Complex64::new(1.0, 0.0)),
            Variable::ConjZ1 => (0, Weight::IZeta, Complex64::new(-1.0, 0.0)),
            Variable::W2 => (1, Weight::One, conj_z2),
            Variable::ConjZ2 => (1, Weight::One, w2),
        };
        let r = line_integral(params, j, tau, 0.0, zero, weight)?;
        return Ok(KernelValue {
            value: r.value * factor * k,
            n_terms: j,
            tail_bound: 0.0,
            quad_err: r.err_est * factor.norm() * k,
            route: Route::DirectSeries,
            near_pole: false,
            branch_gap: None,
        });
    }
    check_reduced(params, &tl)?;
    let near_pole = main_denominator(params, &tl) < NEAR_POLE;
    let (out, factor) = match var {
        Variable::W1 => (term_sum(params, &tl, 0.0, Weight::IZeta, false)?, Complex64::new(1.0, 0.0)),
        Variable::ConjZ1 => (term_sum(params, &tl, 0.0, Weight::IZeta, false)?, Complex64::new(-1.0, 0.0)),
        Variable::W2 => (term_sum(params, &tl, 0.0, Weight::One, true)?, 1.0 / w2),
        Variable::ConjZ2 => (term_sum(params, &tl, 0.0, Weight::One, true)?, 1.0 / conj_z2),
    };
    let mut v = scaled(out, Route::DirectSeries, near_pole);
    v.value *= factor;
    v.tail_bound *= factor.norm();
    v.quad_err *= factor.norm();
    Ok(v)
}

pub fn leading_term(params: &DomainParams, w: &Point, z: &Point) -> Result<LeadingTerm> {
    check_points(params, w, z)?;
    leading_term_reduced(params, &crate::domain::reduce(params, w, z))
}

pub fn leading_term_reduced(params: &DomainParams, tl: &TauLambda) -> Result<LeadingTerm> {
    check_reduced(params, tl)?;
    let res = residue_sum_signed(params, tl, Sign::of(tl.tau.re))?;
    let k = 4.0 * params.nu * res.prefactor / (8.0 * PI);
    Ok(LeadingTerm {
        value: res.value / (8.0 * PI),
        parts: LeadingParts {
            oblique_pole: k * res.oblique_pole,
            oblique_geometric: k * res.oblique_geometric,
            constant: k * res.constant,
            correction: -k * res.correction,
        },
        prefactor: res.prefactor,
        err_est: k.norm() * res.correction_tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub re_tau: f64,
    pub kernel: Complex64,
    pub leading: Complex64,
    pub remainder: Complex64,
    pub err_est: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// Fit of `log|K − leading|` against `|Re τ|`.
    pub remainder: ExponentFit,
    /// Fit of `log|leading|` against `|Re τ|`.
    pub leading: ExponentFit,
    pub samples: Vec<DecaySample>,
}

/// Pairs with prescribed `Re τ`, fixed `(Im z1, log|z2|²)` for both points.
///
/// With `co_rotate` the angular parts follow `arg λ = −Re τ / 2`, which keeps the
/// phase of `λ e^{iτ/2}` fixed along the sweep.
pub fn re_tau_sweep(re_taus: &[f64], w_ab: (f64, f64), z_ab: (f64, f64), co_rotate: bool) -> Vec<PointPair> {
    re_taus
        .iter()
        .map(|&t| {
            let theta = if co_rotate { (-t / (4.0 * PI)).rem_euclid(1.0) } else { 0.0 };
            let w = Point::from_coords(t / 2.0, w_ab.0, w_ab.1, theta);
            let z = Point::from_coords(-t / 2.0, z_ab.0, z_ab.1, 0.0);
            PointPair::new(w, z)
        })
        .collect()
}

pub fn remainder_decay(params: &DomainParams, path: &[PointPair]) -> Result<DecayReport> {
    if path.len() < 6 {
        return Err(SzegoError::InvalidPath(format!("{} points; at least 6 required", path.len())));
    }
    let taus: Vec<f64> = path.iter().map(|pp| (pp.w.z1 - pp.z.z1.conj()).re.abs()).collect();
    let (lo, hi) = taus.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &t| (l.min(t), h.max(t)));
    if !(lo > 0.0 && hi >= 4.0 * lo) {
        return Err(SzegoError::InvalidPath("|Re tau| must span at least a factor of 4".into()));
    }
    use rayon::prelude::*;
    let samples: Vec<DecaySample> = path
        .par_iter()
        .zip(taus.par_iter())
        .map(|(pp, &t)| {
            let k = kernel(params, &pp.w, &pp.z)?;
            let l = leading_term(params, &pp.w, &pp.z)?;
            Ok(DecaySample {
                re_tau: t,
                kernel: k.value,
                leading: l.value,
                remainder: k.value - l.value,
                err_est: k.err_est() + l.err_est,
            })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = samples.iter().map(|s| s.re_tau).collect();
    let yr: Vec<f64> = samples.iter().map(|s| s.remainder.norm().ln()).collect();
    let yl: Vec<f64> = samples.iter().map(|s| s.leading.norm().ln()).collect();
    Ok(DecayReport {
        remainder: fit_line(&xs, &yr)?,
        leading: fit_line(&xs, &yl)?,
        samples,
    })
}
