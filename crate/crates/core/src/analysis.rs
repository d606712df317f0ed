//! Boundary singularities: the term taxonomy, Bergman denominator templates
//! and blow-up exponent fits along approach paths.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{reduce, violation, ApproachPath, BoundaryFace, DomainParams, FaceKind, Point, PointPair, TauLambda};
use crate::error::{Result, SzegoError};
use crate::szego::{kernel, kernel_derivative, Variable};

/// Fits whose RMS residual (natural-log units) exceeds this are rejected.
pub const FIT_RMS_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
    pub rms_residual: f64,
}

/// Least-squares line `y = slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    let n = xs.len();
    if n < 4 || ys.len() != n {
        return Err(SzegoError::FitUnstable(format!("{n} points; at least 4 required")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(SzegoError::FitUnstable("non-finite sample".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(SzegoError::FitUnstable("abscissae do not vary".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let rms = (sse / nf).sqrt();
    if rms > FIT_RMS_LIMIT {
        return Err(SzegoError::FitUnstable(format!("rms residual {rms:.3} exceeds {FIT_RMS_LIMIT}")));
    }
    Ok(ExponentFit {
        slope,
        intercept,
        r2: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
        n_points: n,
        rms_residual: rms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoFactorFit {
    /// Exponent of the first controlling factor.
    pub a: f64,
    /// Exponent of the second controlling factor.
    pub b: f64,
    pub c: f64,
    pub r2: f64,
    pub n_points: usize,
    pub rms_residual: f64,
}

/// Least-squares plane `z = a·x + b·y + c`.
pub fn fit_plane(xs: &[f64], ys: &[f64], zs: &[f64]) -> Result<TwoFactorFit> {
    let n = xs.len();
    if n < 6 || ys.len() != n || zs.len() != n {
        return Err(SzegoError::FitUnstable(format!("{n} points; at least 6 required")));
    }
    let nf = n as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / nf;
    let (mx, my, mz) = (mean(xs), mean(ys), mean(zs));
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz, mut szz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let (x, y, z) = (xs[k] - mx, ys[k] - my, zs[k] - mz);
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxz += x * z;
        syz += y * z;
        szz += z * z;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det.abs() > 1e-12 * (sxx * syy).max(1e-300)) {
        return Err(SzegoError::FitUnstable("factors are collinear along the path".into()));
    }
    let a = (sxz * syy - syz * sxy) / det;
    let b = (syz * sxx - sxz * sxy) / det;
    let c = mz - a * mx - b * my;
    let sse: f64 = (0..n).map(|k| (zs[k] - a * xs[k] - b * ys[k] - c).powi(2)).sum();
    let rms = (sse / nf).sqrt();
    if rms > FIT_RMS_LIMIT {
        return Err(SzegoError::FitUnstable(format!("rms residual {rms:.3} exceeds {FIT_RMS_LIMIT}")));
    }
    Ok(TwoFactorFit {
        a,
        b,
        c,
        r2: if szz > 0.0 { 1.0 - sse / szz } else { 1.0 },
        n_points: n,
        rms_residual: rms,
    })
}

/// Boundary loci on which a denominator factor can vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Locus {
    /// `Im z1 − log|z2|² = π/2`.
    RightLine,
    /// `Im z1 − log|z2|² = −π/2`.
    LeftLine,
    /// `log|z2|² = β − π/2`.
    TopLine,
    /// `log|z2|² = −(β − π/2)`.
    BottomLine,
    /// `Im z1 = β` (only at E1).
    ImMax,
    /// `Im z1 = −β` (only at E3).
    ImMin,
}

pub fn face_loci(face: Option<FaceKind>) -> &'static [Locus] {
    use Locus::*;
    match face {
        None => &[],
        Some(FaceKind::E1) => &[RightLine, TopLine, ImMax],
        Some(FaceKind::E2) => &[LeftLine, TopLine],
        Some(FaceKind::E3) => &[LeftLine, BottomLine, ImMin],
        Some(FaceKind::E4) => &[RightLine, BottomLine],
        Some(FaceKind::ObliqueRight) => &[RightLine],
        Some(FaceKind::ObliqueLeft) => &[LeftLine],
        Some(FaceKind::HorizTop) => &[TopLine],
        Some(FaceKind::HorizBottom) => &[BottomLine],
    }
}

/// Denominator factors appearing in the kernel expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    /// `e^{(π−iτ)/2} − λ`.
    ObliquePlus,
    /// `e^{−(iτ+π)/2} − λ`.
    ObliqueMinus,
    /// `e^{β−π/2} − λ`.
    Top,
    /// `e^{−(β−π/2)} − λ`.
    Bottom,
    /// `iτ + 2β`.
    LinearPlus,
    /// `iτ − 2β`.
    LinearMinus,
    /// `e^{(π+iτ)/2} − λ`.
    ObliqueConj,
}

impl Factor {
    pub fn value(self, params: &DomainParams, tl: &TauLambda) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let (tau, lam, bm) = (tl.tau, tl.lam, params.b_max());
        match self {
            Factor::ObliquePlus => ((PI - i * tau) / 2.0).exp() - lam,
            Factor::ObliqueMinus => (-(i * tau + PI) / 2.0).exp() - lam,
            Factor::Top => Complex64::new(bm.exp(), 0.0) - lam,
            Factor::Bottom => Complex64::new((-bm).exp(), 0.0) - lam,
            Factor::LinearPlus => i * tau + 2.0 * params.beta,
            Factor::LinearMinus => i * tau - 2.0 * params.beta,
            Factor::ObliqueConj => ((PI + i * tau) / 2.0).exp() - lam,
        }
    }

    /// Locus on which both points must lie for the factor to vanish; `None` if no
    /// pair of boundary loci forces it to vanish.
    pub fn locus(self) -> Option<Locus> {
        match self {
            Factor::ObliquePlus => Some(Locus::LeftLine),
            Factor::ObliqueMinus => Some(Locus::RightLine),
            Factor::Top => Some(Locus::TopLine),
            Factor::Bottom => Some(Locus::BottomLine),
            Factor::LinearPlus => Some(Locus::ImMax),
            Factor::LinearMinus => Some(Locus::ImMin),
            Factor::ObliqueConj => None,
        }
    }

    pub fn vanishes(self, w: Option<FaceKind>, z: Option<FaceKind>) -> bool {
        match self.locus() {
            Some(l) => face_loci(w).contains(&l) && face_loci(z).contains(&l),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    K1,
    K2,
    Kt1,
    Kt2,
    Kt3,
    Kt4,
    Kt5,
    Kt6,
    Kt7,
    Kt8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermActivation {
    pub term: Term,
    pub active: bool,
    pub worst_face: Option<FaceKind>,
    pub predicted_order: u32,
    /// The face assignment of this entry is inconsistent with the displayed denominators.
    pub ambiguous: bool,
}

/// The singular loci and worst face of each expansion term, as listed in the
/// boundary-behaviour taxonomy.
pub const TAXONOMY: [(Term, &[Locus], Option<FaceKind>, bool); 10] = [
    (Term::K1, &[Locus::RightLine], None, false),
    (Term::K2, &[Locus::LeftLine], None, false),
    (Term::Kt1, &[Locus::RightLine], None, false),
    (Term::Kt2, &[Locus::LeftLine], None, false),
    (Term::Kt3, &[Locus::RightLine, Locus::BottomLine], Some(FaceKind::E4), true),
    (Term::Kt4, &[Locus::RightLine, Locus::ImMax], Some(FaceKind::E1), false),
    (Term::Kt5, &[Locus::LeftLine, Locus::ImMin], Some(FaceKind::E3), false),
    (Term::Kt6, &[Locus::LeftLine, Locus::TopLine], Some(FaceKind::E2), false),
    (Term::Kt7, &[Locus::TopLine, Locus::ImMax], Some(FaceKind::E1), false),
    (Term::Kt8, &[Locus::BottomLine, Locus::ImMin], Some(FaceKind::E3), false),
];

/// Term activations for `w` and `z` approaching the given faces (`None`: interior).
pub fn classify_kinds(w: Option<FaceKind>, z: Option<FaceKind>) -> Vec<TermActivation> {
    let (lw, lz) = (face_loci(w), face_loci(z));
    TAXONOMY
        .iter()
        .map(|&(term, loci, worst, ambiguous)| {
            let order = loci.iter().filter(|l| lw.contains(l) && lz.contains(l)).count() as u32;
            TermActivation {
                term,
                active: order > 0,
                worst_face: if order > 0 { worst } else { None },
                predicted_order: order,
                ambiguous,
            }
        })
        .collect()
}

pub fn classify(_params: &DomainParams, pair: (&BoundaryFace, &BoundaryFace)) -> Vec<TermActivation> {
    classify_kinds(Some(pair.0.face), Some(pair.1.face))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BergmanTerm {
    B1,
    B2,
    Bt1,
    Bt2,
    Bt3,
    Bt4,
    Bt5,
    Bt6,
    Bt7,
    Bt8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BergmanTemplate {
    pub term: BergmanTerm,
    pub factors: Vec<(Factor, u32)>,
}

impl BergmanTemplate {
    /// Summed powers of the factors that vanish at the configuration.
    pub fn order_at(&self, w: Option<FaceKind>, z: Option<FaceKind>) -> u32 {
        self.factors.iter().filter(|(f, _)| f.vanishes(w, z)).map(|(_, p)| p).sum()
    }

    /// `∏ |factor|^{power}` over the vanishing factors.
    pub fn singular_size(&self, params: &DomainParams, tl: &TauLambda, w: Option<FaceKind>, z: Option<FaceKind>) -> f64 {
        self.factors
            .iter()
            .filter(|(f, _)| f.vanishes(w, z))
            .map(|(f, p)| f.value(params, tl).norm().powi(*p as i32))
            .product()
    }
}

/// Denominator structure of the Bergman kernel expansion.
pub fn bergman_templates() -> Vec<BergmanTemplate> {
    use Factor::*;
    let t = |term, factors: &[(Factor, u32)]| BergmanTemplate {
        term,
        factors: factors.to_vec(),
    };
    vec![
        t(BergmanTerm::B1, &[(ObliquePlus, 2)]),
        t(BergmanTerm::B2, &[(ObliqueMinus, 2)]),
        t(BergmanTerm::Bt1, &[(LinearPlus, 2), (Top, 2)]),
        t(BergmanTerm::Bt2, &[(LinearPlus, 2), (ObliqueMinus, 2)]),
        t(BergmanTerm::Bt3, &[(ObliquePlus, 2), (Top, 2)]),
        t(BergmanTerm::Bt4, &[(LinearMinus, 2), (ObliquePlus, 2)]),
        t(BergmanTerm::Bt5, &[(LinearMinus, 2), (Bottom, 2)]),
        t(BergmanTerm::Bt6, &[(ObliqueMinus, 2), (Bottom, 2)]),
        t(BergmanTerm::Bt7, &[(LinearPlus, 2), (Top, 1), (ObliqueMinus, 1)]),
        t(BergmanTerm::Bt8, &[(LinearMinus, 2), (Bottom, 1), (ObliqueConj, 1)]),
    ]
}

/// The template of maximal order at a configuration (first in list order on ties).
pub fn dominant_template(w: Option<FaceKind>, z: Option<FaceKind>) -> Option<(BergmanTemplate, u32)> {
    let mut best: Option<(BergmanTemplate, u32)> = None;
    for t in bergman_templates() {
        let o = t.order_at(w, z);
        if o > 0 && best.as_ref().is_none_or(|(_, b)| o > *b) {
            best = Some((t, o));
        }
    }
    best
}

const LINE_AND_HORIZONTAL: [Factor; 4] = [Factor::ObliqueMinus, Factor::ObliquePlus, Factor::Top, Factor::Bottom];

fn vanishing(w: Option<FaceKind>, z: Option<FaceKind>) -> Vec<Factor> {
    LINE_AND_HORIZONTAL.into_iter().filter(|f| f.vanishes(w, z)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Kernel,
    Derivative(Variable),
}

fn evaluate(params: &DomainParams, q: Quantity, pp: &PointPair) -> Result<f64> {
    Ok(match q {
        Quantity::Kernel => kernel(params, &pp.w, &pp.z)?.value.norm(),
        Quantity::Derivative(v) => kernel_derivative(params, v, &pp.w, &pp.z)?.value.norm(),
    })
}

/// `|controlling factor|` at each path point; the path `ε` when nothing vanishes.
pub fn controlling_sizes(params: &DomainParams, path: &ApproachPath) -> Vec<f64> {
    let (w, z) = (Some(path.target.0.face), Some(path.target.1.face));
    match vanishing(w, z).first() {
        Some(f) => path
            .points
            .iter()
            .map(|pp| f.value(params, &reduce(params, &pp.w, &pp.z)).norm())
            .collect(),
        None => path.epsilons.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub fit: ExponentFit,
    pub eps: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

fn check_span(eps: &[f64]) -> Result<()> {
    let (lo, hi) = eps.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
    if !(lo > 0.0 && hi >= 8.0 * lo) {
        return Err(SzegoError::FitUnstable("epsilon must span at least a factor of 8".into()));
    }
    Ok(())
}

/// Regression of `log|quantity|` on `log ε` along the path.
pub fn fit_blowup(params: &DomainParams, path: &ApproachPath, quantity: Quantity) -> Result<BlowupFit> {
    let eps = controlling_sizes(params, path);
    check_span(&eps)?;
    let magnitudes: Vec<f64> = path
        .points
        .par_iter()
        .map(|pp| evaluate(params, quantity, pp))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = magnitudes.iter().map(|m| m.ln()).collect();
    Ok(BlowupFit {
        fit: fit_line(&xs, &ys)?,
        eps,
        magnitudes,
    })
}

/// Corner configurations and their two independent controlling factors
/// `(oblique, horizontal)`.
pub fn corner_factors(corner: FaceKind) -> Result<(Factor, Factor)> {
    match corner {
        FaceKind::E1 => Ok((Factor::ObliqueMinus, Factor::Top)),
        FaceKind::E2 => Ok((Factor::ObliquePlus, Factor::Top)),
        FaceKind::E3 => Ok((Factor::ObliquePlus, Factor::Bottom)),
        FaceKind::E4 => Ok((Factor::ObliqueMinus, Factor::Bottom)),
        other => Err(SzegoError::InvalidPath(format!("{other} is not a corner"))),
    }
}

/// Point at slack `e1` from the corner's oblique line and `e2` from its horizontal line.
pub fn corner_point(params: &DomainParams, corner: FaceKind, x: f64, theta: f64, e1: f64, e2: f64) -> Result<Point> {
    let bm = params.b_max();
    let (a, b) = match corner {
        FaceKind::E1 => (bm - e2 + FRAC_PI_2 - e1, bm - e2),
        FaceKind::E2 => (bm - e2 - FRAC_PI_2 + e1, bm - e2),
        FaceKind::E3 => (-bm + e2 - FRAC_PI_2 + e1, -bm + e2),
        FaceKind::E4 => (-bm + e2 + FRAC_PI_2 - e1, -bm + e2),
        other => return Err(SzegoError::InvalidPath(format!("{other} is not a corner"))),
    };
    let p = Point::from_coords(x, a, b, theta);
    match violation(params, &p) {
        Some(reason) => Err(SzegoError::PathLeavesDomain { eps: e1.max(e2), reason }),
        None => Ok(p),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerFit {
    pub corner: FaceKind,
    pub factors: (Factor, Factor),
    pub fit: TwoFactorFit,
    pub samples: Vec<(f64, f64, f64)>,
}

/// Two-factor fit `log|Q| = a log|F₁| + b log|F₂| + c` on the grid `eps1 × eps2`,
/// with both points at the same position relative to the corner.
pub fn fit_corner(
    params: &DomainParams,
    corner: FaceKind,
    x: f64,
    theta: f64,
    eps1: &[f64],
    eps2: &[f64],
    quantity: Quantity,
) -> Result<CornerFit> {
    let factors = corner_factors(corner)?;
    let mut grid = Vec::new();
    for &e1 in eps1 {
        for &e2 in eps2 {
            let p = corner_point(params, corner, x, theta, e1, e2)?;
            grid.push(PointPair::new(p, p));
        }
    }
    let samples: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|pp| {
            let tl = reduce(params, &pp.w, &pp.z);
            let q = evaluate(params, quantity, pp)?;
            Ok((factors.0.value(params, &tl).norm(), factors.1.value(params, &tl).norm(), q))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let zs: Vec<f64> = samples.iter().map(|s| s.2.ln()).collect();
    Ok(CornerFit {
        corner,
        factors,
        fit: fit_plane(&xs, &ys, &zs)?,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub variable: Variable,
    pub fitted_order: f64,
    pub template: BergmanTerm,
    pub template_order: u32,
    pub orders_match: bool,
    /// max/min of `|∂K| · ∏|factor|^{power}` over the last half of the path.
    pub ratio_spread: f64,
    pub ratio_bounded: bool,
    pub pass: bool,
    pub label: String,
}

const ORDER_TOL: f64 = 0.1;
const RATIO_SPREAD: f64 = 3.0;

/// Singular order of `∂_var K` against the dominant Bergman template.
pub fn compare_orders(params: &DomainParams, path: &ApproachPath, var: Variable) -> Result<ComparisonReport> {
    let (w, z) = (Some(path.target.0.face), Some(path.target.1.face));
    let (template, template_order) = dominant_template(w, z)
        .ok_or_else(|| SzegoError::NoMatchingTemplate(format!("{} x {}", path.target.0.face, path.target.1.face)))?;
    let blow = fit_blowup(params, path, Quantity::Derivative(var))?;
    let fitted_order = -blow.fit.slope;
    let half = path.points.len() / 2;
    let ratios: Vec<f64> = path.points[half..]
        .iter()
        .zip(&blow.magnitudes[half..])
        .map(|(pp, m)| m * template.singular_size(params, &reduce(params, &pp.w, &pp.z), w, z))
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let ratio_spread = hi / lo;
    let orders_match = (fitted_order - template_order as f64).abs() <= ORDER_TOL;
    let ratio_bounded = ratio_spread < RATIO_SPREAD;
    Ok(ComparisonReport {
        variable: var,
        fitted_order,
        template: template.term,
        template_order,
        orders_match,
        ratio_spread,
        ratio_bounded,
        pass: orders_match && ratio_bounded,
        label: "singular order and bounded ratio only; the limit constant is not computed".into(),
    })
}
