//! Geometry of the worm domain `D'_β`, its distinguished boundary and the
//! reduced variables `(τ, λ)`.
//!
//! A point `(z1, z2)` is described in the plane `(a, b) = (Im z1, log|z2|²)`.
//! The domain is the open hexagon-like region `|a − b| < π/2`, `|b| < β − π/2`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SzegoError};

pub const DEFAULT_TOL_QUAD: f64 = 1e-12;
pub const DEFAULT_TOL_SERIES: f64 = 1e-12;

/// Domain parameter `β`, derived `ν`, contour height `h` and the working tolerances.
///
/// Both tolerances are relative: quadrature errors are measured against the
/// integrand envelope, series tails against the running partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub beta: f64,
    pub nu: f64,
    pub h: f64,
    pub tol_quad: f64,
    pub tol_series: f64,
}

/// Admissible open interval for the contour height.
pub fn h_interval(beta: f64) -> (f64, f64) {
    let nu = PI / (2.0 * beta - PI);
    (nu / 2.0, (1.5 * nu).min(0.5))
}

pub fn make_params(beta: f64, h: Option<f64>) -> Result<DomainParams> {
    if !(beta > PI) || !beta.is_finite() {
        return Err(SzegoError::BetaOutOfRange { beta });
    }
    let nu = PI / (2.0 * beta - PI);
    let (lo, hi) = h_interval(beta);
    let h = match h {
        Some(h) if h > lo && h < hi => h,
        Some(h) => return Err(SzegoError::HOutOfRange { h, lo, hi }),
        None => (lo + hi) / 2.0,
    };
    Ok(DomainParams {
        beta,
        nu,
        h,
        tol_quad: DEFAULT_TOL_QUAD,
        tol_series: DEFAULT_TOL_SERIES,
    })
}

impl DomainParams {
    pub fn with_tolerances(mut self, tol_quad: f64, tol_series: f64) -> Result<Self> {
        for t in [tol_quad, tol_series] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SzegoError::InvalidTolerance(t));
            }
        }
        self.tol_quad = tol_quad;
        self.tol_series = tol_series;
        Ok(self)
    }

    /// `2β − π`, the frequency of the second hyperbolic cosine.
    pub fn c(&self) -> f64 {
        2.0 * self.beta - PI
    }

    /// Half-height of the domain in `log|z2|²`: `β − π/2`.
    pub fn b_max(&self) -> f64 {
        self.beta - FRAC_PI_2
    }

    /// Same parameters with another admissible contour height.
    pub fn with_h(self, h: f64) -> Result<Self> {
        let fresh = make_params(self.beta, Some(h))?;
        Ok(Self { h: fresh.h, ..self })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl Point {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    /// Build from `(Re z1, Im z1, log|z2|², arg z2 / 2π)`.
    pub fn from_coords(x: f64, a: f64, b: f64, theta: f64) -> Self {
        Self {
            z1: Complex64::new(x, a),
            z2: Complex64::from_polar((b / 2.0).exp(), 2.0 * PI * theta),
        }
    }

    /// `(Im z1, log|z2|²)`.
    pub fn ab(&self) -> (f64, f64) {
        (self.z1.im, self.z2.norm_sqr().ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub w: Point,
    pub z: Point,
}

impl PointPair {
    pub fn new(w: Point, z: Point) -> Self {
        Self { w, z }
    }

    pub fn swapped(&self) -> Self {
        Self { w: self.z, z: self.w }
    }
}

/// Reduced variables `τ = w1 − conj z1`, `λ = w2 conj z2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauLambda {
    pub tau: Complex64,
    pub lam: Complex64,
    pub in_d: bool,
}

impl TauLambda {
    pub fn new(params: &DomainParams, tau: Complex64, lam: Complex64) -> Self {
        Self {
            tau,
            lam,
            in_d: in_reduced_set(params, tau, lam),
        }
    }
}

/// Membership of `(τ, λ)` in the reduced set
/// `|Im τ − log|λ|²| < π`, `e^{−(β−π/2)} < |λ| < e^{β−π/2}`.
pub fn in_reduced_set(params: &DomainParams, tau: Complex64, lam: Complex64) -> bool {
    reduced_violation(params, tau, lam).is_none()
}

/// Points within this distance of a defining equality count as boundary points, so that
/// rounded face coordinates are never classified as interior.
pub const BOUNDARY_GUARD: f64 = 1e-13;

pub(crate) fn reduced_violation(params: &DomainParams, tau: Complex64, lam: Complex64) -> Option<String> {
    let r = lam.norm();
    if !(r > 0.0) {
        return Some("lambda = 0".into());
    }
    let lb = 2.0 * r.ln();
    if !((tau.im - lb).abs() < PI - BOUNDARY_GUARD) {
        return Some(format!("|Im tau - log|lambda|^2| = {} >= pi", (tau.im - lb).abs()));
    }
    if !(r.ln().abs() < params.b_max() - BOUNDARY_GUARD) {
        return Some(format!("|log|lambda|| = {} >= beta - pi/2 = {}", r.ln().abs(), params.b_max()));
    }
    None
}

pub fn contains(params: &DomainParams, w: &Point) -> bool {
    violation(params, w).is_none()
}

/// First violated defining inequality, if any.
pub fn violation(params: &DomainParams, w: &Point) -> Option<String> {
    if w.z2 == Complex64::new(0.0, 0.0) || !w.z2.norm().is_finite() || !w.z1.im.is_finite() {
        return Some("z2 = 0".into());
    }
    let (a, b) = w.ab();
    if !((a - b).abs() < FRAC_PI_2 - BOUNDARY_GUARD) {
        return Some(format!("|Im z1 - log|z2|^2| = {} >= pi/2", (a - b).abs()));
    }
    if !(b.abs() < params.b_max() - BOUNDARY_GUARD) {
        return Some(format!("|log|z2|^2| = {} >= beta - pi/2 = {}", b.abs(), params.b_max()));
    }
    None
}

/// Slack of the defining inequalities: the smaller of `π/2 − |a − b|` and `β − π/2 − |b|`.
pub fn slack(params: &DomainParams, w: &Point) -> f64 {
    let (a, b) = w.ab();
    (FRAC_PI_2 - (a - b).abs()).min(params.b_max() - b.abs())
}

pub fn reduce(params: &DomainParams, w: &Point, z: &Point) -> TauLambda {
    TauLambda::new(params, w.z1 - z.z1.conj(), w.z2 * z.z2.conj())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceKind {
    E1,
    E2,
    E3,
    E4,
    ObliqueRight,
    ObliqueLeft,
    HorizTop,
    HorizBottom,
}

impl FaceKind {
    pub const ALL: [FaceKind; 8] = [
        FaceKind::E1,
        FaceKind::E2,
        FaceKind::E3,
        FaceKind::E4,
        FaceKind::ObliqueRight,
        FaceKind::ObliqueLeft,
        FaceKind::HorizTop,
        FaceKind::HorizBottom,
    ];
    pub const DISTINGUISHED: [FaceKind; 4] = [FaceKind::E1, FaceKind::E2, FaceKind::E3, FaceKind::E4];

    pub fn is_distinguished(self) -> bool {
        matches!(self, FaceKind::E1 | FaceKind::E2 | FaceKind::E3 | FaceKind::E4)
    }

    /// Range of the `aux` coordinate on a non-distinguished face.
    ///
    /// Oblique faces are parameterised by `s = log|z2|²`, horizontal ones by `t = Im z1`.
    pub fn aux_range(self, params: &DomainParams) -> Option<(f64, f64)> {
        let bm = params.b_max();
        let beta = params.beta;
        match self {
            FaceKind::ObliqueRight | FaceKind::ObliqueLeft => Some((-bm, bm)),
            FaceKind::HorizTop => Some((beta - PI, beta)),
            FaceKind::HorizBottom => Some((-beta, -(beta - PI))),
            _ => None,
        }
    }

    /// Boundary coordinates `(a, b)` for a given `aux`.
    fn ab(self, params: &DomainParams, aux: f64) -> (f64, f64) {
        let bm = params.b_max();
        let beta = params.beta;
        match self {
            FaceKind::E1 => (beta, bm),
            FaceKind::E2 => (beta - PI, bm),
            FaceKind::E3 => (-beta, -bm),
            FaceKind::E4 => (-(beta - PI), -bm),
            FaceKind::ObliqueRight => (aux + FRAC_PI_2, aux),
            FaceKind::ObliqueLeft => (aux - FRAC_PI_2, aux),
            FaceKind::HorizTop => (aux, bm),
            FaceKind::HorizBottom => (aux, -bm),
        }
    }

    /// Inward retreat in `(a, b)` that makes every saturated inequality slack by one unit.
    pub(crate) fn inward(self) -> (f64, f64) {
        match self {
            FaceKind::ObliqueRight => (-1.0, 0.0),
            FaceKind::ObliqueLeft => (1.0, 0.0),
            FaceKind::HorizTop | FaceKind::E2 => (0.0, -1.0),
            FaceKind::HorizBottom | FaceKind::E4 => (0.0, 1.0),
            FaceKind::E1 => (-2.0, -1.0),
            FaceKind::E3 => (2.0, 1.0),
        }
    }
}

impl fmt::Display for FaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FaceKind::E1 => "E1",
            FaceKind::E2 => "E2",
            FaceKind::E3 => "E3",
            FaceKind::E4 => "E4",
            FaceKind::ObliqueRight => "ObliqueRight",
            FaceKind::ObliqueLeft => "ObliqueLeft",
            FaceKind::HorizTop => "HorizTop",
            FaceKind::HorizBottom => "HorizBottom",
        };
        f.write_str(s)
    }
}

impl FromStr for FaceKind {
    type Err = SzegoError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Ok(match key.as_str() {
            "e1" => FaceKind::E1,
            "e2" => FaceKind::E2,
            "e3" => FaceKind::E3,
            "e4" => FaceKind::E4,
            "obliqueright" | "right" => FaceKind::ObliqueRight,
            "obliqueleft" | "left" => FaceKind::ObliqueLeft,
            "horiztop" | "top" => FaceKind::HorizTop,
            "horizbottom" | "bottom" => FaceKind::HorizBottom,
            _ => return Err(SzegoError::UnknownFace(s.to_string())),
        })
    }
}

/// A point on the boundary; `aux` is ignored on E1..E4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFace {
    pub face: FaceKind,
    pub x: f64,
    pub theta: f64,
    pub aux: f64,
}

impl BoundaryFace {
    pub fn new(face: FaceKind, x: f64, theta: f64, aux: f64) -> Self {
        Self { face, x, theta, aux }
    }

    pub fn distinguished(face: FaceKind, x: f64, theta: f64) -> Self {
        Self { face, x, theta, aux: 0.0 }
    }

    fn validate(&self, params: &DomainParams) -> Result<()> {
        if !(0.0..1.0).contains(&self.theta) {
            return Err(SzegoError::FaceRange {
                face: self.face.to_string(),
                value: self.theta,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if let Some((lo, hi)) = self.face.aux_range(params) {
            if !(self.aux >= lo && self.aux <= hi) {
                return Err(SzegoError::FaceRange {
                    face: self.face.to_string(),
                    value: self.aux,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// `(a, b)` of the boundary point.
    pub fn ab(&self, params: &DomainParams) -> Result<(f64, f64)> {
        self.validate(params)?;
        Ok(self.face.ab(params, self.aux))
    }
}

pub fn face_point(params: &DomainParams, face: &BoundaryFace) -> Result<Point> {
    let (a, b) = face.ab(params)?;
    Ok(Point::from_coords(face.x, a, b, face.theta))
}

/// The boundary point retreated inward by `eps` slack units.
pub fn retreat(params: &DomainParams, face: &BoundaryFace, eps: f64) -> Result<Point> {
    let (a, b) = face.ab(params)?;
    let (da, db) = face.face.inward();
    Ok(Point::from_coords(face.x, a + eps * da, b + eps * db, face.theta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachPath {
    pub target: (BoundaryFace, BoundaryFace),
    pub epsilons: Vec<f64>,
    pub points: Vec<PointPair>,
}

/// Points retreating by each `ε` from the target faces, at fixed `Re z1` and `θ`.
pub fn make_path(
    params: &DomainParams,
    target: (BoundaryFace, BoundaryFace),
    eps_list: &[f64],
) -> Result<ApproachPath> {
    if eps_list.is_empty() {
        return Err(SzegoError::InvalidPath("empty epsilon list".into()));
    }
    for w in eps_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(SzegoError::InvalidPath("epsilons must be strictly decreasing".into()));
        }
    }
    let mut points = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(SzegoError::InvalidPath(format!("epsilon {eps} is not positive")));
        }
        let w = retreat(params, &target.0, eps)?;
        let z = retreat(params, &target.1, eps)?;
        for p in [&w, &z] {
            if let Some(reason) = violation(params, p) {
                return Err(SzegoError::PathLeavesDomain { eps, reason });
            }
        }
        points.push(PointPair::new(w, z));
    }
    Ok(ApproachPath {
        target,
        epsilons: eps_list.to_vec(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_defaults() {
        let p = make_params(2.0 * PI, None).unwrap();
        assert!((p.nu - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.h - 1.0 / 3.0).abs() < 1e-15);
        let q = make_params(1.5 * PI, None).unwrap();
        assert!((q.nu - 0.5).abs() < 1e-15);
        assert!((q.h - 0.375).abs() < 1e-15);
        assert!(matches!(make_params(PI, None), Err(SzegoError::BetaOutOfRange { .. })));
        assert!(matches!(make_params(2.0 * PI, Some(0.1)), Err(SzegoError::HOutOfRange { .. })));
        assert!(matches!(make_params(2.0 * PI, Some(0.5)), Err(SzegoError::HOutOfRange { .. })));
        assert!(make_params(2.0 * PI, Some(0.2)).is_ok());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let p = make_params(2.0 * PI, None).unwrap();
        assert!(p.with_tolerances(0.0, 1e-10).is_err());
        assert!(p.with_tolerances(1e-10, f64::NAN).is_err());
    }

    #[test]
    fn membership_examples() {
        let p = make_params(2.0 * PI, None).unwrap();
        assert!(contains(&p, &Point::new(c(0.0, 0.0), c(1.0, 0.0))));
        let e1 = Point::new(c(0.0, p.beta), c((p.b_max() / 2.0).exp(), 0.0));
        assert!(!contains(&p, &e1));
        assert!(!contains(&p, &Point::new(c(0.0, 0.0), c(0.0, 0.0))));
    }

    #[test]
    fn reduce_examples() {
        let p = make_params(2.0 * PI, None).unwrap();
        let o = Point::new(c(0.0, 0.0), c(1.0, 0.0));
        let tl = reduce(&p, &o, &o);
        assert_eq!(tl.tau, c(0.0, 0.0));
        assert_eq!(tl.lam, c(1.0, 0.0));
        assert!(tl.in_d);
        let w = face_point(&p, &BoundaryFace::distinguished(FaceKind::E1, 0.3, 0.0)).unwrap();
        let z = face_point(&p, &BoundaryFace::distinguished(FaceKind::E1, -1.0, 0.2)).unwrap();
        let tl = reduce(&p, &w, &z);
        assert!((tl.tau.im - 2.0 * p.beta).abs() < 1e-12);
        assert!(!tl.in_d);
        // E1 against E3 cancels in Im τ and stays in the reduced set
        let z = face_point(&p, &BoundaryFace::distinguished(FaceKind::E3, -1.0, 0.2)).unwrap();
        let tl = reduce(&p, &w, &z);
        assert!(tl.tau.im.abs() < 1e-12);
        assert!(tl.in_d);
    }

    #[test]
    fn face_point_examples() {
        let p = make_params(2.0 * PI, None).unwrap();
        let e1 = face_point(&p, &BoundaryFace::distinguished(FaceKind::E1, 0.0, 0.0)).unwrap();
        assert!((e1.z1 - c(0.0, 2.0 * PI)).norm() < 1e-15);
        assert!((e1.z2 - c((0.75 * PI).exp(), 0.0)).norm() < 1e-13);
        let e3 = face_point(&p, &BoundaryFace::distinguished(FaceKind::E3, 1.0, 0.5)).unwrap();
        assert!((e3.z1 - c(1.0, -2.0 * PI)).norm() < 1e-15);
        assert!((e3.z2 - c(-(-0.75 * PI).exp(), 0.0)).norm() < 1e-15);
        let r = face_point(&p, &BoundaryFace::new(FaceKind::ObliqueRight, 0.0, 0.0, 0.0)).unwrap();
        assert!((r.z1 - c(0.0, FRAC_PI_2)).norm() < 1e-15);
        assert!((r.z2 - c(1.0, 0.0)).norm() < 1e-15);
        let bad = BoundaryFace::new(FaceKind::HorizTop, 0.0, 0.0, 0.0);
        assert!(matches!(face_point(&p, &bad), Err(SzegoError::FaceRange { .. })));
    }

    #[test]
    fn faces_satisfy_their_equalities() {
        let p = make_params(2.5 * PI, None).unwrap();
        for face in FaceKind::ALL {
            let aux = face.aux_range(&p).map(|(lo, hi)| 0.3 * lo + 0.7 * hi).unwrap_or(0.0);
            let pt = face_point(&p, &BoundaryFace::new(face, 0.4, 0.25, aux)).unwrap();
            let (a, b) = pt.ab();
            let oblique = (FRAC_PI_2 - (a - b).abs()).abs();
            let horiz = (p.b_max() - b.abs()).abs();
            assert!(oblique.min(horiz) < 1e-12, "{face}");
            if face.is_distinguished() {
                assert!(oblique < 1e-12 && horiz < 1e-12, "{face}");
            }
            assert!(!contains(&p, &pt));
        }
    }

    #[test]
    fn path_examples() {
        let p = make_params(2.0 * PI, None).unwrap();
        let e1 = BoundaryFace::distinguished(FaceKind::E1, 0.0, 0.0);
        let path = make_path(&p, (e1, e1), &[0.1, 0.05, 0.025]).unwrap();
        assert_eq!(path.points.len(), 3);
        let slacks: Vec<f64> = path.points.iter().map(|pp| slack(&p, &pp.w)).collect();
        assert!(slacks[0] > slacks[1] && slacks[1] > slacks[2]);
        assert!(matches!(make_path(&p, (e1, e1), &[10.0]), Err(SzegoError::PathLeavesDomain { .. })));
        assert!(matches!(make_path(&p, (e1, e1), &[]), Err(SzegoError::InvalidPath(_))));
        assert!(make_path(&p, (e1, e1), &[0.1, 0.2]).is_err());

        let r = BoundaryFace::new(FaceKind::ObliqueRight, 0.0, 0.0, 0.3);
        let path = make_path(&p, (r, r), &[0.1, 0.01, 0.001]).unwrap();
        let gaps: Vec<f64> = path
            .points
            .iter()
            .map(|pp| {
                let tl = reduce(&p, &pp.w, &pp.z);
                PI - (tl.tau.im - 2.0 * tl.lam.norm().ln())
            })
            .collect();
        assert!(gaps.iter().all(|g| *g > 0.0));
        assert!(gaps[2] < 0.0021 && gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }

    #[test]
    fn face_names_round_trip() {
        for f in FaceKind::ALL {
            assert_eq!(f.to_string().parse::<FaceKind>().unwrap(), f);
        }
        assert!(matches!("E5".parse::<FaceKind>(), Err(SzegoError::UnknownFace(_))));
    }
}
