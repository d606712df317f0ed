use std::fmt;
use std::io;

use rayon::prelude::*;
use serde::Serialize;
use szego_core::analysis::{classify, fit_blowup, fit_corner, Quantity, TermActivation};
use szego_core::reproducing::{pair, TestFunction, MIN_TEST_VALUE};
use szego_core::szego::re_tau_sweep;
use szego_core::*;

use crate::args::{Command, Format, Global, SingularArgs, TargetArgs, TracePath};
use crate::output::{Cx, Sink, SCHEMA};
use crate::verify;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(SzegoError),
    Io(io::Error),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                SzegoError::OutsideDomain { .. } | SzegoError::NoDecay(_) => 2,
                SzegoError::ToleranceNotMet { .. } | SzegoError::SeriesDiverged { .. } => 3,
                SzegoError::PathLeavesDomain { .. } => 4,
                SzegoError::FitUnstable(_) => 5,
                _ => 1,
            },
            CliError::Failed(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Failed(s) => write!(f, "{s}"),
        }
    }
}

impl From<SzegoError> for CliError {
    fn from(e: SzegoError) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn params(g: &Global) -> CliResult<DomainParams> {
    Ok(make_params(g.beta, g.h)?.with_tolerances(g.tol_quad, g.tol_series)?)
}

pub fn run(g: &Global, cmd: &Command) -> CliResult<()> {
    let p = params(g)?;
    let default = match cmd {
        Command::Trace(_) => Format::Csv,
        _ => Format::Json,
    };
    let format = g.format.unwrap_or(default);
    // Inputs are validated before any output file is created.
    let open = || Sink::open(format, g.out.as_deref());
    match cmd {
        Command::Eval { w, z } => eval(&p, w, z, &mut open()?),
        Command::Trace(t) => match &t.path {
            TracePath::Approach { target, eps, geometric } => {
                let eps = schedule(eps.as_deref(), geometric.as_deref())?;
                trace_approach(&p, target, &eps, &mut open()?)
            }
            TracePath::ReTau { re_tau, w_ab, z_ab, co_rotate } => {
                trace_re_tau(&p, re_tau, pair_of(w_ab, "--w-ab")?, pair_of(z_ab, "--z-ab")?, *co_rotate, &mut open()?)
            }
        },
        Command::Singular(s) => singular(&p, s, &mut open()?),
        Command::Compare { target, eps, var } => compare(&p, target, eps, *var, &mut open()?),
        Command::Repro { z, mode, center, width, delta_b } => {
            repro(&p, z, *mode, *center, *width, *delta_b, &mut open()?)
        }
        Command::Verify { suite } => {
            let report = verify::run_suite(&p, *suite, g.seed)?;
            let mut sink = open()?;
            match sink.format {
                Format::Json => sink.json(&report)?,
                Format::Csv => sink.csv(&report.checks)?,
            }
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Failed(format!("{} of {} checks failed", report.failed, report.checks.len())))
            }
        }
    }
}

fn pair_of(v: &[f64], flag: &str) -> CliResult<(f64, f64)> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("{flag} expects two numbers"))),
    }
}

fn schedule(eps: Option<&[f64]>, geometric: Option<&[f64]>) -> CliResult<Vec<f64>> {
    let list = match (eps, geometric) {
        (Some(e), _) => e.to_vec(),
        (None, Some([start, ratio, count])) => {
            if !(*start > 0.0 && *ratio > 0.0 && *ratio < 1.0 && *count >= 1.0 && count.fract() == 0.0) {
                return Err(CliError::Usage("--geometric expects start > 0, 0 < ratio < 1, integer count".into()));
            }
            (0..*count as i32).map(|k| start * ratio.powi(k)).collect()
        }
        (None, Some(_)) => return Err(CliError::Usage("--geometric expects start,ratio,count".into())),
        (None, None) => Vec::new(),
    };
    if list.is_empty() {
        return Err(CliError::Usage("the epsilon list is empty".into()));
    }
    Ok(list)
}

fn target_faces(p: &DomainParams, t: &TargetArgs) -> CliResult<(BoundaryFace, BoundaryFace)> {
    let make = |face: FaceKind| {
        let aux = t.aux.unwrap_or_else(|| face.aux_range(p).map_or(0.0, |(lo, hi)| 0.5 * (lo + hi)));
        let bf = BoundaryFace::new(face, t.x, t.theta, aux);
        bf.ab(p)?;
        Ok::<_, CliError>(bf)
    };
    Ok((make(t.face_w)?, make(t.face_z.unwrap_or(t.face_w))?))
}

fn point_json(w: &Point) -> [Cx; 2] {
    [w.z1.into(), w.z2.into()]
}

#[derive(Serialize)]
struct RouteOut {
    value: Cx,
    err_est: f64,
    n_terms: i64,
    tail_bound: f64,
    quad_err: f64,
    near_pole: bool,
    branch_gap: Option<f64>,
}

impl From<&KernelValue> for RouteOut {
    fn from(k: &KernelValue) -> Self {
        Self {
            value: k.value.into(),
            err_est: k.err_est(),
            n_terms: k.n_terms,
            tail_bound: k.tail_bound,
            quad_err: k.quad_err,
            near_pole: k.near_pole,
            branch_gap: k.branch_gap,
        }
    }
}

#[derive(Serialize)]
struct Estimate {
    value: Cx,
    err_est: f64,
}

#[derive(Serialize)]
struct LeadingOut {
    value: Cx,
    err_est: f64,
    prefactor: Cx,
    oblique_pole: Cx,
    oblique_geometric: Cx,
    constant: Cx,
    correction: Cx,
}

#[derive(Serialize)]
struct EvalReport {
    schema: u32,
    command: &'static str,
    beta: f64,
    h: f64,
    w: [Cx; 2],
    z: [Cx; 2],
    tau: Cx,
    lambda: Cx,
    direct: RouteOut,
    contour: RouteOut,
    route_gap: f64,
    routes_agree: bool,
    leading: LeadingOut,
    remainder: Estimate,
}

#[derive(Serialize)]
struct EvalRow {
    beta: f64,
    h: f64,
    direct_re: f64,
    direct_im: f64,
    direct_err: f64,
    contour_re: f64,
    contour_im: f64,
    contour_err: f64,
    routes_agree: bool,
    leading_re: f64,
    leading_im: f64,
    leading_err: f64,
    remainder_re: f64,
    remainder_im: f64,
    remainder_err: f64,
    n_terms: i64,
}

fn routes_agree(a: &KernelValue, b: &KernelValue) -> (f64, bool) {
    let gap = (a.value - b.value).norm();
    let allowed = (2.0 * (a.err_est() + b.err_est())).max(1e-7 * a.value.norm());
    (gap, gap <= allowed)
}

fn eval(p: &DomainParams, w: &Point, z: &Point, sink: &mut Sink) -> CliResult<()> {
    let direct = kernel_via(p, w, z, Route::DirectSeries)?;
    let contour = kernel_via(p, w, z, Route::ResiduePlusContour)?;
    let lead = leading_term(p, w, z)?;
    let tl = reduce(p, w, z);
    let rem = direct.value - lead.value;
    let rem_err = direct.err_est() + lead.err_est;
    let (gap, agree) = routes_agree(&direct, &contour);
    match sink.format {
        Format::Json => sink.json(&EvalReport {
            schema: SCHEMA,
            command: "eval",
            beta: p.beta,
            h: p.h,
            w: point_json(w),
            z: point_json(z),
            tau: tl.tau.into(),
            lambda: tl.lam.into(),
            direct: (&direct).into(),
            contour: (&contour).into(),
            route_gap: gap,
            routes_agree: agree,
            leading: LeadingOut {
                value: lead.value.into(),
                err_est: lead.err_est,
                prefactor: lead.prefactor.into(),
                oblique_pole: lead.parts.oblique_pole.into(),
                oblique_geometric: lead.parts.oblique_geometric.into(),
                constant: lead.parts.constant.into(),
                correction: lead.parts.correction.into(),
            },
            remainder: Estimate {
                value: rem.into(),
                err_est: rem_err,
            },
        })?,
        Format::Csv => sink.csv(&[EvalRow {
            beta: p.beta,
            h: p.h,
            direct_re: direct.value.re,
            direct_im: direct.value.im,
            direct_err: direct.err_est(),
            contour_re: contour.value.re,
            contour_im: contour.value.im,
            contour_err: contour.err_est(),
            routes_agree: agree,
            leading_re: lead.value.re,
            leading_im: lead.value.im,
            leading_err: lead.err_est,
            remainder_re: rem.re,
            remainder_im: rem.im,
            remainder_err: rem_err,
            n_terms: direct.n_terms,
        }])?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ApproachRow {
    eps: f64,
    abs_kernel: f64,
    kernel_err: f64,
    abs_dw1_kernel: f64,
    dw1_kernel_err: f64,
    abs_leading: f64,
    leading_err: f64,
    abs_remainder: f64,
    remainder_err: f64,
    n_terms: i64,
}

fn trace_approach(p: &DomainParams, t: &TargetArgs, eps: &[f64], sink: &mut Sink) -> CliResult<()> {
    let path = make_path(p, target_faces(p, t)?, eps)?;
    let rows: Vec<ApproachRow> = path
        .points
        .par_iter()
        .zip(path.epsilons.par_iter())
        .map(|(pp, &e)| {
            let k = kernel(p, &pp.w, &pp.z)?;
            let d = kernel_derivative(p, Variable::W1, &pp.w, &pp.z)?;
            let l = leading_term(p, &pp.w, &pp.z)?;
            Ok(ApproachRow {
                eps: e,
                abs_kernel: k.value.norm(),
                kernel_err: k.err_est(),
                abs_dw1_kernel: d.value.norm(),
                dw1_kernel_err: d.err_est(),
                abs_leading: l.value.norm(),
                leading_err: l.err_est,
                abs_remainder: (k.value - l.value).norm(),
                remainder_err: k.err_est() + l.err_est,
                n_terms: k.n_terms,
            })
        })
        .collect::<Result<_>>()?;
    sink.rows(&rows)?;
    Ok(())
}

#[derive(Serialize)]
struct ReTauRow {
    re_tau: f64,
    abs_kernel: f64,
    kernel_err: f64,
    abs_leading: f64,
    leading_err: f64,
    abs_remainder: f64,
    remainder_err: f64,
}

fn trace_re_tau(
    p: &DomainParams,
    re_tau: &[f64],
    w_ab: (f64, f64),
    z_ab: (f64, f64),
    co_rotate: bool,
    sink: &mut Sink,
) -> CliResult<()> {
    if re_tau.is_empty() {
        return Err(CliError::Usage("the Re tau list is empty".into()));
    }
    let sweep = re_tau_sweep(re_tau, w_ab, z_ab, co_rotate);
    let rows: Vec<ReTauRow> = sweep
        .par_iter()
        .zip(re_tau.par_iter())
        .map(|(pp, &t)| {
            let k = kernel(p, &pp.w, &pp.z)?;
            let l = leading_term(p, &pp.w, &pp.z)?;
            Ok(ReTauRow {
                re_tau: t,
                abs_kernel: k.value.norm(),
                kernel_err: k.err_est(),
                abs_leading: l.value.norm(),
                leading_err: l.err_est,
                abs_remainder: (k.value - l.value).norm(),
                remainder_err: k.err_est() + l.err_est,
            })
        })
        .collect::<Result<_>>()?;
    sink.rows(&rows)?;
    Ok(())
}

fn quantity(s: &str) -> CliResult<Quantity> {
    if s == "kernel" {
        return Ok(Quantity::Kernel);
    }
    s.parse::<Variable>()
        .map(Quantity::Derivative)
        .map_err(|_| CliError::Usage(format!("unknown quantity '{s}' (kernel, w1, w2, conj_z1, conj_z2)")))
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FitOut {
    Blowup {
        slope: f64,
        intercept: f64,
        r2: f64,
        rms_residual: f64,
        n_points: usize,
        eps: Vec<f64>,
        magnitudes: Vec<f64>,
    },
    Corner {
        a: f64,
        b: f64,
        c: f64,
        r2: f64,
        rms_residual: f64,
        n_points: usize,
    },
}

#[derive(Serialize)]
struct SingularReport {
    schema: u32,
    command: &'static str,
    face_w: FaceKind,
    face_z: FaceKind,
    activations: Vec<TermActivation>,
    fit: Option<FitOut>,
}

fn singular(p: &DomainParams, s: &SingularArgs, sink: &mut Sink) -> CliResult<()> {
    let (fw, fz) = target_faces(p, &s.target)?;
    let activations = classify(p, (&fw, &fz));
    let q = quantity(&s.quantity)?;
    let fit = match (&s.eps, &s.eps2) {
        (None, None) => None,
        (None, Some(_)) => return Err(CliError::Usage("--eps2 requires --eps".into())),
        (Some(e), None) => {
            let e = schedule(Some(e), None)?;
            let path = make_path(p, (fw, fz), &e)?;
            let b = fit_blowup(p, &path, q)?;
            Some(FitOut::Blowup {
                slope: b.fit.slope,
                intercept: b.fit.intercept,
                r2: b.fit.r2,
                rms_residual: b.fit.rms_residual,
                n_points: b.fit.n_points,
                eps: b.eps,
                magnitudes: b.magnitudes,
            })
        }
        (Some(e1), Some(e2)) => {
            let (e1, e2) = (schedule(Some(e1), None)?, schedule(Some(e2), None)?);
            let cf = fit_corner(p, fw.face, fw.x, fw.theta, &e1, &e2, q)?;
            Some(FitOut::Corner {
                a: cf.fit.a,
                b: cf.fit.b,
                c: cf.fit.c,
                r2: cf.fit.r2,
                rms_residual: cf.fit.rms_residual,
                n_points: cf.fit.n_points,
            })
        }
    };
    match sink.format {
        Format::Json => sink.json(&SingularReport {
            schema: SCHEMA,
            command: "singular",
            face_w: fw.face,
            face_z: fz.face,
            activations,
            fit,
        })?,
        Format::Csv => sink.csv(&activations)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    variable: Variable,
    fitted_order: f64,
    template: szego_core::analysis::BergmanTerm,
    template_order: u32,
    orders_match: bool,
    ratio_spread: f64,
    ratio_bounded: bool,
    pass: bool,
    fit_rms_residual: f64,
}

#[derive(Serialize)]
struct CompareReport {
    schema: u32,
    command: &'static str,
    face_w: FaceKind,
    face_z: FaceKind,
    #[serde(flatten)]
    row: CompareRow,
    label: String,
}

fn compare(p: &DomainParams, t: &TargetArgs, eps: &[f64], var: Variable, sink: &mut Sink) -> CliResult<()> {
    let eps = schedule(Some(eps), None)?;
    let (fw, fz) = target_faces(p, t)?;
    let path = make_path(p, (fw, fz), &eps)?;
    let r = szego_core::analysis::compare_orders(p, &path, var)?;
    let fit = fit_blowup(p, &path, Quantity::Derivative(var))?;
    let row = CompareRow {
        variable: r.variable,
        fitted_order: r.fitted_order,
        template: r.template,
        template_order: r.template_order,
        orders_match: r.orders_match,
        ratio_spread: r.ratio_spread,
        ratio_bounded: r.ratio_bounded,
        pass: r.pass,
        fit_rms_residual: fit.fit.rms_residual,
    };
    match sink.format {
        Format::Json => sink.json(&CompareReport {
            schema: SCHEMA,
            command: "compare",
            face_w: fw.face,
            face_z: fz.face,
            row,
            label: r.label,
        })?,
        Format::Csv => sink.csv(&[row])?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ReproRow {
    mode: i64,
    experimental: bool,
    value_re: f64,
    value_im: f64,
    expected_re: f64,
    expected_im: f64,
    residual: f64,
    err_est: f64,
}

#[derive(Serialize)]
struct ReproReport {
    schema: u32,
    command: &'static str,
    z: [Cx; 2],
    center: f64,
    width: f64,
    delta_b: f64,
    #[serde(flatten)]
    row: ReproRow,
    per_face: [Cx; 4],
}

fn repro(
    p: &DomainParams,
    z: &Point,
    mode: i64,
    center: f64,
    width: f64,
    delta_b: f64,
    sink: &mut Sink,
) -> CliResult<()> {
    let f = TestFunction::new(mode, center, width)?;
    if let Some(v) = domain::violation(p, z) {
        return Err(SzegoError::OutsideDomain { violated: v }.into());
    }
    let expected = f.eval(z);
    if expected.norm() < MIN_TEST_VALUE {
        return Err(SzegoError::TestPointDegenerate(expected.norm()).into());
    }
    let r = pair(p, &f, z, delta_b)?;
    let row = ReproRow {
        mode,
        experimental: f.is_experimental(),
        value_re: r.value.re,
        value_im: r.value.im,
        expected_re: expected.re,
        expected_im: expected.im,
        residual: (r.value - expected).norm() / expected.norm(),
        err_est: r.err_est / expected.norm(),
    };
    match sink.format {
        Format::Json => sink.json(&ReproReport {
            schema: SCHEMA,
            command: "repro",
            z: point_json(z),
            center,
            width,
            delta_b,
            row,
            per_face: r.per_face.map(Cx::from),
        })?,
        Format::Csv => sink.csv(&[row])?,
    }
    Ok(())
}
