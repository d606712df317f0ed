//! Seeded invariant suites behind `szego verify`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use szego_core::kernel_terms::{
    base_integral, correction_integral, envelope_integral, envelope_sum, residue_sum, residue_term,
    shifted_integral, Correction, Sign, TermContext,
};
use szego_core::reproducing::{reproduce_check, TestFunction};
use szego_core::szego::{re_tau_sweep, remainder_decay};
use szego_core::*;

use crate::args::Suite;
use crate::output::SCHEMA;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured ≤ tol`.
    fn at_most(suite: &'static str, name: String, measured: f64, tol: f64) -> Self {
        Self {
            suite,
            name,
            measured,
            tol,
            pass: measured <= tol,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub suite: &'static str,
    pub seed: u64,
    pub beta: f64,
    pub h: f64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

const SUITES: [(Suite, &str); 6] = [
    (Suite::Residues, "residues"),
    (Suite::Decomposition, "decomposition"),
    (Suite::ClosedForms, "closed_forms"),
    (Suite::Symmetry, "symmetry"),
    (Suite::Decay, "decay"),
    (Suite::Repro, "repro"),
];

pub fn run_suite(p: &DomainParams, suite: Suite, seed: u64) -> Result<Report> {
    let mut checks = Vec::new();
    for (s, _) in SUITES.iter().filter(|(s, _)| suite == Suite::All || *s == suite) {
        // Each suite draws from its own stream so that suites are independent of each other.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (*s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        checks.extend(match s {
            Suite::Residues => residues(p, &mut rng)?,
            Suite::Decomposition => decomposition(p, &mut rng)?,
            Suite::ClosedForms => closed_forms(p, &mut rng)?,
            Suite::Symmetry => symmetry(p, &mut rng)?,
            Suite::Decay => decay(p)?,
            Suite::Repro => repro(p, &mut rng)?,
            Suite::All => unreachable!(),
        });
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let name = if suite == Suite::All {
        "all"
    } else {
        SUITES.iter().find(|(s, _)| *s == suite).unwrap().1
    };
    Ok(Report {
        schema: SCHEMA,
        command: "verify",
        suite: name,
        seed,
        beta: p.beta,
        h: p.h,
        passed: checks.len() - failed,
        failed,
        pass: failed == 0,
        checks,
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// The fixed grid `{0.5, 1+0.3i, 3, 5}` plus two seeded `τ` with either sign of `Re τ`.
fn tau_grid(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut t = vec![c(0.5, 0.0), c(1.0, 0.3), c(3.0, 0.0), c(5.0, 0.0)];
    for _ in 0..2 {
        t.push(c(rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0)));
    }
    t
}

fn per_tau<F>(p: &DomainParams, rng: &mut ChaCha8Rng, f: F) -> Result<Vec<(Complex64, f64)>>
where
    F: Fn(&TermContext) -> Result<f64> + Sync,
{
    tau_grid(rng)
        .into_par_iter()
        .map(|tau| {
            let worst = (-5..=5).map(|j| f(&TermContext::from_tau(*p, j, tau))).collect::<Result<Vec<f64>>>()?;
            Ok((tau, worst.into_iter().fold(0.0, f64::max)))
        })
        .collect()
}

fn residues(p: &DomainParams, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let rows = per_tau(p, rng, |ctx| {
        let i = base_integral(ctx)?.value;
        Ok(rel(residue_term(ctx) + shifted_integral(ctx)?.value, i))
    })?;
    Ok(rows
        .into_iter()
        .map(|(tau, e)| Check::at_most("residues", format!("I_j = R_j + J_j, j in -5..5, tau = {tau:.4}"), e, 1e-8))
        .collect())
}

fn decomposition(p: &DomainParams, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let rows = per_tau(p, rng, |ctx| {
        let j = shifted_integral(ctx)?.value;
        let m = envelope_integral(ctx)?.value;
        let e1 = correction_integral(ctx, Correction::First)?.value;
        let e2 = correction_integral(ctx, Correction::Second)?.value;
        let e3 = correction_integral(ctx, Correction::Third)?.value;
        let s = ctx.sign.value();
        Ok(rel(4.0 * (-s * ctx.tl.tau * ctx.params.h).exp() * (m - e1 - e2 + e3), j))
    })?;
    Ok(rows
        .into_iter()
        .map(|(tau, e)| {
            Check::at_most("decomposition", format!("J_j = 4e^(-th)(M - E1 - E2 + E3), tau = {tau:.4}"), e, 1e-8)
        })
        .collect())
}

fn closed_forms(p: &DomainParams, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    const N: i64 = 60;
    let samples: Vec<TauLambda> = (0..10)
        .map(|_| {
            let lr = rng.gen_range(-(p.b_max() - 0.5)..(p.b_max() - 0.5));
            let im = 2.0 * lr + rng.gen_range(-(PI - 1.0)..(PI - 1.0));
            TauLambda::new(p, c(rng.gen_range(-3.0..3.0), im), Complex64::from_polar(lr.exp(), rng.gen_range(-PI..PI)))
        })
        .collect();
    let rows: Vec<(TauLambda, f64, f64)> = samples
        .into_par_iter()
        .map(|tl| {
            let (mut sr, mut sm) = (c(0.0, 0.0), c(0.0, 0.0));
            for j in -N..=N {
                let ctx = TermContext::new(*p, j, tl);
                let lj = tl.lam.powi(j as i32);
                sr += residue_term(&ctx) * lj;
                sm += envelope_integral(&ctx)?.value * lj;
            }
            let s = Sign::of(tl.tau.re).value();
            sm *= 4.0 * (-s * tl.tau * p.h).exp();
            Ok((tl, rel(residue_sum(p, &tl)?.value, sr), rel(envelope_sum(p, &tl)?.total, sm)))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (tl, er, em) in rows {
        let at = format!("tau = {:.4}, lambda = {:.4}", tl.tau, tl.lam);
        out.push(Check::at_most("closed_forms", format!("residue sum vs partial sum, {at}"), er, 1e-8));
        out.push(Check::at_most("closed_forms", format!("envelope sum vs partial sum, {at}"), em, 1e-8));
    }
    Ok(out)
}

fn interior(rng: &mut ChaCha8Rng, p: &DomainParams, margin: f64) -> Point {
    let bm = p.b_max() - margin;
    let b = rng.gen_range(-bm..bm);
    let a = b + rng.gen_range(-(FRAC_PI_2 - margin)..(FRAC_PI_2 - margin));
    Point::from_coords(rng.gen_range(-2.0..2.0), a, b, rng.gen_range(0.0..1.0))
}

fn symmetry(p: &DomainParams, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let pairs: Vec<(Point, Point)> = (0..10).map(|_| (interior(rng, p, 0.1), interior(rng, p, 0.1))).collect();
    let rows: Vec<Vec<Check>> = pairs
        .into_par_iter()
        .enumerate()
        .map(|(k, (w, z))| {
            let d = kernel_via(p, &w, &z, Route::DirectSeries)?.value;
            let r = kernel_via(p, &w, &z, Route::ResiduePlusContour)?.value;
            let s = kernel(p, &z, &w)?.value;
            let diag = kernel(p, &w, &w)?.value;
            let tl = reduce(p, &w, &z);
            let i = base_integral(&TermContext::from_tau(*p, 1, tl.tau))?.value;
            let ic = base_integral(&TermContext::from_tau(*p, 1, -tl.tau.conj()))?.value;
            Ok(vec![
                Check::at_most("symmetry", format!("pair {k}: K(w,z) = conj K(z,w)"), rel(s.conj(), d), 1e-10),
                Check::at_most("symmetry", format!("pair {k}: direct vs contour route"), rel(r, d), 1e-7),
                Check::at_most(
                    "symmetry",
                    format!("pair {k}: K(w,w) real and positive (relative imaginary part)"),
                    if diag.re > 0.0 { diag.im.abs() / diag.re } else { f64::INFINITY },
                    1e-10,
                ),
                Check::at_most("symmetry", format!("pair {k}: I_1(-conj t) = conj I_1(t)"), rel(ic, i.conj()), 1e-10),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn decay(p: &DomainParams) -> Result<Vec<Check>> {
    let sweep = re_tau_sweep(&[4.0, 8.0, 12.0, 16.0, 20.0, 24.0], (0.3, 0.2), (-0.2, 0.1), true);
    let rep = remainder_decay(p, &sweep)?;
    let (rem, lead) = (rep.remainder.slope, rep.leading.slope);
    Ok(vec![
        Check::at_most(
            "decay",
            format!("remainder slope {rem:.4} within 10% of -h = {:.4} (relative deviation)", -p.h),
            (rem + p.h).abs() / p.h,
            0.1,
        ),
        Check::at_most(
            "decay",
            format!("leading slope {lead:.4} within 10% of -nu/2 = {:.4} (relative deviation)", -p.nu / 2.0),
            (lead + p.nu / 2.0).abs() / (p.nu / 2.0),
            0.1,
        ),
        Check::at_most("decay", "remainder slope + h <= 0 (decay bound)".into(), rem + p.h, 0.0),
        Check::at_most("decay", "remainder slope - leading slope <= -0.05".into(), rem - lead, -0.05),
    ])
}

fn repro(p: &DomainParams, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let points: Vec<Point> = (0..2)
        .map(|_| {
            let mut z = interior(rng, p, 0.3);
            z.z1 = c(z.z1.re / 2.0, z.z1.im);
            z
        })
        .collect();
    let mut out = Vec::new();
    for (k, z) in points.iter().enumerate() {
        for m in 0..4 {
            let f = TestFunction::new(m, 0.0, 3.0)?;
            let r = reproduce_check(p, &f, z)?;
            out.push(Check::at_most("repro", format!("point {k}, mode {m}: reproducing residual"), r.residual, 1e-4));
        }
    }
    Ok(out)
}
