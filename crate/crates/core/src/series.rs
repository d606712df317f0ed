//! Bilateral series `Σ_j t_j` with geometric tail control.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SzegoError};

/// Cap applied to the empirical ratio estimate outside near-pole mode.
const RATIO_CAP: f64 = 0.95;
const RATIO_WINDOW: usize = 5;
const HARD_MAX_TERMS: i64 = 2_000_000;

pub(crate) struct SeriesPlan {
    /// Known asymptotic geometric rates for `j → +∞` and `j → −∞`.
    pub rate_pos: f64,
    pub rate_neg: f64,
    /// Relative tolerance on the tails.
    pub tol: f64,
    /// Absolute floor for the tolerance reference.
    pub abs_floor: f64,
    pub near_pole: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesOutcome {
    pub value: Complex64,
    pub quad_err: f64,
    pub tail_bound: f64,
    /// Largest `|j|` included.
    pub n_terms: i64,
}

struct Side {
    dir: i64,
    rate: f64,
    sum: Complex64,
    err: f64,
    mags: Vec<f64>,
    next: i64,
    done: bool,
    tail: f64,
    cap: i64,
}

impl Side {
    fn new(dir: i64, rate: f64, tol: f64, near_pole: bool) -> Result<Self> {
        if !(rate < 1.0) {
            return Err(SzegoError::SeriesDiverged { ratio: rate });
        }
        let predicted = if rate <= 0.0 {
            1.0
        } else {
            (tol.ln() / rate.ln()).max(1.0)
        };
        let factor = if near_pole { 100.0 } else { 10.0 };
        let cap = ((factor * predicted) as i64 + 50).min(HARD_MAX_TERMS);
        Ok(Self {
            dir,
            rate,
            sum: Complex64::new(0.0, 0.0),
            err: 0.0,
            mags: Vec::new(),
            next: 1,
            done: false,
            tail: 0.0,
            cap,
        })
    }

    fn ratio(&self, near_pole: bool) -> Option<f64> {
        let n = self.mags.len();
        if n < RATIO_WINDOW {
            return None;
        }
        let w = &self.mags[n - RATIO_WINDOW..];
        let mut r: f64 = 0.0;
        for k in 0..RATIO_WINDOW - 1 {
            if w[k] > 0.0 {
                r = r.max(w[k + 1] / w[k]);
            } else if w[k + 1] > 0.0 {
                r = f64::INFINITY;
            }
        }
        let r = if near_pole { r } else { r.min(RATIO_CAP) };
        Some(r.max(self.rate))
    }
}

pub(crate) fn sum_bilateral<F>(term: F, plan: &SeriesPlan) -> Result<SeriesOutcome>
where
    F: Fn(i64) -> Result<(Complex64, f64)> + Sync,
{
    let (t0, e0) = term(0)?;
    let mut sides = [
        Side::new(1, plan.rate_pos, plan.tol, plan.near_pole)?,
        Side::new(-1, plan.rate_neg, plan.tol, plan.near_pole)?,
    ];
    let mut batch = 4usize;
    loop {
        if sides.iter().all(|s| s.done) {
            let n_terms = sides.iter().map(|s| s.next - 1).max().unwrap_or(0);
            return Ok(SeriesOutcome {
                value: t0 + sides[0].sum + sides[1].sum,
                quad_err: e0 + sides[0].err + sides[1].err,
                tail_bound: sides[0].tail + sides[1].tail,
                n_terms,
            });
        }
        for idx in 0..2 {
            if sides[idx].done {
                continue;
            }
            let other_sum = sides[1 - idx].sum;
            let side = &mut sides[idx];
            let start = side.next;
            let js: Vec<i64> = (start..start + batch as i64).map(|k| k * side.dir).collect();
            let vals: Vec<Result<(Complex64, f64)>> = js.par_iter().map(|&j| term(j)).collect();
            for v in vals {
                let (t, e) = v?;
                side.sum += t;
                side.err += e;
                side.mags.push(t.norm());
                side.next += 1;
                let reference = (t0 + side.sum + other_sum).norm().max(plan.abs_floor);
                if let Some(r) = side.ratio(plan.near_pole) {
                    if r < 1.0 {
                        let last = *side.mags.last().unwrap();
                        let bound = last * r / (1.0 - r);
                        if bound <= 0.5 * plan.tol * reference {
                            side.done = true;
                            side.tail = bound;
                            break;
                        }
                    }
                }
                if side.next > side.cap {
                    let last = *side.mags.last().unwrap();
                    let r = side.ratio(true).unwrap_or(1.0);
                    let bound = if r < 1.0 { last * r / (1.0 - r) } else { f64::INFINITY };
                    let value = t0 + side.sum + other_sum;
                    return Err(SzegoError::ToleranceNotMet {
                        re: value.re,
                        im: value.im,
                        err_est: bound,
                        tol: plan.tol,
                    });
                }
            }
        }
        batch = (batch * 2).min(256);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sided_geometric_series() {
        // Σ_j r^{|j|} = (1 + r) / (1 − r)
        let r = 0.6;
        let plan = SeriesPlan {
            rate_pos: r,
            rate_neg: r,
            tol: 1e-13,
            abs_floor: 1e-300,
            near_pole: false,
        };
        let out = sum_bilateral(|j| Ok((Complex64::new(r.powi(j.abs() as i32), 0.0), 0.0)), &plan).unwrap();
        let exact = (1.0 + r) / (1.0 - r);
        assert!((out.value.re - exact).abs() < 1e-12 * exact);
        assert!(out.tail_bound < 1e-12 * exact);
        assert!(out.n_terms > 50);
    }

    #[test]
    fn slow_series_uses_the_known_rate() {
        let r = 0.999;
        let plan = SeriesPlan {
            rate_pos: r,
            rate_neg: 0.1,
            tol: 1e-10,
            abs_floor: 1e-300,
            near_pole: true,
        };
        let out = sum_bilateral(
            |j| Ok((Complex64::new(if j >= 0 { r.powi(j as i32) } else { 0.1f64.powi(-j as i32) }, 0.0), 0.0)),
            &plan,
        )
        .unwrap();
        let exact = 1.0 / (1.0 - r) + 0.1 / 0.9;
        assert!((out.value.re - exact).abs() <= 1e-10 * exact + out.tail_bound);
    }

    #[test]
    fn divergent_rate_is_rejected() {
        let plan = SeriesPlan {
            rate_pos: 1.0,
            rate_neg: 0.5,
            tol: 1e-10,
            abs_floor: 1e-300,
            near_pole: false,
        };
        assert!(matches!(
            sum_bilateral(|_| Ok((Complex64::new(1.0, 0.0), 0.0)), &plan),
            Err(SzegoError::SeriesDiverged { .. })
        ));
    }
}
