//! Overflow-safe elementary helpers shared by the integrands.

use num_complex::Complex64;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sign with the convention `sgn(0) = +1`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `log cosh z`, finite for any real part (branch is irrelevant once exponentiated).
#[inline]
pub(crate) fn ln_cosh(z: Complex64) -> Complex64 {
    let s = sgn(z.re);
    let sz = z * s;
    sz + (-2.0 * sz).exp().ln_1p_c() - std::f64::consts::LN_2
}

trait Ln1p {
    fn ln_1p_c(self) -> Complex64;
}

impl Ln1p for Complex64 {
    #[inline]
    fn ln_1p_c(self) -> Complex64 {
        if self.norm() < 1e-4 {
            self - self * self / 2.0 + self * self * self / 3.0
        } else {
            (Complex64::new(1.0, 0.0) + self).ln()
        }
    }
}

/// `(e^{x/2} - 1) / x`, with its removable value `1/2` at `x = 0`.
pub fn exprel_half(x: Complex64) -> Complex64 {
    if x.norm() < 0.5 {
        // sum_{n>=1} (x/2)^n / n! / x = (1/2) sum_{n>=1} (x/2)^{n-1} / n!
        let y = x / 2.0;
        let mut term = Complex64::new(0.5, 0.0);
        let mut acc = term;
        for n in 2..40 {
            term *= y / n as f64;
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        acc
    } else {
        ((x / 2.0).exp() - 1.0) / x
    }
}

/// `X(u) = e^{-2 s u} / (1 + e^{-2 s u})` with `s = sgn(Re u)`, always evaluated on
/// the decaying side.
#[inline]
pub(crate) fn logistic_tail(u: Complex64) -> Complex64 {
    let s = sgn(u.re);
    let e = (-2.0 * s * u).exp();
    e / (1.0 + e)
}

/// Lower bound of `2 |cosh(x + iy)| e^{-|x|}` over real `x`.
pub(crate) fn cosh_floor(y: f64) -> f64 {
    let phi = 2.0 * y;
    if phi.cos() >= 0.0 {
        1.0
    } else {
        phi.sin().abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_cosh_matches_direct_for_moderate_arguments() {
        for &(a, b) in &[(0.3, 0.2), (-2.0, 1.1), (5.0, -0.7), (0.0, 0.4)] {
            let z = Complex64::new(a, b);
            let d = ln_cosh(z).exp() - z.cosh();
            assert!(d.norm() < 1e-13 * z.cosh().norm());
        }
    }

    #[test]
    fn ln_cosh_survives_huge_arguments() {
        let v = ln_cosh(Complex64::new(1e5, 0.3));
        assert!((v.re - (1e5 - std::f64::consts::LN_2)).abs() < 1e-9);
        assert!((v.im - 0.3).abs() < 1e-12);
    }

    #[test]
    fn exprel_half_is_continuous_across_the_switch() {
        for &r in &[0.49999, 0.50001] {
            let x = Complex64::from_polar(r, 0.7);
            let reference = ((x / 2.0).exp() - 1.0) / x;
            assert!((exprel_half(x) - reference).norm() < 1e-14);
        }
        assert_eq!(exprel_half(Complex64::new(0.0, 0.0)), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn cosh_floor_is_a_lower_bound() {
        for k in 0..50 {
            let y = 0.03 * k as f64 + 0.01;
            let m = cosh_floor(y);
            for i in 0..200 {
                let x = -5.0 + 0.05 * i as f64;
                let c = Complex64::new(x, y).cosh().norm();
                assert!(2.0 * c * (-x.abs()).exp() >= m * (1.0 - 1e-12));
            }
        }
    }
}
