//! Riccati-Bessel functions of complex argument and the single-valued
//! factorised variants that stay finite at channel thresholds.
//!
//! j_l(z) = z j_l^sph(z) solves u'' + (1 - l(l+1)/z^2) u = 0 with u ~ z^(l+1)
//! at the origin; y_l is the irregular partner normalised so y_0(z) = -cos z,
//! and h_l^(+-) = j_l +- i y_l are the outgoing/incoming waves.

use num_complex::Complex64;

use crate::error::{JostError, Result};

/// Series cutoff: below this |z| the trig closed forms cancel badly and the
/// ascending series is both safe and fast.
const SERIES_RADIUS: f64 = 0.5;
/// Terms stop once they no longer move the partial sum at this relative size.
const SERIES_EPS: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 400;

/// Regular Riccati-Bessel function j_l(z), entire in z.
pub fn riccati_j(l: u32, z: Complex64) -> Complex64 {
    let az = z.norm();
    if az < SERIES_RADIUS || (l >= 3 && az < (l + 1) as f64) {
        return j_series(l, z);
    }
    match l {
        0 => z.sin(),
        1 => z.sin() / z - z.cos(),
        2 => (3.0 / (z * z) - 1.0) * z.sin() - 3.0 * z.cos() / z,
        _ => {
            // upward recurrence is stable for j once |z| dominates the order
            let mut fm = z.sin();
            let mut f = z.sin() / z - z.cos();
            for ll in 1..l {
                let next = (2 * ll + 1) as f64 / z * f - fm;
                fm = f;
                f = next;
            }
            f
        }
    }
}

/// Irregular Riccati-Bessel function y_l(z). Negative orders follow the
/// reflection y_{-n} = (-1)^(n+1) j_{n-1}, which keeps h^(+-) consistent
/// across the Taylor-coefficient recursion.
pub fn riccati_y(l: i32, z: Complex64) -> Result<Complex64> {
    if l < 0 {
        let n = (-l) as u32;
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        return Ok(sign * riccati_j(n - 1, z));
    }
    if z == Complex64::ZERO && l > 0 {
        return Err(JostError::Singular(format!("y_{l} at z = 0")));
    }
    Ok(match l {
        0 => -z.cos(),
        1 => -z.cos() / z - z.sin(),
        _ => {
            // y is the dominant solution, so upward recurrence is always stable
            let mut fm = -z.cos();
            let mut f = -z.cos() / z - z.sin();
            for ll in 1..l {
                let next = (2 * ll + 1) as f64 / z * f - fm;
                fm = f;
                f = next;
            }
            f
        }
    })
}

/// Ascending series for j_l, used where the closed forms cancel or the
/// upward recurrence would be dominated by the irregular solution.
fn j_series(l: u32, z: Complex64) -> Complex64 {
    let w = (z / 2.0) * (z / 2.0);
    let mut term = (z / 2.0).powi(l as i32 + 1) / half_factorial_product(l);
    let mut sum = term;
    for n in 1..=SERIES_MAX_TERMS {
        term *= -w / (n as f64 * (l as f64 + 0.5 + n as f64));
        sum += term;
        if term.norm() < SERIES_EPS * sum.norm() {
            break;
        }
    }
    sum
}

/// Riccati-Hankel function h_l^(sign) = j_l + sign * i y_l; sign must be +-1.
///
/// Evaluated from the closed form
///   h^s_l(z) = (-si)^(l+1) e^(siz) sum_m (l+m)! / (m! (l-m)! ) (si/2z)^m,
/// never as j + i y: for closed channels |e^(siz)| is exponentially small
/// while j and y are both exponentially large, and the difference form loses
/// every significant digit right where the direct Jost system needs h most.
pub fn riccati_h(sign: i8, l: u32, z: Complex64) -> Result<Complex64> {
    if sign != 1 && sign != -1 {
        return Err(JostError::InvalidInput(format!("hankel sign must be +-1, got {sign}")));
    }
    if z == Complex64::ZERO && l > 0 {
        return Err(JostError::Singular(format!("h_{l} at z = 0")));
    }
    let si = f64::from(sign) * Complex64::I;
    let mut term = Complex64::ONE;
    let mut sum = term;
    for m in 0..l {
        term *= ((l + m + 1) * (l - m)) as f64 / (2 * (m + 1)) as f64 * si / z;
        sum += term;
    }
    Ok((-si).powu(l + 1) * (si * z).exp() * sum)
}

/// j_l(kr) / k^(l+1): even in k, hence single-valued in energy, and finite as
/// k -> 0 where it tends to r^(l+1) (2l+1)!!^-1 ... for l = 0 simply r.
pub fn tilde_j(l: u32, k: Complex64, r: Complex64) -> Complex64 {
    let z = k * r;
    if z.norm() >= SERIES_RADIUS {
        return riccati_j(l, z) / k.powi(l as i32 + 1);
    }
    // ascending series in (kr/2)^2 with the k^(l+1) factor divided out
    let w = (z / 2.0) * (z / 2.0);
    let mut term = (r / 2.0).powi(l as i32 + 1) / half_factorial_product(l);
    let mut sum = term;
    for n in 1..=SERIES_MAX_TERMS {
        term *= -w / (n as f64 * (l as f64 + 0.5 + n as f64));
        sum += term;
        if term.norm() < SERIES_EPS * sum.norm() {
            break;
        }
    }
    sum
}

/// k^l y_l(kr): the matching single-valued factorisation of the irregular
/// solution, finite as k -> 0 (but still singular at r = 0 for l > 0).
pub fn tilde_y(l: u32, k: Complex64, r: Complex64) -> Result<Complex64> {
    let z = k * r;
    if z.norm() >= SERIES_RADIUS {
        return Ok(k.powi(l as i32) * riccati_y(l as i32, z)?);
    }
    if r == Complex64::ZERO {
        if l == 0 {
            return Ok(Complex64::new(-1.0, 0.0));
        }
        return Err(JostError::Singular(format!("k^{l} y_{l}(kr) at r = 0")));
    }
    let w = (z / 2.0) * (z / 2.0);
    let c0 = -if l == 0 { 1.0 } else { half_factorial_product(l - 1) };
    let mut term = (2.0 / r).powi(l as i32) * c0;
    let mut sum = term;
    for n in 0..=SERIES_MAX_TERMS {
        term *= -w / ((n as f64 + 1.0) * (n as f64 + 0.5 - l as f64));
        sum += term;
        if n > 1 && term.norm() < SERIES_EPS * sum.norm() {
            break;
        }
    }
    Ok(sum)
}

/// prod_{j=0}^{l} (j + 1/2) = Gamma(l + 3/2) / Gamma(1/2)
fn half_factorial_product(l: u32) -> f64 {
    (0..=l).fold(1.0, |acc, j| acc * (j as f64 + 0.5))
}

/// n-th Taylor coefficient (about E_0) of tilde_j at fixed r:
/// g_{l,n} = (-mu r / hbar^2)^n / n!  *  j_{l+n}(k0 r) / k0^(l+n+1).
pub fn taylor_g(l: u32, n: u32, k0: Complex64, r: Complex64, mu: f64, hbar: f64) -> Complex64 {
    let base = -mu * r / (hbar * hbar);
    base.powu(n) / factorial(n) * tilde_j(l + n, k0, r)
}

/// n-th Taylor coefficient of tilde_y at fixed r:
/// t_{l,n} = (mu r / hbar^2)^n / n!  *  k0^(l-n) y_{l-n}(k0 r),
/// where negative orders reduce to tilde_j through the reflection rule.
pub fn taylor_t(l: u32, n: u32, k0: Complex64, r: Complex64, mu: f64, hbar: f64) -> Result<Complex64> {
    let base = mu * r / (hbar * hbar);
    let pref = base.powu(n) / factorial(n);
    let m = l as i32 - n as i32;
    if m >= 0 {
        return Ok(pref * tilde_y(m as u32, k0, r)?);
    }
    let mm = (-m) as u32;
    let sign = if mm % 2 == 0 { -1.0 } else { 1.0 };
    Ok(pref * sign * tilde_j(mm - 1, k0, r))
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// d/dz u_l = u_{l-1} - (l/z) u_l for both j and y; used as an
    /// independent derivative route in the identity tests.
    fn dj(l: u32, z: Complex64) -> Complex64 {
        if l == 0 {
            z.cos()
        } else {
            riccati_j(l - 1, z) - l as f64 / z * riccati_j(l, z)
        }
    }

    fn dy(l: u32, z: Complex64) -> Complex64 {
        if l == 0 {
            z.sin()
        } else {
            riccati_y(l as i32 - 1, z).unwrap() - l as f64 / z * riccati_y(l as i32, z).unwrap()
        }
    }

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(riccati_j(1, c(1.0, 0.0)).re, 0.30116867893975674, epsilon = 1e-15);
        assert_relative_eq!(
            riccati_y(1, c(1.0, 0.0)).unwrap().re,
            -1.3817732906760363,
            epsilon = 1e-15
        );
        let h = riccati_h(1, 0, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(h.re, 0.8414709848078965, epsilon = 1e-15);
        assert_relative_eq!(h.im, -0.5403023058681398, epsilon = 1e-15);
        // h_0^(+-)(z) = -+ i exp(+-iz)
        let z = c(0.7, 0.3);
        let hp = riccati_h(1, 0, z).unwrap();
        let hm = riccati_h(-1, 0, z).unwrap();
        assert!((hp + Complex64::I * (Complex64::I * z).exp()).norm() < 1e-15);
        assert!((hm - Complex64::I * (-Complex64::I * z).exp()).norm() < 1e-15);
        assert!(riccati_h(2, 0, z).is_err());
    }

    #[test]
    fn series_matches_closed_forms_across_seam() {
        for l in 0..=2u32 {
            for &z in &[c(0.49, 0.05), c(0.51, 0.05), c(0.3, -0.2), c(2.0, 1.0)] {
                let closed = match l {
                    0 => z.sin(),
                    1 => z.sin() / z - z.cos(),
                    _ => (3.0 / (z * z) - 1.0) * z.sin() - 3.0 * z.cos() / z,
                };
                let val = riccati_j(l, z);
                assert!(
                    (val - closed).norm() <= 1e-10 * closed.norm().max(1e-3),
                    "l={l} z={z}"
                );
            }
        }
    }

    #[test]
    fn recurrence_consistency_high_order() {
        // j_{l+1} = (2l+1)/z j_l - j_{l-1} must hold across the series/
        // recurrence switch
        for &z in &[c(2.5, 0.0), c(4.0, 1.5), c(9.0, -2.0), c(0.2, 0.1)] {
            for l in 1..8u32 {
                let lhs = riccati_j(l + 1, z);
                let rhs = (2 * l + 1) as f64 / z * riccati_j(l, z) - riccati_j(l - 1, z);
                let scale = lhs.norm().max(riccati_j(l - 1, z).norm()).max(1e-30);
                assert!((lhs - rhs).norm() < 1e-11 * scale, "l={l} z={z}");
            }
        }
    }

    #[test]
    fn negative_order_reflection() {
        let z = c(0.9, 0.1);
        assert!((riccati_y(-1, z).unwrap() - riccati_j(0, z)).norm() < 1e-15);
        assert!((riccati_y(-2, z).unwrap() + riccati_j(1, z)).norm() < 1e-15);
        assert!((riccati_y(-3, z).unwrap() - riccati_j(2, z)).norm() < 1e-15);
    }

    #[test]
    fn singular_at_origin() {
        assert!(riccati_y(1, Complex64::ZERO).is_err());
        assert_eq!(riccati_y(0, Complex64::ZERO).unwrap(), c(-1.0, 0.0));
        assert_eq!(riccati_j(3, Complex64::ZERO), Complex64::ZERO);
        assert!(tilde_y(2, c(0.0, 0.0), Complex64::ZERO).is_err());
    }

    #[test]
    fn tilde_limits_and_symmetry() {
        // k -> 0 limits: tilde_j -> r, tilde_y -> -1 for l = 0
        let tj = tilde_j(0, c(1e-9, 0.0), c(2.0, 0.0));
        assert_relative_eq!(tj.re, 2.0, epsilon = 1e-12);
        let ty = tilde_y(0, c(1e-9, 0.0), c(2.0, 0.0)).unwrap();
        assert_relative_eq!(ty.re, -1.0, epsilon = 1e-12);
        // frozen value: sin(sqrt(10))/sqrt(10)
        let k = c(10f64.sqrt(), 0.0);
        assert_relative_eq!(tilde_j(0, k, c(1.0, 0.0)).re, -0.0065407069689387, epsilon = 1e-14);
    }

    #[test]
    fn wronskian_of_hankel_pair() {
        // h^- dh^+/dr - dh^-/dr h^+ = 2ik with derivatives via the l-1
        // recurrence, an independent evaluation route
        for &k in &[c(1.3, -0.4), c(0.8, 0.9), c(3.0, 0.0)] {
            for l in 0..5u32 {
                let r = c(2.1, 0.0);
                let z = k * r;
                let hp = riccati_h(1, l, z).unwrap();
                let hm = riccati_h(-1, l, z).unwrap();
                let dhp = k * (dj(l, z) + Complex64::I * dy(l, z));
                let dhm = k * (dj(l, z) - Complex64::I * dy(l, z));
                let w = hm * dhp - dhm * hp;
                assert!((w - 2.0 * Complex64::I * k).norm() < 1e-10 * (1.0 + k.norm()), "l={l}");
            }
        }
    }

    proptest! {
        /// parity: j_l(-z) = (-1)^(l+1) j_l(z), y_l(-z) = (-1)^l y_l(z)
        #[test]
        fn parity(re in -8.0..8.0f64, im in -3.0..3.0f64, l in 0u32..7) {
            let z = c(re, im);
            prop_assume!(z.norm() > 1e-3);
            let sj = if l % 2 == 0 { 1.0 } else { -1.0 };
            let dj = (riccati_j(l, -z) + sj * riccati_j(l, z)).norm();
            prop_assert!(dj <= 1e-9 * riccati_j(l, z).norm().max(1e-6));
            let sy = if l % 2 == 0 { 1.0 } else { -1.0 };
            let yv = riccati_y(l as i32, z).unwrap();
            let dyv = (riccati_y(l as i32, -z).unwrap() - sy * yv).norm();
            prop_assert!(dyv <= 1e-9 * yv.norm().max(1e-6));
        }

        /// h^+ + h^- = 2 j
        #[test]
        fn hankel_sum(re in -6.0..6.0f64, im in -3.0..3.0f64, l in 0u32..7) {
            let z = c(re, im);
            prop_assume!(z.norm() > 1e-3);
            let hp = riccati_h(1, l, z).unwrap();
            let hm = riccati_h(-1, l, z).unwrap();
            let rhs = 2.0 * riccati_j(l, z);
            // roundoff of the cancellation scales with |h|, not |j|
            let scale = (hp.norm() + hm.norm()).max(1e-10);
            prop_assert!((hp + hm - rhs).norm() <= 1e-10 * scale);
        }

        /// tilde functions are even in k, so every sheet sees the same value
        #[test]
        fn tilde_even_in_k(re in -4.0..4.0f64, im in -2.0..2.0f64, l in 0u32..5) {
            let k = c(re, im);
            prop_assume!(k.norm() > 1e-6);
            let r = c(1.7, 0.0);
            let a = tilde_j(l, k, r);
            let b = tilde_j(l, -k, r);
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
            let ya = tilde_y(l, k, r).unwrap();
            let yb = tilde_y(l, -k, r).unwrap();
            prop_assert!((ya - yb).norm() <= 1e-12 * ya.norm().max(1e-300));
        }
    }

    /// Twice Richardson-extrapolated central difference of order n in energy,
    /// the independent oracle for the Taylor coefficients. Two levels kill
    /// the h^2 and h^4 error terms, which n = 4 needs to reach 1e-6.
    fn fd_energy_deriv<F: Fn(Complex64) -> Complex64>(f: F, e0: Complex64, n: u32, h: f64) -> Complex64 {
        let dn = |h: f64| -> Complex64 {
            let mut s = Complex64::ZERO;
            let mut binom = 1.0;
            for i in 0..=n {
                let x = e0 + (n as f64 / 2.0 - i as f64) * h;
                s += if i % 2 == 0 { binom } else { -binom } * f(x);
                binom = binom * (n - i) as f64 / (i + 1) as f64;
            }
            s / h.powi(n as i32)
        };
        let r1a = (4.0 * dn(h / 2.0) - dn(h)) / 3.0;
        let r1b = (4.0 * dn(h / 4.0) - dn(h / 2.0)) / 3.0;
        (16.0 * r1b - r1a) / 15.0
    }

    #[test]
    fn taylor_coefficients_match_finite_differences() {
        let e0 = c(5.0, 0.0);
        let r = c(1.3, 0.0);
        let k_of = |e: Complex64| (2.0 * e).sqrt();
        for l in 0..=1u32 {
            for n in 1..=4u32 {
                let fact = factorial(n);
                let g = taylor_g(l, n, k_of(e0), r, 1.0, 1.0) * fact;
                let fd = fd_energy_deriv(|e| tilde_j(l, k_of(e), r), e0, n, 0.16);
                assert!(
                    (g - fd).norm() <= 1e-6 * g.norm(),
                    "g l={l} n={n}: {g} vs {fd}"
                );
                let t = taylor_t(l, n, k_of(e0), r, 1.0, 1.0).unwrap() * fact;
                let fd = fd_energy_deriv(|e| tilde_y(l, k_of(e), r).unwrap(), e0, n, 0.16);
                assert!(
                    (t - fd).norm() <= 1e-6 * t.norm(),
                    "t l={l} n={n}: {t} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn taylor_zeroth_coefficients_are_tilde_functions() {
        let k0 = c(1.2, -0.3);
        let r = c(0.9, 0.0);
        assert!((taylor_g(2, 0, k0, r, 1.0, 1.0) - tilde_j(2, k0, r)).norm() < 1e-15);
        assert!(
            (taylor_t(2, 0, k0, r, 1.0, 1.0).unwrap() - tilde_y(2, k0, r).unwrap()).norm() < 1e-15
        );
    }

    #[test]
    fn taylor_t_crosses_into_negative_orders() {
        // l = 0, n = 1 with mu = hbar = 1: t = r * sin(k r)/k
        let k0 = c(1.7, 0.2);
        let r = c(1.1, 0.0);
        let t = taylor_t(0, 1, k0, r, 1.0, 1.0).unwrap();
        let expect = r * (k0 * r).sin() / k0;
        assert!((t - expect).norm() < 1e-14 * expect.norm());
    }
}
