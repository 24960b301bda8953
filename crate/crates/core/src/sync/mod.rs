//! Gardner timing recovery on single- and dual-polarization 16-QAM and the modified
//! Cramer-Rao bound for the timing estimate.

mod fir;
mod timing;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

pub use timing::{
    analytic_s_curve, calibrate_detector_gain, jitter_curve, measure_noise_bandwidth,
    run_timing_loop, s_curve, write_jitter_csv, JitterRow, LoopTrace, PolMode, TimingLoopConfig,
};

/// Inputs of the timing MCRB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McrbParams {
    /// Loop noise bandwidth times symbol period.
    pub bn_t: f64,
    /// Pulse-shape parameter.
    pub xi: f64,
    /// Es/N0 per polarization, linear.
    pub esn0_linear: f64,
    /// Both polarizations carry the timing information, doubling Es.
    pub dual: bool,
}

/// `MCRB(tau) / T^2 = B_N T / (4 pi^2 xi) * N0 / Es`, halved in dual mode.
pub fn mcrb_tau_normalized(p: &McrbParams) -> f64 {
    let single = p.bn_t / (4.0 * PI * PI * p.xi) / p.esn0_linear;
    if p.dual {
        single / 2.0
    } else {
        single
    }
}

/// `T^2 int f^2 |G(f)|^2 df / int |G(f)|^2 df` for a raised-cosine `|G(f)|^2` with roll-off
/// `alpha`: `1/12 + alpha^2 (1/4 - 2/pi^2)`.
pub fn xi_for_rolloff(alpha: f64) -> f64 {
    1.0 / 12.0 + alpha * alpha * (0.25 - 2.0 / (PI * PI))
}

/// Gardner detector output `Re{mid * conj(strobe - prev_strobe)}`. Positive when sampling late.
#[inline]
pub fn gardner_ted(strobe: Complex64, midpoint: Complex64, prev_strobe: Complex64) -> f64 {
    let d = strobe - prev_strobe;
    midpoint.re * d.re + midpoint.im * d.im
}

/// Cubic Lagrange interpolation through `w = [x(-1), x(0), x(1), x(2)]`, evaluated at
/// `mu in [0, 1)` past `x(0)`. Farrow form: three multiplications by `mu`.
#[inline]
pub fn farrow_interpolate<T>(w: &[T; 4], mu: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let [xm1, x0, x1, x2] = *w;
    let v3 = (x2 - xm1) * (1.0 / 6.0) + (x0 - x1) * 0.5;
    let v2 = (xm1 + x1) * 0.5 - x0;
    let v1 = x1 - x2 * (1.0 / 6.0) - xm1 * (1.0 / 3.0) - x0 * 0.5;
    ((v3 * mu + v2) * mu + v1) * mu + x0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcrb_example() {
        let p = McrbParams {
            bn_t: 5e-4,
            xi: 0.852,
            esn0_linear: 10.0,
            dual: false,
        };
        let v = mcrb_tau_normalized(&p);
        assert!((v - 5e-4 / (4.0 * PI * PI * 0.852 * 10.0)).abs() < 1e-20);
        let d = mcrb_tau_normalized(&McrbParams { dual: true, ..p });
        assert_eq!(d, v / 2.0);
    }

    #[test]
    fn xi_limits() {
        assert!((xi_for_rolloff(0.0) - 1.0 / 12.0).abs() < 1e-15);
        // numerical integral of f^2 over a raised-cosine spectrum
        assert!((xi_for_rolloff(0.2) - 0.085_227_638_641_946_3).abs() < 1e-15);
    }

    #[test]
    fn ted_zero_without_transition() {
        let s = Complex64::new(0.3, -1.0);
        assert_eq!(gardner_ted(s, Complex64::new(5.0, 2.0), s), 0.0);
    }

    #[test]
    fn farrow_endpoints_and_ramp() {
        let w = [2.0, -1.0, 4.0, 7.5];
        assert_eq!(farrow_interpolate(&w, 0.0), -1.0);
        let ramp = [-3.0, -1.0, 1.0, 3.0];
        for mu in [0.1, 0.25, 0.5, 0.9] {
            assert!((farrow_interpolate(&ramp, mu) - (-1.0 + 2.0 * mu)).abs() < 1e-14);
        }
    }
}
