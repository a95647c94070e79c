//! Modified Bessel functions of the second kind, K₀, K₁, K₂.
//!
//! Two regimes: an ascending series with harmonic-number sums for x < 2, and
//! a Steed-type continued fraction for x ≥ 2. Both are good to full double
//! precision; the continued fraction avoids the catastrophic cancellation of
//! the series against I_n(x) at mid arguments.

use crate::SimError;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Arguments above this underflow K_n to zero (e⁻ˣ ~ 1e-305 at x = 700).
const UNDERFLOW_X: f64 = 700.0;

/// K_n(x) for n ∈ {0, 1, 2} and x > 0.
///
/// Relative error ≤ 1e-10 over x ∈ [1e-6, 700]; returns 0 beyond 700.
pub fn bessel_k(n: u8, x: f64) -> Result<f64, SimError> {
    if !(x > 0.0) {
        return Err(SimError::InvalidParams(format!(
            "bessel_k requires x > 0, got {x}"
        )));
    }
    if n > 2 {
        return Err(SimError::InvalidParams(format!(
            "bessel_k supports orders 0..=2, got {n}"
        )));
    }
    if x > UNDERFLOW_X {
        return Ok(0.0);
    }
    let (k0, k1) = k0_k1(x);
    Ok(match n {
        0 => k0,
        1 => k1,
        _ => k0 + 2.0 * k1 / x,
    })
}

/// K₀ and K₁ together; `x` must be positive (callers validate).
pub(crate) fn k0_k1(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x > UNDERFLOW_X {
        return (0.0, 0.0);
    }
    if x < 2.0 {
        k0_k1_series(x)
    } else {
        k0_k1_cf(x)
    }
}

/// Ascending series (Abramowitz & Stegun 9.6.11-13), x < 2.
fn k0_k1_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lx = (0.5 * x).ln();

    // I0 and Σ H_k y^k/(k!)² share the term recurrence t_k = t_{k-1} y/k².
    let mut i0 = 1.0;
    let mut s0 = 0.0;
    // I1/(x/2) and Σ [ψ(k+1)+ψ(k+2)] y^k/(k!(k+1)!)
    let mut i1 = 1.0;
    let mut s1 = -2.0 * EULER_GAMMA + 1.0; // k = 0 term: ψ(1)+ψ(2)
    let mut t = 1.0;
    let mut u = 1.0;
    let mut h = 0.0; // H_k
    for k in 1..64 {
        let kf = k as f64;
        h += 1.0 / kf;
        t *= y / (kf * kf);
        u *= y / (kf * (kf + 1.0));
        i0 += t;
        s0 += t * h;
        i1 += u;
        s1 += u * (-2.0 * EULER_GAMMA + 2.0 * h + 1.0 / (kf + 1.0));
        if t < 1e-18 * i0 && u < 1e-18 * i1 {
            break;
        }
    }
    let k0 = -(lx + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + lx * (0.5 * x) * i1 - 0.25 * x * s1;
    (k0, k1)
}

/// Steed continued fraction (CF2) for order μ = 0, x ≥ 2.
fn k0_k1_cf(x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    const MAX_IT: usize = 10_000;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_IT {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
