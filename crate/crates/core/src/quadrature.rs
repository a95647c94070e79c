//! Adaptive Gauss–Kronrod quadrature.
//!
//! G7–K15 panels with recursive bisection; the Kronrod/Gauss difference is
//! the per-panel error estimate. Used as the independent oracle for the
//! closed-form special functions and the Green's-function couplings.

/// Kronrod abscissae (positive half), 15-point rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Gauss-7 weights (abscissae are XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One G7–K15 panel: returns (kronrod value, |kronrod − gauss|, ∫|f|).
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    kron *= half;
    gauss *= half;
    res_abs *= half.abs();
    (kron, (kron - gauss).abs(), res_abs)
}

/// Adaptive integral of `f` over [a, b] to absolute tolerance `abs_tol`.
///
/// Panels are accepted at the requested tolerance or at the double-precision
/// roundoff floor of the panel, whichever comes first, so an unattainable
/// tolerance degrades to machine-relative accuracy instead of diverging.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    integrate_rec(&f, a, b, abs_tol.max(1e-300), 0)
}

fn integrate_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err, res_abs) = qk15(f, a, b);
    // 50·eps·∫|f| is the panel's roundoff floor (QUADPACK's rescale guard)
    let floor = 50.0 * f64::EPSILON * res_abs;
    if err <= tol.max(floor) || depth >= 30 || (b - a).abs() < 1e-300 {
        return value;
    }
    let mid = 0.5 * (a + b);
    integrate_rec(f, a, mid, 0.5 * tol, depth + 1) + integrate_rec(f, mid, b, 0.5 * tol, depth + 1)
}

/// Integral of an oscillatory integrand: [a, b] is pre-split into `segments`
/// panels (about one per half-period) that are then refined adaptively.
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    segments: usize,
) -> f64 {
    let n = segments.clamp(1, 4_000_000);
    let h = (b - a) / n as f64;
    let tol = abs_tol.max(1e-300) / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let x0 = a + i as f64 * h;
        let x1 = if i + 1 == n { b } else { x0 + h };
        total += integrate_rec(&f, x0, x1, tol, 0);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        let v = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-14);
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn needs_adaptivity() {
        // sharp peak at x = 0.7
        let v = integrate(|x: f64| 1.0 / ((x - 0.7).powi(2) + 1e-6), 0.0, 1.0, 1e-12);
        let exact = 1e3 * ((0.3f64 * 1e3).atan() + (0.7f64 * 1e3).atan());
        assert!((v - exact).abs() / exact < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn oscillatory_presplit() {
        // ∫₀^{20π} sin(x)/ (1+x) dx, reference from a very fine run
        let f = |x: f64| x.sin() / (1.0 + x);
        let reference = integrate_oscillatory(f, 0.0, 20.0 * PI, 1e-15, 4000);
        let v = integrate_oscillatory(f, 0.0, 20.0 * PI, 1e-12, 40);
        assert!((v - reference).abs() < 1e-10);
    }
}
