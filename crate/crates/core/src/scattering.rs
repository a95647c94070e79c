//! Interaction matrix over the target basis and its exponential.
//!
//! Each ordered basis pair (i, j) exchanges the energy-conservation momentum
//! q_ij = (E_i − E_j)/ħv₀ with the electron. The dimensionless entry
//! 𝒽_ij multiplies b_{q_ij}; exponentiating −i𝒽 in the shift ring gives the
//! scattering matrix. A brute-force unitary on the explicit target ⊗ momentum
//! product space serves as the verification oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::em_couplings::{reduced_g_ec, reduced_g_eqe, CavityAxis};
use crate::hilbert::TargetSpace;
use crate::shift_algebra::{mat_exp, merge_tol, ShiftMatrix, ShiftPoly};
use crate::SimError;

/// Channel switches for diagnostics; impact parameters and speed live in
/// [`crate::params::PhysicalParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeConfig {
    pub enable_ec_x: bool,
    pub enable_ec_z: bool,
    pub enable_eqe: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            enable_ec_x: true,
            enable_ec_z: true,
            enable_eqe: true,
        }
    }
}

impl ProbeConfig {
    pub fn only_eqe() -> Self {
        ProbeConfig {
            enable_ec_x: false,
            enable_ec_z: false,
            enable_eqe: true,
        }
    }

    pub fn off() -> Self {
        ProbeConfig {
            enable_ec_x: false,
            enable_ec_z: false,
            enable_eqe: false,
        }
    }
}

/// Dimensionless interaction matrix with attached shift operators.
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    /// 𝒽 with b_{q_ij} attached entrywise.
    pub matrix: ShiftMatrix,
    /// Scalar entries 𝒽_ij (real in this geometry).
    pub h: DMatrix<f64>,
    /// Momentum assignments q_ij, nm⁻¹.
    pub q: DMatrix<f64>,
    /// Strongest would-be coupling from the outermost shell to outside the
    /// caps (truncation diagnostic; pair with the boundary population).
    pub boundary_out_coupling: f64,
    /// Nonrecoil bookkeeping warnings.
    pub warnings: Vec<String>,
}

/// Assemble 𝒽 over the target basis.
///
/// The e-QE channel enters with the sign that makes the upper polariton
/// couple to the coherent sum of the cavity and emitter routes,
/// 𝒽_{G,1±} = [Lg^{e-c}_x ± Lg^{e-QE}]/(√2·ħv₀) at resonance.
pub fn build_interaction(space: &TargetSpace, probe: &ProbeConfig) -> InteractionMatrix {
    let d = space.dim();
    let params = space.params();
    let hv = params.hbar_v0();
    let ops = space.lowering_ops();
    // (a† − a) and −(σ − σ†) as real antisymmetric matrices
    let ax = ops.a_x.transpose() - &ops.a_x;
    let az = ops.a_z.transpose() - &ops.a_z;
    let sq = ops.sigma.transpose() - &ops.sigma;

    let mut h = DMatrix::<f64>::zeros(d, d);
    let mut qm = DMatrix::<f64>::zeros(d, d);
    let mut m = ShiftMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue; // elastic entries vanish: q²K(|q|b) → 0 at q = 0
            }
            let q = (space.energy(i) - space.energy(j)) / hv;
            qm[(i, j)] = q;
            if q == 0.0 {
                continue;
            }
            let mut val = 0.0;
            if probe.enable_ec_x && ax[(i, j)] != 0.0 {
                val += reduced_g_ec(q, CavityAxis::X, params) * ax[(i, j)];
            }
            if probe.enable_ec_z && az[(i, j)] != 0.0 {
                val += reduced_g_ec(q, CavityAxis::Z, params) * az[(i, j)];
            }
            if probe.enable_eqe && sq[(i, j)] != 0.0 {
                val += reduced_g_eqe(q, params) * sq[(i, j)];
            }
            let hij = q.signum() * val / hv;
            if hij != 0.0 {
                h[(i, j)] = hij;
                *m.get_mut(i, j) = ShiftPoly::term(Complex64::new(hij, 0.0), q);
            }
        }
    }

    let mut warnings = Vec::new();
    // nonrecoil sanity: exchanged momenta small on the k₀ scale
    let q0 = params.omega_c() / params.v0();
    let k0 = params.k0();
    let mut max_q: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if h[(i, j)] != 0.0 {
                max_q = max_q.max(qm[(i, j)].abs());
            }
        }
    }
    if max_q > 10.0 * q0 {
        warnings.push(format!(
            "nonrecoil bookkeeping: max |q_ij| = {max_q:.3e} exceeds 10·ω_c/v0 = {:.3e}",
            10.0 * q0
        ));
    }
    if max_q > 0.0 && k0 / max_q < 10.0 {
        warnings.push(format!(
            "nonrecoil bookkeeping: k0/|q| = {:.2} below 10",
            k0 / max_q
        ));
    }
    // truncation boundary: the strongest coupling that would leave the caps
    // from the outermost shell (meaningful only together with the population
    // that actually reaches that shell after scattering)
    let caps = space.caps();
    let mut boundary: f64 = 0.0;
    for i in 0..d {
        let s = space.state(i);
        if s.manifold_n == caps.manifold_max {
            let q_up = params.hbar_omega_c / hv;
            let amp = (reduced_g_ec(q_up, CavityAxis::X, params)
                + reduced_g_eqe(q_up, params))
                * ((s.manifold_n + 1) as f64).sqrt()
                / hv;
            boundary = boundary.max(amp.abs());
        }
        if s.n_z == caps.n_z_max {
            let q_up = params.hbar_omega_c / hv;
            let amp =
                reduced_g_ec(q_up, CavityAxis::Z, params) * ((s.n_z + 1) as f64).sqrt() / hv;
            boundary = boundary.max(amp.abs());
        }
    }

    InteractionMatrix {
        matrix: m,
        h,
        q: qm,
        boundary_out_coupling: boundary,
        warnings,
    }
}

/// Single matrix element 𝒽_ij (the Fig. 2 sweep accessor).
pub fn matrix_element_h(
    space: &TargetSpace,
    probe: &ProbeConfig,
    i: usize,
    j: usize,
) -> Result<f64, SimError> {
    let d = space.dim();
    if i >= d || j >= d {
        return Err(SimError::InvalidParams(format!(
            "matrix_element_h: index ({i},{j}) out of range for dim {d}"
        )));
    }
    Ok(build_interaction(space, probe).h[(i, j)])
}

/// Scattering matrix S = exp(−i𝒽) in the shift ring.
pub fn scattering_matrix(
    space: &TargetSpace,
    probe: &ProbeConfig,
) -> Result<(ShiftMatrix, InteractionMatrix), SimError> {
    let im = build_interaction(space, probe);
    let s = mat_exp(&im.matrix, Complex64::new(0.0, -1.0))?;
    Ok((s, im))
}

/// Unitarity defect of S: total amplitude norm of S†S − I.
pub fn unitarity_defect(s: &ShiftMatrix) -> f64 {
    s.dagger_transpose().mul(s).off_identity_norm()
}

/// Dense matrix exponential (Taylor with scaling and squaring); the oracle's
/// own exponentiation route, independent of the shift-ring series.
pub fn expm_dense(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    // 1-norm scaling
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = Complex64::new(2f64.powi(-s), 0.0);
    let m = a.map(|c| c * scale);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=60 {
        term = (&term * &m).map(|c| c / k as f64);
        result += &term;
        let tn: f64 = term.iter().map(|c| c.norm()).sum();
        if tn < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Brute-force unitary on the explicit target ⊗ momentum space.
#[derive(Debug, Clone)]
pub struct JointOracle {
    /// Momentum grid, sorted ascending.
    pub momenta: Vec<f64>,
    /// exp(−iO) on the product space; index = target·n_k + momentum.
    pub unitary: DMatrix<Complex64>,
    /// Σ|𝒽| over transitions whose destination fell off the grid.
    pub dropped_weight: f64,
}

impl JointOracle {
    pub fn momentum_index(&self, k: f64) -> Option<usize> {
        let idx = self
            .momenta
            .partition_point(|kk| *kk < k - merge_tol(k.abs()));
        self.momenta.get(idx).and_then(|kk| {
            ((kk - k).abs() <= merge_tol(k.abs().max(kk.abs()))).then_some(idx)
        })
    }

    pub fn amplitude(&self, target_f: usize, k_f: f64, target_i: usize, k_i: f64) -> Complex64 {
        let n_k = self.momenta.len();
        match (self.momentum_index(k_f), self.momentum_index(k_i)) {
            (Some(a), Some(b)) => self.unitary[(target_f * n_k + a, target_i * n_k + b)],
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// Momentum grid closed under the interaction's shifts up to `depth`
/// applications, breadth-first from `seeds`, at most `max_len` points
/// (closest to the seed shell kept when the budget is hit).
pub fn shift_closed_grid(
    im: &InteractionMatrix,
    seeds: &[f64],
    depth: usize,
    max_len: usize,
) -> Vec<f64> {
    let d = im.h.nrows();
    let mut qs: Vec<f64> = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if im.h[(i, j)] != 0.0 {
                qs.push(im.q[(i, j)]);
            }
        }
    }
    let center: f64 = seeds.iter().sum::<f64>() / seeds.len().max(1) as f64;
    let mut grid: Vec<f64> = seeds.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    let mut frontier = grid.clone();
    for _ in 0..depth {
        let mut shell: Vec<f64> = Vec::new();
        for k in &frontier {
            for q in &qs {
                let kn = k - q;
                let present = |list: &[f64]| {
                    list.iter()
                        .any(|kk| (kk - kn).abs() <= merge_tol(kn.abs().max(kk.abs())))
                };
                if !present(&grid) && !present(&shell) {
                    shell.push(kn);
                }
            }
        }
        // nearest-to-center first so a budget cut keeps the relevant points
        shell.sort_by(|a, b| (a - center).abs().total_cmp(&(b - center).abs()));
        for kn in shell {
            if grid.len() >= max_len {
                break;
            }
            grid.push(kn);
        }
        grid.sort_by(|a, b| a.total_cmp(b));
        frontier = grid.clone();
        if grid.len() >= max_len {
            break;
        }
    }
    grid
}

/// Build the joint-space generator on `grid` and exponentiate it densely.
///
/// With `strict` set, any transition leaving the grid is an error; otherwise
/// the dropped coupling weight is reported for error budgeting.
pub fn joint_space_oracle(
    space: &TargetSpace,
    im: &InteractionMatrix,
    grid: &[f64],
    strict: bool,
) -> Result<JointOracle, SimError> {
    let d = space.dim();
    let mut momenta = grid.to_vec();
    momenta.sort_by(|a, b| a.total_cmp(b));
    let n_k = momenta.len();
    if d * n_k > 4096 {
        return Err(SimError::InvalidParams(format!(
            "joint oracle dimension {} too large",
            d * n_k
        )));
    }
    let find = |k: f64| -> Option<usize> {
        let idx = momenta.partition_point(|kk| *kk < k - merge_tol(k.abs()));
        momenta
            .get(idx)
            .and_then(|kk| ((kk - k).abs() <= merge_tol(k.abs().max(kk.abs()))).then_some(idx))
    };
    let mut o = DMatrix::<Complex64>::zeros(d * n_k, d * n_k);
    let mut dropped = 0.0;
    for i in 0..d {
        for j in 0..d {
            let hij = im.h[(i, j)];
            if hij == 0.0 {
                continue;
            }
            let q = im.q[(i, j)];
            for (b, k) in momenta.iter().enumerate() {
                // |i⟩⟨j| ⊗ b_q: (j, k) -> (i, k − q)
                match find(k - q) {
                    Some(a) => {
                        o[(i * n_k + a, j * n_k + b)] = Complex64::new(hij, 0.0);
                    }
                    None => {
                        if strict {
                            return Err(SimError::GridNotShiftClosed {
                                from: *k,
                                shift: q,
                            });
                        }
                        dropped += hij.abs();
                    }
                }
            }
        }
    }
    let unitary = expm_dense(&o.map(|c| c * Complex64::new(0.0, -1.0)));
    Ok(JointOracle {
        momenta,
        unitary,
        dropped_weight: dropped,
    })
}
