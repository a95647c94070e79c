//! Initial-state preparation, propagation through S, reduced states and the
//! emission power spectrum.
//!
//! The joint state is stored as one electron wavepacket per target basis
//! state, |φ⟩ = Σᵢ |ψᵢ⟩⊗|wᵢ⟩. Tracing the electron out is an inner-product
//! table over the wᵢ; tracing the target out sums |wᵢ(k)|².

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::electron::{MomentumPopulations, Wavepacket};
use crate::em_couplings::cavity_dipole_moment;
use crate::hilbert::{BareState, TargetSpace};
use crate::shift_algebra::{apply_poly, ShiftMatrix};
use crate::SimError;

/// Degeneracy tolerance for secular grouping in the power spectrum, eV.
pub const SECULAR_TOL: f64 = 1e-9;

/// Product state Σᵢ |ψᵢ⟩⊗|wᵢ⟩ after (or before) scattering.
#[derive(Debug, Clone)]
pub struct JointState {
    packets: Vec<Wavepacket>,
}

impl JointState {
    pub fn packets(&self) -> &[Wavepacket] {
        &self.packets
    }

    /// Σᵢ ⟨wᵢ|wᵢ⟩; 1 after unitary scattering of a normalized input.
    pub fn norm_sqr(&self) -> f64 {
        self.packets.iter().map(|w| w.norm_sqr()).sum()
    }
}

/// Dense target density matrix in the polariton basis.
#[derive(Debug, Clone)]
pub struct TargetDensity {
    pub mat: DMatrix<Complex64>,
}

impl TargetDensity {
    pub fn pure(amps: &[Complex64]) -> TargetDensity {
        let d = amps.len();
        let mat = DMatrix::from_fn(d, d, |i, j| amps[i] * amps[j].conj());
        TargetDensity { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue (Hermitian part).
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = self.mat.clone().symmetric_eigen();
        eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Hermitian to 1e-12·scale, trace 1 to 1e-10, PSD to a −1e-10 floor.
    pub fn validate(&self) -> Result<(), SimError> {
        let scale = self.trace().norm().max(1.0);
        if self.hermiticity_defect() > 1e-12 * scale.max(1e3) {
            return Err(SimError::InvalidParams(format!(
                "density not Hermitian: defect {:.2e}",
                self.hermiticity_defect()
            )));
        }
        if (self.trace() - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(SimError::InvalidParams(format!(
                "density trace {} != 1",
                self.trace()
            )));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(SimError::InvalidParams(format!(
                "density not PSD: min eigenvalue {min:.2e}"
            )));
        }
        Ok(())
    }
}

/// Emission lines (energy, weight) plus the Lorentzian sampling width.
#[derive(Debug, Clone)]
pub struct SpectrumLines {
    lines: Vec<(f64, f64)>, // sorted by energy
    pub sigma: f64,
}

impl SpectrumLines {
    pub fn lines(&self) -> &[(f64, f64)] {
        &self.lines
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|(_, w)| w).sum()
    }

    /// Broadened intensity at energy e: Σ w·(σ/2π)/((e−e₀)² + σ²/4).
    pub fn sample(&self, e: f64) -> f64 {
        self.lines
            .iter()
            .map(|(e0, w)| {
                w * self.sigma / (2.0 * std::f64::consts::PI)
                    / ((e - e0).powi(2) + self.sigma * self.sigma / 4.0)
            })
            .sum()
    }
}

/// Sample the broadened spectrum at the given energies.
pub fn peak_heights(lines: &SpectrumLines, targets: &[f64]) -> Vec<f64> {
    targets.iter().map(|e| lines.sample(*e)).collect()
}

/// |0⟩_z ⊗ [√(1−f²)|0⟩ₓ + f|1⟩ₓ] ⊗ |g⟩ in the polariton basis (weak
/// coherent driving of the cavity; f is the one-photon amplitude).
pub fn pinem_initial(space: &TargetSpace, f: f64) -> Result<Vec<Complex64>, SimError> {
    if !(0.0..=1.0).contains(&f) {
        return Err(SimError::InvalidParams(format!(
            "pinem_initial: f must lie in [0, 1], got {f}"
        )));
    }
    space.bare_to_polariton(&[
        (
            BareState {
                n_z: 0,
                n_x: 0,
                qe_excited: false,
            },
            Complex64::new((1.0 - f * f).sqrt(), 0.0),
        ),
        (
            BareState {
                n_z: 0,
                n_x: 1,
                qe_excited: false,
            },
            Complex64::new(f, 0.0),
        ),
    ])
}

/// (1/2)|0⟩_z ⊗ [√3|0⟩ₓ + e^{iθ}|1⟩ₓ] ⊗ |g⟩ in the polariton basis.
pub fn superposition_initial(space: &TargetSpace, theta: f64) -> Vec<Complex64> {
    space
        .bare_to_polariton(&[
            (
                BareState {
                    n_z: 0,
                    n_x: 0,
                    qe_excited: false,
                },
                Complex64::new(3f64.sqrt() / 2.0, 0.0),
            ),
            (
                BareState {
                    n_z: 0,
                    n_x: 1,
                    qe_excited: false,
                },
                Complex64::from_polar(0.5, theta),
            ),
        ])
        .expect("fixed first-manifold state is inside any valid caps")
}

/// Populated states must sit at least one shell inside the caps so that
/// scattering cannot leak through the truncation boundary.
fn check_padding(space: &TargetSpace, amps: &[Complex64]) -> Result<(), SimError> {
    let caps = space.caps();
    for (i, a) in amps.iter().enumerate() {
        if a.norm() <= 1e-12 {
            continue;
        }
        let s = space.state(i);
        if s.manifold_n + 1 > caps.manifold_max {
            return Err(SimError::InsufficientPadding {
                state: format!("{s:?}"),
                cap: caps.manifold_max,
            });
        }
        if caps.n_z_max > 0 && s.n_z + 1 > caps.n_z_max {
            return Err(SimError::InsufficientPadding {
                state: format!("{s:?}"),
                cap: caps.n_z_max,
            });
        }
    }
    Ok(())
}

/// Propagate |target⟩⊗|w⟩ through S: wᵢ = Σⱼ S_ij·cⱼ applied to w.
pub fn scatter(
    space: &TargetSpace,
    s: &ShiftMatrix,
    target_amps: &[Complex64],
    w: &Wavepacket,
) -> Result<JointState, SimError> {
    let d = space.dim();
    if s.dim() != d || target_amps.len() != d {
        return Err(SimError::InvalidParams(
            "scatter: dimension mismatch between space, S and amplitudes".into(),
        ));
    }
    check_padding(space, target_amps)?;
    let mut packets = Vec::with_capacity(d);
    for i in 0..d {
        let mut entries = Vec::new();
        for (j, c) in target_amps.iter().enumerate() {
            if c.norm() <= 1e-16 {
                continue;
            }
            let p = s.get(i, j);
            if p.is_zero() {
                continue;
            }
            let wj = apply_poly(p, w);
            entries.extend(wj.entries().iter().map(|(k, a)| (*k, a * c)));
        }
        packets.push(Wavepacket::from_entries(w.k0(), entries));
    }
    Ok(JointState { packets })
}

/// Reduced target density after scattering a mixed target state:
/// ρᵢⱼ = Σ S_{i,m₁} ρ⁰_{m₁m₂} S*_{j,m₂} · Σ_k B(k)B*(k − [q_{i,m₁} − q_{j,m₂}]).
pub fn scatter_density(
    space: &TargetSpace,
    s: &ShiftMatrix,
    rho0: &TargetDensity,
    w: &Wavepacket,
) -> Result<TargetDensity, SimError> {
    let d = space.dim();
    if s.dim() != d || rho0.dim() != d {
        return Err(SimError::InvalidParams(
            "scatter_density: dimension mismatch".into(),
        ));
    }
    let diag_amps: Vec<Complex64> = (0..d)
        .map(|i| Complex64::new(rho0.mat[(i, i)].re.max(0.0).sqrt(), 0.0))
        .collect();
    check_padding(space, &diag_amps)?;
    let hv = space.params().hbar_v0();
    let support: Vec<usize> = (0..d)
        .filter(|&m| (0..d).any(|n| rho0.mat[(m, n)].norm() > 1e-15))
        .collect();
    let amp = |i: usize, m: usize| s.get(i, m).total_amplitude();
    let q_of = |i: usize, m: usize| (space.energy(i) - space.energy(m)) / hv;
    let mut mat = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for &m1 in &support {
                let s1 = amp(i, m1);
                if s1.norm() <= 1e-16 {
                    continue;
                }
                for &m2 in &support {
                    let r = rho0.mat[(m1, m2)];
                    if r.norm() <= 1e-15 {
                        continue;
                    }
                    let s2 = amp(j, m2);
                    if s2.norm() <= 1e-16 {
                        continue;
                    }
                    let co = w.comb_overlap(q_of(i, m1) - q_of(j, m2));
                    acc += s1 * r * s2.conj() * co;
                }
            }
            mat[(i, j)] = acc;
        }
    }
    Ok(TargetDensity { mat })
}

/// ρᵢⱼ = ⟨wⱼ|wᵢ⟩: electron traced out with tolerance-matched momenta.
pub fn reduce_target(js: &JointState) -> TargetDensity {
    let d = js.packets.len();
    let mat = DMatrix::from_fn(d, d, |i, j| js.packets[i].inner(&js.packets[j]));
    TargetDensity { mat }
}

/// Momentum populations Σᵢ |wᵢ(k)|² (target traced out).
pub fn reduce_electron(js: &JointState) -> MomentumPopulations {
    let k0 = js
        .packets
        .iter()
        .find(|w| !w.entries().is_empty())
        .map(|w| w.k0())
        .unwrap_or(0.0);
    let mut entries = Vec::new();
    for w in &js.packets {
        entries.extend(w.entries().iter().map(|(k, a)| (*k, a.norm_sqr())));
    }
    MomentumPopulations::from_entries(k0, entries)
}

/// Cavity dipole operator ξ = μ_c(a_x + a_z), lowering part, polariton basis.
pub fn dipole_operator(space: &TargetSpace) -> DMatrix<f64> {
    let ops = space.lowering_ops();
    let mu_c = cavity_dipole_moment(space.params());
    (ops.a_x + ops.a_z) * mu_c
}

/// Population stranded on the truncation shell (manifold or z caps) after
/// scattering; the run's truncation-error scale.
pub fn boundary_population(space: &TargetSpace, js: &JointState) -> f64 {
    let caps = space.caps();
    js.packets()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let s = space.state(*i);
            s.manifold_n == caps.manifold_max || (caps.n_z_max > 0 && s.n_z == caps.n_z_max)
        })
        .map(|(_, w)| w.norm_sqr())
        .sum()
}

/// Long-time-averaged emission power spectrum of ρ under the bare evolution.
///
/// Only stationary coherence pairs survive the time average: upper states are
/// grouped into degeneracy classes (tolerance [`SECULAR_TOL`]); each lower
/// state b and class C contribute a line at ε_C − E_b > 0 with weight
/// Σ_{a,a′∈C} ρ_{a′a}·ξ*_{ba′}... the quadratic form ⟨ξ_b|ρ|ξ_b⟩ restricted
/// to C, which is real and nonnegative for PSD ρ.
pub fn power_spectrum(
    rho: &TargetDensity,
    space: &TargetSpace,
    sigma: f64,
) -> Result<SpectrumLines, SimError> {
    let xi = dipole_operator(space);
    power_spectrum_from_parts(rho, space.energies(), &xi, sigma)
}

/// Spectrum from explicit energies and dipole matrix (the test seam for the
/// degeneracy-grouping robustness checks).
pub fn power_spectrum_from_parts(
    rho: &TargetDensity,
    energies: &[f64],
    xi: &DMatrix<f64>,
    sigma: f64,
) -> Result<SpectrumLines, SimError> {
    let d = energies.len();
    if rho.dim() != d || xi.nrows() != d {
        return Err(SimError::InvalidParams(
            "power_spectrum: dimension mismatch".into(),
        ));
    }
    let scale = rho.trace().norm().max(1e-30);
    if rho.hermiticity_defect() > 1e-9 * scale {
        return Err(SimError::InvalidParams(format!(
            "power_spectrum: non-Hermitian density (defect {:.2e})",
            rho.hermiticity_defect()
        )));
    }
    // degeneracy classes over all states, grouped by adjacent energies
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match classes.last_mut() {
            Some(c) if (energies[idx] - energies[c[0]]).abs() <= SECULAR_TOL => c.push(idx),
            _ => classes.push(vec![idx]),
        }
    }
    let mut lines: Vec<(f64, f64)> = Vec::new();
    for class in &classes {
        let eps: f64 = class.iter().map(|&a| energies[a]).sum::<f64>() / class.len() as f64;
        for b in 0..d {
            let omega0 = eps - energies[b];
            if omega0 <= SECULAR_TOL {
                continue;
            }
            let mut w = Complex64::new(0.0, 0.0);
            for &a in class {
                let xba = xi[(b, a)];
                if xba == 0.0 {
                    continue;
                }
                for &ap in class {
                    let xbap = xi[(b, ap)];
                    if xbap == 0.0 {
                        continue;
                    }
                    // ρ_{a′a}·ξ_{ba}·ξ_{ba′} with real ξ
                    w += rho.mat[(ap, a)] * xba * xbap;
                }
            }
            if w.norm() > 1e-18 {
                lines.push((omega0, w.re));
            }
        }
    }
    // merge lines sharing a position (different lower states, same energy)
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (e, w) in lines {
        match merged.last_mut() {
            Some((e0, w0)) if (e - *e0).abs() <= SECULAR_TOL => *w0 += w,
            _ => merged.push((e, w)),
        }
    }
    Ok(SpectrumLines {
        lines: merged,
        sigma,
    })
}

/// Independent route to the total secular weight (literal quadruple loop, no
/// class machinery); equals the summed line weights.
pub fn secular_weight_total(rho: &TargetDensity, energies: &[f64], xi: &DMatrix<f64>) -> f64 {
    let d = energies.len();
    let mut acc = 0.0;
    for b in 0..d {
        for a in 0..d {
            for ap in 0..d {
                if (energies[a] - energies[ap]).abs() <= SECULAR_TOL
                    && energies[a] - energies[b] > SECULAR_TOL
                {
                    acc += (rho.mat[(ap, a)] * xi[(b, a)] * xi[(b, ap)]).re;
                }
            }
        }
    }
    acc
}

/// Reference intensity I₀: the common polariton peak height under pure
/// emitter-channel driving (cavity channels disabled) at the same speed.
pub fn i0_reference(space: &TargetSpace, sigma: f64) -> Result<f64, SimError> {
    use crate::scattering::{scattering_matrix, ProbeConfig};
    let (s, _) = scattering_matrix(space, &ProbeConfig::only_eqe())?;
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
    amps[space.ground_index()] = Complex64::new(1.0, 0.0);
    let w = Wavepacket::monochromatic(space.params());
    let js = scatter(space, &s, &amps, &w)?;
    let rho = reduce_target(&js);
    let lines = power_spectrum(&rho, space, sigma)?;
    let hg = space.hbar_g();
    let e_plus = space.params().hbar_omega_c + hg;
    let e_minus = space.params().hbar_omega_c - hg;
    let h = peak_heights(&lines, &[e_minus, e_plus]);
    Ok(0.5 * (h[0] + h[1]))
}
