//! Electron wavepackets on a sparse momentum set.
//!
//! Momenta are kept exact (accumulated shifts, no global grid) and merged
//! within the shift-algebra tolerance; the polariton transition momenta are
//! incommensurate so a uniform grid would either alias or explode.

use num_complex::Complex64;

use crate::params::{PhysicalParams, HBAR_C, ME_C2};
use crate::shift_algebra::merge_tol;
use crate::SimError;

/// Sparse complex amplitude distribution over electron momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    k0: f64,
    entries: Vec<(f64, Complex64)>, // sorted by k, tolerance-merged
}

impl Wavepacket {
    /// Build from raw (k, amplitude) pairs; sorts, merges nearby momenta and
    /// drops negligible amplitudes.
    pub fn from_entries(k0: f64, mut entries: Vec<(f64, Complex64)>) -> Wavepacket {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, Complex64)> = Vec::with_capacity(entries.len());
        for (k, amp) in entries {
            match merged.last_mut() {
                Some((k_prev, a_prev)) if k - *k_prev <= merge_tol(k.abs().max(k_prev.abs())) => {
                    *a_prev += amp;
                }
                _ => merged.push((k, amp)),
            }
        }
        merged.retain(|(_, a)| a.norm() > 1e-16);
        Wavepacket { k0, entries: merged }
    }

    /// Single wave-vector component at k₀ = mₑv₀/ħ.
    pub fn monochromatic(params: &PhysicalParams) -> Wavepacket {
        let k0 = params.k0();
        Wavepacket {
            k0,
            entries: vec![(k0, Complex64::new(1.0, 0.0))],
        }
    }

    /// Momentum comb: amplitudes e^{inξ}/√(N+1) at k₀ + n·q_mod for
    /// n ∈ [−N/2, N/2]; N must be even.
    pub fn comb(
        params: &PhysicalParams,
        q_mod: f64,
        n_teeth: u32,
        xi: f64,
    ) -> Result<Wavepacket, SimError> {
        if n_teeth % 2 != 0 {
            return Err(SimError::InvalidParams(format!(
                "comb requires an even tooth count N, got {n_teeth}"
            )));
        }
        let k0 = params.k0();
        let norm = 1.0 / ((n_teeth + 1) as f64).sqrt();
        let half = n_teeth as i64 / 2;
        let entries = (-half..=half)
            .map(|n| {
                (
                    k0 + n as f64 * q_mod,
                    Complex64::from_polar(norm, n as f64 * xi),
                )
            })
            .collect();
        Ok(Wavepacket::from_entries(k0, entries))
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn entries(&self) -> &[(f64, Complex64)] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Wavepacket {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for (_, a) in &mut self.entries {
                *a /= n;
            }
        }
        self
    }

    pub fn scaled(mut self, c: Complex64) -> Wavepacket {
        for (_, a) in &mut self.entries {
            *a *= c;
        }
        self.entries.retain(|(_, a)| a.norm() > 1e-16);
        self
    }

    /// Amplitude at momentum k (tolerance-matched), 0 when absent.
    pub fn amplitude_at(&self, k: f64) -> Complex64 {
        let idx = self
            .entries
            .partition_point(|(kk, _)| *kk < k - merge_tol(k.abs()));
        for (kk, a) in self.entries.iter().skip(idx) {
            if (kk - k).abs() <= merge_tol(k.abs().max(kk.abs())) {
                return *a;
            }
            if *kk > k + merge_tol(k.abs()) {
                break;
            }
        }
        Complex64::new(0.0, 0.0)
    }

    /// Comb overlap Σ_k B(k)·B*(k − q).
    pub fn comb_overlap(&self, q: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &self.entries {
            let b = self.amplitude_at(k - q);
            acc += a * b.conj();
        }
        acc
    }

    /// ⟨other|self⟩ with tolerance-matched momenta.
    pub fn inner(&self, other: &Wavepacket) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut j = 0;
        for (k, a) in &self.entries {
            while j < other.entries.len()
                && other.entries[j].0 < k - merge_tol(k.abs().max(other.entries[j].0.abs()))
            {
                j += 1;
            }
            if j < other.entries.len() {
                let (ko, b) = other.entries[j];
                if (ko - k).abs() <= merge_tol(k.abs().max(ko.abs())) {
                    acc += b.conj() * a;
                }
            }
        }
        acc
    }
}

/// Momentum populations ⟨n̂_k⟩ (electron marginal after tracing the target).
#[derive(Debug, Clone)]
pub struct MomentumPopulations {
    pub k0: f64,
    entries: Vec<(f64, f64)>, // sorted by k
}

impl MomentumPopulations {
    pub fn from_entries(k0: f64, mut entries: Vec<(f64, f64)>) -> MomentumPopulations {
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(entries.len());
        for (k, p) in entries {
            match merged.last_mut() {
                Some((k_prev, p_prev)) if k - *k_prev <= merge_tol(k.abs().max(k_prev.abs())) => {
                    *p_prev += p;
                }
                _ => merged.push((k, p)),
            }
        }
        MomentumPopulations { k0, entries: merged }
    }

    pub fn of(w: &Wavepacket) -> MomentumPopulations {
        MomentumPopulations::from_entries(
            w.k0(),
            w.entries().iter().map(|(k, a)| (*k, a.norm_sqr())).collect(),
        )
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

/// Sparse Δn_k distribution plus broadening/energy bookkeeping.
#[derive(Debug, Clone)]
pub struct KDistribution {
    pub k0: f64,
    entries: Vec<(f64, f64)>, // (k, Δn), sorted by k
}

/// Δn_k = ⟨n̂_k⟩ − ⟨n̂_k⟩⁰, pointwise with tolerance-matched momenta.
///
/// Rejects inputs whose total populations differ by more than 1e-9.
pub fn delta_n(
    before: &MomentumPopulations,
    after: &MomentumPopulations,
) -> Result<KDistribution, SimError> {
    let nb = before.total();
    let na = after.total();
    if (na - nb).abs() > 1e-9 * nb.max(1.0) {
        return Err(SimError::NormMismatch {
            before: nb,
            after: na,
        });
    }
    let mut entries: Vec<(f64, f64)> = after.entries().to_vec();
    entries.extend(before.entries().iter().map(|(k, p)| (*k, -p)));
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (k, p) in entries {
        match merged.last_mut() {
            Some((k_prev, p_prev)) if k - *k_prev <= merge_tol(k.abs().max(k_prev.abs())) => {
                *p_prev += p;
            }
            _ => merged.push((k, p)),
        }
    }
    merged.retain(|(_, p)| p.abs() > 0.0);
    Ok(KDistribution {
        k0: after.k0,
        entries: merged,
    })
}

impl KDistribution {
    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Σ Δn_k; zero by number conservation.
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// ΔE = Σ_k E_k Δn_k with the exact quadratic dispersion
    /// E_k = (ħk)²/2mₑ, in eV.
    pub fn energy_change(&self) -> f64 {
        self.entries
            .iter()
            .map(|(k, dn)| kinetic_energy(*k) * dn)
            .sum()
    }

    /// Lorentzian-broadened sampling at wave vector k; width σ_k, kernel
    /// truncated at ±40σ_k and renormalized to unit mass so that the zeroth
    /// and first moments of the distribution survive broadening.
    pub fn broadened(&self, sigma_k: f64) -> impl Fn(f64) -> f64 + '_ {
        let cutoff = 40.0 * sigma_k;
        // mass of the truncated Lorentzian: (2/π)·atan(80)
        let mass = 2.0 / std::f64::consts::PI * (cutoff / (sigma_k / 2.0)).atan();
        move |k: f64| {
            let mut acc = 0.0;
            for (kj, dn) in &self.entries {
                let x = k - kj;
                if x.abs() <= cutoff {
                    acc += dn * sigma_k / (2.0 * std::f64::consts::PI)
                        / (x * x + sigma_k * sigma_k / 4.0)
                        / mass;
                }
            }
            acc
        }
    }
}

/// Electron kinetic energy (ħk)²/2mₑ in eV for k in nm⁻¹.
pub fn kinetic_energy(k: f64) -> f64 {
    (HBAR_C * k).powi(2) / (2.0 * ME_C2)
}
