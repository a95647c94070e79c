//! Truncated target Hilbert space: z-mode Fock ladder ⊗ polariton ladder.
//!
//! The coupled sector (x-dipolar cavity mode + emitter) block-diagonalizes
//! per excitation manifold N into a 2×2 problem over {|N⟩ₓ|g⟩, |N−1⟩ₓ|e⟩};
//! the z mode is a spectator harmonic ladder. Energies, the bare↔polariton
//! transform and dense lowering operators in the polariton basis all come
//! from here.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::em_couplings::coupling_g_c_qe;
use crate::params::PhysicalParams;
use crate::SimError;

/// Hard cap on the truncated dimension.
pub const DIM_LIMIT: usize = 512;

/// Branch label within an excitation manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// N = 0 (single state).
    Ground,
    /// Lower polariton.
    Minus,
    /// Upper polariton.
    Plus,
}

/// Product state in the bare basis |n_z⟩ ⊗ |n_x⟩ ⊗ {g, e}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BareState {
    pub n_z: u32,
    pub n_x: u32,
    pub qe_excited: bool,
}

impl BareState {
    /// Excitation number of the coupled sector.
    pub fn manifold(&self) -> u32 {
        self.n_x + self.qe_excited as u32
    }
}

/// Eigenstate label |n_z⟩ ⊗ |N, ±⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolaritonState {
    pub n_z: u32,
    pub manifold_n: u32,
    pub branch: Branch,
}

/// Truncation caps for the target space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub n_z_max: u32,
    pub manifold_max: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            n_z_max: 2,
            manifold_max: 4,
        }
    }
}

/// Eigenvalues and mixing angle of one coupled manifold.
///
/// `|N,+⟩ = cosθ|N⟩ₓ|g⟩ + sinθ|N−1⟩ₓ|e⟩` and
/// `|N,−⟩ = sinθ|N⟩ₓ|g⟩ − cosθ|N−1⟩ₓ|e⟩`; θ = π/4 at resonance, which
/// reproduces (|N⟩ₓ|g⟩ ± |N−1⟩ₓ|e⟩)/√2.
#[derive(Debug, Clone, Copy)]
pub struct ManifoldBlock {
    pub e_plus: f64,
    pub e_minus: f64,
    pub theta: f64,
}

impl ManifoldBlock {
    pub fn cos_sin(&self) -> (f64, f64) {
        (self.theta.cos(), self.theta.sin())
    }
}

/// Energies (E₊, E₋) and eigenvector angle of the N-th manifold.
///
/// The 2×2 block has diagonal (N·ħω_c, (N−1)ħω_c + ħω_QE) and off-diagonal
/// √N·ħg. At resonance this is N·ħω ± √N·ħg exactly.
pub fn polariton_energies(
    n: u32,
    params: &PhysicalParams,
    hbar_g: f64,
) -> Result<ManifoldBlock, SimError> {
    if n == 0 {
        return Err(SimError::InvalidParams(
            "polariton_energies: the N = 0 manifold has a single state".into(),
        ));
    }
    let a = n as f64 * params.hbar_omega_c;
    let b = (n as f64 - 1.0) * params.hbar_omega_c + params.hbar_omega_qe;
    let c = (n as f64).sqrt() * hbar_g;
    let mean = 0.5 * (a + b);
    let half_gap = 0.5 * (a - b);
    let r = (half_gap * half_gap + c * c).sqrt();
    let theta = if c.abs() < 1e-300 {
        // decoupled block: "+" is the higher bare state, cavity side on a tie
        if a >= b {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    } else {
        (r - half_gap).atan2(c)
    };
    Ok(ManifoldBlock {
        e_plus: mean + r,
        e_minus: mean - r,
        theta,
    })
}

/// Immutable truncated eigenbasis of the target.
#[derive(Debug, Clone)]
pub struct TargetSpace {
    params: PhysicalParams,
    caps: Caps,
    basis: Vec<PolaritonState>,
    energies: Vec<f64>,
    blocks: Vec<ManifoldBlock>, // indexed by manifold − 1
    hbar_g: f64,
    index: HashMap<PolaritonState, usize>,
}

impl TargetSpace {
    /// Enumerate and diagonalize the truncated space.
    ///
    /// Ordering is deterministic: by total excitation n_z + N, then energy,
    /// then branch (Ground < Minus < Plus), then n_z.
    pub fn build(params: &PhysicalParams, caps: Caps) -> Result<TargetSpace, SimError> {
        params.validate()?;
        if caps.manifold_max < 1 {
            return Err(SimError::InvalidParams(
                "caps.manifold_max must be >= 1".into(),
            ));
        }
        let dim = (caps.n_z_max as usize + 1) * (1 + 2 * caps.manifold_max as usize);
        if dim > DIM_LIMIT {
            return Err(SimError::CapsTooLarge {
                dim,
                limit: DIM_LIMIT,
            });
        }
        let hbar_g = coupling_g_c_qe(params)?;
        let mut blocks = Vec::with_capacity(caps.manifold_max as usize);
        for n in 1..=caps.manifold_max {
            blocks.push(polariton_energies(n, params, hbar_g)?);
        }

        let mut states: Vec<(PolaritonState, f64)> = Vec::with_capacity(dim);
        for n_z in 0..=caps.n_z_max {
            let e_z = n_z as f64 * params.hbar_omega_c;
            states.push((
                PolaritonState {
                    n_z,
                    manifold_n: 0,
                    branch: Branch::Ground,
                },
                e_z,
            ));
            for n in 1..=caps.manifold_max {
                let blk = &blocks[(n - 1) as usize];
                states.push((
                    PolaritonState {
                        n_z,
                        manifold_n: n,
                        branch: Branch::Minus,
                    },
                    e_z + blk.e_minus,
                ));
                states.push((
                    PolaritonState {
                        n_z,
                        manifold_n: n,
                        branch: Branch::Plus,
                    },
                    e_z + blk.e_plus,
                ));
            }
        }
        states.sort_by(|(sa, ea), (sb, eb)| {
            (sa.n_z + sa.manifold_n)
                .cmp(&(sb.n_z + sb.manifold_n))
                .then(ea.total_cmp(eb))
                .then(sa.branch.cmp(&sb.branch))
                .then(sa.n_z.cmp(&sb.n_z))
        });

        let basis: Vec<PolaritonState> = states.iter().map(|(s, _)| *s).collect();
        let energies: Vec<f64> = states.iter().map(|(_, e)| *e).collect();
        let index = basis.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(TargetSpace {
            params: params.clone(),
            caps,
            basis,
            energies,
            blocks,
            hbar_g,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// Emitter–cavity coupling ħg, eV.
    pub fn hbar_g(&self) -> f64 {
        self.hbar_g
    }

    pub fn basis(&self) -> &[PolaritonState] {
        &self.basis
    }

    pub fn state(&self, i: usize) -> PolaritonState {
        self.basis[i]
    }

    /// Energy of basis state i, eV (ground state is 0).
    pub fn energy(&self, i: usize) -> f64 {
        self.energies[i]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn index_of(&self, s: PolaritonState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn ground_index(&self) -> usize {
        self.index_of(PolaritonState {
            n_z: 0,
            manifold_n: 0,
            branch: Branch::Ground,
        })
        .expect("ground state always present")
    }

    pub fn block(&self, manifold: u32) -> &ManifoldBlock {
        &self.blocks[(manifold - 1) as usize]
    }

    fn check_bare(&self, b: &BareState) -> Result<(), SimError> {
        let n = b.manifold();
        if b.n_z > self.caps.n_z_max || n > self.caps.manifold_max {
            return Err(SimError::InvalidParams(format!(
                "bare state {b:?} outside caps {:?}",
                self.caps
            )));
        }
        Ok(())
    }

    /// Expand a sparse bare-basis amplitude list into a dense polariton-basis
    /// vector. Norm is preserved (the per-manifold transform is orthogonal).
    pub fn bare_to_polariton(
        &self,
        amps: &[(BareState, Complex64)],
    ) -> Result<Vec<Complex64>, SimError> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (b, amp) in amps {
            self.check_bare(b)?;
            let n = b.manifold();
            if n == 0 {
                let i = self
                    .index_of(PolaritonState {
                        n_z: b.n_z,
                        manifold_n: 0,
                        branch: Branch::Ground,
                    })
                    .expect("in caps");
                out[i] += amp;
                continue;
            }
            let (cos_t, sin_t) = self.blocks[(n - 1) as usize].cos_sin();
            let plus = self
                .index_of(PolaritonState {
                    n_z: b.n_z,
                    manifold_n: n,
                    branch: Branch::Plus,
                })
                .expect("in caps");
            let minus = self
                .index_of(PolaritonState {
                    n_z: b.n_z,
                    manifold_n: n,
                    branch: Branch::Minus,
                })
                .expect("in caps");
            if b.qe_excited {
                // |N−1⟩ₓ|e⟩ = sinθ|N,+⟩ − cosθ|N,−⟩
                out[plus] += amp * sin_t;
                out[minus] -= amp * cos_t;
            } else {
                // |N⟩ₓ|g⟩ = cosθ|N,+⟩ + sinθ|N,−⟩
                out[plus] += amp * cos_t;
                out[minus] += amp * sin_t;
            }
        }
        Ok(out)
    }

    /// Decompose polariton basis state i into bare components.
    pub fn polariton_to_bare(&self, i: usize) -> Vec<(BareState, f64)> {
        let s = self.basis[i];
        if s.manifold_n == 0 {
            return vec![(
                BareState {
                    n_z: s.n_z,
                    n_x: 0,
                    qe_excited: false,
                },
                1.0,
            )];
        }
        let (cos_t, sin_t) = self.blocks[(s.manifold_n - 1) as usize].cos_sin();
        let bare_g = BareState {
            n_z: s.n_z,
            n_x: s.manifold_n,
            qe_excited: false,
        };
        let bare_e = BareState {
            n_z: s.n_z,
            n_x: s.manifold_n - 1,
            qe_excited: true,
        };
        match s.branch {
            Branch::Plus => vec![(bare_g, cos_t), (bare_e, sin_t)],
            Branch::Minus => vec![(bare_g, sin_t), (bare_e, -cos_t)],
            Branch::Ground => unreachable!(),
        }
    }

    /// Dense lowering operators (a_x, a_z, σ) in the polariton basis.
    ///
    /// Entries are real: the bare-basis matrices are real and the manifold
    /// transforms are orthogonal. `mat[(row, col)] = ⟨row| op |col⟩`.
    pub fn lowering_ops(&self) -> LoweringOps {
        let d = self.dim();
        let mut a_x = DMatrix::<f64>::zeros(d, d);
        let mut a_z = DMatrix::<f64>::zeros(d, d);
        let mut sigma = DMatrix::<f64>::zeros(d, d);
        // ⟨row| op |col⟩ = Σ over bare decompositions of row/col
        for col in 0..d {
            for (bc, wc) in self.polariton_to_bare(col) {
                // a_x |bc⟩ = √n_x |n_x−1⟩
                if bc.n_x >= 1 {
                    let tgt = BareState {
                        n_x: bc.n_x - 1,
                        ..bc
                    };
                    let val = (bc.n_x as f64).sqrt() * wc;
                    accumulate(&mut a_x, self, tgt, col, val);
                }
                if bc.n_z >= 1 {
                    let tgt = BareState {
                        n_z: bc.n_z - 1,
                        ..bc
                    };
                    let val = (bc.n_z as f64).sqrt() * wc;
                    accumulate(&mut a_z, self, tgt, col, val);
                }
                if bc.qe_excited {
                    let tgt = BareState {
                        qe_excited: false,
                        ..bc
                    };
                    accumulate(&mut sigma, self, tgt, col, wc);
                }
            }
        }
        LoweringOps { a_x, a_z, sigma }
    }
}

/// Lowering operators over the polariton basis (row = final, col = initial).
pub struct LoweringOps {
    pub a_x: DMatrix<f64>,
    pub a_z: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

/// Add `val`·⟨pol row | bare tgt⟩ into every polariton row overlapping `tgt`.
fn accumulate(mat: &mut DMatrix<f64>, space: &TargetSpace, tgt: BareState, col: usize, val: f64) {
    let n = tgt.manifold();
    if n == 0 {
        if let Some(row) = space.index_of(PolaritonState {
            n_z: tgt.n_z,
            manifold_n: 0,
            branch: Branch::Ground,
        }) {
            mat[(row, col)] += val;
        }
        return;
    }
    let (cos_t, sin_t) = space.blocks[(n - 1) as usize].cos_sin();
    let plus = PolaritonState {
        n_z: tgt.n_z,
        manifold_n: n,
        branch: Branch::Plus,
    };
    let minus = PolaritonState {
        n_z: tgt.n_z,
        manifold_n: n,
        branch: Branch::Minus,
    };
    // ⟨N,+|N⟩ₓ|g⟩ = cosθ, ⟨N,−|N⟩ₓ|g⟩ = sinθ, ⟨N,+|N−1,e⟩ = sinθ, ⟨N,−|N−1,e⟩ = −cosθ
    let (w_plus, w_minus) = if tgt.qe_excited {
        (sin_t, -cos_t)
    } else {
        (cos_t, sin_t)
    };
    if let Some(row) = space.index_of(plus) {
        mat[(row, col)] += w_plus * val;
    }
    if let Some(row) = space.index_of(minus) {
        mat[(row, col)] += w_minus * val;
    }
}
