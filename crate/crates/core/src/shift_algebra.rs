//! Momentum-shift operator ring and matrices over it.
//!
//! A `ShiftPoly` is a finite sum Σ αᵢ·b_{qᵢ} of electron momentum-shift
//! operators. The b_q commute and compose by adding shifts, so polynomials
//! multiply term-by-term. A `ShiftMatrix` is a dense matrix of such
//! polynomials over the target basis; exponentiating the interaction matrix
//! in this ring yields the scattering matrix with its electron action
//! attached entrywise.

use num_complex::Complex64;

use crate::electron::Wavepacket;
use crate::SimError;

/// Amplitudes at or below this are dropped during canonicalization.
pub const AMP_DROP: f64 = 1e-16;

/// Shift merge tolerance: q values within this of each other are the same
/// physical line. q's derive from differences of floating-point eigenvalues;
/// distinct lines in this problem are separated by ≳ g/ħv₀, many orders
/// above the tolerance.
pub fn merge_tol(q: f64) -> f64 {
    (1e-9 * q.abs()).max(1e-12)
}

/// One amplitude·b_q term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTerm {
    pub amp: Complex64,
    pub q: f64,
}

/// Canonical complex-weighted sum of shift operators.
///
/// Canonical form: terms sorted by q, near-equal q merged by amplitude
/// addition (the representative q is the largest-amplitude member's), and
/// negligible amplitudes dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShiftPoly {
    terms: Vec<ShiftTerm>,
}

impl ShiftPoly {
    pub fn zero() -> Self {
        ShiftPoly { terms: Vec::new() }
    }

    /// Multiplicative identity 1·b₀.
    pub fn one() -> Self {
        ShiftPoly::term(Complex64::new(1.0, 0.0), 0.0)
    }

    pub fn term(amp: Complex64, q: f64) -> Self {
        ShiftPoly::from_terms(vec![ShiftTerm { amp, q }])
    }

    pub fn from_terms(mut terms: Vec<ShiftTerm>) -> Self {
        canonicalize(&mut terms);
        ShiftPoly { terms }
    }

    pub fn terms(&self) -> &[ShiftTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &ShiftPoly) -> ShiftPoly {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        terms.extend_from_slice(&self.terms);
        terms.extend_from_slice(&other.terms);
        ShiftPoly::from_terms(terms)
    }

    /// Commutative product: (α b_q)(β b_p) = αβ b_{q+p}, all pairs.
    pub fn mul(&self, other: &ShiftPoly) -> ShiftPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(ShiftTerm {
                    amp: a.amp * b.amp,
                    q: a.q + b.q,
                });
            }
        }
        ShiftPoly::from_terms(terms)
    }

    /// Hermitian conjugate: (α b_q)† = α* b_{−q}.
    pub fn dagger(&self) -> ShiftPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| ShiftTerm {
                amp: t.amp.conj(),
                q: -t.q,
            })
            .collect();
        ShiftPoly::from_terms(terms)
    }

    pub fn scale(&self, c: Complex64) -> ShiftPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| ShiftTerm {
                amp: t.amp * c,
                q: t.q,
            })
            .collect();
        ShiftPoly::from_terms(terms)
    }

    /// Σ|α| over terms.
    pub fn amp_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.amp.norm()).sum()
    }

    /// Σ α over terms (the scalar amplitude when the poly represents a
    /// single physical line).
    pub fn total_amplitude(&self) -> Complex64 {
        self.terms.iter().map(|t| t.amp).sum()
    }

    /// Largest spread of q values across terms (0 for ≤ 1 term).
    pub fn q_spread(&self) -> f64 {
        match (self.terms.first(), self.terms.last()) {
            (Some(a), Some(b)) => b.q - a.q,
            _ => 0.0,
        }
    }
}

fn canonicalize(terms: &mut Vec<ShiftTerm>) {
    if terms.is_empty() {
        return;
    }
    terms.sort_by(|a, b| a.q.total_cmp(&b.q));
    let mut out: Vec<ShiftTerm> = Vec::with_capacity(terms.len());
    // group runs of nearby q, accumulate amplitude, keep the q of the
    // largest-|amp| member for stability
    let mut group_amp = terms[0].amp;
    let mut group_q = terms[0].q;
    let mut group_max = terms[0].amp.norm();
    let mut last_q = terms[0].q;
    for t in terms.iter().skip(1) {
        let tol = merge_tol(t.q.abs().max(last_q.abs()));
        if t.q - last_q <= tol {
            group_amp += t.amp;
            if t.amp.norm() > group_max {
                group_max = t.amp.norm();
                group_q = t.q;
            }
        } else {
            if group_amp.norm() > AMP_DROP {
                out.push(ShiftTerm {
                    amp: group_amp,
                    q: group_q,
                });
            }
            group_amp = t.amp;
            group_q = t.q;
            group_max = t.amp.norm();
        }
        last_q = t.q;
    }
    if group_amp.norm() > AMP_DROP {
        out.push(ShiftTerm {
            amp: group_amp,
            q: group_q,
        });
    }
    *terms = out;
}

/// Apply a shift polynomial to a wavepacket: B′(k) = Σ α B(k + q)
/// (each b_q moves population from k to k − q).
pub fn apply_poly(p: &ShiftPoly, w: &Wavepacket) -> Wavepacket {
    let mut entries = Vec::with_capacity(p.terms().len() * w.entries().len());
    for t in p.terms() {
        for (k, amp) in w.entries() {
            entries.push((k - t.q, t.amp * amp));
        }
    }
    Wavepacket::from_entries(w.k0(), entries)
}

/// Dense matrix of shift polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftMatrix {
    dim: usize,
    entries: Vec<ShiftPoly>,
}

impl ShiftMatrix {
    pub fn zeros(dim: usize) -> Self {
        ShiftMatrix {
            dim,
            entries: vec![ShiftPoly::zero(); dim * dim],
        }
    }

    /// Identity: 1·b₀ on the diagonal.
    pub fn identity(dim: usize) -> Self {
        let mut m = ShiftMatrix::zeros(dim);
        for i in 0..dim {
            *m.get_mut(i, i) = ShiftPoly::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &ShiftPoly {
        &self.entries[i * self.dim + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut ShiftPoly {
        &mut self.entries[i * self.dim + j]
    }

    pub fn mul(&self, other: &ShiftMatrix) -> ShiftMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = ShiftMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc: Vec<ShiftTerm> = Vec::new();
                for k in 0..d {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    for ta in a.terms() {
                        for tb in b.terms() {
                            acc.push(ShiftTerm {
                                amp: ta.amp * tb.amp,
                                q: ta.q + tb.q,
                            });
                        }
                    }
                }
                *out.get_mut(i, j) = ShiftPoly::from_terms(acc);
            }
        }
        out
    }

    pub fn add(&self, other: &ShiftMatrix) -> ShiftMatrix {
        assert_eq!(self.dim, other.dim);
        let mut out = ShiftMatrix::zeros(self.dim);
        for idx in 0..self.entries.len() {
            out.entries[idx] = self.entries[idx].add(&other.entries[idx]);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> ShiftMatrix {
        ShiftMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Transpose with entrywise dagger: (M†)ᵢⱼ = dagger(Mⱼᵢ).
    pub fn dagger_transpose(&self) -> ShiftMatrix {
        let d = self.dim;
        let mut out = ShiftMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                *out.get_mut(i, j) = self.get(j, i).dagger();
            }
        }
        out
    }

    /// Σ over entries of Σ|α|.
    pub fn amp_norm(&self) -> f64 {
        self.entries.iter().map(|p| p.amp_norm()).sum()
    }

    /// Total amplitude norm of (M − I); unitarity defect when M = S†S.
    pub fn off_identity_norm(&self) -> f64 {
        let mut m = self.clone();
        let minus_one = ShiftPoly::term(Complex64::new(-1.0, 0.0), 0.0);
        for i in 0..self.dim {
            let e = m.get(i, i).add(&minus_one);
            *m.get_mut(i, i) = e;
        }
        m.amp_norm()
    }
}

/// Taylor exponential exp(scale·m) in the shift ring.
///
/// Terms are accumulated until the added term's total amplitude norm drops
/// below 1e-14, up to 200 terms; non-convergence reports the residual.
pub fn mat_exp(m: &ShiftMatrix, scale: Complex64) -> Result<ShiftMatrix, SimError> {
    let scaled = m.scale(scale);
    let mut result = ShiftMatrix::identity(m.dim());
    let mut term = ShiftMatrix::identity(m.dim());
    for n in 1..=200 {
        term = term.mul(&scaled).scale(Complex64::new(1.0 / n as f64, 0.0));
        let norm = term.amp_norm();
        result = result.add(&term);
        if norm < 1e-14 {
            return Ok(result);
        }
    }
    Err(SimError::NonConvergence {
        what: "shift-matrix exponential".into(),
        residual: term.amp_norm(),
    })
}

/// exp(scale·m) via s squarings of exp(scale·m/2ˢ); stress-test alternative
/// to the plain series for generators well above unit norm.
pub fn mat_exp_scaled(m: &ShiftMatrix, scale: Complex64, squarings: u32) -> Result<ShiftMatrix, SimError> {
    let mut s = mat_exp(m, scale / 2f64.powi(squarings as i32))?;
    for _ in 0..squarings {
        s = s.mul(&s);
    }
    Ok(s)
}
