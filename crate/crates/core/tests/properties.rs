//! Property tests for the algebraic invariants.
//!
//! Ring-law checks use integer amplitudes on a binary-exact shift grid so
//! equality is exact, not approximate.

use num_complex::Complex64;
use proptest::prelude::*;

use polariton_probe::electron::Wavepacket;
use polariton_probe::hilbert::{BareState, Caps, TargetSpace};
use polariton_probe::params::PhysicalParams;
use polariton_probe::shift_algebra::{apply_poly, mat_exp, ShiftMatrix, ShiftPoly, ShiftTerm};

fn exact_poly() -> impl Strategy<Value = ShiftPoly> {
    // up to 4 terms, integer amplitudes in [-3, 3], shifts n/4 with |n| <= 8
    prop::collection::vec(((-3i32..=3, -3i32..=3), -8i32..=8), 0..4).prop_map(|terms| {
        ShiftPoly::from_terms(
            terms
                .into_iter()
                .map(|((re, im), n)| ShiftTerm {
                    amp: Complex64::new(re as f64, im as f64),
                    q: n as f64 * 0.25,
                })
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn mul_commutative_and_associative(a in exact_poly(), b in exact_poly(), c in exact_poly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn mul_distributes_over_add(a in exact_poly(), b in exact_poly(), c in exact_poly()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn identity_and_dagger_laws(a in exact_poly(), b in exact_poly()) {
        prop_assert_eq!(a.mul(&ShiftPoly::one()), a.clone());
        prop_assert_eq!(a.dagger().dagger(), a.clone());
        prop_assert_eq!(a.mul(&b).dagger(), a.dagger().mul(&b.dagger()));
    }

    #[test]
    fn canonicalization_idempotent(a in exact_poly()) {
        prop_assert_eq!(ShiftPoly::from_terms(a.terms().to_vec()), a);
    }

    #[test]
    fn apply_poly_is_linear(a in exact_poly(), b in exact_poly()) {
        let w = Wavepacket::from_entries(
            50.0,
            vec![
                (50.0, Complex64::new(0.6, 0.0)),
                (50.5, Complex64::new(0.0, 0.8)),
            ],
        );
        let lhs = apply_poly(&a.add(&b), &w);
        let rhs_a = apply_poly(&a, &w);
        let rhs_b = apply_poly(&b, &w);
        // compare amplitudes at the union of supports
        for (k, _) in lhs.entries().iter().chain(rhs_a.entries()).chain(rhs_b.entries()) {
            let want = rhs_a.amplitude_at(*k) + rhs_b.amplitude_at(*k);
            prop_assert!((lhs.amplitude_at(*k) - want).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// exp(−i𝒽) is unitary for any Hermitian-with-dagger 𝒽 whose shifts
    /// derive from an energy ladder.
    #[test]
    fn exponential_unitarity(
        energies in prop::collection::vec(-2.0f64..2.0, 2..5),
        amps in prop::collection::vec((-0.7f64..0.7, -0.7f64..0.7), 10),
    ) {
        let d = energies.len();
        let mut h = ShiftMatrix::zeros(d);
        let mut t = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                let (re, im) = amps[t % amps.len()];
                t += 1;
                let amp = Complex64::new(re, im);
                let q = (energies[i] - energies[j]) / 3.9;
                *h.get_mut(i, j) = ShiftPoly::term(amp, q);
                *h.get_mut(j, i) = ShiftPoly::term(amp.conj(), -q);
            }
        }
        let s = mat_exp(&h, Complex64::new(0.0, -1.0)).unwrap();
        let defect = s.dagger_transpose().mul(&s).off_identity_norm();
        prop_assert!(defect < 1e-10, "defect {}", defect);
    }

    /// Per-manifold bare↔polariton transforms preserve the norm at any
    /// detuning.
    #[test]
    fn basis_transform_preserves_norm(
        delta in -0.4f64..0.4,
        re in prop::collection::vec(-1.0f64..1.0, 6),
        im in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let p = PhysicalParams::default().with_hbar_delta(delta);
        let space = TargetSpace::build(&p, Caps { n_z_max: 0, manifold_max: 3 }).unwrap();
        let bare = [
            BareState { n_z: 0, n_x: 0, qe_excited: false },
            BareState { n_z: 0, n_x: 1, qe_excited: false },
            BareState { n_z: 0, n_x: 2, qe_excited: false },
            BareState { n_z: 0, n_x: 0, qe_excited: true },
            BareState { n_z: 0, n_x: 1, qe_excited: true },
            BareState { n_z: 0, n_x: 2, qe_excited: true },
        ];
        let amps: Vec<(BareState, Complex64)> = bare
            .iter()
            .zip(re.iter().zip(&im))
            .map(|(b, (r, i))| (*b, Complex64::new(*r, *i)))
            .collect();
        let norm_in: f64 = amps.iter().map(|(_, a)| a.norm_sqr()).sum();
        let v = space.bare_to_polariton(&amps).unwrap();
        let norm_out: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm_in - norm_out).abs() <= 1e-12 * norm_in.max(1.0));
    }

    /// Comb states are normalized and their self-overlap at zero shift is 1.
    #[test]
    fn comb_normalization(n_half in 0u32..40, xi in -3.0f64..3.0, q in 0.05f64..1.5) {
        let p = PhysicalParams::default();
        let w = Wavepacket::comb(&p, q, 2 * n_half, xi).unwrap();
        prop_assert!((w.norm_sqr() - 1.0).abs() < 1e-12);
        let co0 = w.comb_overlap(0.0);
        prop_assert!((co0 - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // one-tooth shift has magnitude N/(N+1)
        let n = 2 * n_half;
        let co = w.comb_overlap(q);
        prop_assert!((co.norm() - n as f64 / (n as f64 + 1.0)).abs() < 1e-12);
    }
}
