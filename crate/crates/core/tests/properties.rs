//! Randomized property suites over small games and qubit observables.

use ndarray::Array2;
use num_complex::Complex64;
use proptest::collection::vec;
use proptest::prelude::*;
use xorgame::quantum::{ascent_objectives, default_rank};
use xorgame::verifier::{entangled_expectation, entangled_expectation_direct};
use xorgame::{
    classical_bias_exact, closed_form_bias, quantum_bias, region_of, spectral_sign, strategy_bias,
    ClassicalStrategy, ComplexMatrix, Region, XorGame,
};

fn arb_game(max_side: usize) -> impl Strategy<Value = XorGame> {
    (2..=max_side, 2..=max_side).prop_flat_map(|(m, n)| {
        (vec(0.01f64..1.0, m * n), vec(any::<bool>(), m * n)).prop_map(move |(w, bits)| {
            let total: f64 = w.iter().sum();
            let pi =
                Array2::from_shape_vec((m, n), w.iter().map(|v| v / total).collect()).unwrap();
            let f =
                Array2::from_shape_vec((m, n), bits.iter().map(|&b| b as u8).collect()).unwrap();
            XorGame::new("random", pi, f).unwrap()
        })
    })
}

fn arb_qubit_observable() -> impl Strategy<Value = ComplexMatrix> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_filter_map(
        "degenerate spectrum",
        |(a, b, c, d)| {
            let h = ComplexMatrix::from_rows(&[
                vec![Complex64::new(a, 0.0), Complex64::new(c, -d)],
                vec![Complex64::new(c, d), Complex64::new(b, 0.0)],
            ])
            .unwrap();
            spectral_sign(&h).ok()
        },
    )
}

fn mask_signs(mask: u32, len: usize) -> Vec<i8> {
    (0..len).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn ascent_objective_never_decreases(g in arb_game(4), seed in 0u64..1000) {
        let objectives = ascent_objectives(&g, default_rank(&g), seed, 40).unwrap();
        for w in objectives.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "objective dropped from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn classical_bias_below_certified_upper(g in arb_game(4), seed in 0u64..1000) {
        let classical = classical_bias_exact(&g).unwrap();
        let cert = quantum_bias(&g, default_rank(&g), 6, seed, 1e-10).unwrap();
        prop_assert!(classical.bias <= cert.upper + 1e-9,
            "classical {} above certified upper {}", classical.bias, cert.upper);
        prop_assert!(cert.lower <= cert.upper + 1e-12);
        prop_assert!(classical.bias >= 0.0 && classical.bias <= 1.0 + 1e-12);
        prop_assert!((classical.value - (1.0 + classical.bias) / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn classical_bias_gauge_invariant(g in arb_game(4), rmask in any::<u8>(), cmask in any::<u8>()) {
        let (m, n) = (g.m(), g.n());
        let mut flipped = g.f().clone();
        for x in 0..m {
            for y in 0..n {
                flipped[[x, y]] ^= (rmask >> x & 1) ^ (cmask >> y & 1);
            }
        }
        let g2 = XorGame::new("flipped", g.pi().clone(), flipped).unwrap();
        let r1 = classical_bias_exact(&g).unwrap();
        let r2 = classical_bias_exact(&g2).unwrap();
        prop_assert!((r1.bias - r2.bias).abs() <= 1e-12,
            "sign flips moved the bias: {} vs {}", r1.bias, r2.bias);

        // The witness transports along the same flips and keeps its bias.
        let mut a = r1.strategy.a_signs.clone();
        let mut b = r1.strategy.b_signs.clone();
        for (x, s) in a.iter_mut().enumerate() {
            if rmask >> x & 1 == 1 { *s = -*s; }
        }
        for (y, s) in b.iter_mut().enumerate() {
            if cmask >> y & 1 == 1 { *s = -*s; }
        }
        let transported = strategy_bias(&g2, &ClassicalStrategy::new(a, b).unwrap()).unwrap();
        prop_assert!((transported - r1.bias).abs() <= 1e-12);
    }

    #[test]
    fn classical_exact_matches_full_enumeration(g in arb_game(3)) {
        let exact = classical_bias_exact(&g).unwrap();
        let mut best = f64::NEG_INFINITY;
        for am in 0..1u32 << g.m() {
            for bm in 0..1u32 << g.n() {
                let s = ClassicalStrategy::new(mask_signs(am, g.m()), mask_signs(bm, g.n())).unwrap();
                best = best.max(strategy_bias(&g, &s).unwrap());
            }
        }
        prop_assert!((exact.bias - best).abs() <= 1e-12,
            "gauge-fixed search {} vs full enumeration {}", exact.bias, best);
        let witness = strategy_bias(&g, &exact.strategy).unwrap();
        prop_assert!((witness - exact.bias).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn game_json_round_trip(g in arb_game(4)) {
        let back = XorGame::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back.label(), g.label());
        prop_assert_eq!(back.f(), g.f());
        prop_assert!(back.pi().iter().zip(g.pi().iter()).all(|(a, b)| a == b));
        prop_assert!(back.cost().iter().zip(g.cost().iter()).all(|(a, b)| a == b));
    }

    #[test]
    fn closed_form_consistent_across_the_square(p in 0.5f64..=1.0, q in 0.5f64..=1.0) {
        let bias = closed_form_bias(p, q).unwrap();
        prop_assert!(bias >= 0.5 - 1e-12, "closed form {bias} below the classical bias");
        prop_assert!(bias <= std::f64::consts::FRAC_1_SQRT_2 + 1e-12,
            "closed form {bias} above the unperturbed quantum bias");
        match region_of(p, q) {
            Region::One => prop_assert!(2.0 * p * q < 1.0),
            Region::Two => prop_assert!(2.0 * p * q >= 1.0),
            Region::Boundary => {
                prop_assert!(p == 0.5 && q == 0.5);
                prop_assert!((bias - 0.5).abs() <= 1e-12);
            }
            Region::None => prop_assert!(false, "({p}, {q}) lies inside the square"),
        }
        // Monotone in each parameter, in particular in p at fixed q.
        if p < 1.0 {
            let step = closed_form_bias((p + 1e-3).min(1.0), q).unwrap();
            prop_assert!(step >= bias - 1e-12);
        }
    }

    #[test]
    fn closed_form_continuous_across_the_dividing_line(q in 0.5f64..=1.0) {
        let p = 1.0 / (2.0 * q);
        let below = closed_form_bias((p - 1e-9).max(0.5), q).unwrap();
        let above = closed_form_bias((p + 1e-9).min(1.0), q).unwrap();
        prop_assert!((below - above).abs() <= 1e-7,
            "jump across p = (2q)^-1 at q = {q}: {below} vs {above}");
    }

    #[test]
    fn expectation_paths_agree(a in arb_qubit_observable(), b in arb_qubit_observable()) {
        let fast = entangled_expectation(&a, &b).unwrap();
        let direct = entangled_expectation_direct(&a, &b).unwrap();
        prop_assert!((fast - direct).norm() <= 1e-12,
            "trace identity {fast} vs direct contraction {direct}");
        prop_assert!(fast.im.abs() <= 1e-10);
        prop_assert!(fast.re.abs() <= 1.0 + 1e-9);

        // Perfect correlation of any observable with its conjugate.
        let correlated = entangled_expectation(&a, &a.conj()).unwrap();
        prop_assert!((correlated.re - 1.0).abs() <= 1e-12 && correlated.im.abs() <= 1e-12);
    }
}
