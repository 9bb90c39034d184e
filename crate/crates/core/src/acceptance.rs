//! End-to-end acceptance checks covering every headline number at once.
//!
//! Each criterion is a self-contained function returning a pass/fail record
//! with a short diagnostic; `run_all` executes them in order. The criteria
//! freeze the project's contract: classical flatness, the CHSH endpoint,
//! both region closed forms with certificate slack, strict advantage near
//! the center, sums and their multiplicativity, the perturbed family
//! formula, the flat-start derivative, the magic-square game, and the
//! cross-cutting property suite.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::classical::{classical_bias_exact, strategy_bias, ClassicalStrategy};
use crate::cmatrix::validate_observable;
use crate::game::{build_magic_square_game, build_perturbed_and_game, sum_games, XorGame};
use crate::quantum::{
    ascent_objectives, closed_form_region1, closed_form_region2, quantum_bias,
    quantum_bias_default, quantum_bias_of_sum,
};
use crate::verifier::{
    build_region1_strategy, build_region2_strategy, entangled_expectation,
    entangled_expectation_direct, operator_bias, simulate_rounds,
};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionResult {
    fn new(id: usize, name: &'static str, passed: bool, details: String) -> Self {
        Self { id, name, passed, details }
    }
}

/// Runs every acceptance criterion with solver randomness derived from
/// `seed`; returns one record per criterion, in order.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    vec![
        c1_classical_flatness(),
        c2_chsh_endpoint(seed),
        c3_region_closed_forms(seed),
        c4_strict_advantage_off_center(seed),
        c5_sums(seed),
        c6_perturbed_family(seed),
        c7_flat_start_derivative(seed),
        c8_magic_square(seed),
        c9_property_suites(seed),
    ]
}

fn fail(id: usize, name: &'static str, details: String) -> CriterionResult {
    CriterionResult::new(id, name, false, details)
}

fn c1_classical_flatness() -> CriterionResult {
    const NAME: &str = "perturbed classical flatness";
    let mut max_dev = 0.0f64;
    for i in 0..=10 {
        for j in 0..=10 {
            let p = (50 + 5 * i) as f64 / 100.0;
            let q = (50 + 5 * j) as f64 / 100.0;
            let game = match build_perturbed_and_game(p, q) {
                Ok(g) => g,
                Err(e) => return fail(1, NAME, format!("build failed at ({p}, {q}): {e}")),
            };
            match classical_bias_exact(&game) {
                Ok(r) => max_dev = max_dev.max((r.bias - 0.5).abs()),
                Err(e) => return fail(1, NAME, format!("solve failed at ({p}, {q}): {e}")),
            }
        }
    }
    CriterionResult::new(
        1,
        NAME,
        max_dev <= 1e-9,
        format!("max |classical bias - 1/2| over 121 grid points: {max_dev:.3e}"),
    )
}

fn c2_chsh_endpoint(seed: u64) -> CriterionResult {
    const NAME: &str = "CHSH endpoint";
    let game = build_perturbed_and_game(1.0, 1.0).expect("valid parameters");
    let classical = match classical_bias_exact(&game) {
        Ok(r) => r.bias,
        Err(e) => return fail(2, NAME, format!("classical solve failed: {e}")),
    };
    if classical != 0.5 {
        return fail(2, NAME, format!("classical bias {classical} is not exactly 1/2"));
    }
    let cert = match quantum_bias_default(&game, seed) {
        Ok(c) => c,
        Err(e) => return fail(2, NAME, format!("quantum solve failed: {e}")),
    };
    let dev_lower = (cert.lower - FRAC_1_SQRT_2).abs();
    let dev_upper = (cert.upper - FRAC_1_SQRT_2).abs();
    let (strategy, _) = match build_region2_strategy(1.0, 1.0) {
        Ok(s) => s,
        Err(e) => return fail(2, NAME, format!("strategy construction failed: {e}")),
    };
    let rounds = 1_000_000u64;
    let summary = match simulate_rounds(&game, &strategy, rounds, seed.wrapping_add(17)) {
        Ok(s) => s,
        Err(e) => return fail(2, NAME, format!("simulation failed: {e}")),
    };
    let target = 0.85355;
    let sigma = (target * (1.0 - target) / rounds as f64).sqrt();
    let mc_dev = (summary.win_rate - target).abs();
    let passed = dev_lower <= 1e-6 && dev_upper <= 1e-6 && mc_dev <= 3.0 * sigma;
    CriterionResult::new(
        2,
        NAME,
        passed,
        format!(
            "certificate deviations {dev_lower:.3e}/{dev_upper:.3e} from 1/sqrt(2); \
             win rate {:.6} vs {target} (3 sigma = {:.3e})",
            summary.win_rate,
            3.0 * sigma
        ),
    )
}

fn c3_region_closed_forms(seed: u64) -> CriterionResult {
    const NAME: &str = "region closed forms with certified slack";
    let region1: Vec<(f64, f64)> = [0.52, 0.55, 0.58, 0.61, 0.64]
        .iter()
        .flat_map(|&p| [0.55, 0.60, 0.65, 0.70].iter().map(move |&q| (p, q)))
        .collect();
    let region2: Vec<(f64, f64)> = [0.75, 0.80, 0.85, 0.90, 0.95]
        .iter()
        .flat_map(|&p| [0.75, 0.80, 0.85, 0.90].iter().map(move |&q| (p, q)))
        .collect();
    let mut max_form_dev = 0.0f64;
    let mut max_slack = 0.0f64;
    for (idx, &(p, q)) in region1.iter().chain(region2.iter()).enumerate() {
        let closed = if idx < region1.len() {
            closed_form_region1(p, q)
        } else {
            closed_form_region2(p, q)
        };
        let closed = match closed {
            Ok(v) => v,
            Err(e) => return fail(3, NAME, format!("closed form failed at ({p}, {q}): {e}")),
        };
        let game = build_perturbed_and_game(p, q).expect("valid parameters");
        let cert = match quantum_bias_default(&game, seed.wrapping_add(idx as u64)) {
            Ok(c) => c,
            Err(e) => return fail(3, NAME, format!("solve failed at ({p}, {q}): {e}")),
        };
        max_form_dev = max_form_dev.max((cert.lower - closed).abs());
        max_slack = max_slack.max(cert.slack);
    }
    CriterionResult::new(
        3,
        NAME,
        max_form_dev <= 1e-6 && max_slack <= 1e-6,
        format!(
            "40 interior points: max |lower - closed form| = {max_form_dev:.3e}, \
             max certificate slack = {max_slack:.3e}"
        ),
    )
}

fn c4_strict_advantage_off_center(seed: u64) -> CriterionResult {
    const NAME: &str = "strict advantage off the center";
    let (p, q) = (0.5001, 0.5001);
    let closed = closed_form_region1(p, q).expect("(0.5001, 0.5001) lies in region 1");
    let game = build_perturbed_and_game(p, q).expect("valid parameters");
    let classical = match classical_bias_exact(&game) {
        Ok(r) => r.bias,
        Err(e) => return fail(4, NAME, format!("classical solve failed: {e}")),
    };
    let cert = match quantum_bias_default(&game, seed) {
        Ok(c) => c,
        Err(e) => return fail(4, NAME, format!("quantum solve failed: {e}")),
    };
    let advantage = cert.lower - classical;
    let predicted = closed - 0.5;
    let passed = advantage >= predicted - 1e-7 && predicted > 0.0;
    CriterionResult::new(
        4,
        NAME,
        passed,
        format!(
            "quantum lower - classical = {advantage:.3e}, closed-form excess = {predicted:.3e}"
        ),
    )
}

fn c5_sums(seed: u64) -> CriterionResult {
    const NAME: &str = "sums of the no-knowledge game";
    let base = build_perturbed_and_game(0.5, 0.5).expect("valid parameters");
    let mut game = base.clone();
    let mut details = Vec::new();
    let mut passed = true;
    let mut lowers = Vec::new();
    for k in 1..=2usize {
        if k > 1 {
            game = match sum_games(&game, &base) {
                Ok(g) => g,
                Err(e) => return fail(5, NAME, format!("sum construction failed at k={k}: {e}")),
            };
        }
        let target = 0.5f64.powi(k as i32);
        let classical = match classical_bias_exact(&game) {
            Ok(r) => r.bias,
            Err(e) => return fail(5, NAME, format!("classical solve failed at k={k}: {e}")),
        };
        let cert = match quantum_bias(&game, 40.min(game.m() + game.n()), 8, seed, 1e-12) {
            Ok(c) => c,
            Err(e) => return fail(5, NAME, format!("quantum solve failed at k={k}: {e}")),
        };
        let c_dev = (classical - target).abs();
        let q_dev = (cert.lower - target).abs().max((cert.upper - target).abs());
        passed &= c_dev <= 1e-6 && q_dev <= 1e-6;
        details.push(format!("k={k}: classical dev {c_dev:.3e}, certificate dev {q_dev:.3e}"));
        lowers.push(cert.lower);
    }
    let product = quantum_bias_of_sum(&[lowers[0], lowers[0]]).expect("biases in range");
    let mult_dev = (lowers[1] - product).abs();
    passed &= mult_dev <= 1e-5;
    details.push(format!("multiplicativity dev {mult_dev:.3e}"));
    CriterionResult::new(5, NAME, passed, details.join("; "))
}

fn c6_perturbed_family(seed: u64) -> CriterionResult {
    const NAME: &str = "perturbed family bias formula";
    let base = build_perturbed_and_game(0.5, 0.5).expect("valid parameters");
    let mut max_dev = 0.0f64;
    for (idx, &p) in [0.6, 0.75, 0.9].iter().enumerate() {
        let perturbed = build_perturbed_and_game(p, 0.5).expect("valid parameters");
        let family = match sum_games(&base, &perturbed) {
            Ok(g) => g,
            Err(e) => return fail(6, NAME, format!("sum construction failed at p={p}: {e}")),
        };
        let cert = match quantum_bias(&family, 40, 8, seed.wrapping_add(idx as u64), 1e-12) {
            Ok(c) => c,
            Err(e) => return fail(6, NAME, format!("solve failed at p={p}: {e}")),
        };
        let target = 0.5 * FRAC_1_SQRT_2 * (p * p + (1.0 - p) * (1.0 - p)).sqrt();
        max_dev = max_dev.max((cert.lower - target).abs());
    }
    CriterionResult::new(
        6,
        NAME,
        max_dev <= 1e-5,
        format!("max |direct solve - formula| over p in {{0.6, 0.75, 0.9}}: {max_dev:.3e}"),
    )
}

fn c7_flat_start_derivative(seed: u64) -> CriterionResult {
    const NAME: &str = "flat-start derivative of the quantum value";
    let value_at = |p: f64, s: u64| -> Result<f64, String> {
        let game = build_perturbed_and_game(p, 0.5).map_err(|e| e.to_string())?;
        let cert = quantum_bias_default(&game, s).map_err(|e| e.to_string())?;
        Ok((1.0 + cert.lower) / 2.0)
    };
    let h = 1e-4;
    let v0 = match value_at(0.5, seed) {
        Ok(v) => v,
        Err(e) => return fail(7, NAME, e),
    };
    let vh = match value_at(0.5 + h, seed.wrapping_add(1)) {
        Ok(v) => v,
        Err(e) => return fail(7, NAME, e),
    };
    let derivative = (vh - v0) / h;
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..10 {
        let p = (50 + 5 * i) as f64 / 100.0;
        let v = match value_at(p, seed.wrapping_add(2 + i as u64)) {
            Ok(v) => v,
            Err(e) => return fail(7, NAME, e),
        };
        monotone &= v >= prev - 1e-9;
        prev = v;
    }
    CriterionResult::new(
        7,
        NAME,
        derivative.abs() <= 1e-3 && monotone,
        format!(
            "forward difference at p = 1/2 (h = 1e-4): {derivative:.3e}; \
             non-decreasing on the p grid: {monotone}"
        ),
    )
}

fn c8_magic_square(seed: u64) -> CriterionResult {
    const NAME: &str = "magic-square question distribution";
    let game = build_magic_square_game();
    let classical = match classical_bias_exact(&game) {
        Ok(r) => r.bias,
        Err(e) => return fail(8, NAME, format!("classical solve failed: {e}")),
    };
    let cert = match quantum_bias_default(&game, seed) {
        Ok(c) => c,
        Err(e) => return fail(8, NAME, format!("quantum solve failed: {e}")),
    };
    let (alice, bob) = game.marginals();
    let marginal_dev = alice
        .iter()
        .chain(bob.iter())
        .map(|&v| (v - 0.25).abs())
        .fold(0.0f64, f64::max);
    let passed = (classical - 0.5).abs() <= 1e-12 && cert.lower >= 0.5910 && marginal_dev <= 1e-12;
    CriterionResult::new(
        8,
        NAME,
        passed,
        format!(
            "classical bias {classical}; quantum lower {:.6}; max marginal deviation {marginal_dev:.3e}",
            cert.lower
        ),
    )
}

fn random_game(rng: &mut ChaCha8Rng) -> XorGame {
    let m = rng.random_range(2..=5usize);
    let n = rng.random_range(2..=5usize);
    let mut pi = Array2::from_shape_fn((m, n), |_| rng.random::<f64>() + 1e-3);
    let total = pi.sum();
    pi.mapv_inplace(|v| v / total);
    let f = Array2::from_shape_fn((m, n), |_| u8::from(rng.random::<bool>()));
    XorGame::new("random", pi, f).expect("normalized random table is valid")
}

fn c9_property_suites(seed: u64) -> CriterionResult {
    const NAME: &str = "cross-cutting property suites";
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut worst_ascent_drop = 0.0f64;
    let mut worst_gap = f64::INFINITY;
    for i in 0..100 {
        let game = random_game(&mut rng);
        let rank = game.m() + game.n();
        let trace = match ascent_objectives(&game, rank, seed.wrapping_add(i), 60) {
            Ok(t) => t,
            Err(e) => return fail(9, NAME, format!("ascent trace failed: {e}")),
        };
        for w in trace.windows(2) {
            worst_ascent_drop = worst_ascent_drop.max(w[0] - w[1]);
        }
        let classical = match classical_bias_exact(&game) {
            Ok(r) => r.bias,
            Err(e) => return fail(9, NAME, format!("classical solve failed: {e}")),
        };
        let cert = match quantum_bias(&game, rank, 8, seed.wrapping_add(i), 1e-10) {
            Ok(c) => c,
            Err(e) => return fail(9, NAME, format!("quantum solve failed: {e}")),
        };
        worst_gap = worst_gap.min(cert.upper - classical);
    }

    // Gauge invariance: flipping answer conventions per question leaves the
    // classical bias unchanged, and transports optimal strategies.
    let mut max_gauge_dev = 0.0f64;
    for _ in 0..20 {
        let game = random_game(&mut rng);
        let a_mask: Vec<u8> = (0..game.m()).map(|_| u8::from(rng.random::<bool>())).collect();
        let b_mask: Vec<u8> = (0..game.n()).map(|_| u8::from(rng.random::<bool>())).collect();
        let flipped_f = Array2::from_shape_fn((game.m(), game.n()), |(x, y)| {
            game.f()[[x, y]] ^ a_mask[x] ^ b_mask[y]
        });
        let flipped = XorGame::new("flipped", game.pi().clone(), flipped_f)
            .expect("flipping preserves validity");
        let base = classical_bias_exact(&game).expect("small game");
        let alt = classical_bias_exact(&flipped).expect("small game");
        max_gauge_dev = max_gauge_dev.max((base.bias - alt.bias).abs());
        let transported = ClassicalStrategy::new(
            base.strategy
                .a_signs
                .iter()
                .zip(&a_mask)
                .map(|(&s, &m)| if m == 1 { -s } else { s })
                .collect(),
            base.strategy
                .b_signs
                .iter()
                .zip(&b_mask)
                .map(|(&s, &m)| if m == 1 { -s } else { s })
                .collect(),
        )
        .expect("signs stay valid");
        let via_transport = strategy_bias(&flipped, &transported).expect("shapes match");
        max_gauge_dev = max_gauge_dev.max((via_transport - base.bias).abs());
    }

    // Strategy-level invariants on the explicit constructions.
    let built = [
        build_region1_strategy(0.6, 0.8),
        build_region1_strategy(0.55, 0.65),
        build_region2_strategy(0.8, 0.8),
        build_region2_strategy(0.95, 0.9),
    ];
    let mut max_path_dev = 0.0f64;
    let mut max_defect = 0.0f64;
    for item in built {
        let (strategy, _) = match item {
            Ok(s) => s,
            Err(e) => return fail(9, NAME, format!("strategy construction failed: {e}")),
        };
        for op in strategy.alice_ops().iter().chain(strategy.bob_ops().iter()) {
            let report = validate_observable(op, 1e-8);
            max_defect = max_defect.max(report.hermitian_defect.max(report.involution_defect));
        }
        for a in strategy.alice_ops() {
            for b in strategy.bob_ops() {
                let lhs = entangled_expectation(a, b).expect("same dimensions");
                let rhs = entangled_expectation_direct(a, b).expect("same dimensions");
                max_path_dev = max_path_dev.max((lhs - rhs).norm());
            }
        }
    }

    // Spot-check the quantum lower bound against an explicit strategy.
    let game = build_perturbed_and_game(0.8, 0.8).expect("valid parameters");
    let (strategy, _) = build_region2_strategy(0.8, 0.8).expect("region 2 point");
    let exact = operator_bias(&game, &strategy).expect("matching shapes");
    let cert = quantum_bias_default(&game, seed).expect("solver runs");
    let solver_dev = (exact - cert.lower).abs();

    let passed = worst_ascent_drop <= 1e-12
        && worst_gap >= -1e-9
        && max_gauge_dev <= 1e-12
        && max_path_dev <= 1e-12
        && max_defect <= 1e-8
        && solver_dev <= 1e-5;
    CriterionResult::new(
        9,
        NAME,
        passed,
        format!(
            "worst ascent drop {worst_ascent_drop:.3e}; min (upper - classical) {worst_gap:.3e}; \
             gauge deviation {max_gauge_dev:.3e}; expectation path deviation {max_path_dev:.3e}; \
             max observable defect {max_defect:.3e}; solver vs strategy {solver_dev:.3e}"
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_ordered_and_named() {
        // Cheap structural check; the full suite runs as an integration test.
        let r = c1_classical_flatness();
        assert_eq!(r.id, 1);
        assert!(r.passed, "{}", r.details);
    }
}
