//! Exact classical bias by exhaustive strategy search.
//!
//! The classical bias of a game is max over sign vectors A, B of
//! sum G[x][y] A_x B_y. Only Alice's side is enumerated: for fixed A the best
//! Bob response is B_y = sign(sum_x G[x][y] A_x), collapsing the objective to
//! sum_y |sum_x G[x][y] A_x|. The global sign flip (A, B) -> (-A, -B) leaves
//! the bias unchanged, so A_0 = +1 is fixed and 2^(m-1) assignments are
//! enumerated, optionally in parallel with a deterministic reduction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{build_perturbed_and_game, XorGame};

/// Default ceiling on Alice's question count for exhaustive search.
pub const DEFAULT_MAX_QUESTIONS: usize = 24;

/// Hard implementation limit: sign assignments are enumerated as u64 masks.
const HARD_MAX_QUESTIONS: usize = 40;

/// One deterministic answer per question, as signs: answer bit a = (1 - A)/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalStrategy {
    pub a_signs: Vec<i8>,
    pub b_signs: Vec<i8>,
}

impl ClassicalStrategy {
    pub fn new(a_signs: Vec<i8>, b_signs: Vec<i8>) -> Result<Self> {
        if a_signs.is_empty() || b_signs.is_empty() {
            return Err(Error::Dimension("strategy must answer at least one question".into()));
        }
        if a_signs.iter().chain(b_signs.iter()).any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain("strategy signs must be exactly +1 or -1".into()));
        }
        Ok(Self { a_signs, b_signs })
    }

    /// All-(+1) strategy: both provers always answer 0.
    pub fn all_agree(m: usize, n: usize) -> Self {
        Self { a_signs: vec![1; m], b_signs: vec![1; n] }
    }
}

/// Exact optimum with one witnessing strategy.
#[derive(Debug, Clone)]
pub struct ClassicalResult {
    pub bias: f64,
    pub value: f64,
    pub strategy: ClassicalStrategy,
}

#[derive(Serialize, Deserialize)]
struct ClassicalResultDoc {
    bias: f64,
    value: f64,
    a_signs: Vec<i8>,
    b_signs: Vec<i8>,
}

impl ClassicalResult {
    pub fn to_json(&self) -> String {
        let doc = ClassicalResultDoc {
            bias: self.bias,
            value: self.value,
            a_signs: self.strategy.a_signs.clone(),
            b_signs: self.strategy.b_signs.clone(),
        };
        serde_json::to_string(&doc).expect("result serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ClassicalResultDoc = serde_json::from_str(text)?;
        if (doc.value - (1.0 + doc.bias) / 2.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "value {} does not match (1 + bias)/2 for bias {}",
                doc.value, doc.bias
            )));
        }
        Ok(Self {
            bias: doc.bias,
            value: doc.value,
            strategy: ClassicalStrategy::new(doc.a_signs, doc.b_signs)?,
        })
    }
}

/// Bias of a fixed strategy: sum G[x][y] A_x B_y, always in [-1, 1].
pub fn strategy_bias(g: &XorGame, s: &ClassicalStrategy) -> Result<f64> {
    if s.a_signs.len() != g.m() || s.b_signs.len() != g.n() {
        return Err(Error::Dimension(format!(
            "strategy of {}x{} signs on a {}x{} game",
            s.a_signs.len(),
            s.b_signs.len(),
            g.m(),
            g.n()
        )));
    }
    let mut total = 0.0;
    for x in 0..g.m() {
        let ax = s.a_signs[x] as f64;
        for y in 0..g.n() {
            total += g.cost()[[x, y]] * ax * s.b_signs[y] as f64;
        }
    }
    Ok(total)
}

/// Mask bit j (from bit 0) carries the sign of A_{j+1}; a set bit means -1.
/// A_0 is the fixed gauge +1.
fn signs_from_mask(mask: u64, m: usize) -> Vec<i8> {
    let mut a = vec![1i8; m];
    for j in 0..m - 1 {
        if (mask >> j) & 1 == 1 {
            a[j + 1] = -1;
        }
    }
    a
}

/// Lexicographic order on the sign vectors behind two masks, with -1 < +1.
/// The first differing position is the lowest differing mask bit; the vector
/// with -1 there (bit set) is smaller.
fn mask_lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let j = diff.trailing_zeros();
    (a >> j) & 1 == 1
}

fn better(lhs: (f64, u64), rhs: (f64, u64)) -> (f64, u64) {
    if lhs.0 > rhs.0 || (lhs.0 == rhs.0 && mask_lex_less(lhs.1, rhs.1)) {
        lhs
    } else {
        rhs
    }
}

/// Exhaustive classical optimum with the default enumeration guard.
pub fn classical_bias_exact(g: &XorGame) -> Result<ClassicalResult> {
    classical_bias_exact_guarded(g, DEFAULT_MAX_QUESTIONS)
}

/// Exhaustive classical optimum with a caller-chosen guard on Alice's
/// question count.
pub fn classical_bias_exact_guarded(g: &XorGame, max_questions: usize) -> Result<ClassicalResult> {
    let m = g.m();
    let n = g.n();
    if m > max_questions {
        return Err(Error::Size(format!(
            "{m} Alice questions exceed the enumeration guard {max_questions}"
        )));
    }
    if m > HARD_MAX_QUESTIONS {
        return Err(Error::Size(format!(
            "{m} Alice questions exceed the implementation limit {HARD_MAX_QUESTIONS}"
        )));
    }
    // Columns flattened for the inner loop: cols[y * m + x] = G[x][y].
    let mut cols = vec![0.0f64; m * n];
    for y in 0..n {
        for x in 0..m {
            cols[y * m + x] = g.cost()[[x, y]];
        }
    }
    let score = |mask: u64| -> f64 {
        let mut bias = 0.0;
        for y in 0..n {
            let col = &cols[y * m..(y + 1) * m];
            let mut s = col[0];
            for (j, &c) in col[1..].iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    s -= c;
                } else {
                    s += c;
                }
            }
            bias += s.abs();
        }
        bias
    };
    let count: u64 = 1 << (m - 1);
    let (best_bias, best_mask) = (0..count)
        .into_par_iter()
        .map(|mask| (score(mask), mask))
        .reduce(|| (f64::NEG_INFINITY, 0), better);

    let a_signs = signs_from_mask(best_mask, m);
    let mut b_signs = vec![1i8; n];
    for y in 0..n {
        let mut s = 0.0;
        for x in 0..m {
            s += cols[y * m + x] * a_signs[x] as f64;
        }
        if s < 0.0 {
            b_signs[y] = -1;
        }
    }
    let strategy = ClassicalStrategy { a_signs, b_signs };
    Ok(ClassicalResult { bias: best_bias, value: (1.0 + best_bias) / 2.0, strategy })
}

/// Expected bias on the full-knowledge AND game of the randomized strategy
/// that draws shared bits r1, r2 with Pr[r1=0] = p, Pr[r2=0] = q and plays
/// `s` on the XOR-shifted questions.
///
/// This realizes the reduction showing the perturbed classical bias cannot
/// exceed the unperturbed one: the returned value always equals the bias of
/// `s` on the perturbed game itself.
pub fn reduce_to_full_knowledge(s: &ClassicalStrategy, p: f64, q: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&p) || !(0.5..=1.0).contains(&q) {
        return Err(Error::Domain(format!("(p, q) = ({p}, {q}) outside [1/2, 1]^2")));
    }
    if s.a_signs.len() != 4 || s.b_signs.len() != 4 {
        return Err(Error::Dimension(
            "reduction applies to strategies for the 4-question AND game".into(),
        ));
    }
    let full = build_perturbed_and_game(1.0, 1.0)?;
    let mut expected = 0.0;
    for r1 in 0..2usize {
        for r2 in 0..2usize {
            let w1 = if r1 == 0 { p } else { 1.0 - p };
            let w2 = if r2 == 0 { q } else { 1.0 - q };
            let w = w1 * w2;
            let shift = r1 * 2 + r2;
            let mut bias = 0.0;
            for x in 0..4 {
                for y in 0..4 {
                    bias += full.cost()[[x, y]]
                        * s.a_signs[x ^ shift] as f64
                        * s.b_signs[y ^ shift] as f64;
                }
            }
            expected += w * bias;
        }
    }
    Ok(expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::build_magic_square_game;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} beyond {tol}");
    }

    fn random_strategy(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ClassicalStrategy {
        ClassicalStrategy {
            a_signs: (0..m).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
            b_signs: (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    #[test]
    fn and_family_bias_is_half() {
        for &(p, q) in &[(0.5, 0.5), (1.0, 1.0), (0.75, 0.6)] {
            let g = build_perturbed_and_game(p, q).unwrap();
            let r = classical_bias_exact(&g).unwrap();
            assert_close(r.bias, 0.5, 1e-12);
            assert_close(r.value, 0.75, 1e-12);
            assert_close(strategy_bias(&g, &r.strategy).unwrap(), r.bias, 1e-12);
        }
    }

    #[test]
    fn chsh_endpoint_is_exact() {
        let g = build_perturbed_and_game(1.0, 1.0).unwrap();
        let r = classical_bias_exact(&g).unwrap();
        assert_eq!(r.bias, 0.5);
    }

    #[test]
    fn magic_square_bias_is_half() {
        let r = classical_bias_exact(&build_magic_square_game()).unwrap();
        assert_close(r.bias, 0.5, 1e-12);
    }

    #[test]
    fn constant_zero_function_is_free() {
        let pi = Array2::from_elem((3, 3), 1.0 / 9.0);
        let f = Array2::zeros((3, 3));
        let g = XorGame::new("always-zero", pi, f).unwrap();
        let r = classical_bias_exact(&g).unwrap();
        assert_close(r.bias, 1.0, 1e-12);
        assert!(r.strategy.a_signs.iter().all(|&s| s == 1));
        assert!(r.strategy.b_signs.iter().all(|&s| s == 1));
    }

    #[test]
    fn all_agree_on_center_game() {
        let g = build_perturbed_and_game(0.5, 0.5).unwrap();
        let s = ClassicalStrategy::all_agree(4, 4);
        assert_close(strategy_bias(&g, &s).unwrap(), 0.5, 1e-15);
    }

    #[test]
    fn global_sign_flip_invariance() {
        let g = build_magic_square_game();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = random_strategy(&mut rng, 4, 4);
            let flipped = ClassicalStrategy {
                a_signs: s.a_signs.iter().map(|v| -v).collect(),
                b_signs: s.b_signs.iter().map(|v| -v).collect(),
            };
            let b1 = strategy_bias(&g, &s).unwrap();
            let b2 = strategy_bias(&g, &flipped).unwrap();
            assert_close(b1, b2, 1e-15);
        }
    }

    #[test]
    fn exact_dominates_random_strategies() {
        let g = build_perturbed_and_game(0.85, 0.65).unwrap();
        let best = classical_bias_exact(&g).unwrap().bias;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let s = random_strategy(&mut rng, 4, 4);
            assert!(strategy_bias(&g, &s).unwrap() <= best + 1e-12);
        }
    }

    #[test]
    fn fixed_strategy_bias_is_affine_in_p() {
        let q = 0.6;
        let s = classical_bias_exact(&build_perturbed_and_game(0.7, q).unwrap())
            .unwrap()
            .strategy;
        let at = |p: f64| {
            strategy_bias(&build_perturbed_and_game(p, q).unwrap(), &s).unwrap()
        };
        let (b1, b2, b3) = (at(0.5), at(0.7), at(0.9));
        assert_close(b2, (b1 + b3) / 2.0, 1e-12);
    }

    #[test]
    fn product_strategy_witnesses_submultiplicativity() {
        let g1 = build_perturbed_and_game(0.5, 0.5).unwrap();
        let g2 = build_magic_square_game();
        let r1 = classical_bias_exact(&g1).unwrap();
        let r2 = classical_bias_exact(&g2).unwrap();
        let sum = crate::game::sum_games(&g1, &g2).unwrap();
        let product = ClassicalStrategy {
            a_signs: (0..16).map(|x| r1.strategy.a_signs[x / 4] * r2.strategy.a_signs[x % 4]).collect(),
            b_signs: (0..16).map(|y| r1.strategy.b_signs[y / 4] * r2.strategy.b_signs[y % 4]).collect(),
        };
        let witnessed = strategy_bias(&sum, &product).unwrap();
        assert_close(witnessed, r1.bias * r2.bias, 1e-12);
        let best = classical_bias_exact(&sum).unwrap().bias;
        assert!(best >= r1.bias * r2.bias - 1e-12);
    }

    #[test]
    fn enumeration_guard() {
        let uniform = |size: usize| {
            let pi = Array2::from_elem((size, size), 1.0 / (size * size) as f64);
            XorGame::new("wide", pi, Array2::zeros((size, size))).unwrap()
        };
        assert!(matches!(classical_bias_exact(&uniform(32)), Err(Error::Size(_))));
        let mid = uniform(18);
        assert!(matches!(classical_bias_exact_guarded(&mid, 10), Err(Error::Size(_))));
        let solved = classical_bias_exact_guarded(&mid, 18).unwrap();
        assert_close(solved.bias, 1.0, 1e-12);
        // The implementation limit holds regardless of the caller's guard.
        assert!(matches!(classical_bias_exact_guarded(&uniform(41), 64), Err(Error::Size(_))));
    }

    #[test]
    fn mask_lex_order_prefers_minus_one_at_first_difference() {
        assert!(mask_lex_less(0b1, 0b0));
        assert!(mask_lex_less(0b11, 0b01));
        assert!(!mask_lex_less(0b0, 0b1));
        assert!(!mask_lex_less(0b1, 0b1));
        // The first differing position dominates regardless of later bits.
        assert!(mask_lex_less(0b001, 0b110));
    }

    #[test]
    fn reduction_identity_at_full_knowledge() {
        let full = build_perturbed_and_game(1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random_strategy(&mut rng, 4, 4);
            let reduced = reduce_to_full_knowledge(&s, 1.0, 1.0).unwrap();
            assert_close(reduced, strategy_bias(&full, &s).unwrap(), 1e-15);
        }
    }

    #[test]
    fn reduction_center_averages_four_shifts() {
        let center = build_perturbed_and_game(0.5, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_strategy(&mut rng, 4, 4);
            let reduced = reduce_to_full_knowledge(&s, 0.5, 0.5).unwrap();
            assert_close(reduced, strategy_bias(&center, &s).unwrap(), 1e-15);
        }
    }

    #[test]
    fn reduction_matches_perturbed_bias_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for &(p, q) in &[(0.75, 0.6), (0.9, 0.55), (0.5, 1.0), (0.6251, 0.8749)] {
            let g = build_perturbed_and_game(p, q).unwrap();
            for _ in 0..50 {
                let s = random_strategy(&mut rng, 4, 4);
                let reduced = reduce_to_full_knowledge(&s, p, q).unwrap();
                assert_close(reduced, strategy_bias(&g, &s).unwrap(), 1e-12);
            }
        }
    }

    #[test]
    fn reduction_of_optimal_strategy_stays_half() {
        let g = build_perturbed_and_game(0.75, 0.6).unwrap();
        let r = classical_bias_exact(&g).unwrap();
        let reduced = reduce_to_full_knowledge(&r.strategy, 0.75, 0.6).unwrap();
        assert_close(reduced, 0.5, 1e-12);
    }

    #[test]
    fn reduction_rejects_bad_inputs() {
        let s = ClassicalStrategy::all_agree(4, 4);
        assert!(reduce_to_full_knowledge(&s, 0.4, 0.6).is_err());
        let wide = ClassicalStrategy::all_agree(8, 8);
        assert!(reduce_to_full_knowledge(&wide, 0.8, 0.8).is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let g = build_magic_square_game();
        let r = classical_bias_exact(&g).unwrap();
        let back = ClassicalResult::from_json(&r.to_json()).unwrap();
        assert_eq!(back.bias, r.bias);
        assert_eq!(back.value, r.value);
        assert_eq!(back.strategy, r.strategy);
        assert!(ClassicalResult::from_json("{\"bias\":0.5,\"value\":0.9,\"a_signs\":[1],\"b_signs\":[1]}").is_err());
    }

    #[test]
    fn strategy_validation() {
        assert!(ClassicalStrategy::new(vec![1, -1], vec![1]).is_ok());
        assert!(ClassicalStrategy::new(vec![1, 0], vec![1]).is_err());
        assert!(ClassicalStrategy::new(vec![], vec![1]).is_err());
        let g = build_magic_square_game();
        let s = ClassicalStrategy::all_agree(3, 4);
        assert!(strategy_bias(&g, &s).is_err());
    }
}
