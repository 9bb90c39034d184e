//! XOR game construction.
//!
//! A two-prover XOR game is described by a question distribution `pi(x, y)`
//! and a target bit `f(x, y)`; the verifier accepts answer bits (a, b) iff
//! a XOR b = f(x, y). Everything downstream works on the signed cost matrix
//! G[x][y] = pi(x, y) * (-1)^f(x, y).
//!
//! Builders provided here:
//! - `build_perturbed_and_game`: the two-bit AND game in which Alice's first
//!   bit matches the hidden input with probability p and Bob's second with
//!   probability q.
//! - `build_distributed_game`: the general family where each hidden input bit
//!   is assigned to one side with a per-bit knowledge probability.
//! - `sum_games`: play two games at once, winning iff the XOR of answers
//!   equals the XOR of the two target bits (cost = Kronecker product).
//! - `build_magic_square_game`: the AND game with question weights taken from
//!   a 4x4 magic square, giving uniform marginals.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_TOL: f64 = 1e-12;

/// Guard on question-side size for composed games.
const MAX_QUESTIONS: usize = 1 << 20;

/// A two-prover XOR game: question distribution, target bits, and the signed
/// cost matrix that linearizes the bias as a bilinear form in strategies.
#[derive(Debug, Clone)]
pub struct XorGame {
    label: String,
    m: usize,
    n: usize,
    pi: Array2<f64>,
    f: Array2<u8>,
    cost: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct GameDoc {
    label: String,
    m: usize,
    n: usize,
    pi: Vec<f64>,
    f: Vec<u8>,
}

impl XorGame {
    /// Validates `pi` as a probability table, `f` as a 0/1 table of the same
    /// shape, and derives the cost matrix.
    pub fn new(label: impl Into<String>, pi: Array2<f64>, f: Array2<u8>) -> Result<Self> {
        let (m, n) = pi.dim();
        if m == 0 || n == 0 {
            return Err(Error::Dimension("game must have at least one question per side".into()));
        }
        if f.dim() != (m, n) {
            return Err(Error::Dimension(format!(
                "pi is {}x{} but f is {}x{}",
                m,
                n,
                f.dim().0,
                f.dim().1
            )));
        }
        let mut total = 0.0;
        for &p in pi.iter() {
            if !p.is_finite() {
                return Err(Error::Domain("pi contains a non-finite entry".into()));
            }
            if p < 0.0 {
                return Err(Error::Domain(format!("pi contains negative entry {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Domain(format!("pi sums to {total}, expected 1")));
        }
        if f.iter().any(|&b| b > 1) {
            return Err(Error::Domain("f contains an entry other than 0 or 1".into()));
        }
        let mut cost = pi.clone();
        cost.zip_mut_with(&f, |c, &b| {
            if b == 1 {
                *c = -*c;
            }
        });
        Ok(Self { label: label.into(), m, n, pi, f, cost })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of Alice questions.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of Bob questions.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pi(&self) -> &Array2<f64> {
        &self.pi
    }

    pub fn f(&self) -> &Array2<u8> {
        &self.f
    }

    /// Signed cost matrix G[x][y] = pi(x,y) * (-1)^f(x,y).
    pub fn cost(&self) -> &Array2<f64> {
        &self.cost
    }

    /// Row sums and column sums of pi.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let alice = self.pi.rows().into_iter().map(|r| r.sum()).collect();
        let bob = self.pi.columns().into_iter().map(|c| c.sum()).collect();
        (alice, bob)
    }

    /// Serializes to `{label, m, n, pi, f}` with row-major tables; the cost
    /// matrix is never serialized and is recomputed on load.
    pub fn to_json(&self) -> String {
        let doc = GameDoc {
            label: self.label.clone(),
            m: self.m,
            n: self.n,
            pi: self.pi.iter().copied().collect(),
            f: self.f.iter().copied().collect(),
        };
        serde_json::to_string(&doc).expect("game serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GameDoc = serde_json::from_str(text)?;
        if doc.pi.len() != doc.m * doc.n || doc.f.len() != doc.m * doc.n {
            return Err(Error::Dimension(format!(
                "tables of {} and {} entries do not match declared {}x{}",
                doc.pi.len(),
                doc.f.len(),
                doc.m,
                doc.n
            )));
        }
        let pi = Array2::from_shape_vec((doc.m, doc.n), doc.pi)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        let f = Array2::from_shape_vec((doc.m, doc.n), doc.f)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Self::new(doc.label, pi, f)
    }
}

/// Which prover a hidden input bit is assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Description of a distributed-knowledge game: a Boolean function g on
/// n_bits hidden bits, a distribution over the hidden input, and for each bit
/// the side that holds it together with its knowledge probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "KnowledgeSpecDoc", into = "KnowledgeSpecDoc")]
pub struct KnowledgeSpec {
    partition: Vec<Side>,
    probs: Vec<f64>,
    input_dist: Vec<f64>,
    g: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct KnowledgeSpecDoc {
    partition: Vec<Side>,
    probs: Vec<f64>,
    input_dist: Vec<f64>,
    g: Vec<u8>,
}

impl TryFrom<KnowledgeSpecDoc> for KnowledgeSpec {
    type Error = Error;

    fn try_from(doc: KnowledgeSpecDoc) -> Result<Self> {
        KnowledgeSpec::new(doc.partition, doc.probs, doc.input_dist, doc.g)
    }
}

impl From<KnowledgeSpec> for KnowledgeSpecDoc {
    fn from(spec: KnowledgeSpec) -> Self {
        KnowledgeSpecDoc {
            partition: spec.partition,
            probs: spec.probs,
            input_dist: spec.input_dist,
            g: spec.g,
        }
    }
}

impl KnowledgeSpec {
    pub fn new(
        partition: Vec<Side>,
        probs: Vec<f64>,
        input_dist: Vec<f64>,
        g: Vec<u8>,
    ) -> Result<Self> {
        let n_bits = partition.len();
        if n_bits == 0 {
            return Err(Error::Domain("need at least one input bit".into()));
        }
        if n_bits > 12 {
            return Err(Error::Size(format!("{n_bits} input bits exceed the 12-bit guard")));
        }
        if probs.len() != n_bits {
            return Err(Error::Dimension(format!(
                "{} knowledge probabilities for {} bits",
                probs.len(),
                n_bits
            )));
        }
        let size = 1usize << n_bits;
        if g.len() != size {
            return Err(Error::Domain(format!(
                "truth table has {} entries, expected 2^{} = {}",
                g.len(),
                n_bits,
                size
            )));
        }
        if input_dist.len() != size {
            return Err(Error::Dimension(format!(
                "input distribution has {} entries, expected {}",
                input_dist.len(),
                size
            )));
        }
        for &p in &probs {
            if !(0.5..=1.0).contains(&p) {
                return Err(Error::Domain(format!("knowledge probability {p} outside [1/2, 1]")));
            }
        }
        if g.iter().any(|&b| b > 1) {
            return Err(Error::Domain("truth table contains an entry other than 0 or 1".into()));
        }
        let mut total = 0.0;
        for &w in &input_dist {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!("input distribution entry {w} invalid")));
            }
            total += w;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Domain(format!("input distribution sums to {total}, expected 1")));
        }
        Ok(Self { partition, probs, input_dist, g })
    }

    /// Spec with the hidden input uniformly distributed.
    pub fn with_uniform_input(partition: Vec<Side>, probs: Vec<f64>, g: Vec<u8>) -> Result<Self> {
        let size = 1usize << partition.len();
        let input_dist = vec![1.0 / size as f64; size];
        Self::new(partition, probs, input_dist, g)
    }

    pub fn n_bits(&self) -> usize {
        self.partition.len()
    }

    pub fn partition(&self) -> &[Side] {
        &self.partition
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn input_dist(&self) -> &[f64] {
        &self.input_dist
    }

    pub fn g(&self) -> &[u8] {
        &self.g
    }

    /// True iff every knowledge probability is exactly 1/2, in which case the
    /// built game gives neither prover any information about the hidden input.
    pub fn is_no_knowledge(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.5)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialization cannot fail")
    }
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.5..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [1/2, 1]")));
    }
    Ok(())
}

/// Two-bit AND game with knowledge levels p (Alice, first bit) and q (Bob,
/// second bit).
///
/// The hidden input z is uniform over two bits. With probability p the branch
/// (x1 = z1, y1 = 0) is taken, otherwise (x1 = z1 XOR 1, y1 = 1); with
/// probability q the branch (y2 = z2, x2 = 0), otherwise (y2 = z2 XOR 1,
/// x2 = 1). The target bit is z1 * z2 with z_i = x_i XOR y_i.
pub fn build_perturbed_and_game(p: f64, q: f64) -> Result<XorGame> {
    check_prob("p", p)?;
    check_prob("q", q)?;
    let mut pi = Array2::zeros((4, 4));
    let mut f = Array2::zeros((4, 4));
    for x in 0..4usize {
        for y in 0..4usize {
            let z = x ^ y;
            f[[x, y]] = (((z >> 1) & 1) * (z & 1)) as u8;
        }
    }
    for z1 in 0..2usize {
        for z2 in 0..2usize {
            for (known_a, wa) in [(true, p), (false, 1.0 - p)] {
                for (known_b, wb) in [(true, q), (false, 1.0 - q)] {
                    let (x1, y1) = if known_a { (z1, 0) } else { (z1 ^ 1, 1) };
                    let (y2, x2) = if known_b { (z2, 0) } else { (z2 ^ 1, 1) };
                    pi[[x1 * 2 + x2, y1 * 2 + y2]] += 0.25 * wa * wb;
                }
            }
        }
    }
    XorGame::new(format!("and(p={p},q={q})"), pi, f)
}

/// Game realizing the nonlocal computation of `spec.g` with per-bit partial
/// knowledge.
///
/// For a bit held by Alice, her question bit matches the hidden bit with the
/// bit's knowledge probability (and Bob's is 0), otherwise it is flipped (and
/// Bob's is 1); symmetrically for bits held by Bob. The branch choices are
/// read off (x, y): for an Alice-side bit the flip indicator is y_i, for a
/// Bob-side bit it is x_i, so each question pair receives mass from exactly
/// one hidden input and branch combination.
pub fn build_distributed_game(spec: &KnowledgeSpec) -> Result<XorGame> {
    let n_bits = spec.n_bits();
    let size = 1usize << n_bits;
    let mut pi = Array2::zeros((size, size));
    let mut f = Array2::zeros((size, size));
    for x in 0..size {
        for y in 0..size {
            let z = x ^ y;
            f[[x, y]] = spec.g()[z];
            let mut w = spec.input_dist()[z];
            for (i, (&side, &prob)) in spec.partition().iter().zip(spec.probs()).enumerate() {
                let shift = n_bits - 1 - i;
                let flip = match side {
                    Side::A => (y >> shift) & 1,
                    Side::B => (x >> shift) & 1,
                };
                w *= if flip == 0 { prob } else { 1.0 - prob };
            }
            pi[[x, y]] = w;
        }
    }
    XorGame::new(format!("distributed(n={n_bits})"), pi, f)
}

/// Sum of two games: questions are pairs, the target bit is the XOR of the
/// two target bits, so the cost matrix is the Kronecker product of the parts.
///
/// Index convention: question pair (x1, x2) maps to x1 * m2 + x2.
pub fn sum_games(g1: &XorGame, g2: &XorGame) -> Result<XorGame> {
    let m = g1.m().checked_mul(g2.m()).filter(|&m| m <= MAX_QUESTIONS);
    let n = g1.n().checked_mul(g2.n()).filter(|&n| n <= MAX_QUESTIONS);
    let (m, n) = match (m, n) {
        (Some(m), Some(n)) => (m, n),
        _ => return Err(Error::Size("sum game exceeds the question-count guard".into())),
    };
    let mut pi = Array2::zeros((m, n));
    let mut f = Array2::zeros((m, n));
    for x1 in 0..g1.m() {
        for x2 in 0..g2.m() {
            for y1 in 0..g1.n() {
                for y2 in 0..g2.n() {
                    let x = x1 * g2.m() + x2;
                    let y = y1 * g2.n() + y2;
                    pi[[x, y]] = g1.pi()[[x1, y1]] * g2.pi()[[x2, y2]];
                    f[[x, y]] = g1.f()[[x1, y1]] ^ g2.f()[[x2, y2]];
                }
            }
        }
    }
    XorGame::new(format!("sum({},{})", g1.label(), g2.label()), pi, f)
}

/// The two-bit AND game with question weights proportional to a 4x4 magic
/// square: every marginal is 1/4 yet the distribution is not a function of
/// x XOR y alone.
pub fn build_magic_square_game() -> XorGame {
    const M: [[f64; 4]; 4] = [
        [4.0, 14.0, 15.0, 1.0],
        [9.0, 7.0, 6.0, 12.0],
        [5.0, 11.0, 10.0, 8.0],
        [16.0, 2.0, 3.0, 13.0],
    ];
    let mut pi = Array2::zeros((4, 4));
    let mut f = Array2::zeros((4, 4));
    for x in 0..4usize {
        for y in 0..4usize {
            pi[[x, y]] = M[x][y] / 136.0;
            let z = x ^ y;
            f[[x, y]] = (((z >> 1) & 1) * (z & 1)) as u8;
        }
    }
    XorGame::new("magic-square", pi, f).expect("magic square weights are a fixed distribution")
}
