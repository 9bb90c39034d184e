//! Quantum bias of an XOR game via the Gram-vector formulation.
//!
//! The operator maximization over entangled strategies equals the maximum of
//! sum G[x][y] <u_x, v_y> over unit vectors u_x, v_y (Tsirelson). This module
//! computes:
//! - a lower bound from alternating ascent (each half-step replaces one side
//!   by the normalized weighted sums of the other and cannot decrease the
//!   objective), best over deterministic seeded restarts and then polished;
//! - an upper bound from the dual side: with lambda_x = |sum_y G[x][y] v_y|
//!   and mu_y = |sum_x G[x][y] u_x|, the matrix diag(lambda, mu)/2 - W, with
//!   W carrying off-diagonal blocks G/2, is positive semidefinite at an exact
//!   optimum; any negative eigenvalue is absorbed by a diagonal shift whose
//!   trace cost (m + n) times the shift keeps the bound sound.
//!
//! Closed-form region values for the perturbed AND family and the product
//! rule for sums live here as well.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::XorGame;
use crate::linalg::min_eigenvalue;

pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100_000;

/// Polish phase: extra ascent on the winning restart until the iterate is
/// stationary well below certificate tolerances.
const POLISH_OBJ_TOL: f64 = 1e-15;
const POLISH_STEP_TOL: f64 = 1e-13;
const POLISH_MAX_ITERATIONS: usize = 50_000;

/// Default Gram-vector dimension: always sufficient for the exact optimum.
pub fn default_rank(g: &XorGame) -> usize {
    g.m() + g.n()
}

/// Unit vectors realizing a quantum strategy in Gram form.
#[derive(Debug, Clone)]
pub struct VectorStrategy {
    pub rank: usize,
    /// m unit rows.
    pub u: Array2<f64>,
    /// n unit rows.
    pub v: Array2<f64>,
}

impl VectorStrategy {
    /// The bilinear objective sum G[x][y] <u_x, v_y> of this strategy.
    pub fn objective(&self, g: &XorGame) -> Result<f64> {
        if self.u.dim() != (g.m(), self.rank) || self.v.dim() != (g.n(), self.rank) {
            return Err(Error::Dimension(format!(
                "strategy of shape {:?}/{:?} rank {} on a {}x{} game",
                self.u.dim(),
                self.v.dim(),
                self.rank,
                g.m(),
                g.n()
            )));
        }
        Ok(objective(g.cost(), &self.u, &self.v))
    }
}

/// Two-sided bound on the quantum bias with the strategy witnessing `lower`.
#[derive(Debug, Clone)]
pub struct BiasCertificate {
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    pub min_eig: f64,
    pub rank: usize,
    pub restarts: usize,
    pub seed: u64,
    pub strategy: VectorStrategy,
}

/// Serialized form of a certificate (the strategy itself is not exported).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    pub min_eig: f64,
    pub rank: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl BiasCertificate {
    pub fn to_json(&self) -> String {
        let doc = CertificateDoc {
            lower: self.lower,
            upper: self.upper,
            slack: self.slack,
            min_eig: self.min_eig,
            rank: self.rank,
            restarts: self.restarts,
            seed: self.seed,
        };
        serde_json::to_string(&doc).expect("certificate serialization cannot fail")
    }
}

fn normalize_row(row: &mut [f64]) {
    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        for x in row.iter_mut() {
            *x /= norm;
        }
    } else {
        // Zero-probability questions produce zero sums; any unit vector works.
        row.fill(0.0);
        row[0] = 1.0;
    }
}

/// v_y <- normalize(sum_x G[x][y] u_x).
fn update_v(cost: &Array2<f64>, u: &Array2<f64>, v: &mut Array2<f64>) {
    let (m, n) = cost.dim();
    let rank = u.ncols();
    for y in 0..n {
        for k in 0..rank {
            v[[y, k]] = 0.0;
        }
        for x in 0..m {
            let w = cost[[x, y]];
            if w != 0.0 {
                for k in 0..rank {
                    v[[y, k]] += w * u[[x, k]];
                }
            }
        }
        normalize_row(v.row_mut(y).into_slice().expect("contiguous row"));
    }
}

/// u_x <- normalize(sum_y G[x][y] v_y).
fn update_u(cost: &Array2<f64>, u: &mut Array2<f64>, v: &Array2<f64>) {
    let (m, n) = cost.dim();
    let rank = v.ncols();
    for x in 0..m {
        for k in 0..rank {
            u[[x, k]] = 0.0;
        }
        for y in 0..n {
            let w = cost[[x, y]];
            if w != 0.0 {
                for k in 0..rank {
                    u[[x, k]] += w * v[[y, k]];
                }
            }
        }
        normalize_row(u.row_mut(x).into_slice().expect("contiguous row"));
    }
}

fn objective(cost: &Array2<f64>, u: &Array2<f64>, v: &Array2<f64>) -> f64 {
    let (m, n) = cost.dim();
    let rank = u.ncols();
    let mut total = 0.0;
    for x in 0..m {
        for y in 0..n {
            let w = cost[[x, y]];
            if w != 0.0 {
                let mut dot = 0.0;
                for k in 0..rank {
                    dot += u[[x, k]] * v[[y, k]];
                }
                total += w * dot;
            }
        }
    }
    total
}

fn random_unit_rows(rows: usize, rank: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::zeros((rows, rank));
    for r in 0..rows {
        for k in 0..rank {
            a[[r, k]] = 2.0 * rng.random::<f64>() - 1.0;
        }
        normalize_row(a.row_mut(r).into_slice().expect("contiguous row"));
    }
    a
}

fn run_restart(
    cost: &Array2<f64>,
    rank: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> (f64, Array2<f64>, Array2<f64>) {
    let (m, n) = cost.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = random_unit_rows(m, rank, &mut rng);
    let mut v = Array2::zeros((n, rank));
    let mut obj = f64::NEG_INFINITY;
    for _ in 0..max_iter {
        update_v(cost, &u, &mut v);
        update_u(cost, &mut u, &v);
        let next = objective(cost, &u, &v);
        if (next - obj).abs() < tol {
            obj = next;
            break;
        }
        obj = next;
    }
    (obj, u, v)
}

/// Objective after every half-step of a single seeded ascent, for
/// monotonicity diagnostics.
pub fn ascent_objectives(g: &XorGame, rank: usize, seed: u64, sweeps: usize) -> Result<Vec<f64>> {
    if rank == 0 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    let cost = g.cost();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = random_unit_rows(g.m(), rank, &mut rng);
    let mut v = Array2::zeros((g.n(), rank));
    let mut trace = Vec::with_capacity(2 * sweeps);
    for _ in 0..sweeps {
        update_v(cost, &u, &mut v);
        trace.push(objective(cost, &u, &v));
        update_u(cost, &mut u, &v);
        trace.push(objective(cost, &u, &v));
    }
    Ok(trace)
}

/// Certified quantum bias.
///
/// Restarts are independent (seeded `seed + restart index`) and reduced by
/// maximum lower bound with ties to the smaller index, so the result does not
/// depend on how the restarts are scheduled. The winner is polished to a
/// near-exact fixed point before the dual certificate is formed from it.
pub fn quantum_bias(
    g: &XorGame,
    rank: usize,
    restarts: usize,
    seed: u64,
    tol: f64,
) -> Result<BiasCertificate> {
    if rank == 0 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    if restarts == 0 {
        return Err(Error::Domain("at least one restart is required".into()));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance {tol} must be positive and finite")));
    }
    let cost = g.cost();
    let (m, n) = cost.dim();

    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let (obj, u, v) = run_restart(cost, rank, seed.wrapping_add(r as u64), tol, MAX_ITERATIONS);
            (r, obj, u, v)
        })
        .reduce_with(|a, b| {
            if a.1 > b.1 || (a.1 == b.1 && a.0 < b.0) {
                a
            } else {
                b
            }
        })
        .expect("at least one restart");
    let (_, _, mut u, mut v) = best;

    // Polish: drive the winner to a stationary point so that the
    // complementary-slackness dual is feasible up to tiny eigenvalue slack.
    let mut obj = objective(cost, &u, &v);
    for _ in 0..POLISH_MAX_ITERATIONS {
        let u_prev = u.clone();
        let v_prev = v.clone();
        update_v(cost, &u, &mut v);
        update_u(cost, &mut u, &v);
        let next = objective(cost, &u, &v);
        let step = u
            .iter()
            .zip(u_prev.iter())
            .chain(v.iter().zip(v_prev.iter()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let done = (next - obj).abs() < POLISH_OBJ_TOL && step < POLISH_STEP_TOL;
        obj = next;
        if done {
            break;
        }
    }

    let lower = objective(cost, &u, &v);

    // Dual data from the primal fixed point.
    let mut lambda = vec![0.0f64; m];
    for x in 0..m {
        let mut norm2 = 0.0;
        for k in 0..rank {
            let mut s = 0.0;
            for y in 0..n {
                s += cost[[x, y]] * v[[y, k]];
            }
            norm2 += s * s;
        }
        lambda[x] = norm2.sqrt();
    }
    let mut mu = vec![0.0f64; n];
    for y in 0..n {
        let mut norm2 = 0.0;
        for k in 0..rank {
            let mut s = 0.0;
            for x in 0..m {
                s += cost[[x, y]] * u[[x, k]];
            }
            norm2 += s * s;
        }
        mu[y] = norm2.sqrt();
    }

    let mut dual = Array2::zeros((m + n, m + n));
    for x in 0..m {
        dual[[x, x]] = lambda[x] / 2.0;
    }
    for y in 0..n {
        dual[[m + y, m + y]] = mu[y] / 2.0;
    }
    for x in 0..m {
        for y in 0..n {
            dual[[x, m + y]] = -cost[[x, y]] / 2.0;
            dual[[m + y, x]] = -cost[[x, y]] / 2.0;
        }
    }
    let min_eig = min_eigenvalue(&dual)?;
    let half_sum = (lambda.iter().sum::<f64>() + mu.iter().sum::<f64>()) / 2.0;
    let upper = half_sum + (-min_eig).max(0.0) * (m + n) as f64;

    Ok(BiasCertificate {
        lower,
        upper,
        slack: upper - lower,
        min_eig,
        rank,
        restarts,
        seed,
        strategy: VectorStrategy { rank, u, v },
    })
}

/// `quantum_bias` at library defaults: rank m + n, 32 restarts, tol 1e-12.
pub fn quantum_bias_default(g: &XorGame, seed: u64) -> Result<BiasCertificate> {
    quantum_bias(g, default_rank(g), DEFAULT_RESTARTS, seed, DEFAULT_TOL)
}

/// Quantum bias of a sum of games: the product of the individual biases.
pub fn quantum_bias_of_sum(biases: &[f64]) -> Result<f64> {
    for &b in biases {
        if !b.is_finite() || !(0.0..=1.0).contains(&b) {
            return Err(Error::Domain(format!("bias {b} outside [0, 1]")));
        }
    }
    Ok(biases.iter().product())
}

fn check_unit_range(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.5..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [1/2, 1]")));
    }
    Ok(())
}

/// Closed-form quantum bias in region 1, defined by 1 >= (2q)^-1 > p >= 1/2.
pub fn closed_form_region1(p: f64, q: f64) -> Result<f64> {
    check_unit_range("p", p)?;
    check_unit_range("q", q)?;
    if 1.0 / (2.0 * q) <= p {
        return Err(Error::Domain(format!(
            "region 1 requires (2q)^-1 > p, violated: (2*{q})^-1 = {} <= {p}",
            1.0 / (2.0 * q)
        )));
    }
    Ok((q * q + (1.0 - q) * (1.0 - q)).sqrt() * (p * p + (1.0 - p) * (1.0 - p)).sqrt())
}

/// Closed-form quantum bias in region 2, defined by 1 >= p >= (2q)^-1 >= 1/2.
pub fn closed_form_region2(p: f64, q: f64) -> Result<f64> {
    check_unit_range("p", p)?;
    check_unit_range("q", q)?;
    if p < 1.0 / (2.0 * q) {
        return Err(Error::Domain(format!(
            "region 2 requires p >= (2q)^-1, violated: {p} < (2*{q})^-1 = {}",
            1.0 / (2.0 * q)
        )));
    }
    Ok((1.0 - 2.0 * (1.0 - p) * (1.0 - q)) / 2.0f64.sqrt())
}

/// Where a (p, q) pair sits in the perturbed-AND phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    One,
    Two,
    /// The unperturbed center p = q = 1/2, where quantum equals classical.
    Boundary,
    /// Outside the family's parameter square.
    None,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::One => "1",
            Region::Two => "2",
            Region::Boundary => "boundary",
            Region::None => "none",
        };
        write!(f, "{s}")
    }
}

pub fn region_of(p: f64, q: f64) -> Region {
    if !p.is_finite() || !q.is_finite() || !(0.5..=1.0).contains(&p) || !(0.5..=1.0).contains(&q) {
        return Region::None;
    }
    if p == 0.5 && q == 0.5 {
        return Region::Boundary;
    }
    if 2.0 * p * q < 1.0 {
        Region::One
    } else {
        Region::Two
    }
}

/// Closed-form quantum bias of the perturbed AND game anywhere in the
/// parameter square; 1/2 at the unperturbed center.
pub fn closed_form_bias(p: f64, q: f64) -> Result<f64> {
    match region_of(p, q) {
        Region::One => closed_form_region1(p, q),
        Region::Two => closed_form_region2(p, q),
        Region::Boundary => Ok(0.5),
        Region::None => Err(Error::Domain(format!("(p, q) = ({p}, {q}) outside [1/2, 1]^2"))),
    }
}
