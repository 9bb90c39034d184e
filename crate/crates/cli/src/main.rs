//! Command-line front end: bias reports, parameter sweeps, the full
//! reproduction suite, and explicit-strategy verification.
//!
//! Exit codes: 0 success, 1 usage error, 2 reproduction failure,
//! 3 numeric/construction error. All commands are deterministic for a fixed
//! `--seed`; `XORGAME_THREADS` caps the worker count (0 or unset = auto).

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use xorgame::acceptance::run_all;
use xorgame::classical::classical_bias_exact_guarded;
use xorgame::game::KnowledgeSpec;
use xorgame::quantum::{closed_form_bias, default_rank, quantum_bias, region_of};
use xorgame::verifier::{
    build_region1_strategy, build_region2_strategy, operator_bias, simulate_rounds,
    ConstructionReport, OperatorStrategy,
};
use xorgame::{
    build_distributed_game, build_magic_square_game, build_perturbed_and_game, sum_games,
    validate_observable, XorGame,
};

#[derive(Parser)]
#[command(name = "xorgame", version, about = "Two-prover XOR games: exact classical and certified quantum biases")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for solver restarts and simulations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Gram-vector rank; defaults to the total question count m + n.
    #[arg(long, global = true)]
    rank: Option<usize>,

    /// Independent ascent restarts per solve.
    #[arg(long, global = true, default_value_t = 32)]
    restarts: usize,

    /// Ascent convergence tolerance on the objective.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,

    /// Guard on Alice's question count for exhaustive classical search.
    #[arg(long, global = true, default_value_t = 24)]
    max_questions: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Classical and quantum bias of a game.
    Bias {
        #[command(subcommand)]
        game: GameSpec,
    },
    /// Sweep the perturbed AND family over a (p, q) grid into a CSV file.
    Sweep {
        #[arg(long, default_value_t = 0.5)]
        p_start: f64,
        #[arg(long, default_value_t = 1.0)]
        p_end: f64,
        #[arg(long, default_value_t = 0.5)]
        q_start: f64,
        #[arg(long, default_value_t = 1.0)]
        q_end: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full reproduction suite; optionally write a JSON report.
    Reproduce {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an explicit strategy, validate it, and simulate rounds.
    VerifyStrategy {
        /// Closed-form region of the (p, q) parameters: 1 or 2.
        region: u8,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
    },
}

#[derive(Subcommand)]
enum GameSpec {
    /// Perturbed nonlocal AND game with knowledge parameters p and q.
    And {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Distributed-knowledge game from a JSON specification file.
    Distributed {
        #[arg(long)]
        spec_file: PathBuf,
    },
    /// Nonlocal AND game with the magic-square question distribution.
    MagicSquare,
    /// Sum of named games; each spec is `and:<p>:<q>` or `magic-square`.
    Sum {
        #[arg(required = true)]
        specs: Vec<String>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn numeric(e: impl std::fmt::Display) -> Failure {
    Failure { code: 3, message: e.to_string() }
}

/// Formats a float with 12 significant digits (ties to even), plain decimal.
fn fmt12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..-point {
            out.push('0');
        }
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        for _ in 0..point as usize - digits.len() {
            out.push('0');
        }
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    out
}

fn configure_threads() -> Result<(), Failure> {
    match std::env::var("XORGAME_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .map_err(|_| usage(format!("XORGAME_THREADS must be a non-negative integer, got {raw:?}")))?;
            if n == 0 {
                return Ok(());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| numeric(format!("thread pool setup failed: {e}")))
        }
    }
}

fn parse_sum_spec(token: &str) -> Result<XorGame, Failure> {
    if token == "magic-square" {
        return Ok(build_magic_square_game());
    }
    let parts: Vec<&str> = token.split(':').collect();
    match parts.as_slice() {
        ["and", p, q] => {
            let p: f64 = p.parse().map_err(|_| usage(format!("bad probability in spec {token:?}")))?;
            let q: f64 = q.parse().map_err(|_| usage(format!("bad probability in spec {token:?}")))?;
            build_perturbed_and_game(p, q).map_err(numeric)
        }
        _ => Err(usage(format!(
            "unknown game spec {token:?}; expected and:<p>:<q> or magic-square"
        ))),
    }
}

fn build_game(spec: &GameSpec) -> Result<XorGame, Failure> {
    match spec {
        GameSpec::And { p, q } => build_perturbed_and_game(*p, *q).map_err(numeric),
        GameSpec::MagicSquare => Ok(build_magic_square_game()),
        GameSpec::Distributed { spec_file } => {
            let text = std::fs::read_to_string(spec_file)
                .map_err(|e| usage(format!("cannot read {}: {e}", spec_file.display())))?;
            let spec = KnowledgeSpec::from_json(&text)
                .map_err(|e| usage(format!("malformed spec {}: {e}", spec_file.display())))?;
            build_distributed_game(&spec).map_err(numeric)
        }
        GameSpec::Sum { specs } => {
            let mut games = specs.iter().map(|t| parse_sum_spec(t));
            let first = games.next().expect("clap enforces at least one spec")?;
            games.try_fold(first, |acc, g| sum_games(&acc, &g?).map_err(numeric))
        }
    }
}

fn cmd_bias(cli: &Cli, spec: &GameSpec) -> Result<(), Failure> {
    let game = build_game(spec)?;
    let classical = classical_bias_exact_guarded(&game, cli.max_questions).map_err(numeric)?;
    let rank = cli.rank.unwrap_or_else(|| default_rank(&game));
    let cert = quantum_bias(&game, rank, cli.restarts, cli.seed, cli.tol).map_err(numeric)?;
    println!("game: {} ({}x{} questions)", game.label(), game.m(), game.n());
    println!(
        "classical bias: {}  value: {}",
        fmt12(classical.bias),
        fmt12(classical.value)
    );
    println!(
        "quantum lower:  {}  value: {}",
        fmt12(cert.lower),
        fmt12((1.0 + cert.lower) / 2.0)
    );
    println!("quantum upper:  {}", fmt12(cert.upper));
    println!(
        "certificate slack: {:.3e} (min dual eigenvalue {:.3e}, rank {}, restarts {}, seed {})",
        cert.slack, cert.min_eig, cert.rank, cert.restarts, cert.seed
    );
    if let GameSpec::And { p, q } = spec {
        if let Ok(closed) = closed_form_bias(*p, *q) {
            println!("closed form:    {}  (region {})", fmt12(closed), region_of(*p, *q));
        }
    }
    Ok(())
}

fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

fn cmd_sweep(
    cli: &Cli,
    p_start: f64,
    p_end: f64,
    q_start: f64,
    q_end: f64,
    step: f64,
    out: &PathBuf,
) -> Result<(), Failure> {
    for (name, start, end) in [("p", p_start, p_end), ("q", q_start, q_end)] {
        if !(0.5..=1.0).contains(&start) || !(0.5..=1.0).contains(&end) || start > end {
            return Err(usage(format!(
                "{name} range [{start}, {end}] must satisfy 1/2 <= start <= end <= 1"
            )));
        }
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(usage(format!("step {step} must be positive")));
    }
    let mut csv = String::from("p,q,classical_bias,quantum_lower,quantum_upper,closed_form,region\n");
    let mut rows = 0u64;
    for (i, &p) in grid(p_start, p_end, step).iter().enumerate() {
        for (j, &q) in grid(q_start, q_end, step).iter().enumerate() {
            let game = build_perturbed_and_game(p, q).map_err(numeric)?;
            let classical = classical_bias_exact_guarded(&game, cli.max_questions)
                .map_err(numeric)?;
            let rank = cli.rank.unwrap_or_else(|| default_rank(&game));
            let row_seed = cli.seed.wrapping_add((i * 1024 + j) as u64);
            let cert =
                quantum_bias(&game, rank, cli.restarts, row_seed, cli.tol).map_err(numeric)?;
            let closed = closed_form_bias(p, q).map_err(numeric)?;
            let region = region_of(p, q);
            writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                fmt12(p),
                fmt12(q),
                fmt12(classical.bias),
                fmt12(cert.lower),
                fmt12(cert.upper),
                fmt12(closed),
                region
            )
            .expect("writing to a string cannot fail");
            rows += 1;
        }
    }
    std::fs::write(out, csv).map_err(|e| numeric(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {rows} rows to {}", out.display());
    Ok(())
}

fn cmd_reproduce(cli: &Cli, out: Option<&PathBuf>) -> Result<(), Failure> {
    let results = run_all(cli.seed);
    let all_passed = results.iter().all(|r| r.passed);
    for r in &results {
        println!(
            "criterion {} ({}): {} - {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.details
        );
    }
    if let Some(path) = out {
        let report = serde_json::json!({
            "seed": cli.seed,
            "all_passed": all_passed,
            "criteria": results,
        });
        let text = serde_json::to_string_pretty(&report).expect("report serialization");
        std::fs::write(path, text)
            .map_err(|e| numeric(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote report to {}", path.display());
    }
    if all_passed {
        Ok(())
    } else {
        let failing: Vec<String> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{} ({})", r.id, r.name))
            .collect();
        Err(Failure { code: 2, message: format!("failed criteria: {}", failing.join(", ")) })
    }
}

fn print_strategy_report(
    label: &str,
    game: &XorGame,
    strategy: &OperatorStrategy,
    report: &ConstructionReport,
    closed: f64,
    rounds: u64,
    seed: u64,
) -> Result<(), Failure> {
    println!("{label} (local dimension {})", strategy.local_dim());
    if let Some(beta) = report.beta {
        println!("resolved angle beta: {}", fmt12(beta));
    }
    println!("alice repaired: {:?}", report.alice_repaired);
    println!("bob repaired:   {:?}", report.bob_repaired);
    println!("observable defects (hermitian / involution):");
    for (side, ops) in [("A", strategy.alice_ops()), ("B", strategy.bob_ops())] {
        for (i, op) in ops.iter().enumerate() {
            let r = validate_observable(op, 1e-8);
            println!("  {side}{i}: {:.3e} / {:.3e}", r.hermitian_defect, r.involution_defect);
        }
    }
    let bias = operator_bias(game, strategy).map_err(numeric)?;
    println!("exact bias:   {}  value: {}", fmt12(bias), fmt12((1.0 + bias) / 2.0));
    println!(
        "closed form:  {}  |difference| = {:.3e}",
        fmt12(closed),
        (bias - closed).abs()
    );
    let summary = simulate_rounds(game, strategy, rounds, seed).map_err(numeric)?;
    println!(
        "win rate over {} rounds (seed {}): {}  ({} wins)",
        summary.rounds,
        seed,
        fmt12(summary.win_rate),
        summary.wins
    );
    Ok(())
}

fn cmd_verify_strategy(cli: &Cli, region: u8, p: f64, q: f64, rounds: u64) -> Result<(), Failure> {
    let game = build_perturbed_and_game(p, q).map_err(numeric)?;
    match region {
        1 => {
            let (strategy, report) = build_region1_strategy(p, q).map_err(numeric)?;
            let closed = xorgame::closed_form_region1(p, q).map_err(numeric)?;
            print_strategy_report(
                &format!("region 1 strategy at p = {p}, q = {q}"),
                &game,
                &strategy,
                &report,
                closed,
                rounds,
                cli.seed,
            )
        }
        2 => {
            let (strategy, report) = build_region2_strategy(p, q).map_err(numeric)?;
            let closed = xorgame::closed_form_region2(p, q).map_err(numeric)?;
            print_strategy_report(
                &format!("region 2 strategy at p = {p}, q = {q}"),
                &game,
                &strategy,
                &report,
                closed,
                rounds,
                cli.seed,
            )
        }
        other => Err(usage(format!("region must be 1 or 2, got {other}"))),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Bias { game } => cmd_bias(cli, game),
        Command::Sweep { p_start, p_end, q_start, q_end, step, out } => {
            cmd_sweep(cli, *p_start, *p_end, *q_start, *q_end, *step, out)
        }
        Command::Reproduce { out } => cmd_reproduce(cli, out.as_ref()),
        Command::VerifyStrategy { region, p, q, rounds } => {
            cmd_verify_strategy(cli, *region, *p, *q, *rounds)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
