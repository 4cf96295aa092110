//! Batch frontend over the exact weak-closure library: the polynomial
//! family and its oracle, reduced-form combinatorics, delta/Fourier
//! analysis, the tower simulator, the sequence classifier, and the named
//! verification suites.
//!
//! Rationals print as exact `num/den` strings everywhere; floats appear
//! only in the explicitly floating-point Fourier columns. Exit codes:
//! 0 success, 1 failure (including a failed verification), 2 usage error,
//! 3 budget exceeded.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use chacon_core::analysis::{check_fourier_bound, convolution_decay_report, decay_csv, delta};
use chacon_core::mass::MassFunction;
use chacon_core::polyengine::{
    convolve as convolve_mass, degree_by_digits, first_m_of_degree, pm, reduced_pm,
};
use chacon_core::towers::{
    correlation, full_level, full_levels, full_space, height, t_apply, weak_limit_error, LevelSet,
};
use chacon_core::triadic::pi_exact;
use chacon_core::verify::{run_all, SUITE_NAMES};
use chacon_core::weaklimits::{
    audit_alpha_weak_mixing, classify, synthesize_sequence, Classification, DigitPattern,
};
use chacon_core::Budgets;

#[derive(Parser)]
#[command(
    name = "chacon",
    about = "Exact weak-closure computations for the powers of the Koopman operator of Chacon's automorphism",
    after_help = "Budgets may also be set through the environment variables shown per option.\n\
                  Level-set arguments accept `level:I`, `levels:I,J,...`, `space`, inline JSON\n\
                  ({\"tower\":N,\"cells\":[{\"cyl\":\"120\",\"level\":5},...]}, digits least significant\n\
                  first), or `@file.json`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text, env = "CHACON_FORMAT")]
    format: Format,

    /// Maximum number of residue states (3^K) for the exhaustive oracle.
    #[arg(long, global = true, env = "CHACON_ORACLE_BUDGET")]
    oracle_budget: Option<u64>,

    /// Maximum cylinder depth, in digits, reachable by refinement.
    #[arg(long, global = true, env = "CHACON_DEPTH_BUDGET")]
    depth_budget: Option<u32>,

    /// Maximum |k| accepted by the simulator's power maps.
    #[arg(long, global = true, env = "CHACON_STEP_BUDGET")]
    step_budget: Option<u64>,

    /// Maximum tower index for the simulator verification suites.
    #[arg(long, global = true, env = "CHACON_TOWER_MAX")]
    tower_max: Option<u32>,

    /// Grid size for unit-circle checks.
    #[arg(long, global = true, env = "CHACON_GRID")]
    grid: Option<u32>,

    /// Seed for the randomized verification suites.
    #[arg(long, global = true, default_value_t = 20240811, env = "CHACON_SEED")]
    seed: u64,

    /// Maximum number of tuples for the decay enumeration.
    #[arg(long, global = true, env = "CHACON_TUPLE_BUDGET")]
    tuple_budget: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients of the family polynomial of order M (exact).
    Pm { m: u64 },
    /// The same distribution by exhaustive odometer enumeration.
    Oracle { m: u64 },
    /// Reduced form of order M: leading exponent, reduced coefficients, degree.
    Reduced { m: u64 },
    /// Degree of the reduced polynomial, from the base-3 digits of M.
    Degree { m: u64 },
    /// Smallest order whose reduced polynomial has degree D.
    FirstDegree { d: u32 },
    /// Total variation of successive differences of pi_{M1} * ... * pi_{Mr}.
    Delta {
        #[arg(required = true)]
        orders: Vec<u64>,
    },
    /// Convolution pi_{M1} * ... * pi_{Mr}.
    Convolve {
        #[arg(required = true)]
        orders: Vec<u64>,
    },
    /// Check the unit-circle bound on a rational grid.
    FourierCheck {
        #[arg(long, default_value_t = 100)]
        m_max: u64,
        #[arg(long)]
        grid: Option<u32>,
    },
    /// Exact maxima of delta and of the largest atom over nondecreasing
    /// convolution tuples, with the float integral bound per row.
    Decay {
        #[arg(long = "M")]
        max_m: u64,
        #[arg(long = "R")]
        max_r: u32,
    },
    /// Apply the k-th power of the tower map; with --set-a, print the exact
    /// correlation mu(A intersect T^k B) instead.
    Simulate {
        #[arg(long)]
        tower: u32,
        /// A power `K` or an inclusive range `K1..K2` (correlation table).
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long)]
        set_a: Option<String>,
        #[arg(long)]
        set_b: String,
    },
    /// Exact tower-uniformity defect at power m h_n + u.
    WeakError {
        #[arg(long)]
        tower: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 0)]
        u: u64,
        #[arg(long, default_value = "level:0")]
        set_a: String,
        #[arg(long, default_value = "level:0")]
        set_b: String,
    },
    /// Classify a digit pattern (`head=1,1 tail=zero|two|mixed:1,0`).
    Classify {
        #[arg(long)]
        pattern: String,
    },
    /// A witness sequence index k_j realizing a product limit.
    Synthesize {
        #[arg(long, value_delimiter = ',', required = true)]
        ms: Vec<u64>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        j: u64,
    },
    /// Structural audit of the enumerated closure elements.
    Audit {
        #[arg(long = "R")]
        r_max: u32,
        #[arg(long = "M")]
        m_max: u64,
    },
    /// Run the named verification suites (all of them by default).
    VerifyAll {
        /// Restrict to specific suites (repeatable).
        #[arg(long)]
        suite: Vec<String>,
    },
}

fn budgets_from(cli: &Cli) -> Budgets {
    let mut b = Budgets::default();
    if let Some(v) = cli.oracle_budget {
        b.oracle_states = v;
    }
    if let Some(v) = cli.depth_budget {
        b.depth = v;
    }
    if let Some(v) = cli.step_budget {
        b.max_steps = v;
    }
    if let Some(v) = cli.tower_max {
        b.tower_max = v;
    }
    if let Some(v) = cli.grid {
        b.grid = v;
    }
    if let Some(v) = cli.tuple_budget {
        b.tuples = v;
    }
    b
}

fn rational_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn mass_json(m: &MassFunction) -> serde_json::Value {
    serde_json::json!({
        "atoms": m
            .iter()
            .map(|(j, mass)| {
                serde_json::json!({
                    "j": j,
                    "num": mass.numer().to_string(),
                    "den": mass.denom().to_string(),
                })
            })
            .collect::<Vec<_>>(),
    })
}

fn print_mass(m: &MassFunction, format: Format) {
    match format {
        Format::Text => println!("{m}"),
        Format::Json => println!("{}", mass_json(m)),
        Format::Csv => {
            println!("j,num,den");
            for (j, mass) in m.iter() {
                println!("{},{},{}", j, mass.numer(), mass.denom());
            }
        }
    }
}

fn print_rational(r: &BigRational, format: Format) {
    match format {
        Format::Text => println!("{}", rational_str(r)),
        Format::Json => println!(
            "{}",
            serde_json::json!({"num": r.numer().to_string(), "den": r.denom().to_string()})
        ),
        Format::Csv => {
            println!("num,den");
            println!("{},{}", r.numer(), r.denom());
        }
    }
}

fn print_integer(v: u64, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::json!({ "value": v })),
        _ => println!("{v}"),
    }
}

/// Parse `level:I`, `levels:I,J,...`, `space`, inline JSON, or `@file`.
fn parse_level_set(spec: &str, tower: u32) -> anyhow::Result<LevelSet> {
    let parse_json = |text: &str| -> anyhow::Result<LevelSet> {
        let set: LevelSet = serde_json::from_str(text)?;
        anyhow::ensure!(
            set.tower == tower,
            "set lives in tower {}, expected tower {tower}",
            set.tower
        );
        Ok(set)
    };
    if let Some(rest) = spec.strip_prefix("level:") {
        let i: u64 = rest.parse()?;
        anyhow::ensure!(
            i < height(tower),
            "level {i} out of range for tower {tower}"
        );
        Ok(full_level(tower, i))
    } else if let Some(rest) = spec.strip_prefix("levels:") {
        let levels: Vec<u64> = rest
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<Result<_, _>>()?;
        anyhow::ensure!(
            levels.iter().all(|&i| i < height(tower)),
            "level out of range for tower {tower}"
        );
        Ok(full_levels(tower, &levels))
    } else if spec == "space" {
        Ok(full_space(tower))
    } else if let Some(path) = spec.strip_prefix('@') {
        parse_json(&std::fs::read_to_string(path)?)
    } else if spec.trim_start().starts_with('{') {
        parse_json(spec)
    } else {
        anyhow::bail!("cannot parse level set {spec:?}");
    }
}

fn parse_power_range(s: &str) -> anyhow::Result<(i64, i64)> {
    if let Some((a, b)) = s.split_once("..") {
        Ok((a.parse()?, b.parse()?))
    } else {
        let k: i64 = s.parse()?;
        Ok((k, k))
    }
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    let budgets = budgets_from(cli);
    let format = cli.format;
    match &cli.command {
        Command::Pm { m } => print_mass(&pm(*m), format),
        Command::Oracle { m } => print_mass(&pi_exact(*m, &budgets)?, format),
        Command::Reduced { m } => {
            let r = reduced_pm(*m);
            match format {
                Format::Text => println!("ell={} degree={} reduced {}", r.ell, r.degree, r.reduced),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "ell": r.ell,
                        "degree": r.degree,
                        "reduced": mass_json(&r.reduced),
                    })
                ),
                Format::Csv => {
                    println!("ell,degree,j,num,den");
                    for (j, mass) in r.reduced.iter() {
                        println!(
                            "{},{},{},{},{}",
                            r.ell,
                            r.degree,
                            j,
                            mass.numer(),
                            mass.denom()
                        );
                    }
                }
            }
        }
        Command::Degree { m } => print_integer(degree_by_digits(*m), format),
        Command::FirstDegree { d } => {
            anyhow::ensure!(*d >= 1, "degree must be at least 1");
            print_integer(first_m_of_degree(*d), format);
        }
        Command::Delta { orders } => {
            let conv = convolution_of(orders);
            print_rational(&delta(&conv), format);
        }
        Command::Convolve { orders } => print_mass(&convolution_of(orders), format),
        Command::FourierCheck { m_max, grid } => {
            let grid = grid.unwrap_or(budgets.grid);
            let report = check_fourier_bound(*m_max, grid);
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "m_max": report.m_max,
                        "grid": report.grid,
                        "checked": report.checked,
                        "pass": report.pass(),
                        "worst_margin": report.worst_margin,
                        "worst_m": report.worst_at.0,
                        "worst_grid_index": report.worst_at.1,
                        "violations": report.violations.len(),
                    })
                ),
                _ => {
                    println!(
                        "checked {} points (m <= {}, grid {}): {}",
                        report.checked,
                        report.m_max,
                        report.grid,
                        if report.pass() { "pass" } else { "FAIL" }
                    );
                    println!(
                        "worst margin {:.3e} at (m={}, k={})",
                        report.worst_margin, report.worst_at.0, report.worst_at.1
                    );
                    for v in &report.violations {
                        println!(
                            "violation: m={} k={} value={} bound={}",
                            v.m, v.grid_index, v.value, v.bound
                        );
                    }
                }
            }
            if !report.pass() {
                return Ok(1);
            }
        }
        Command::Decay { max_m, max_r } => {
            let report = convolution_decay_report(*max_m, *max_r, &budgets)?;
            match format {
                Format::Json => {
                    let rows: Vec<_> = report
                        .rows
                        .iter()
                        .map(|row| {
                            serde_json::json!({
                                "r": row.r,
                                "max_delta": {"num": row.max_delta.numer().to_string(),
                                               "den": row.max_delta.denom().to_string()},
                                "delta_witness": row.delta_witness,
                                "max_sup_atom": {"num": row.max_sup_atom.numer().to_string(),
                                                  "den": row.max_sup_atom.denom().to_string()},
                                "sup_atom_witness": row.sup_atom_witness,
                                "beta_integral_bound_float": row.beta_integral,
                            })
                        })
                        .collect();
                    println!("{}", serde_json::json!({"rows": rows}));
                }
                Format::Csv => print!("{}", decay_csv(&report)),
                Format::Text => {
                    for row in &report.rows {
                        println!(
                            "r={} max_delta={} (at {:?}) max_sup_atom={} (at {:?}) beta_integral~{:.6}",
                            row.r,
                            rational_str(&row.max_delta),
                            row.delta_witness,
                            rational_str(&row.max_sup_atom),
                            row.sup_atom_witness,
                            row.beta_integral,
                        );
                    }
                }
            }
        }
        Command::Simulate {
            tower,
            k,
            set_a,
            set_b,
        } => {
            let b = parse_level_set(set_b, *tower)?;
            let (k_lo, k_hi) = parse_power_range(k)?;
            anyhow::ensure!(k_lo <= k_hi, "empty power range");
            match set_a {
                Some(spec) => {
                    let a = parse_level_set(spec, *tower)?;
                    let mut rows = Vec::new();
                    for k in k_lo..=k_hi {
                        rows.push((k, correlation(&a, &b, k, &budgets)?));
                    }
                    match format {
                        Format::Csv => {
                            println!("k,num,den");
                            for (k, c) in &rows {
                                println!("{},{},{}", k, c.numer(), c.denom());
                            }
                        }
                        Format::Json => {
                            let rows: Vec<_> = rows
                                .iter()
                                .map(|(k, c)| {
                                    serde_json::json!({"k": k,
                                        "num": c.numer().to_string(),
                                        "den": c.denom().to_string()})
                                })
                                .collect();
                            println!("{}", serde_json::json!({"correlation": rows}));
                        }
                        Format::Text => {
                            for (k, c) in &rows {
                                println!("k={} correlation {}", k, rational_str(c));
                            }
                        }
                    }
                }
                None => {
                    anyhow::ensure!(
                        k_lo == k_hi,
                        "a power range needs --set-a (correlation table)"
                    );
                    let image = t_apply(&b, k_lo, &budgets)?;
                    println!("{}", serde_json::to_string(&image)?);
                }
            }
        }
        Command::WeakError {
            tower,
            m,
            u,
            set_a,
            set_b,
        } => {
            let a = parse_level_set(set_a, *tower)?;
            let b = parse_level_set(set_b, *tower)?;
            let err = weak_limit_error(*tower, *m, *u, &a, &b, &budgets)?;
            print_rational(&err, format);
        }
        Command::Classify { pattern } => {
            let p = DigitPattern::parse(pattern)?;
            let c = classify(&p)?;
            match format {
                Format::Json => match &c {
                    Classification::Theta => println!(
                        "{}",
                        serde_json::to_string(&chacon_core::weaklimits::LimitOperator::theta())?
                    ),
                    Classification::Operator(op) => println!("{}", serde_json::to_string(op)?),
                    Classification::UnderDetermined { determined } => println!(
                        "{}",
                        serde_json::json!({
                            "under_determined": true,
                            "determined_factor": mass_json(determined),
                        })
                    ),
                },
                _ => println!("{c}"),
            }
        }
        Command::Synthesize { ms, n, j } => {
            let k = synthesize_sequence(ms, *n, *j)?;
            print_integer(k, format);
        }
        Command::Audit { r_max, m_max } => {
            let report = audit_alpha_weak_mixing(*r_max, *m_max);
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "r_max": report.r_max,
                        "m_max": report.m_max,
                        "products": report.products,
                        "min_atom_count": report.min_atom_count,
                        "max_sup_atom": {"num": report.max_sup_atom.numer().to_string(),
                                          "den": report.max_sup_atom.denom().to_string()},
                        "max_sup_witness": report.max_sup_witness,
                        "all_probability": report.all_probability,
                        "pass": report.pass,
                    })
                ),
                _ => {
                    println!(
                        "{} products with r <= {}, orders <= {}",
                        report.products, report.r_max, report.m_max
                    );
                    println!(
                        "all probabilities: {}; atom count >= {}; largest atom {} (at {:?})",
                        report.all_probability,
                        report.min_atom_count,
                        rational_str(&report.max_sup_atom),
                        report.max_sup_witness,
                    );
                    println!(
                        "no element matches alpha*Theta + (1-alpha)*Id for 0 < alpha < 1: {}",
                        if report.pass { "pass" } else { "FAIL" }
                    );
                }
            }
            if !report.pass {
                return Ok(1);
            }
        }
        Command::VerifyAll { suite } => {
            for name in suite {
                anyhow::ensure!(
                    SUITE_NAMES.contains(&name.as_str()),
                    "unknown suite {name:?}; available: {}",
                    SUITE_NAMES.join(", ")
                );
            }
            let names: Vec<&str> = suite.iter().map(|s| s.as_str()).collect();
            let results = run_all(&names, &budgets, cli.seed)?;
            let mut failed = 0;
            let mut out = String::new();
            for r in &results {
                writeln!(
                    out,
                    "{} {} — {}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                )?;
                if !r.pass {
                    failed += 1;
                }
            }
            print!("{out}");
            if failed > 0 {
                println!("{failed} suite(s) failed");
                return Ok(1);
            }
            println!("all {} suite(s) passed", results.len());
        }
    }
    Ok(0)
}

fn convolution_of(orders: &[u64]) -> MassFunction {
    let mut conv = MassFunction::unit_atom(0);
    for &m in orders {
        conv = convolve_mass(&conv, &pm(m));
    }
    conv
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            let budget = err
                .downcast_ref::<chacon_core::Error>()
                .is_some_and(|e| e.is_budget());
            ExitCode::from(if budget { 3 } else { 1 })
        }
    }
}
