//! `covset`: batch front end for the covering-system engines.
//!
//! Every command prints a JSON report `{command, inputs, seed?, result,
//! diagnostics}`. `--format csv` prints the command's table instead. Exit
//! status is 0 on success, 2 when a guard is exceeded and 1 on input errors.

mod report;

use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covset_core::bounds::{self, Ordering};
use covset_core::construct::{exact, greedy, haight, witness};
use covset_core::decompose::{self, Guards};
use covset_core::density::{self, SearchMode};
use covset_core::rational;
use covset_core::stats;
use covset_core::{DensityMethod, DensityReport, Error, ModuliSet, ResidueSystem, SystemDocument};
use num_bigint::BigUint;
use serde_json::json;

use report::{value, Report, Table};

#[derive(Parser)]
#[command(name = "covset", version, about = "Exact tools for systems of congruences")]
struct Cli {
    /// Output format. `text` reads `--input` as `r mod n` lines and still
    /// reports JSON.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Clone)]
struct Input {
    /// System file (JSON document or, with `--format text`, `r mod n`
    /// lines). `-` reads standard input.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Exact uncovered density.
    /// CSV: delta,period,method,uncovered_count.
    Density {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = DensityEngine::Auto)]
        method: DensityEngine,
        /// Largest period the sieve will scan.
        #[arg(long, default_value_t = density::DEFAULT_SIEVE_GUARD)]
        guard: u64,
        /// Most inclusion-exclusion terms.
        #[arg(long, default_value_t = density::DEFAULT_TERM_GUARD)]
        term_guard: u64,
        /// Smoothness cutoff for `--method decomposition`.
        #[arg(long = "Q", default_value_t = 3.0)]
        q: f64,
    },
    /// Alpha - beta lower bound, plain or refined.
    /// CSV: label,value (the audit trail).
    Bounds {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        refined: bool,
        #[arg(long, value_enum, default_value_t = OrderArg::Stored)]
        order: OrderArg,
        /// Also report the Q-smooth tail sum over n > N.
        #[arg(long = "tail-n")]
        tail_n: Option<u64>,
        #[arg(long = "Q", default_value_t = 3.0)]
        q: f64,
        /// Also report L(N, s) for this `s` (uses `--tail-n` as N).
        #[arg(long)]
        s: Option<u64>,
    },
    /// Positivity certificate from the smooth decomposition.
    /// CSV: label,value.
    Certify {
        #[command(flatten)]
        input: Input,
        /// Smoothness cutoff; defaults to a suggestion from the moduli.
        #[arg(long = "Q")]
        q: Option<f64>,
        /// Largest M (lcm of the smooth parts).
        #[arg(long, default_value_t = decompose::DEFAULT_M_GUARD)]
        guard: u64,
    },
    /// Subsystems C_h grouped by identical content.
    /// CSV: representative,count,classes.
    Decompose {
        #[command(flatten)]
        input: Input,
        #[arg(long = "Q", default_value_t = 3.0)]
        q: f64,
        #[arg(long, default_value_t = decompose::DEFAULT_M_GUARD)]
        guard: u64,
        /// Also check the averaging identity exactly.
        #[arg(long)]
        identity: bool,
    },
    /// Smallest density over all residue choices for a moduli multiset.
    /// CSV: modulus,residue (the optimal system).
    DeltaMinus {
        #[arg(long, value_delimiter = ',', required = true)]
        moduli: Vec<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        /// Most search nodes.
        #[arg(long, default_value_t = density::DEFAULT_EXHAUSTIVE_GUARD)]
        guard: u64,
    },
    /// Density of integers divisible by no member of a distinct moduli set.
    /// CSV: delta_plus.
    DeltaPlus {
        #[arg(long, value_delimiter = ',', required = true)]
        moduli: Vec<u64>,
        #[arg(long, default_value_t = density::DEFAULT_SIEVE_GUARD)]
        guard: u64,
    },
    /// Random classes on (N, 2N], then greedy classes up to K·N.
    /// CSV: j,divisors,f,residue,before,after.
    Greedy {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "K")]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cells tracked; defaults to 10·K·N.
        #[arg(long)]
        window: Option<u64>,
    },
    /// Exact cover with squarefree moduli, level by level.
    /// CSV: modulus,residue.
    ConstructExact {
        #[arg(long = "J")]
        j: u32,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Standard)]
        schedule: ScheduleArg,
        /// Deepest level allowed.
        #[arg(long, default_value_t = exact::DEFAULT_DEPTH_CEILING)]
        guard: u32,
    },
    /// Primes above e^sqrt(log N)·log N and their divisor statistics.
    /// CSV: p.
    Haight {
        #[arg(long = "N")]
        n: u64,
        /// Compute divisor-set alpha and beta as well.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = haight::DEFAULT_DIVISOR_GUARD)]
        guard: u64,
    },
    /// An integer missed by every class, built from the smooth part.
    /// CSV: p,multiples,b.
    Witness {
        #[command(flatten)]
        input: Input,
        /// Every modulus lies in (1, B].
        #[arg(long = "B")]
        b: u64,
        /// Largest multiplicity of a modulus.
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = density::DEFAULT_SIEVE_GUARD)]
        guard: u64,
    },
    /// Mean and variance of the density of a random system.
    /// CSV: moduli,method,mean,second_moment,variance,sample_count,seed.
    Stats {
        #[arg(long, value_delimiter = ',', required = true)]
        moduli: Vec<u64>,
        #[arg(long, value_enum, default_value_t = StatsMode::Enumerate)]
        mode: StatsMode,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumeration: most systems. Pair formula: most distinct lcms.
        /// Monte Carlo: largest period per sample.
        #[arg(long)]
        guard: Option<u64>,
    },
    /// Checks Σ 1/n = 1 and pairwise disjointness.
    /// CSV: is_exact_cover,reciprocal_sum,violation.
    VerifyExactCover {
        #[command(flatten)]
        input: Input,
    },
    /// The block inequality Σ [X_j/p] ≥ X_{j-1} for j = 1..=J.
    /// CSV: j,lhs,rhs,holds.
    Xineq {
        #[arg(long = "J")]
        j: u32,
        #[arg(long, value_enum, default_value_t = ScheduleArg::Standard)]
        schedule: ScheduleArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityEngine {
    Auto,
    Scan,
    Coprime,
    InclusionExclusion,
    Decomposition,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Stored,
    Descending,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Standard,
    Minimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsMode {
    Enumerate,
    Pair,
    MonteCarlo,
}

impl From<ScheduleArg> for exact::Schedule {
    fn from(s: ScheduleArg) -> Self {
        match s {
            ScheduleArg::Standard => exact::Schedule::Standard,
            ScheduleArg::Minimal => exact::Schedule::Minimal,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(report) => {
            let mut out = io::stdout().lock();
            let written = match format {
                Format::Csv => report.write_csv(&mut out).map_err(|e| e.to_string()),
                Format::Json | Format::Text => report.write_json(&mut out).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GuardExceeded { .. } | Error::CeilingExceeded { .. } => 2,
        _ => 1,
    }
}

fn load(input: &Input, format: Format) -> Result<SystemDocument, Error> {
    let text = if input.input.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(&input.input)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", input.input.display())))?
    };
    match format {
        Format::Text => SystemDocument::from_text(&text),
        _ => SystemDocument::from_json(&text),
    }
}

fn moduli_set(moduli: &[u64]) -> Result<ModuliSet, Error> {
    ModuliSet::try_from_moduli(moduli.iter().copied())
}

fn system_table(c: &ResidueSystem) -> Table {
    let mut t = Table::new(vec!["modulus", "residue"]);
    for cl in c.iter() {
        t.row(vec![cl.modulus().to_string(), cl.residue().to_string()]);
    }
    t
}

fn audit_table(cert: &bounds::BoundCertificate) -> Table {
    let mut t = Table::new(vec!["label", "value"]);
    for e in &cert.terms {
        t.row(vec![e.label.clone(), rational::format(&e.value)]);
    }
    t
}

/// Period as a JSON number when it fits, as a decimal string otherwise.
fn period_value(p: &BigUint) -> serde_json::Value {
    match u64::try_from(p) {
        Ok(v) => json!(v),
        Err(_) => json!(p.to_string()),
    }
}

fn run(cli: Cli) -> Result<Report, Error> {
    let format = cli.format;
    match cli.command {
        Command::Density {
            input,
            method,
            guard,
            term_guard,
            q,
        } => {
            let doc = load(&input, format)?;
            let c = &doc.classes;
            let r = match method {
                DensityEngine::Auto => density::density_auto(c, guard, term_guard)?,
                DensityEngine::Scan => density::exact_density(c, guard)?,
                DensityEngine::InclusionExclusion => density::density_inclusion_exclusion(c, term_guard)?,
                DensityEngine::Coprime => {
                    let period: BigUint = c.moduli().map(BigUint::from).product();
                    DensityReport::from_value(density::density_coprime(c)?, period, DensityMethod::CoprimeProduct)
                }
                DensityEngine::Decomposition => decompose::density_decomposed(
                    c,
                    q,
                    Guards {
                        sieve: guard,
                        terms: term_guard,
                        ..Guards::default()
                    },
                )?,
            };
            let result = json!({
                "delta": rational::format(&r.value),
                "period": period_value(&r.period),
                "method": value(&r.method),
                "uncovered_count": r.uncovered_count.to_string(),
            });
            let mut t = Table::new(vec!["delta", "period", "method", "uncovered_count"]);
            t.row(vec![
                rational::format(&r.value),
                r.period.to_string(),
                value(&r.method).as_str().unwrap_or_default().to_string(),
                r.uncovered_count.to_string(),
            ]);
            Ok(Report::new("density", json!({ "system": value(&doc), "Q": q }), result, t)
                .with_diagnostics(json!({ "sieve_guard": guard, "term_guard": term_guard })))
        }
        Command::Bounds {
            input,
            refined,
            order,
            tail_n,
            q,
            s,
        } => {
            let doc = load(&input, format)?;
            let order = match order {
                OrderArg::Stored => Ordering::Stored,
                OrderArg::Descending => Ordering::Descending,
            };
            let cert = bounds::alpha_beta_bound(&doc.classes, refined, order);
            let mut result = json!({ "certificate": value(&cert) });
            if let Some(n) = tail_n {
                result["smooth_tail"] = value(&bounds::smooth_tail_sum(n, q)?);
                if let Some(s) = s {
                    result["approx_l_threshold"] = json!(bounds::l_threshold(n, s)?);
                }
            }
            let t = audit_table(&cert);
            Ok(Report::new(
                "bounds",
                json!({ "system": value(&doc), "refined": refined, "order": value(&order), "tail_n": tail_n, "Q": q, "s": s }),
                result,
                t,
            ))
        }
        Command::Certify { input, q, guard } => {
            let doc = load(&input, format)?;
            let q = q.unwrap_or_else(|| decompose::suggest_q(&doc.classes));
            let cert = decompose::positivity_certificate(&doc.classes, q, guard)?;
            let t = audit_table(&cert);
            Ok(Report::new("certify", json!({ "system": value(&doc), "Q": q }), value(&cert), t)
                .with_diagnostics(json!({ "m_guard": guard })))
        }
        Command::Decompose {
            input,
            q,
            guard,
            identity,
        } => {
            let doc = load(&input, format)?;
            let d = decompose::decompose(&doc.classes, q, guard)?;
            let mut result = value(&d);
            result["total_pairs"] = json!(d.total_pairs());
            if identity {
                let guards = Guards {
                    m: guard,
                    ..Guards::default()
                };
                result["identity"] = value(&decompose::decomposition_identity(&doc.classes, q, guards)?);
            }
            let mut t = Table::new(vec!["representative", "count", "classes"]);
            for g in &d.groups {
                let classes: Vec<String> = g.system.iter().map(|c| c.to_string()).collect();
                t.row(vec![g.representative.to_string(), g.count.to_string(), classes.join("; ")]);
            }
            Ok(Report::new("decompose", json!({ "system": value(&doc), "Q": q }), result, t)
                .with_diagnostics(json!({ "m_guard": guard, "groups": d.group_count() })))
        }
        Command::DeltaMinus { moduli, mode, guard } => {
            let s = moduli_set(&moduli)?;
            let mode = match mode {
                ModeArg::Exhaustive => SearchMode::Exhaustive,
                ModeArg::Greedy => SearchMode::Greedy,
            };
            let r = density::delta_minus(&s, mode, guard)?;
            let t = system_table(&r.witness);
            Ok(
                Report::new("delta-minus", json!({ "moduli": moduli, "mode": value(&mode) }), value(&r), t)
                    .with_diagnostics(json!({ "node_guard": guard })),
            )
        }
        Command::DeltaPlus { moduli, guard } => {
            let s = moduli_set(&moduli)?;
            let d = density::delta_plus(&s, guard)?;
            let mut t = Table::new(vec!["delta_plus"]);
            t.row(vec![rational::format(&d)]);
            Ok(Report::new(
                "delta-plus",
                json!({ "moduli": moduli }),
                json!({ "delta_plus": rational::format(&d) }),
                t,
            )
            .with_diagnostics(json!({ "guard": guard })))
        }
        Command::Greedy { n, k, seed, window } => {
            let window = window.unwrap_or_else(|| n.saturating_mul(k).saturating_mul(10));
            let trace = greedy::greedy_cover(n, k, seed, window)?;
            let inv = greedy::greedy_step_invariant(&trace, 1);
            let mut result = value(&trace);
            result["step_invariant"] = value(&inv);
            result["approx_strong_target"] = json!(greedy::strong_target(n, k));
            let mut t = Table::new(vec!["j", "divisors", "f", "residue", "before", "after"]);
            for s in &trace.steps {
                let divisors: Vec<String> = s.divisors.iter().map(u64::to_string).collect();
                t.row(vec![
                    s.j.to_string(),
                    divisors.join(" "),
                    s.f.to_string(),
                    s.residue.to_string(),
                    s.before.to_string(),
                    s.after.to_string(),
                ]);
            }
            Ok(Report::new("greedy", json!({ "N": n, "K": k, "window": window }), result, t).with_seed(seed))
        }
        Command::ConstructExact { j, schedule, guard } => {
            let plan = exact::exact_cover_construct(j, schedule.into(), guard)?;
            let t = system_table(&plan.system);
            let mut result = value(&plan);
            result["verified"] = json!(plan.checks.all_pass());
            Ok(Report::new(
                "construct-exact",
                json!({ "J": j, "schedule": value(&exact::Schedule::from(schedule)) }),
                result,
                t,
            )
            .with_diagnostics(json!({ "depth_ceiling": guard, "classes": plan.system.len() })))
        }
        Command::Haight { n, full, guard } => {
            let r = haight::haight_moduli(n, full, guard)?;
            let mut t = Table::new(vec!["p"]);
            for p in &r.primes {
                t.row(vec![p.to_string()]);
            }
            Ok(Report::new("haight", json!({ "N": n, "full": full }), value(&r), t)
                .with_diagnostics(json!({ "divisor_guard": guard })))
        }
        Command::Witness { input, b, s, guard } => {
            let doc = load(&input, format)?;
            let w = witness::extend_witness(&doc.classes, b, s, guard)?;
            let mut t = Table::new(vec!["p", "multiples", "b"]);
            for c in &w.choices {
                t.row(vec![c.p.to_string(), c.multiples.to_string(), c.b.to_string()]);
            }
            Ok(
                Report::new("witness", json!({ "system": value(&doc), "B": b, "s": s }), value(&w), t)
                    .with_diagnostics(json!({ "sieve_guard": guard })),
            )
        }
        Command::Stats {
            moduli,
            mode,
            trials,
            seed,
            guard,
        } => {
            let t = ModuliSet::try_from_moduli(moduli.iter().copied())?;
            let (r, mode_name, guard_used) = match mode {
                StatsMode::Enumerate => {
                    let g = guard.unwrap_or(stats::DEFAULT_ENUMERATION_GUARD);
                    (stats::enumerate_moments(&t, g, stats::DEFAULT_PERIOD_GUARD)?, "enumerate", g)
                }
                StatsMode::Pair => {
                    let g = guard.unwrap_or(stats::DEFAULT_PAIR_GUARD);
                    (stats::pair_formula_moments(&t, g)?, "pair", g)
                }
                StatsMode::MonteCarlo => {
                    let g = guard.unwrap_or(density::DEFAULT_SIEVE_GUARD);
                    (stats::sample_moments(&t, trials, seed, g)?, "monte-carlo", g)
                }
            };
            let mut table = Table::new(vec![
                "moduli",
                "method",
                "mean",
                "second_moment",
                "variance",
                "sample_count",
                "seed",
            ]);
            let ms: Vec<String> = moduli.iter().map(u64::to_string).collect();
            table.row(vec![
                ms.join(" "),
                value(&r.method).as_str().unwrap_or_default().to_string(),
                rational::format(&r.mean),
                rational::format(&r.second_moment),
                rational::format(&r.variance),
                r.sample_count.map(|c| c.to_string()).unwrap_or_default(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
            ]);
            let mut inputs = json!({ "moduli": moduli, "mode": mode_name });
            let mut report_seed = None;
            if let StatsMode::MonteCarlo = mode {
                inputs["trials"] = json!(trials);
                report_seed = Some(seed);
            }
            let mut report = Report::new("stats", inputs, value(&r), table)
                .with_diagnostics(json!({ "guard": guard_used, "expected_delta": rational::format(&stats::expected_delta(&t)) }));
            if let Some(seed) = report_seed {
                report = report.with_seed(seed);
            }
            Ok(report)
        }
        Command::VerifyExactCover { input } => {
            let doc = load(&input, format)?;
            let r = density::is_exact_cover(&doc.classes);
            let mut t = Table::new(vec!["is_exact_cover", "reciprocal_sum", "violation"]);
            t.row(vec![
                r.is_exact_cover.to_string(),
                rational::format(&r.reciprocal_sum),
                r.violation.as_ref().map(|v| value(v).to_string()).unwrap_or_default(),
            ]);
            Ok(Report::new("verify-exact-cover", json!({ "system": value(&doc) }), value(&r), t))
        }
        Command::Xineq { j, schedule } => {
            let mut rows = Vec::new();
            let mut t = Table::new(vec!["j", "lhs", "rhs", "holds"]);
            for level in 1..=j {
                let r = exact::xineq_check(level, schedule.into())?;
                t.row(vec![r.j.to_string(), r.lhs.to_string(), r.rhs.to_string(), r.holds.to_string()]);
                rows.push(r);
            }
            let all = rows.iter().all(|r| r.holds);
            Ok(Report::new(
                "xineq",
                json!({ "J": j, "schedule": value(&exact::Schedule::from(schedule)) }),
                json!({ "levels": value(&rows), "all_hold": all }),
                t,
            ))
        }
    }
}
