use std::fmt::Write as _;
use std::io::{ErrorKind, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lottery_disclosure::harness::{
    compute_aad, generate_sessions, heuristic_profile, render_aad, render_cells,
    render_deviation_report, render_outcome_stats, render_robustness, replay, robustness_stats,
    simulate_summary, DecisionLog, Exclusions, Format, MarketConfig, SessionConfig, StatsMode,
    StrategyChoice,
};
use lottery_disclosure::info::{Policy, Treatment};
use lottery_disclosure::market::{Lottery, Market};
use lottery_disclosure::oracle::verify_bne;
use lottery_disclosure::rational::{parse_ratio, to_fraction};
use lottery_disclosure::stats::{exante_stats, prediction_cells, Mode};
use lottery_disclosure::strategy::{
    achievable_school, continuum_cutoffs, cutoff_profile, equilibrium_table, lemma1_profile,
    solve_cutoffs_revealmore, StrategyProfile,
};

#[derive(Parser)]
#[command(version, about = "School choice with lottery disclosure policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileKind {
    /// Rank bands (Reveal, no neighborhoods).
    RankBand,
    /// Achievable-school cutoffs (RevealMore).
    Cutoff,
    Truthful,
    Safe,
}

#[derive(Subcommand)]
enum Command {
    /// Generate decision logs from a session config and print realized stats.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Where to write the CSV log.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
    },
    /// Check a strategy profile for profitable deviations by exact enumeration.
    VerifyEquilibrium {
        #[arg(long, conflicts_with = "market")]
        treatment: Option<Treatment>,
        #[arg(long, requires = "policy")]
        market: Option<PathBuf>,
        #[arg(long)]
        policy: Option<Policy>,
        #[arg(long, value_enum, default_value = "rank-band")]
        profile: ProfileKind,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
    },
    /// Predicted match rates and payoffs under equilibrium play.
    Stats {
        /// One treatment; all five when omitted.
        #[arg(long)]
        treatment: Option<Treatment>,
        #[arg(long)]
        montecarlo: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
    },
    /// Re-run DA on a decision log, report disagreements and realized stats.
    Replay {
        log: PathBuf,
        /// Report neighborhood-school statistics for sixteen-student logs.
        #[arg(long)]
        robustness: bool,
        #[arg(long)]
        rol_limit: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
    },
    /// Deviation frequencies from the treatment's equilibrium prescription.
    Aad {
        log: PathBuf,
        #[arg(long)]
        treatment: Treatment,
        /// Drop no-neighborhood students holding this lottery number.
        #[arg(long)]
        exclude_rank: Option<u32>,
        #[arg(long)]
        from_round: Option<u32>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
    },
    /// Cutoffs for a drawn lottery, or the large-market formula.
    Cutoffs {
        /// Market file; the six-student neighborhood market by default.
        #[arg(long)]
        market: Option<PathBuf>,
        /// Lottery numbers of students 1..n, comma separated.
        #[arg(long, required_unless_present = "continuum")]
        lottery: Option<String>,
        #[arg(long, requires_all = ["capacities", "neighborhoods"])]
        continuum: bool,
        /// Capacity shares, e.g. 1/3,1/3,1/3.
        #[arg(long)]
        capacities: Option<String>,
        /// Neighborhood shares, e.g. 1/6,1/6,1/6.
        #[arg(long)]
        neighborhoods: Option<String>,
    },
}

fn profile_for(market: &Market, policy: Policy, kind: ProfileKind) -> Result<StrategyProfile> {
    Ok(match kind {
        ProfileKind::RankBand => lemma1_profile(market)?,
        ProfileKind::Cutoff => cutoff_profile(market)?,
        ProfileKind::Truthful => heuristic_profile(market, policy, StrategyChoice::Truthful)?,
        ProfileKind::Safe => heuristic_profile(market, policy, StrategyChoice::Safe)?,
    })
}

fn ratios(text: &str) -> Result<Vec<num::rational::BigRational>> {
    Ok(text
        .split(',')
        .map(parse_ratio)
        .collect::<lottery_disclosure::Result<Vec<_>>>()?)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            format,
        } => {
            let config = SessionConfig::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let log = generate_sessions(&config)?;
            log.save(&out)?;
            let market = config.market()?;
            if config.strategy != StrategyChoice::None {
                let report = replay(&log)?;
                eprintln!(
                    "{}",
                    simulate_summary(log.rows.len(), report.groups, report.disagreements.len())
                );
                emit(&render_outcome_stats(&report.stats, &market, format.into()))?;
            }
            if let (Some(stats), Some(t)) = (&config.stats, config.treatment) {
                let mode = match stats.mode {
                    StatsMode::Exact => Mode::Exact,
                    StatsMode::Montecarlo => Mode::MonteCarlo {
                        seed: config.seed,
                        reps: stats.reps,
                    },
                };
                let predicted = exante_stats(&market, t.policy(), &equilibrium_table(t), mode)?;
                emit(&render_outcome_stats(&predicted, &market, format.into()))?;
            }
            Ok(true)
        }
        Command::VerifyEquilibrium {
            treatment,
            market,
            policy,
            profile,
            format,
        } => {
            let (market, policy, profile) = match (treatment, market) {
                (Some(t), _) => (t.market(), t.policy(), equilibrium_table(t)),
                (None, Some(path)) => {
                    let market = MarketConfig::load(&path)?;
                    let policy = policy.expect("clap enforces --policy");
                    let p = profile_for(&market, policy, profile)?;
                    (market, policy, p)
                }
                (None, None) => bail!("pass --treatment or --market"),
            };
            let report = verify_bne(&market, policy, &profile)?;
            emit(&render_deviation_report(&report, &market, format.into()))?;
            Ok(report.is_bne())
        }
        Command::Stats {
            treatment,
            montecarlo,
            seed,
            reps,
            format,
        } => {
            let mode = if montecarlo {
                Mode::MonteCarlo { seed, reps }
            } else {
                Mode::Exact
            };
            let treatments = treatment.map_or(Treatment::ALL.to_vec(), |t| vec![t]);
            let mut cells = Vec::new();
            for t in treatments {
                cells.extend(prediction_cells(t, mode)?);
            }
            emit(&render_cells(&cells, format.into()))?;
            Ok(true)
        }
        Command::Replay {
            log,
            robustness,
            rol_limit,
            format,
        } => {
            let log =
                DecisionLog::load(&log).with_context(|| format!("reading {}", log.display()))?;
            if robustness {
                emit(&render_robustness(
                    &robustness_stats(&log, rol_limit)?,
                    format.into(),
                ))?;
                return Ok(true);
            }
            let report = replay(&log)?;
            for d in &report.disagreements {
                eprintln!(
                    "row {}: recorded {:?}, recomputed {:?}",
                    d.row, d.recorded, d.recomputed
                );
            }
            if let Some(market) = lottery_disclosure::harness::infer_market(&log)? {
                emit(&render_outcome_stats(&report.stats, &market, format.into()))?;
            }
            Ok(report.disagreements.is_empty())
        }
        Command::Aad {
            log,
            treatment,
            exclude_rank,
            from_round,
            format,
        } => {
            let log =
                DecisionLog::load(&log).with_context(|| format!("reading {}", log.display()))?;
            let exclusions = Exclusions {
                no_neighborhood_rank: exclude_rank,
                from_round,
            };
            emit(&render_aad(
                &compute_aad(&log, treatment, &exclusions)?,
                format.into(),
            ))?;
            Ok(true)
        }
        Command::Cutoffs {
            market,
            lottery,
            continuum,
            capacities,
            neighborhoods,
        } => {
            if continuum {
                let q = ratios(&capacities.expect("clap enforces --capacities"))?;
                let n = ratios(&neighborhoods.expect("clap enforces --neighborhoods"))?;
                let x = continuum_cutoffs(&q, &n)?;
                let parts: Vec<String> = x.iter().map(to_fraction).collect();
                emit(&format!("{}\n", parts.join(",")))?;
                return Ok(true);
            }
            let market = match market {
                Some(p) => MarketConfig::load(&p)?,
                None => Market::example2(),
            };
            let ranks = lottery
                .expect("clap enforces --lottery")
                .split(',')
                .map(|r| {
                    r.trim()
                        .parse::<u32>()
                        .context("lottery numbers must be integers")
                })
                .collect::<Result<Vec<_>>>()?;
            let lottery = Lottery::from_ranks(ranks)?;
            let cutoffs = solve_cutoffs_revealmore(&market, &lottery)?;
            let parts: Vec<String> = cutoffs.values().iter().map(u32::to_string).collect();
            let mut text = format!("cutoffs,{}\n", parts.join(","));
            for i in market.student_ids() {
                let s = achievable_school(&market, &lottery, &cutoffs, i)?;
                writeln!(text, "student {},{}", i.0 + 1, market.school_label(s))?;
            }
            emit(&text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
