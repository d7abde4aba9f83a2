//! Session configs, simulated decision logs, replay and the summary
//! statistics computed from logs.

mod aad;
mod config;
mod generate;
mod log;
mod output;
mod replay;
mod robustness;

pub use aad::{compute_aad, AadCell, AadReport, Exclusions};
pub use config::{
    MarketConfig, RobustnessConfig, SessionConfig, StatsConfig, StatsMode, StrategyChoice,
    TypeConfig,
};
pub use generate::{
    draw_world, generate_sessions, heuristic_profile, play_world, world_rng, world_sequence, World,
};
pub use log::{DecisionLog, LogRow};
pub use output::{
    render_aad, render_cells, render_deviation_report, render_outcome_stats, render_robustness,
    simulate_summary, Format,
};
pub use replay::{infer_market, replay, replay_in, Disagreement, ReplayReport};
pub use robustness::{robustness_stats, BracketCounts, RobustnessReport};
