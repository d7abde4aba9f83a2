//! Neighborhood-school reporting by lottery bracket in the sixteen-student
//! environment, for each list length.
use lottery_disclosure::harness::{
    generate_sessions, render_robustness, robustness_stats, Format, RobustnessConfig,
    SessionConfig, StrategyChoice,
};
use lottery_disclosure::info::Policy;

fn main() -> lottery_disclosure::Result<()> {
    for rol_limit in 1..=3 {
        let config = SessionConfig {
            treatment: None,
            robustness: Some(RobustnessConfig {
                policy: Policy::Reveal,
                rol_limit,
            }),
            sessions: 2,
            participants: 16,
            group_size: 16,
            rounds: 30,
            seed: 3,
            strategy: StrategyChoice::RankBand,
            stats: None,
        };
        let log = generate_sessions(&config)?;
        print!(
            "{}",
            render_robustness(&robustness_stats(&log, None)?, Format::Csv)
        );
    }
    Ok(())
}
