//! Generate synthetic decision logs, replay them and score deviations.
use lottery_disclosure::harness::{
    compute_aad, generate_sessions, render_aad, replay, DecisionLog, Exclusions, Format,
    SessionConfig,
};
use lottery_disclosure::info::Treatment;

const CONFIG: &str = r#"
treatment = "NS_RevealMore"
sessions = 4
participants = 12
group_size = 6
rounds = 20
seed = 7
strategy = "safe"
"#;

fn main() -> lottery_disclosure::Result<()> {
    let config = SessionConfig::from_toml(CONFIG)?;
    let log = generate_sessions(&config)?;
    let csv = log.to_csv_string()?;
    println!("{} rows; first lines:", log.rows.len());
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    let back = DecisionLog::from_csv_str(&csv)?;
    let report = replay(&back)?;
    println!(
        "{} group-rounds replayed, {} disagreements",
        report.groups,
        report.disagreements.len()
    );
    let aad = compute_aad(&back, Treatment::NsRevealMore, &Exclusions::default())?;
    print!("{}", render_aad(&aad, Format::Csv));
    Ok(())
}
