//! Seeded Monte Carlo estimates next to the exact values.
use lottery_disclosure::info::Treatment;
use lottery_disclosure::rational::to_f64;
use lottery_disclosure::stats::{exante_stats, Mode};
use lottery_disclosure::strategy::equilibrium_table;

fn main() -> lottery_disclosure::Result<()> {
    let t = Treatment::NsReveal;
    let market = t.market();
    let profile = equilibrium_table(t);
    let exact = exante_stats(&market, t.policy(), &profile, Mode::Exact)?;
    let mc = exante_stats(
        &market,
        t.policy(),
        &profile,
        Mode::MonteCarlo {
            seed: 42,
            reps: 50_000,
        },
    )?;
    for (e, m) in exact.groups.iter().zip(&mc.groups) {
        let who = format!(
            "{}/{}",
            e.role.map_or("all".to_string(), |r| r.label(&market)),
            e.type_label.as_deref().unwrap_or("all")
        );
        println!(
            "{who:<16} match rate exact {:.4}, estimate {:.4} +- {:.4}",
            to_f64(e.match_rate.exact().expect("exact")),
            m.match_rate.mean(),
            m.match_rate.stderr()
        );
    }
    Ok(())
}
