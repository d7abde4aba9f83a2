//! Compare each role's random assignment under Reveal and RevealMore.
use lottery_disclosure::info::Treatment;
use lottery_disclosure::market::SchoolId;
use lottery_disclosure::stats::{exante_stats, fosd_compare, Mode};
use lottery_disclosure::strategy::equilibrium_table;

fn main() -> lottery_disclosure::Result<()> {
    let order = [SchoolId(0), SchoolId(1), SchoolId(2)];
    let stats =
        |t: Treatment| exante_stats(&t.market(), t.policy(), &equilibrium_table(t), Mode::Exact);
    let reveal = stats(Treatment::NsReveal)?;
    let more = stats(Treatment::NsRevealMore)?;
    let market = Treatment::NsReveal.market();
    for (a, b) in more.groups.iter().zip(&reveal.groups) {
        let (Some(ra), Some(rb)) = (a.random_assignment(), b.random_assignment()) else {
            continue;
        };
        let who = format!(
            "{}/{}",
            a.role.map_or("all".to_string(), |r| r.label(&market)),
            a.type_label.as_deref().unwrap_or("all")
        );
        println!(
            "{who:<16} RevealMore vs Reveal: {:?}",
            fosd_compare(&ra, &rb, &order)?
        );
    }
    Ok(())
}
