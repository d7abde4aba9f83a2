//! Exact admission chances under Cover when everyone else follows the
//! equilibrium prescription.
use lottery_disclosure::info::{InfoSet, Treatment};
use lottery_disclosure::market::{Rol, SchoolId, StudentId, Utilities};
use lottery_disclosure::oracle::admission_distribution;
use lottery_disclosure::strategy::equilibrium_table;

fn main() -> lottery_disclosure::Result<()> {
    for t in [Treatment::NoNsCover, Treatment::NsCover] {
        let market = t.market();
        let me = StudentId(5);
        for (label, u) in [("v", vec![90, 40, 20]), ("v'", vec![70, 60, 20])] {
            let u = Utilities(u);
            let info = InfoSet {
                own_type: u.clone(),
                own_role: None,
                own_rank: None,
                neighborhood_stats: None,
            };
            for s in market.school_ids() {
                let d = admission_distribution(
                    &market,
                    t.policy(),
                    &equilibrium_table(t),
                    me,
                    &u,
                    &info,
                    &Rol::single(s),
                )?;
                println!(
                    "{t} type {label} applying to {}: admitted w.p. {}, expected payoff {}",
                    market.school_label(s),
                    d.school(SchoolId(s.0)),
                    d.expected_utility(&u)
                );
            }
        }
    }
    Ok(())
}
