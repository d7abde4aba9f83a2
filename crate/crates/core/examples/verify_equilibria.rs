//! Exhaustive best-response check of every treatment's prescription.
use lottery_disclosure::info::Treatment;
use lottery_disclosure::oracle::verify_bne;
use lottery_disclosure::strategy::equilibrium_table;

fn main() -> lottery_disclosure::Result<()> {
    for t in Treatment::ALL {
        let market = t.market();
        let report = verify_bne(&market, t.policy(), &equilibrium_table(t))?;
        println!(
            "{t}: {} information sets, {}",
            report.entries.len(),
            if report.is_bne() {
                "no profitable deviation"
            } else {
                "profitable deviation found"
            }
        );
        for v in report.violations() {
            println!(
                "  student {} type {:?} rank {:?}: {} instead of {} gains {}",
                v.student.0 + 1,
                v.info.own_type.0,
                v.info.own_rank,
                v.best.render(&market),
                v.prescribed.render(&market),
                v.gain
            );
        }
    }
    Ok(())
}
