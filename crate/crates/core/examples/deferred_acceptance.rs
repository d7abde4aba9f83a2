//! Run constrained deferred acceptance on one drawn lottery.
use lottery_disclosure::market::{payoff, run_da, Lottery, Market, Rol, Utilities};

fn main() -> lottery_disclosure::Result<()> {
    let market = Market::example2().with_rol_limit(2)?;
    // Lottery numbers of students 1..6.
    let lottery = Lottery::from_ranks(vec![3, 1, 6, 2, 5, 4])?;
    let rols = ["s1", "s1|s2", "s3", "s1", "s2", "s1"]
        .iter()
        .map(|text| Rol::parse(text, &market))
        .collect::<lottery_disclosure::Result<Vec<_>>>()?;
    let matching = run_da(&market, &rols, &lottery)?;
    let types = vec![Utilities(vec![90, 40, 20]); 6];
    let payoffs = payoff(&matching, &types);
    for i in market.student_ids() {
        let school = matching
            .assignment(i)
            .map_or("unmatched", |s| market.school_label(s));
        println!(
            "student {} (lottery {}, list {}): {school}, payoff {}",
            i.0 + 1,
            lottery.rank(i),
            rols[i.0].render(&market),
            payoffs[i.0]
        );
    }
    println!("vacancies {:?}", matching.vacancies(&market));
    Ok(())
}
