//! What one student sees under Cover, Reveal and RevealMore.
use lottery_disclosure::info::{observe, Policy};
use lottery_disclosure::market::{Lottery, Market, StudentId, Utilities};

fn main() -> lottery_disclosure::Result<()> {
    let market = Market::example2();
    let lottery = Lottery::from_ranks(vec![4, 2, 6, 1, 3, 5])?;
    let me = StudentId(4);
    let u = Utilities(vec![70, 60, 20]);
    for policy in Policy::ALL {
        let info = observe(policy, &market, &lottery, me, &u)?;
        print!("{policy:<10} rank {:?}", info.own_rank);
        for s in market.school_ids() {
            if let Some(ranks) = info.neighborhood_ranks(s) {
                print!(", {}-neighbor ranks {ranks:?}", market.school_label(s));
            }
        }
        println!();
    }
    Ok(())
}
