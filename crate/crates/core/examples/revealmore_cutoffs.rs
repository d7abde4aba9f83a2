//! Cutoffs under RevealMore for a drawn lottery, and their large-market
//! limit.
use lottery_disclosure::market::{Lottery, Market};
use lottery_disclosure::rational::ratio;
use lottery_disclosure::strategy::{
    achievable_school, continuum_cutoffs, solve_cutoffs_revealmore,
};
use rand::SeedableRng;

fn main() -> lottery_disclosure::Result<()> {
    let market = Market::example2();
    let lottery = Lottery::from_ranks(vec![6, 5, 1, 2, 3, 4])?;
    let cutoffs = solve_cutoffs_revealmore(&market, &lottery)?;
    println!("cutoffs {:?}", cutoffs.values());
    for i in market.student_ids() {
        let s = achievable_school(&market, &lottery, &cutoffs, i)?;
        println!("student {} -> {}", i.0 + 1, market.school_label(s));
    }

    let x = continuum_cutoffs(&vec![ratio(1, 3); 3], &vec![ratio(1, 6); 3])?;
    println!(
        "continuum {}",
        x.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for factor in [1, 10, 100] {
        let big = Market::replicated_example2(factor)?;
        let c = solve_cutoffs_revealmore(&big, &Lottery::random(big.students(), &mut rng))?;
        let n = big.students() as f64;
        let shares: Vec<String> = c
            .values()
            .iter()
            .map(|&v| format!("{:.3}", v as f64 / n))
            .collect();
        println!("{factor:>3}x market, one lottery: {}", shares.join(", "));
    }
    Ok(())
}
