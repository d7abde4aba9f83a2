use num::rational::BigRational;
use num::{One, Zero};

use super::{single, PureStrategy, StrategyProfile};
use crate::error::{Error, Result};
use crate::info::{InfoSet, NeighborhoodCounts, Policy};
use crate::market::{Lottery, Market, SchoolId, StudentId, Utilities};

/// Rank thresholds `x_1 < x_2 < ... < x_m = n`: a student outside every
/// relevant neighborhood with rank in `(x_{k-1}, x_k]` can secure `s_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cutoffs(Vec<u32>);

impl Cutoffs {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "cutoffs {values:?} must be strictly increasing"
            )));
        }
        Ok(Cutoffs(values))
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, school: SchoolId) -> u32 {
        self.0[school.0]
    }

    /// The school whose rank band contains `rank`.
    pub fn band(&self, rank: u32) -> SchoolId {
        let k = self
            .0
            .iter()
            .position(|&x| rank <= x)
            .unwrap_or(self.0.len() - 1);
        SchoolId(k)
    }
}

/// Top-ranked school under common priorities when the own rank is known:
/// the first school whose cumulative capacity reaches the rank.
pub fn lemma1_strategy(market: &Market, own_rank: u32) -> Result<SchoolId> {
    if market.has_neighborhoods() {
        return Err(Error::UnsupportedModel(
            "rank bands only characterize play without neighborhood priority".into(),
        ));
    }
    market.check_exact_capacity()?;
    if own_rank == 0 || own_rank as usize > market.students() {
        return Err(Error::invalid(format!(
            "rank {own_rank} outside 1..={}",
            market.students()
        )));
    }
    let mut cumulative = 0;
    for s in market.school_ids() {
        cumulative += market.capacity(s);
        if own_rank <= cumulative {
            return Ok(s);
        }
    }
    Err(Error::Invariant("rank beyond total capacity".into()))
}

/// Everyone ranks the school of their own rank band (Reveal policy).
pub fn lemma1_profile(market: &Market) -> Result<StrategyProfile> {
    lemma1_strategy(market, 1)?;
    let students = market.students();
    let market = market.clone();
    let strategy = PureStrategy::new("rank band", move |info: &InfoSet| {
        let rank = info
            .own_rank
            .ok_or_else(|| Error::invalid("rank-band play needs the own rank"))?;
        single(lemma1_strategy(&market, rank)?)
    });
    Ok(StrategyProfile::symmetric(
        Policy::Reveal,
        students,
        strategy,
    ))
}

fn solve_cutoffs<F>(market: &Market, counts: F) -> Result<Cutoffs>
where
    F: Fn(SchoolId, u32) -> u32,
{
    market.check_exact_capacity()?;
    let n = market.students() as u32;
    let m = market.schools();
    let mut cutoffs = Vec::with_capacity(m);
    let mut prev = 0u32;
    for k in 0..m.saturating_sub(1) {
        let school = SchoolId(k);
        let quota = market.capacity(school);
        let own_size = market.neighborhood_size(school);
        let lhs = |x: u32| -> i64 {
            let better: i64 = (0..k)
                .map(|y| counts(SchoolId(y), x) as i64 - counts(SchoolId(y), prev) as i64)
                .sum();
            (x - prev) as i64 - better + (own_size as i64 - counts(school, x) as i64)
        };
        let x = (prev + 1..=n)
            .find(|&x| lhs(x) == quota as i64)
            .ok_or_else(|| {
                Error::Invariant(format!(
                    "no cutoff for {} above rank {prev}",
                    market.school_label(school)
                ))
            })?;
        cutoffs.push(x);
        prev = x;
    }
    if prev >= n {
        return Err(Error::Invariant(format!(
            "cutoff {prev} leaves no ranks for the last school"
        )));
    }
    cutoffs.push(n);
    Ok(Cutoffs(cutoffs))
}

/// Solves the cutoff equations for a drawn lottery by scanning each
/// equation's left side upward from the previous cutoff.
pub fn solve_cutoffs_revealmore(market: &Market, lottery: &Lottery) -> Result<Cutoffs> {
    if lottery.len() != market.students() {
        return Err(Error::invalid("lottery does not match market size"));
    }
    let ranks: Vec<Vec<u32>> = market
        .school_ids()
        .map(|s| {
            market
                .neighborhood(s)
                .into_iter()
                .map(|i| lottery.rank(i))
                .collect()
        })
        .collect();
    solve_cutoffs(market, |s, x| {
        ranks[s.0].iter().filter(|&&r| r <= x).count() as u32
    })
}

/// Same cutoffs, recovered from the public statistics a student sees.
pub fn solve_cutoffs_from_info(market: &Market, info: &InfoSet) -> Result<Cutoffs> {
    let stats = info
        .neighborhood_stats
        .as_ref()
        .ok_or_else(|| Error::invalid("cutoffs need the neighborhood statistics"))?;
    let lookup = |s: SchoolId| stats.iter().find(|c| c.school == s);
    solve_cutoffs(market, |s, x| {
        lookup(s).map_or(0, |c: &NeighborhoodCounts| c.at(x))
    })
}

fn achievable(cutoffs: &Cutoffs, role: Option<SchoolId>, rank: u32) -> SchoolId {
    let band = cutoffs.band(rank);
    match role {
        Some(home) if home < band => home,
        _ => band,
    }
}

/// Best school the student can secure by ranking it essentially highest.
pub fn achievable_school(
    market: &Market,
    lottery: &Lottery,
    cutoffs: &Cutoffs,
    student: StudentId,
) -> Result<SchoolId> {
    market.check_student(student)?;
    if cutoffs.values().len() != market.schools() {
        return Err(Error::invalid("one cutoff per school required"));
    }
    Ok(achievable(
        cutoffs,
        market.neighborhood_of(student),
        lottery.rank(student),
    ))
}

pub fn achievable_school_from_info(market: &Market, info: &InfoSet) -> Result<SchoolId> {
    let rank = info
        .own_rank
        .ok_or_else(|| Error::invalid("achievable school needs the own rank"))?;
    let cutoffs = solve_cutoffs_from_info(market, info)?;
    Ok(achievable(&cutoffs, info.own_role, rank))
}

/// Everyone ranks their achievable school alone (RevealMore policy).
pub fn cutoff_profile(market: &Market) -> Result<StrategyProfile> {
    market.check_exact_capacity()?;
    let students = market.students();
    let market = market.clone();
    let strategy = PureStrategy::new("cutoff", move |info: &InfoSet| {
        single(achievable_school_from_info(&market, info)?)
    });
    Ok(StrategyProfile::symmetric(
        Policy::RevealMore,
        students,
        strategy,
    ))
}

/// Large-market cutoffs as fractions of the student mass:
/// `(sum_{y<=k} q_y - sum_{y<=k} n_y) / (1 - sum_{y<=k} n_y)`.
pub fn continuum_cutoffs(
    capacities: &[BigRational],
    neighborhood_masses: &[BigRational],
) -> Result<Vec<BigRational>> {
    if capacities.len() != neighborhood_masses.len() || capacities.is_empty() {
        return Err(Error::invalid(
            "one capacity and one neighborhood mass per school",
        ));
    }
    let zero = BigRational::zero();
    let one = BigRational::one();
    let total: BigRational = capacities.iter().sum();
    if total != one {
        return Err(Error::invalid(format!("capacities sum to {total}, not 1")));
    }
    for (q, n) in capacities.iter().zip(neighborhood_masses) {
        if *q <= zero || *q >= one || *n < zero || n >= q {
            return Err(Error::invalid(format!(
                "need 0 < q < 1 and 0 <= n < q, got q = {q}, n = {n}"
            )));
        }
    }
    let mut seats = zero.clone();
    let mut locals = zero;
    Ok(capacities
        .iter()
        .zip(neighborhood_masses)
        .map(|(q, n)| {
            seats += q;
            locals += n;
            (&seats - &locals) / (&one - &locals)
        })
        .collect())
}

/// Whether a neighborhood student strictly prefers staying home to trying
/// any better school `s_u` reported by `z_u` outsiders:
/// `v_home > (q_u - n_u) / z_u * v_u` for every `u` above home.
pub fn stay_home_condition(
    market: &Market,
    z: &[u32],
    student: StudentId,
    utilities: &Utilities,
) -> Result<bool> {
    market.check_student(student)?;
    let home = market
        .neighborhood_of(student)
        .ok_or_else(|| Error::invalid("student has no neighborhood school"))?;
    if z.len() != market.schools() || utilities.len() != market.schools() {
        return Err(Error::invalid(
            "one reporter count and one utility per school",
        ));
    }
    let mut holds = true;
    for u in (0..home.0).map(SchoolId) {
        let open = market.capacity(u) - market.neighborhood_size(u);
        if z[u.0] <= open {
            return Err(Error::invalid(format!(
                "{} outsiders reporting {} do not exceed its {} open seats",
                z[u.0],
                market.school_label(u),
                open
            )));
        }
        let lhs = utilities.of(home) as u64 * z[u.0] as u64;
        let rhs = open as u64 * utilities.of(u) as u64;
        holds &= lhs > rhs;
    }
    Ok(holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::TypeSpace;
    use crate::market::{run_da, Rol};
    use crate::rational::{int, ratio};

    fn uniform_types(schools: usize) -> TypeSpace {
        TypeSpace::UniformRanges(
            (0..schools as u32)
                .map(|k| (91 - 10 * k, 100 - 10 * k))
                .collect(),
        )
    }

    fn lottery_with_neighbors(a: u32, b: u32, c: u32) -> Lottery {
        // Students 1..3 take the given ranks, 4..6 the remaining ones in order.
        let mut ranks = vec![a, b, c];
        ranks.extend((1..=6).filter(|r| ![a, b, c].contains(r)));
        Lottery::from_ranks(ranks).unwrap()
    }

    #[test]
    fn rank_bands() {
        let market = Market::example1();
        assert_eq!(lemma1_strategy(&market, 1).unwrap(), SchoolId(0));
        assert_eq!(lemma1_strategy(&market, 2).unwrap(), SchoolId(0));
        assert_eq!(lemma1_strategy(&market, 4).unwrap(), SchoolId(1));
        assert_eq!(lemma1_strategy(&market, 6).unwrap(), SchoolId(2));
        let quad = Market::new(4, vec![1, 1, 1, 1], 1, uniform_types(4)).unwrap();
        assert_eq!(lemma1_strategy(&quad, 3).unwrap(), SchoolId(2));
        assert!(matches!(
            lemma1_strategy(&Market::example2(), 1),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn cutoffs_for_neighbors_in_front() {
        let market = Market::example2();
        let c = solve_cutoffs_revealmore(&market, &lottery_with_neighbors(1, 2, 3)).unwrap();
        assert_eq!(c.values(), &[2, 4, 6]);
    }

    #[test]
    fn cutoffs_without_neighborhoods_are_cumulative_capacities() {
        let market = Market::example1();
        for lottery in Lottery::all(6).step_by(37) {
            let c = solve_cutoffs_revealmore(&market, &lottery).unwrap();
            assert_eq!(c.values(), &[2, 4, 6]);
        }
    }

    #[test]
    fn late_s1_neighbor_leaves_one_seat() {
        let market = Market::example2();
        let c = solve_cutoffs_revealmore(&market, &lottery_with_neighbors(6, 2, 3)).unwrap();
        assert_eq!(c.get(SchoolId(0)), 1);
    }

    #[test]
    fn achievable_schools() {
        let market = Market::example2();
        let lottery = lottery_with_neighbors(6, 5, 1);
        let c = solve_cutoffs_revealmore(&market, &lottery).unwrap();
        // s1-neighbor at rank 6 still gets s1.
        assert_eq!(
            achievable_school(&market, &lottery, &c, StudentId(0)).unwrap(),
            SchoolId(0)
        );
        // The late s1 neighbor holds one of the two s1 seats, so rank 2
        // (student 4) falls to s2.
        assert_eq!(lottery.rank(StudentId(3)), 2);
        assert_eq!(c.values(), &[1, 2, 6]);
        assert_eq!(
            achievable_school(&market, &lottery, &c, StudentId(3)).unwrap(),
            SchoolId(1)
        );
        let lottery = lottery_with_neighbors(4, 5, 6);
        let c = solve_cutoffs_revealmore(&market, &lottery).unwrap();
        assert_eq!(lottery.rank(StudentId(3)), 1);
        assert_eq!(
            achievable_school(&market, &lottery, &c, StudentId(3)).unwrap(),
            SchoolId(0)
        );
    }

    #[test]
    fn cutoff_play_matches_everyone() {
        let market = Market::example2();
        let lottery = lottery_with_neighbors(3, 1, 6);
        let c = solve_cutoffs_revealmore(&market, &lottery).unwrap();
        let rols: Vec<Rol> = market
            .student_ids()
            .map(|i| Rol::single(achievable_school(&market, &lottery, &c, i).unwrap()))
            .collect();
        let m = run_da(&market, &rols, &lottery).unwrap();
        assert_eq!(m.unmatched(), 0);
    }

    #[test]
    fn continuum_values() {
        let q = vec![ratio(1, 3); 3];
        let n = vec![ratio(1, 6); 3];
        let x = continuum_cutoffs(&q, &n).unwrap();
        // Direct substitution: (1/3-1/6)/(5/6), (2/3-1/3)/(2/3), (1-1/2)/(1/2).
        assert_eq!(x, vec![ratio(1, 5), ratio(1, 2), int(1)]);
        let x = continuum_cutoffs(&q, &vec![int(0); 3]).unwrap();
        assert_eq!(x, vec![ratio(1, 3), ratio(2, 3), int(1)]);
        assert!(continuum_cutoffs(&q, &vec![ratio(1, 3); 3]).is_err());
        assert!(continuum_cutoffs(&[ratio(1, 2), ratio(1, 3)], &[int(0), int(0)]).is_err());
    }

    #[test]
    fn stay_home_inequality() {
        // Two schools with three seats each, one neighbor at each school.
        let market = Market::new(6, vec![3, 3], 1, uniform_types(2))
            .unwrap()
            .with_neighborhoods(vec![
                Some(SchoolId(0)),
                Some(SchoolId(1)),
                None,
                None,
                None,
                None,
            ])
            .unwrap();
        // q - n = 2 at s1; z = 10 gives ratio 1/5.
        let z = [10, 0];
        assert!(stay_home_condition(&market, &z, StudentId(1), &Utilities(vec![90, 89])).unwrap());
        assert!(!stay_home_condition(&market, &z, StudentId(1), &Utilities(vec![90, 10])).unwrap());
        assert!(!stay_home_condition(&market, &z, StudentId(1), &Utilities(vec![90, 18])).unwrap());
        assert!(stay_home_condition(&market, &z, StudentId(2), &Utilities(vec![90, 10])).is_err());
        assert!(
            stay_home_condition(&market, &[2, 0], StudentId(1), &Utilities(vec![90, 10])).is_err()
        );
    }

    #[test]
    fn stay_home_example2_cover_student2() {
        // One realization of cover play: students 3..6 all type v report s1.
        let market = Market::example2();
        let z = [4, 0, 0];
        for t in market.type_space().finite().unwrap() {
            assert!(stay_home_condition(&market, &z, StudentId(1), &t.utilities).unwrap());
        }
        // Only one type-v outsider: ratio 1, staying home loses for type v.
        let z = [2, 0, 0];
        let v = &market.type_space().finite().unwrap()[0].utilities;
        assert!(!stay_home_condition(&market, &z, StudentId(1), v).unwrap());
    }
}
