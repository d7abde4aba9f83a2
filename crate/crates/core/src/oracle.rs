//! Exact expected outcomes by enumerating every lottery and every draw of
//! the other students' types.

use std::collections::HashMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::info::{observe_unchecked, InfoSet, Policy};
use crate::market::{
    build_priorities, deferred_acceptance, Lottery, Market, Rol, SchoolId, StudentId, Utilities,
    UtilityType,
};
use crate::strategy::StrategyProfile;

/// Largest market the exact engine accepts.
pub const MAX_EXACT_STUDENTS: usize = 8;

/// Probability of each school, plus the unmatched outcome in the last slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissionDistribution(Vec<BigRational>);

impl AdmissionDistribution {
    pub fn new(probabilities: Vec<BigRational>) -> Result<Self> {
        if probabilities.iter().any(|p| *p < BigRational::zero()) {
            return Err(Error::invalid("negative probability"));
        }
        let total: BigRational = probabilities.iter().sum();
        if !total.is_one() {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(AdmissionDistribution(probabilities))
    }

    pub fn school(&self, school: SchoolId) -> &BigRational {
        &self.0[school.0]
    }

    pub fn unmatched(&self) -> &BigRational {
        self.0.last().expect("distribution has an unmatched slot")
    }

    pub fn match_rate(&self) -> BigRational {
        BigRational::one() - self.unmatched()
    }

    /// Probabilities in school order followed by the unmatched mass.
    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }

    pub fn total(&self) -> BigRational {
        self.0.iter().sum()
    }

    pub fn expected_utility(&self, utilities: &Utilities) -> BigRational {
        self.0
            .iter()
            .zip(&utilities.0)
            .map(|(p, &u)| p * BigRational::from_integer(u.into()))
            .sum()
    }
}

impl fmt::Display for AdmissionDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// One realization of the lottery and everyone's utilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub lottery: Lottery,
    /// Type index for every student; the conditioning student's slot holds
    /// their own type.
    pub types: Vec<usize>,
    pub weight: BigRational,
}

fn finite_types(market: &Market) -> Result<&[UtilityType]> {
    market.type_space().finite().ok_or_else(|| {
        Error::UnsupportedModel("exact enumeration needs a finite type space".into())
    })
}

fn check_size(market: &Market) -> Result<()> {
    if market.students() > MAX_EXACT_STUDENTS {
        return Err(Error::UnsupportedSize {
            students: market.students(),
            limit: MAX_EXACT_STUDENTS,
        });
    }
    Ok(())
}

/// Type probabilities over a common denominator.
struct TypeWeights {
    numerators: Vec<BigInt>,
}

impl TypeWeights {
    fn new(types: &[UtilityType]) -> Self {
        let denominator = types.iter().fold(BigInt::one(), |acc, t| {
            num::integer::lcm(acc, t.probability.denom().clone())
        });
        let numerators = types
            .iter()
            .map(|t| t.probability.numer() * (&denominator / t.probability.denom()))
            .collect();
        TypeWeights { numerators }
    }
}

/// Every assignment of type indices to `k` students, odometer order.
fn type_combos(types: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = Some(vec![0usize; k]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < types {
                next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    })
}

fn check_info(
    market: &Market,
    policy: Policy,
    student: StudentId,
    own_type: &Utilities,
    info: &InfoSet,
) -> Result<()> {
    market.check_student(student)?;
    if info.own_type != *own_type {
        return Err(Error::invalid(
            "information set carries a different own type",
        ));
    }
    if info.own_role != market.neighborhood_of(student) {
        return Err(Error::invalid(
            "information set carries the wrong neighborhood",
        ));
    }
    let has_rank = info.own_rank.is_some();
    let has_stats = info.neighborhood_stats.is_some();
    let shape_ok = match policy {
        Policy::Cover => !has_rank && !has_stats,
        Policy::Reveal => has_rank && !has_stats,
        Policy::RevealMore => has_rank && has_stats,
    };
    if !shape_ok {
        return Err(Error::invalid(format!(
            "information set does not match the {policy} policy"
        )));
    }
    if let Some(r) = info.own_rank {
        if r == 0 || r as usize > market.students() {
            return Err(Error::invalid(format!(
                "own rank {r} outside 1..={}",
                market.students()
            )));
        }
    }
    Ok(())
}

/// All worlds consistent with what `student` observes, each with its
/// conditional probability. Weights sum to one.
pub fn enumerate_contexts(
    market: &Market,
    policy: Policy,
    student: StudentId,
    student_info: &InfoSet,
) -> Result<Vec<World>> {
    check_size(market)?;
    let types = finite_types(market)?;
    let own_index = market
        .type_space()
        .index_of(&student_info.own_type)
        .ok_or_else(|| Error::invalid("own type is not in the type space"))?;
    check_info(
        market,
        policy,
        student,
        &student_info.own_type,
        student_info,
    )?;
    let lotteries: Vec<Lottery> = Lottery::all(market.students())
        .filter(|l| {
            observe_unchecked(policy, market, l, student, &student_info.own_type) == *student_info
        })
        .collect();
    if lotteries.is_empty() {
        return Err(Error::invalid(
            "no lottery is consistent with the information set",
        ));
    }
    let share = BigRational::new(BigInt::one(), BigInt::from(lotteries.len()));
    let others = market.students() - 1;
    let mut worlds = Vec::new();
    for lottery in lotteries {
        for combo in type_combos(types.len(), others) {
            let mut weight = share.clone();
            for &k in &combo {
                weight *= &types[k].probability;
            }
            let mut all = combo;
            all.insert(student.0, own_index);
            worlds.push(World {
                lottery: lottery.clone(),
                types: all,
                weight,
            });
        }
    }
    Ok(worlds)
}

/// Outcome counts for one information class of the deviating student,
/// under every candidate action. Weights are integers over a common
/// denominator that cancels on normalization.
#[derive(Clone, Debug)]
struct ClassTally {
    weight: BigInt,
    outcomes: Vec<Vec<BigInt>>,
}

impl ClassTally {
    fn new(actions: usize, outcomes: usize) -> Self {
        ClassTally {
            weight: BigInt::zero(),
            outcomes: vec![vec![BigInt::zero(); outcomes]; actions],
        }
    }

    fn merge(&mut self, other: ClassTally) {
        self.weight += other.weight;
        for (mine, theirs) in self.outcomes.iter_mut().zip(other.outcomes) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
    }

    fn distribution(&self, action: usize) -> AdmissionDistribution {
        AdmissionDistribution(
            self.outcomes[action]
                .iter()
                .map(|c| BigRational::new(c.clone(), self.weight.clone()))
                .collect(),
        )
    }
}

type Tallies = HashMap<InfoSet, ClassTally>;

fn merge_tallies(mut a: Tallies, b: Tallies) -> Tallies {
    for (k, v) in b {
        match a.get_mut(&k) {
            Some(t) => t.merge(v),
            None => {
                a.insert(k, v);
            }
        }
    }
    a
}

/// Enumerates worlds from `student`'s perspective for one own type, runs DA
/// for each candidate action and tallies outcomes by information set.
/// `only` restricts to lotteries producing that information set.
fn tally(
    market: &Market,
    policy: Policy,
    profile: &StrategyProfile,
    student: StudentId,
    own_type: &Utilities,
    actions: &[Rol],
    only: Option<&InfoSet>,
) -> Result<Tallies> {
    check_size(market)?;
    let types = finite_types(market)?;
    profile.check_for(market, policy)?;
    for a in actions {
        a.validate_for(market)?;
    }
    let weights = TypeWeights::new(types);
    let n = market.students();
    let outcomes = market.schools() + 1;
    let lotteries: Vec<Lottery> = Lottery::all(n).collect();

    lotteries
        .par_iter()
        .try_fold(Tallies::new, |mut acc, lottery| -> Result<Tallies> {
            let info = observe_unchecked(policy, market, lottery, student, own_type);
            if only.is_some_and(|o| *o != info) {
                return Ok(acc);
            }
            // Each opponent's list depends only on the lottery and their type.
            let mut choices: Vec<Vec<Rol>> = Vec::with_capacity(n);
            for j in market.student_ids() {
                if j == student {
                    choices.push(Vec::new());
                    continue;
                }
                let per_type = types
                    .iter()
                    .map(|t| {
                        let seen = observe_unchecked(policy, market, lottery, j, &t.utilities);
                        profile.decide(j, &seen)
                    })
                    .collect::<Result<Vec<_>>>()?;
                choices.push(per_type);
            }
            // Collapse type draws that lead to identical submissions.
            let mut by_rols: HashMap<Vec<usize>, BigInt> = HashMap::new();
            for combo in type_combos(types.len(), n - 1) {
                let mut w = BigInt::one();
                let mut key = Vec::with_capacity(n - 1);
                for (slot, &k) in combo.iter().enumerate() {
                    let j = if slot < student.0 { slot } else { slot + 1 };
                    w *= &weights.numerators[k];
                    let first = choices[j].iter().position(|r| *r == choices[j][k]).unwrap();
                    key.push(first);
                }
                *by_rols.entry(key).or_insert_with(BigInt::zero) += w;
            }
            let priorities = build_priorities(market, lottery)?;
            let tally = acc
                .entry(info)
                .or_insert_with(|| ClassTally::new(actions.len(), outcomes));
            let mut rols: Vec<Rol> = vec![actions[0].clone(); n];
            for (key, w) in by_rols {
                for (slot, &k) in key.iter().enumerate() {
                    let j = if slot < student.0 { slot } else { slot + 1 };
                    rols[j] = choices[j][k].clone();
                }
                tally.weight += &w;
                for (a, action) in actions.iter().enumerate() {
                    rols[student.0] = action.clone();
                    let matching = deferred_acceptance(market, &rols, &priorities);
                    let slot = matching.assignment(student).map_or(outcomes - 1, |s| s.0);
                    tally.outcomes[a][slot] += &w;
                }
            }
            Ok(acc)
        })
        .try_reduce(Tallies::new, |a, b| Ok(merge_tallies(a, b)))
}

/// Distribution of `student`'s assignment when they submit `action`, the
/// others follow `profile`, and everything the student does not observe is
/// drawn from the prior.
pub fn admission_distribution(
    market: &Market,
    policy: Policy,
    profile: &StrategyProfile,
    student: StudentId,
    own_type: &Utilities,
    own_info: &InfoSet,
    action: &Rol,
) -> Result<AdmissionDistribution> {
    check_info(market, policy, student, own_type, own_info)?;
    let tallies = tally(
        market,
        policy,
        profile,
        student,
        own_type,
        std::slice::from_ref(action),
        Some(own_info),
    )?;
    let class = tallies
        .get(own_info)
        .ok_or_else(|| Error::invalid("no lottery is consistent with the information set"))?;
    Ok(class.distribution(0))
}

/// Expected utility of every valid list for one information class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationEntry {
    pub student: StudentId,
    pub info: InfoSet,
    pub prescribed: Rol,
    pub best: Rol,
    /// Best expected utility minus that of the prescribed list.
    pub gain: BigRational,
    pub action_utilities: Vec<(Rol, BigRational)>,
}

impl DeviationEntry {
    pub fn utility_of(&self, rol: &Rol) -> Option<&BigRational> {
        self.action_utilities
            .iter()
            .find(|(r, _)| r == rol)
            .map(|(_, u)| u)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationReport {
    pub entries: Vec<DeviationEntry>,
}

impl DeviationReport {
    /// No class can gain by deviating.
    pub fn is_bne(&self) -> bool {
        self.entries.iter().all(|e| e.gain <= BigRational::zero())
    }

    pub fn max_gain(&self) -> BigRational {
        self.entries
            .iter()
            .map(|e| e.gain.clone())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Classes with a strictly profitable deviation.
    pub fn violations(&self) -> impl Iterator<Item = &DeviationEntry> {
        self.entries.iter().filter(|e| e.gain > BigRational::zero())
    }
}

fn entry_for(
    student: StudentId,
    info: InfoSet,
    tally: &ClassTally,
    actions: &[Rol],
    profile: &StrategyProfile,
) -> Result<DeviationEntry> {
    let prescribed = profile.decide(student, &info)?;
    let action_utilities: Vec<(Rol, BigRational)> = actions
        .iter()
        .enumerate()
        .map(|(a, r)| {
            (
                r.clone(),
                tally.distribution(a).expected_utility(&info.own_type),
            )
        })
        .collect();
    let prescribed_utility = action_utilities
        .iter()
        .find(|(r, _)| *r == prescribed)
        .map(|(_, u)| u.clone())
        .ok_or_else(|| Error::invalid("prescribed list is not a valid list for this market"))?;
    let (best, best_utility) = action_utilities
        .iter()
        .fold(None::<&(Rol, BigRational)>, |acc, x| match acc {
            Some(b) if b.1 >= x.1 => Some(b),
            _ => Some(x),
        })
        .cloned()
        .expect("at least one action");
    let (best, gain) = if best_utility > prescribed_utility {
        (best, best_utility - prescribed_utility)
    } else {
        (prescribed.clone(), BigRational::zero())
    };
    Ok(DeviationEntry {
        student,
        info,
        prescribed,
        best,
        gain,
        action_utilities,
    })
}

/// Best list for the given information and how much it improves on the
/// profile's prescription.
pub fn best_response_gain(
    market: &Market,
    policy: Policy,
    profile: &StrategyProfile,
    student: StudentId,
    own_type: &Utilities,
    own_info: &InfoSet,
) -> Result<(Rol, BigRational)> {
    check_info(market, policy, student, own_type, own_info)?;
    let actions = Rol::all(market.schools(), market.rol_limit());
    let tallies = tally(
        market,
        policy,
        profile,
        student,
        own_type,
        &actions,
        Some(own_info),
    )?;
    let class = tallies
        .get(own_info)
        .ok_or_else(|| Error::invalid("no lottery is consistent with the information set"))?;
    let entry = entry_for(student, own_info.clone(), class, &actions, profile)?;
    Ok((entry.best, entry.gain))
}

/// Best-response check for every student, type and reachable information
/// set. Entries are sorted by student, then information set.
pub fn verify_bne(
    market: &Market,
    policy: Policy,
    profile: &StrategyProfile,
) -> Result<DeviationReport> {
    check_size(market)?;
    let types = finite_types(market)?;
    let actions = Rol::all(market.schools(), market.rol_limit());
    let mut entries = Vec::new();
    for student in market.student_ids() {
        for t in types {
            let tallies = tally(
                market,
                policy,
                profile,
                student,
                &t.utilities,
                &actions,
                None,
            )?;
            let mut classes: Vec<(InfoSet, ClassTally)> = tallies.into_iter().collect();
            classes.sort_by(|a, b| a.0.cmp(&b.0));
            for (info, class) in classes {
                entries.push(entry_for(student, info, &class, &actions, profile)?);
            }
        }
    }
    Ok(DeviationReport { entries })
}
