//! Match rates, expected payoffs and assignment probabilities, exactly for
//! small markets and by seeded simulation otherwise.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{observe_unchecked, Policy, Treatment};
use crate::market::{
    build_priorities, deferred_acceptance, Lottery, Market, Matching, Rol, SchoolId, StudentId,
    Utilities,
};
use crate::oracle::MAX_EXACT_STUDENTS;
use crate::rational::to_f64;
use crate::strategy::{equilibrium_table, StrategyProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Exact,
    MonteCarlo { seed: u64, reps: u64 },
}

/// A student's position in the market: living in a school's neighborhood
/// or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Neighbor(SchoolId),
    Other,
}

impl Role {
    pub fn of(market: &Market, student: StudentId) -> Role {
        market
            .neighborhood_of(student)
            .map_or(Role::Other, Role::Neighbor)
    }

    pub fn label(self, market: &Market) -> String {
        match self {
            Role::Neighbor(s) => format!("{}-neighbor", market.school_label(s)),
            Role::Other => "others".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Estimate { mean: f64, stderr: f64 },
}

impl Value {
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Estimate { .. } => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Value::Exact(r) => to_f64(r),
            Value::Estimate { mean, .. } => *mean,
        }
    }

    pub fn stderr(&self) -> f64 {
        match self {
            Value::Exact(_) => 0.0,
            Value::Estimate { stderr, .. } => *stderr,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Estimate { mean, stderr } => write!(f, "{mean:.4} ± {stderr:.4}"),
        }
    }
}

/// Probability of each school in common preference order, then unmatched.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomAssignment(Vec<BigRational>);

impl RandomAssignment {
    pub fn new(probabilities: Vec<BigRational>) -> Result<Self> {
        if probabilities.len() < 2 {
            return Err(Error::invalid(
                "need at least one school and the unmatched slot",
            ));
        }
        if probabilities.iter().any(|p| *p < BigRational::zero()) {
            return Err(Error::invalid("negative probability"));
        }
        let total: BigRational = probabilities.iter().sum();
        if !total.is_one() {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(RandomAssignment(probabilities))
    }

    pub fn school(&self, school: SchoolId) -> &BigRational {
        &self.0[school.0]
    }

    pub fn unmatched(&self) -> &BigRational {
        self.0.last().expect("unmatched slot")
    }

    pub fn schools(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    Dominates,
    Dominated,
    Incomparable,
    Equal,
}

/// First-order stochastic dominance of `a` over `b` with respect to
/// `school_order` (best first), unmatched ranked last.
pub fn fosd_compare(
    a: &RandomAssignment,
    b: &RandomAssignment,
    school_order: &[SchoolId],
) -> Result<Dominance> {
    let m = a.schools();
    if b.schools() != m || school_order.len() != m {
        return Err(Error::invalid("assignments cover different school sets"));
    }
    let mut seen = vec![false; m];
    for s in school_order {
        if s.0 >= m || std::mem::replace(&mut seen[s.0], true) {
            return Err(Error::invalid("school order is not a permutation"));
        }
    }
    let (mut ca, mut cb) = (BigRational::zero(), BigRational::zero());
    let (mut above, mut below) = (false, false);
    for s in school_order {
        ca += a.school(*s);
        cb += b.school(*s);
        above |= ca > cb;
        below |= ca < cb;
    }
    Ok(match (above, below) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::Dominated,
        (true, true) => Dominance::Incomparable,
    })
}

/// Outcomes for one subpopulation: a role (or everyone) crossed with a type
/// label (or every type).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupStats {
    pub role: Option<Role>,
    pub type_label: Option<String>,
    pub match_rate: Value,
    pub payoff: Value,
    /// School probabilities in index order, then unmatched.
    pub assignment: Vec<Value>,
}

impl GroupStats {
    /// The exact assignment vector, when computed exactly.
    pub fn random_assignment(&self) -> Option<RandomAssignment> {
        let exact: Option<Vec<BigRational>> =
            self.assignment.iter().map(|v| v.exact().cloned()).collect();
        RandomAssignment::new(exact?).ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeStats {
    pub mode: Mode,
    pub groups: Vec<GroupStats>,
    /// Expected number of empty seats per school.
    pub vacancies: Vec<Value>,
}

impl OutcomeStats {
    pub fn group(&self, role: Option<Role>, type_label: Option<&str>) -> Option<&GroupStats> {
        self.groups
            .iter()
            .find(|g| g.role == role && g.type_label.as_deref() == type_label)
    }

    pub fn aggregate(&self) -> &GroupStats {
        self.group(None, None)
            .expect("aggregate group is always present")
    }
}

type GroupKey = (Option<Role>, Option<String>);

fn group_keys(roles: &[Role], labels: &[String]) -> Vec<GroupKey> {
    let mut keys = vec![(None, None)];
    keys.extend(labels.iter().map(|l| (None, Some(l.clone()))));
    for &r in roles {
        keys.push((Some(r), None));
        keys.extend(labels.iter().map(|l| (Some(r), Some(l.clone()))));
    }
    keys
}

fn distinct_roles(market: &Market) -> Vec<Role> {
    let mut roles: Vec<Role> = market.student_ids().map(|i| Role::of(market, i)).collect();
    roles.sort();
    roles.dedup();
    roles
}

fn check_profile(market: &Market, policy: Policy, profile: &StrategyProfile) -> Result<()> {
    if profile.policy() != policy {
        return Err(Error::invalid(format!(
            "profile written for {} evaluated under {policy}",
            profile.policy()
        )));
    }
    if profile.students() != market.students() {
        return Err(Error::invalid("profile size does not match the market"));
    }
    Ok(())
}

/// Ex-ante outcomes of `profile` under `policy`.
pub fn exante_stats(
    market: &Market,
    policy: Policy,
    profile: &StrategyProfile,
    mode: Mode,
) -> Result<OutcomeStats> {
    check_profile(market, policy, profile)?;
    match mode {
        Mode::Exact => exact_stats(market, policy, profile),
        Mode::MonteCarlo { seed, reps } => montecarlo_stats(market, policy, profile, seed, reps),
    }
}

/// Outcomes for one role and/or type, before the lottery is drawn.
pub fn interim_stats(
    market: &Market,
    policy: Policy,
    profile: &StrategyProfile,
    role: Option<Role>,
    type_label: Option<&str>,
    mode: Mode,
) -> Result<GroupStats> {
    let stats = exante_stats(market, policy, profile, mode)?;
    stats.group(role, type_label).cloned().ok_or_else(|| {
        Error::invalid(format!(
            "no students with role {:?} and type {:?}",
            role.map(|r| r.label(market)),
            type_label
        ))
    })
}

fn exact_stats(market: &Market, policy: Policy, profile: &StrategyProfile) -> Result<OutcomeStats> {
    let n = market.students();
    if n > MAX_EXACT_STUDENTS {
        return Err(Error::UnsupportedSize {
            students: n,
            limit: MAX_EXACT_STUDENTS,
        });
    }
    let types = market.type_space().finite().ok_or_else(|| {
        Error::UnsupportedModel("exact statistics need a finite type space".into())
    })?;
    let k = types.len();
    let m = market.schools();
    let denominator = types.iter().fold(BigInt::one(), |acc, t| {
        num::integer::lcm(acc, t.probability.denom().clone())
    });
    let numerators: Vec<BigInt> = types
        .iter()
        .map(|t| t.probability.numer() * (&denominator / t.probability.denom()))
        .collect();

    // counts[i][t][o]: weight of worlds where student i has type t and
    // outcome o; vacancies[s]: weight times empty seats.
    #[derive(Clone)]
    struct Acc {
        counts: Vec<Vec<Vec<BigInt>>>,
        vacancies: Vec<BigInt>,
    }
    let empty = Acc {
        counts: vec![vec![vec![BigInt::zero(); m + 1]; k]; n],
        vacancies: vec![BigInt::zero(); m],
    };
    let lotteries: Vec<Lottery> = Lottery::all(n).collect();
    let acc = lotteries
        .par_iter()
        .try_fold(
            || empty.clone(),
            |mut acc, lottery| -> Result<Acc> {
                let choices: Vec<Vec<Rol>> = market
                    .student_ids()
                    .map(|i| {
                        types
                            .iter()
                            .map(|t| {
                                let info =
                                    observe_unchecked(policy, market, lottery, i, &t.utilities);
                                let rol = profile.decide(i, &info)?;
                                rol.validate_for(market)?;
                                Ok(rol)
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                let priorities = build_priorities(market, lottery)?;
                let mut memo: HashMap<Vec<usize>, Matching> = HashMap::new();
                for combo in all_combos(k, n) {
                    let mut w = BigInt::one();
                    let key: Vec<usize> = combo
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| {
                            w *= &numerators[t];
                            choices[i].iter().position(|r| *r == choices[i][t]).unwrap()
                        })
                        .collect();
                    let matching = memo.entry(key).or_insert_with_key(|key| {
                        let rols: Vec<Rol> = key
                            .iter()
                            .enumerate()
                            .map(|(i, &c)| choices[i][c].clone())
                            .collect();
                        deferred_acceptance(market, &rols, &priorities)
                    });
                    for (i, &t) in combo.iter().enumerate() {
                        let o = matching.assignment(StudentId(i)).map_or(m, |s| s.0);
                        acc.counts[i][t][o] += &w;
                    }
                    for (s, v) in matching.vacancies(market).into_iter().enumerate() {
                        if v > 0 {
                            acc.vacancies[s] += &w * BigInt::from(v);
                        }
                    }
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || empty.clone(),
            |mut a, b| {
                for (x, y) in a
                    .counts
                    .iter_mut()
                    .flatten()
                    .flatten()
                    .zip(b.counts.into_iter().flatten().flatten())
                {
                    *x += y;
                }
                for (x, y) in a.vacancies.iter_mut().zip(b.vacancies) {
                    *x += y;
                }
                Ok(a)
            },
        )?;

    // Conditional distribution of student i given own type t.
    let conditional: Vec<Vec<Vec<BigRational>>> = acc
        .counts
        .iter()
        .map(|per_type| {
            per_type
                .iter()
                .map(|c| {
                    let total: BigInt = c.iter().sum();
                    c.iter()
                        .map(|x| BigRational::new(x.clone(), total.clone()))
                        .collect()
                })
                .collect()
        })
        .collect();

    let roles = distinct_roles(market);
    let labels: Vec<String> = types.iter().map(|t| t.label.clone()).collect();
    let mut groups = Vec::new();
    for (role, label) in group_keys(&roles, &labels) {
        let students: Vec<StudentId> = market
            .student_ids()
            .filter(|&i| role.is_none_or(|r| Role::of(market, i) == r))
            .collect();
        let type_idx: Vec<usize> = (0..k)
            .filter(|&t| label.as_ref().is_none_or(|l| *l == types[t].label))
            .collect();
        let type_mass: BigRational = type_idx.iter().map(|&t| &types[t].probability).sum();
        let share = BigRational::new(BigInt::one(), BigInt::from(students.len()));
        let mut dist = vec![BigRational::zero(); m + 1];
        let mut payoff = BigRational::zero();
        for &i in &students {
            for &t in &type_idx {
                let w = &share * &types[t].probability / &type_mass;
                for (o, p) in conditional[i.0][t].iter().enumerate() {
                    let mass = &w * p;
                    if o < m {
                        payoff += &mass
                            * BigRational::from_integer(types[t].utilities.of(SchoolId(o)).into());
                    }
                    dist[o] += mass;
                }
            }
        }
        groups.push(GroupStats {
            role,
            type_label: label,
            match_rate: Value::Exact(BigRational::one() - &dist[m]),
            payoff: Value::Exact(payoff),
            assignment: dist.into_iter().map(Value::Exact).collect(),
        });
    }
    let total_weight = BigInt::from(lotteries.len()) * num::pow(denominator, n);
    let vacancies = acc
        .vacancies
        .into_iter()
        .map(|v| Value::Exact(BigRational::new(v, total_weight.clone())))
        .collect();
    Ok(OutcomeStats {
        mode: Mode::Exact,
        groups,
        vacancies,
    })
}

fn all_combos(types: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = Some(vec![0usize; k]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for pos in (0..k).rev() {
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

/// Sums over replications of a ratio estimator's numerator `y` and
/// denominator `x`, kept in integers so any summation order gives the same
/// totals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Moments {
    reps: i128,
    sx: i128,
    sy: i128,
    sxx: i128,
    sxy: i128,
    syy: i128,
}

impl Moments {
    fn push(&mut self, x: i128, y: i128) {
        self.reps += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
        self.syy += y * y;
    }

    fn add(&mut self, o: &Moments) {
        self.reps += o.reps;
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.sxy += o.sxy;
        self.syy += o.syy;
    }

    /// Ratio `sum y / sum x` with a replication-clustered standard error.
    fn estimate(&self) -> Value {
        if self.sx == 0 {
            return Value::Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let r = self.sy as f64 / self.sx as f64;
        let ss = self.syy as f64 - 2.0 * r * self.sxy as f64 + r * r * self.sxx as f64;
        let reps = self.reps as f64;
        let stderr = if self.reps > 1 {
            (ss.max(0.0) * reps / (reps - 1.0)).sqrt() / self.sx as f64
        } else {
            f64::NAN
        };
        Value::Estimate { mean: r, stderr }
    }
}

/// Per-group moments for count, payoff and each outcome slot.
#[derive(Clone, Debug, PartialEq, Eq)]
struct GroupMoments {
    payoff: Moments,
    outcomes: Vec<Moments>,
}

/// Seed-derived generator for one replication.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn montecarlo_stats(
    market: &Market,
    policy: Policy,
    profile: &StrategyProfile,
    seed: u64,
    reps: u64,
) -> Result<OutcomeStats> {
    if reps == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one replication"));
    }
    let n = market.students();
    let m = market.schools();
    let roles = distinct_roles(market);
    let labels: Vec<String> = match market.type_space().finite() {
        Some(types) => types.iter().map(|t| t.label.clone()).collect(),
        None => vec!["u".into()],
    };
    let keys = group_keys(&roles, &labels);
    let blank = GroupMoments {
        payoff: Moments::default(),
        outcomes: vec![Moments::default(); m + 1],
    };
    type Acc = (BTreeMap<usize, GroupMoments>, Vec<Moments>);
    let fresh = || -> Acc {
        (
            (0..keys.len()).map(|g| (g, blank.clone())).collect(),
            vec![Moments::default(); m],
        )
    };
    let role_of: Vec<Role> = market.student_ids().map(|i| Role::of(market, i)).collect();

    let (groups, vacancies) = (0..reps)
        .into_par_iter()
        .try_fold(fresh, |mut acc, rep| -> Result<Acc> {
            let mut rng = replication_rng(seed, rep);
            let lottery = Lottery::random(n, &mut rng);
            let drawn: Vec<(String, Utilities)> = (0..n)
                .map(|_| market.type_space().sample(&mut rng))
                .collect();
            let rols = market
                .student_ids()
                .map(|i| {
                    let info = observe_unchecked(policy, market, &lottery, i, &drawn[i.0].1);
                    profile.decide(i, &info)
                })
                .collect::<Result<Vec<Rol>>>()?;
            let matching = crate::market::run_da(market, &rols, &lottery)?;
            for (g, (role, label)) in keys.iter().enumerate() {
                let mut x = 0i128;
                let mut pay = 0i128;
                let mut hits = vec![0i128; m + 1];
                for i in 0..n {
                    if role.is_some_and(|r| r != role_of[i])
                        || label.as_ref().is_some_and(|l| *l != drawn[i].0)
                    {
                        continue;
                    }
                    x += 1;
                    let a = matching.assignment(StudentId(i));
                    pay += drawn[i].1.payoff(a) as i128;
                    hits[a.map_or(m, |s| s.0)] += 1;
                }
                let gm = acc.0.get_mut(&g).expect("group slot");
                gm.payoff.push(x, pay);
                for (o, h) in hits.into_iter().enumerate() {
                    gm.outcomes[o].push(x, h);
                }
            }
            for (s, v) in matching.vacancies(market).into_iter().enumerate() {
                acc.1[s].push(1, v as i128);
            }
            Ok(acc)
        })
        .try_reduce(fresh, |mut a, b| {
            for (g, gm) in b.0 {
                let mine = a.0.get_mut(&g).expect("group slot");
                mine.payoff.add(&gm.payoff);
                for (x, y) in mine.outcomes.iter_mut().zip(&gm.outcomes) {
                    x.add(y);
                }
            }
            for (x, y) in a.1.iter_mut().zip(&b.1) {
                x.add(y);
            }
            Ok(a)
        })?;

    let groups = keys
        .into_iter()
        .enumerate()
        .filter(|(g, _)| groups[g].payoff.sx > 0)
        .map(|(g, (role, label))| {
            let gm = &groups[&g];
            let mut matched = gm.outcomes[m];
            // Matched count per replication is x - unmatched.
            matched.sy = gm.outcomes[m].sx - gm.outcomes[m].sy;
            matched.sxy = gm.outcomes[m].sxx - gm.outcomes[m].sxy;
            matched.syy = gm.outcomes[m].sxx - 2 * gm.outcomes[m].sxy + gm.outcomes[m].syy;
            GroupStats {
                role,
                type_label: label,
                match_rate: matched.estimate(),
                payoff: gm.payoff.estimate(),
                assignment: gm.outcomes.iter().map(Moments::estimate).collect(),
            }
        })
        .collect();
    Ok(OutcomeStats {
        mode: Mode::MonteCarlo { seed, reps },
        groups,
        vacancies: vacancies.iter().map(Moments::estimate).collect(),
    })
}

/// Whether a cell holds a probability or an expected payoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    MatchRate,
    Payoff,
}

/// One predicted cell of the treatment summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionCell {
    pub treatment: Treatment,
    pub row: String,
    pub kind: CellKind,
    pub value: Value,
}

/// Summary rows for a treatment: aggregate match rate and payoff, then per
/// type (no neighborhoods) or per role (with neighborhoods).
pub fn prediction_cells(treatment: Treatment, mode: Mode) -> Result<Vec<PredictionCell>> {
    let market = treatment.market();
    let stats = exante_stats(
        &market,
        treatment.policy(),
        &equilibrium_table(treatment),
        mode,
    )?;
    let mut breakdown: Vec<(String, &GroupStats)> = Vec::new();
    if treatment.has_neighborhoods() {
        for role in distinct_roles(&market) {
            let g = stats.group(Some(role), None).expect("role group");
            breakdown.push((role.label(&market), g));
        }
    } else {
        for t in market.type_space().finite().expect("finite types") {
            let g = stats.group(None, Some(&t.label)).expect("type group");
            breakdown.push((format!("type-{}", t.label), g));
        }
    }
    let mut cells = vec![PredictionCell {
        treatment,
        row: "Expected match rate".into(),
        kind: CellKind::MatchRate,
        value: stats.aggregate().match_rate.clone(),
    }];
    for (label, g) in &breakdown {
        cells.push(PredictionCell {
            treatment,
            row: format!("Expected match rate for {label}"),
            kind: CellKind::MatchRate,
            value: g.match_rate.clone(),
        });
    }
    cells.push(PredictionCell {
        treatment,
        row: "Expected payoff".into(),
        kind: CellKind::Payoff,
        value: stats.aggregate().payoff.clone(),
    });
    for (label, g) in &breakdown {
        cells.push(PredictionCell {
            treatment,
            row: format!("Expected payoff for {label}"),
            kind: CellKind::Payoff,
            value: g.payoff.clone(),
        });
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::strategy::lemma1_profile;

    #[test]
    fn fosd_cases() {
        let third =
            RandomAssignment::new(vec![ratio(1, 3), ratio(1, 3), ratio(1, 3), int(0)]).unwrap();
        let cover =
            RandomAssignment::new(vec![ratio(33, 100), ratio(26, 100), int(0), ratio(41, 100)])
                .unwrap();
        let order = [SchoolId(0), SchoolId(1), SchoolId(2)];
        assert_eq!(
            fosd_compare(&third, &cover, &order).unwrap(),
            Dominance::Dominates
        );
        assert_eq!(
            fosd_compare(&cover, &third, &order).unwrap(),
            Dominance::Dominated
        );
        assert_eq!(
            fosd_compare(&third, &third, &order).unwrap(),
            Dominance::Equal
        );
        let best = RandomAssignment::new(vec![int(1), int(0), int(0), int(0)]).unwrap();
        let none = RandomAssignment::new(vec![int(0), int(0), int(0), int(1)]).unwrap();
        assert_eq!(
            fosd_compare(&best, &none, &order).unwrap(),
            Dominance::Dominates
        );
        let mid = RandomAssignment::new(vec![int(0), int(1), int(0), int(0)]).unwrap();
        let split = RandomAssignment::new(vec![ratio(1, 2), int(0), int(0), ratio(1, 2)]).unwrap();
        assert_eq!(
            fosd_compare(&mid, &split, &order).unwrap(),
            Dominance::Incomparable
        );
        let short = RandomAssignment::new(vec![int(1), int(0)]).unwrap();
        assert!(fosd_compare(&short, &best, &order).is_err());
    }

    #[test]
    fn reveal_gives_capacity_shares() {
        let market = Market::example1();
        let stats = exante_stats(
            &market,
            Policy::Reveal,
            &lemma1_profile(&market).unwrap(),
            Mode::Exact,
        )
        .unwrap();
        for g in &stats.groups {
            let a = g.random_assignment().unwrap();
            assert_eq!(
                a.as_slice(),
                &[ratio(1, 3), ratio(1, 3), ratio(1, 3), int(0)]
            );
        }
    }

    #[test]
    fn cover_type_v_prime() {
        let stats = prediction_cells(Treatment::NoNsCover, Mode::Exact).unwrap();
        let cell = stats
            .iter()
            .find(|c| c.row == "Expected payoff for type-v'")
            .unwrap();
        assert_eq!(cell.value.exact().unwrap(), &ratio(60 * 569, 729));
    }

    #[test]
    fn montecarlo_is_schedule_independent() {
        let market = Market::example2();
        let profile = equilibrium_table(Treatment::NsCover);
        let mode = Mode::MonteCarlo {
            seed: 7,
            reps: 2000,
        };
        let a = exante_stats(&market, Policy::Cover, &profile, mode).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool
            .install(|| exante_stats(&market, Policy::Cover, &profile, mode))
            .unwrap();
        assert_eq!(a, b);
    }
}
