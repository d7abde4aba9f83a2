//! Markets, lotteries, rank-order lists and the constrained student-proposing
//! deferred acceptance mechanism.
//!
//! Schools are indexed by their position in the common ordinal ranking:
//! `SchoolId(0)` is the best school for every student. Each school ranks its
//! neighborhood students first and breaks every remaining tie with one single
//! lottery, so all priorities are strict once the lottery is drawn.

use std::fmt;

use itertools::Itertools;
use num::rational::BigRational;
use num::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SchoolId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StudentId(pub usize);

/// Cardinal utility of each school on the 0..=100 point scale, indexed by
/// [`SchoolId`]. Being unmatched is always worth 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Utilities(pub Vec<u32>);

impl Utilities {
    pub fn of(&self, school: SchoolId) -> u32 {
        self.0[school.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] > w[1])
    }

    /// Payoff of an assignment; unmatched is worth 0.
    pub fn payoff(&self, assignment: Option<SchoolId>) -> u32 {
        assignment.map_or(0, |s| self.of(s))
    }
}

/// One utility type with its prior probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilityType {
    pub label: String,
    pub utilities: Utilities,
    pub probability: BigRational,
}

/// Distribution students' utility vectors are drawn from, i.i.d. across
/// students.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeSpace {
    /// Finitely many types with rational probabilities summing to one.
    Finite(Vec<UtilityType>),
    /// Each school's utility drawn independently and uniformly from an
    /// inclusive integer range.
    UniformRanges(Vec<(u32, u32)>),
}

impl TypeSpace {
    pub fn finite(&self) -> Option<&[UtilityType]> {
        match self {
            TypeSpace::Finite(types) => Some(types),
            TypeSpace::UniformRanges(_) => None,
        }
    }

    /// Index of a finite type with exactly these utilities.
    pub fn index_of(&self, utilities: &Utilities) -> Option<usize> {
        self.finite()?
            .iter()
            .position(|t| &t.utilities == utilities)
    }

    pub fn label_of(&self, utilities: &Utilities) -> String {
        match self.index_of(utilities) {
            Some(i) => self.finite().unwrap()[i].label.clone(),
            None => "u".to_string(),
        }
    }

    /// Draws one utility vector; returns its label alongside.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (String, Utilities) {
        match self {
            TypeSpace::Finite(types) => {
                // Inverse CDF on an exact common denominator.
                let denom = types.iter().fold(num::BigInt::one(), |acc, t| {
                    num::integer::lcm(acc, t.probability.denom().clone())
                });
                let denom_u64: u64 = denom.to_string().parse().unwrap_or(u64::MAX);
                let draw = rng.random_range(0..denom_u64);
                let mut acc = BigRational::zero();
                let target = BigRational::new(draw.into(), denom.clone());
                for t in types {
                    acc += &t.probability;
                    if target < acc {
                        return (t.label.clone(), t.utilities.clone());
                    }
                }
                let last = types.last().unwrap();
                (last.label.clone(), last.utilities.clone())
            }
            TypeSpace::UniformRanges(ranges) => {
                let utilities = ranges
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..=hi))
                    .collect();
                ("u".to_string(), Utilities(utilities))
            }
        }
    }

    fn validate(&self, schools: usize) -> Result<()> {
        match self {
            TypeSpace::Finite(types) => {
                if types.is_empty() {
                    return Err(Error::invalid("type space is empty"));
                }
                let mut total = BigRational::zero();
                for t in types {
                    if t.utilities.len() != schools {
                        return Err(Error::invalid(format!(
                            "type {} has {} utilities for {} schools",
                            t.label,
                            t.utilities.len(),
                            schools
                        )));
                    }
                    if !t.utilities.is_strictly_decreasing() {
                        return Err(Error::invalid(format!(
                            "type {} utilities must strictly decrease along the common ranking",
                            t.label
                        )));
                    }
                    if t.probability <= BigRational::zero() {
                        return Err(Error::invalid(format!(
                            "type {} has non-positive probability",
                            t.label
                        )));
                    }
                    total += &t.probability;
                }
                if !total.is_one() {
                    return Err(Error::invalid(format!(
                        "type probabilities sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
            TypeSpace::UniformRanges(ranges) => {
                if ranges.len() != schools {
                    return Err(Error::invalid("one utility range per school required"));
                }
                if ranges.iter().any(|&(lo, hi)| lo > hi) {
                    return Err(Error::invalid("utility range with lo > hi"));
                }
                if ranges.windows(2).any(|w| w[1].1 >= w[0].0) {
                    return Err(Error::invalid(
                        "utility ranges must be disjoint and decreasing along the common ranking",
                    ));
                }
                Ok(())
            }
        }
    }
}

/// A school-choice market with common ordinal preferences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Market {
    capacities: Vec<u32>,
    neighborhoods: Vec<Option<SchoolId>>,
    rol_limit: usize,
    type_space: TypeSpace,
    school_labels: Vec<String>,
}

impl Market {
    /// A market without neighborhoods. `rol_limit` may equal the number of
    /// schools to express the unconstrained mechanism.
    pub fn new(
        students: usize,
        capacities: Vec<u32>,
        rol_limit: usize,
        type_space: TypeSpace,
    ) -> Result<Self> {
        if students == 0 {
            return Err(Error::invalid("market needs at least one student"));
        }
        if capacities.is_empty() {
            return Err(Error::invalid("market needs at least one school"));
        }
        if capacities.contains(&0) {
            return Err(Error::invalid("school capacities must be positive"));
        }
        if rol_limit == 0 || rol_limit > capacities.len() {
            return Err(Error::invalid(format!(
                "ROL limit {rol_limit} must lie in 1..={}",
                capacities.len()
            )));
        }
        type_space.validate(capacities.len())?;
        let school_labels = (1..=capacities.len()).map(|k| format!("s{k}")).collect();
        Ok(Market {
            capacities,
            neighborhoods: vec![None; students],
            rol_limit,
            type_space,
            school_labels,
        })
    }

    /// Assigns neighborhoods (one entry per student). Every school with a
    /// nonempty neighborhood must keep at least one seat for outsiders.
    pub fn with_neighborhoods(mut self, neighborhoods: Vec<Option<SchoolId>>) -> Result<Self> {
        if neighborhoods.len() != self.students() {
            return Err(Error::invalid(format!(
                "{} neighborhood entries for {} students",
                neighborhoods.len(),
                self.students()
            )));
        }
        if let Some(s) = neighborhoods
            .iter()
            .flatten()
            .find(|s| s.0 >= self.schools())
        {
            return Err(Error::invalid(format!("unknown school index {}", s.0)));
        }
        self.neighborhoods = neighborhoods;
        for s in self.school_ids() {
            let size = self.neighborhood_size(s);
            if size > 0 && size >= self.capacity(s) {
                return Err(Error::invalid(format!(
                    "neighborhood of {} has {} students but capacity {}",
                    self.school_label(s),
                    size,
                    self.capacity(s)
                )));
            }
        }
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.schools() {
            return Err(Error::invalid("one label per school required"));
        }
        if labels.iter().duplicates().next().is_some() || labels.iter().any(|l| l.is_empty()) {
            return Err(Error::invalid(
                "school labels must be distinct and nonempty",
            ));
        }
        self.school_labels = labels;
        Ok(self)
    }

    pub fn with_rol_limit(mut self, rol_limit: usize) -> Result<Self> {
        if rol_limit == 0 || rol_limit > self.schools() {
            return Err(Error::invalid(format!(
                "ROL limit {rol_limit} must lie in 1..={}",
                self.schools()
            )));
        }
        self.rol_limit = rol_limit;
        Ok(self)
    }

    /// Six students, three schools with two seats each, single-school lists,
    /// types `v = (90, 40, 20)` w.p. 2/3 and `v' = (70, 60, 20)` w.p. 1/3.
    pub fn example1() -> Self {
        let types = TypeSpace::Finite(vec![
            UtilityType {
                label: "v".into(),
                utilities: Utilities(vec![90, 40, 20]),
                probability: ratio(2, 3),
            },
            UtilityType {
                label: "v'".into(),
                utilities: Utilities(vec![70, 60, 20]),
                probability: ratio(1, 3),
            },
        ]);
        Market::new(6, vec![2, 2, 2], 1, types).expect("preset market is valid")
    }

    /// [`Market::example1`] with students 1, 2 and 3 living in the
    /// neighborhoods of s1, s2 and s3.
    pub fn example2() -> Self {
        let mut neighborhoods = vec![None; 6];
        for (k, slot) in neighborhoods.iter_mut().enumerate().take(3) {
            *slot = Some(SchoolId(k));
        }
        Market::example1()
            .with_neighborhoods(neighborhoods)
            .expect("preset market is valid")
    }

    /// Sixteen students, four schools A..D with four seats each, nobody in
    /// A's neighborhood and two students each in B's, C's and D's
    /// neighborhoods (students 1-2, 3-4 and 5-6). Utilities are uniform on
    /// 81..=100, 61..=80, 41..=60 and 21..=40.
    pub fn robustness(rol_limit: usize) -> Result<Self> {
        let types = TypeSpace::UniformRanges(vec![(81, 100), (61, 80), (41, 60), (21, 40)]);
        let mut neighborhoods = vec![None; 16];
        for (i, slot) in neighborhoods.iter_mut().enumerate().take(6) {
            *slot = Some(SchoolId(1 + i / 2));
        }
        Market::new(16, vec![4; 4], rol_limit, types)?
            .with_labels(vec!["A".into(), "B".into(), "C".into(), "D".into()])?
            .with_neighborhoods(neighborhoods)
    }

    /// [`Market::example2`] replicated `factor` times: every original
    /// student becomes `factor` students and every capacity is scaled.
    pub fn replicated_example2(factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("replication factor must be positive"));
        }
        let base = Market::example2();
        let capacities = base.capacities.iter().map(|&q| q * factor as u32).collect();
        let neighborhoods = base
            .neighborhoods
            .iter()
            .flat_map(|&nb| std::iter::repeat_n(nb, factor))
            .collect();
        Market::new(6 * factor, capacities, 1, base.type_space.clone())?
            .with_neighborhoods(neighborhoods)
    }

    pub fn students(&self) -> usize {
        self.neighborhoods.len()
    }

    pub fn schools(&self) -> usize {
        self.capacities.len()
    }

    pub fn student_ids(&self) -> impl Iterator<Item = StudentId> {
        (0..self.students()).map(StudentId)
    }

    pub fn school_ids(&self) -> impl Iterator<Item = SchoolId> {
        (0..self.schools()).map(SchoolId)
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn capacity(&self, school: SchoolId) -> u32 {
        self.capacities[school.0]
    }

    pub fn total_capacity(&self) -> u32 {
        self.capacities.iter().sum()
    }

    pub fn rol_limit(&self) -> usize {
        self.rol_limit
    }

    pub fn type_space(&self) -> &TypeSpace {
        &self.type_space
    }

    pub fn neighborhoods(&self) -> &[Option<SchoolId>] {
        &self.neighborhoods
    }

    pub fn neighborhood_of(&self, student: StudentId) -> Option<SchoolId> {
        self.neighborhoods[student.0]
    }

    /// Students living in the school's neighborhood, by index.
    pub fn neighborhood(&self, school: SchoolId) -> Vec<StudentId> {
        self.student_ids()
            .filter(|&i| self.neighborhoods[i.0] == Some(school))
            .collect()
    }

    pub fn neighborhood_size(&self, school: SchoolId) -> u32 {
        self.neighborhoods
            .iter()
            .filter(|&&nb| nb == Some(school))
            .count() as u32
    }

    pub fn has_neighborhoods(&self) -> bool {
        self.neighborhoods.iter().any(Option::is_some)
    }

    pub fn school_label(&self, school: SchoolId) -> &str {
        &self.school_labels[school.0]
    }

    pub fn school_labels(&self) -> &[String] {
        &self.school_labels
    }

    pub fn school_by_label(&self, label: &str) -> Option<SchoolId> {
        self.school_labels
            .iter()
            .position(|l| l == label)
            .map(SchoolId)
    }

    /// Seats are exactly enough for everyone.
    pub fn check_exact_capacity(&self) -> Result<()> {
        if self.total_capacity() as usize != self.students() {
            return Err(Error::invalid(format!(
                "total capacity {} differs from {} students",
                self.total_capacity(),
                self.students()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_student(&self, student: StudentId) -> Result<()> {
        if student.0 >= self.students() {
            return Err(Error::invalid(format!(
                "student index {} out of range for {} students",
                student.0,
                self.students()
            )));
        }
        Ok(())
    }
}

/// A uniformly drawn bijection from students to ranks `1..=n`; lower is
/// better.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lottery {
    ranks: Vec<u32>,
}

impl Lottery {
    pub fn from_ranks(ranks: Vec<u32>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r == 0 || r as usize > n || std::mem::replace(&mut seen[r as usize - 1], true) {
                return Err(Error::invalid(format!(
                    "lottery ranks {ranks:?} are not a permutation of 1..={n}"
                )));
            }
        }
        Ok(Lottery { ranks })
    }

    /// `order[0]` receives rank 1, `order[1]` rank 2, and so on.
    pub fn from_order(order: &[StudentId]) -> Result<Self> {
        let n = order.len();
        let mut ranks = vec![0u32; n];
        for (pos, &StudentId(i)) in order.iter().enumerate() {
            if i >= n || ranks[i] != 0 {
                return Err(Error::invalid(format!(
                    "lottery order {order:?} is not a permutation"
                )));
            }
            ranks[i] = pos as u32 + 1;
        }
        Ok(Lottery { ranks })
    }

    pub fn identity(students: usize) -> Self {
        Lottery {
            ranks: (1..=students as u32).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(students: usize, rng: &mut R) -> Self {
        let mut order: Vec<StudentId> = (0..students).map(StudentId).collect();
        order.shuffle(rng);
        Lottery::from_order(&order).expect("shuffled order is a permutation")
    }

    /// Every lottery over `students` students, in lexicographic order of the
    /// rank vectors.
    pub fn all(students: usize) -> impl Iterator<Item = Lottery> {
        (1..=students as u32)
            .permutations(students)
            .map(|ranks| Lottery { ranks })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank(&self, student: StudentId) -> u32 {
        self.ranks[student.0]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Students from best rank to worst.
    pub fn order(&self) -> Vec<StudentId> {
        let mut order = vec![StudentId(0); self.ranks.len()];
        for (i, &r) in self.ranks.iter().enumerate() {
            order[r as usize - 1] = StudentId(i);
        }
        order
    }

    pub fn student_at(&self, rank: u32) -> Option<StudentId> {
        self.ranks.iter().position(|&r| r == rank).map(StudentId)
    }
}

/// A submitted rank-order list: nonempty, no repeated schools.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rol(Vec<SchoolId>);

impl Rol {
    pub fn new(schools: Vec<SchoolId>) -> Result<Self> {
        if schools.is_empty() {
            return Err(Error::invalid(
                "rank-order list must name at least one school",
            ));
        }
        if schools.iter().duplicates().next().is_some() {
            return Err(Error::invalid(format!(
                "rank-order list {schools:?} repeats a school"
            )));
        }
        Ok(Rol(schools))
    }

    pub fn single(school: SchoolId) -> Self {
        Rol(vec![school])
    }

    /// Every valid list over `schools` schools of length `1..=max_len`.
    pub fn all(schools: usize, max_len: usize) -> Vec<Rol> {
        (1..=max_len.min(schools))
            .flat_map(|len| (0..schools).map(SchoolId).permutations(len))
            .map(Rol)
            .collect()
    }

    pub fn schools(&self) -> &[SchoolId] {
        &self.0
    }

    pub fn first(&self) -> SchoolId {
        self.0[0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, school: SchoolId) -> bool {
        self.0.contains(&school)
    }

    pub fn position(&self, school: SchoolId) -> Option<usize> {
        self.0.iter().position(|&s| s == school)
    }

    pub fn validate_for(&self, market: &Market) -> Result<()> {
        if self.0.len() > market.rol_limit() {
            return Err(Error::invalid(format!(
                "rank-order list of length {} exceeds limit {}",
                self.0.len(),
                market.rol_limit()
            )));
        }
        if let Some(s) = self.0.iter().find(|s| s.0 >= market.schools()) {
            return Err(Error::invalid(format!("unknown school index {}", s.0)));
        }
        Ok(())
    }

    /// `|`-separated school labels.
    pub fn render(&self, market: &Market) -> String {
        self.0.iter().map(|&s| market.school_label(s)).join("|")
    }

    pub fn parse(text: &str, market: &Market) -> Result<Self> {
        let schools = text
            .split('|')
            .map(|label| {
                market
                    .school_by_label(label.trim())
                    .ok_or_else(|| Error::invalid(format!("unknown school label {label:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Rol::new(schools)
    }
}

/// Final assignment of every student.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching(Vec<Option<SchoolId>>);

impl Matching {
    pub fn from_assignments(assignments: Vec<Option<SchoolId>>) -> Self {
        Matching(assignments)
    }

    pub fn assignment(&self, student: StudentId) -> Option<SchoolId> {
        self.0[student.0]
    }

    pub fn assignments(&self) -> &[Option<SchoolId>] {
        &self.0
    }

    pub fn assigned_to(&self, school: SchoolId) -> Vec<StudentId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == Some(school))
            .map(|(i, _)| StudentId(i))
            .collect()
    }

    pub fn count(&self, school: SchoolId) -> u32 {
        self.0.iter().filter(|&&a| a == Some(school)).count() as u32
    }

    pub fn unmatched(&self) -> usize {
        self.0.iter().filter(|a| a.is_none()).count()
    }

    pub fn vacancies(&self, market: &Market) -> Vec<u32> {
        market
            .school_ids()
            .map(|s| market.capacity(s) - self.count(s))
            .collect()
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.0.iter().map(|a| match a {
            Some(s) => format!("s{}", s.0 + 1),
            None => "-".to_string(),
        });
        write!(f, "({})", parts.format(", "))
    }
}

/// Strict priority order of every school over all students.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Priorities {
    orders: Vec<Vec<StudentId>>,
    positions: Vec<Vec<u32>>,
}

impl Priorities {
    pub fn order(&self, school: SchoolId) -> &[StudentId] {
        &self.orders[school.0]
    }

    /// 0 is the highest priority.
    pub fn position(&self, school: SchoolId, student: StudentId) -> u32 {
        self.positions[school.0][student.0]
    }

    pub fn prefers(&self, school: SchoolId, a: StudentId, b: StudentId) -> bool {
        self.position(school, a) < self.position(school, b)
    }
}

/// Neighborhood students first, then everyone else; both groups in lottery
/// order.
pub fn build_priorities(market: &Market, lottery: &Lottery) -> Result<Priorities> {
    if lottery.len() != market.students() {
        return Err(Error::invalid(format!(
            "lottery covers {} students, market has {}",
            lottery.len(),
            market.students()
        )));
    }
    let by_rank = lottery.order();
    let mut orders = Vec::with_capacity(market.schools());
    let mut positions = Vec::with_capacity(market.schools());
    for s in market.school_ids() {
        let (mut order, others): (Vec<StudentId>, Vec<StudentId>) = by_rank
            .iter()
            .partition(|&&i| market.neighborhood_of(i) == Some(s));
        order.extend(others);
        let mut pos = vec![0u32; market.students()];
        for (p, i) in order.iter().enumerate() {
            pos[i.0] = p as u32;
        }
        orders.push(order);
        positions.push(pos);
    }
    Ok(Priorities { orders, positions })
}

/// Student-proposing deferred acceptance on the submitted lists.
pub fn run_da(market: &Market, rols: &[Rol], lottery: &Lottery) -> Result<Matching> {
    if rols.len() != market.students() {
        return Err(Error::invalid(format!(
            "{} rank-order lists for {} students",
            rols.len(),
            market.students()
        )));
    }
    for rol in rols {
        rol.validate_for(market)?;
    }
    let priorities = build_priorities(market, lottery)?;
    Ok(deferred_acceptance(market, rols, &priorities))
}

/// Unchecked DA core shared by the validated entry point and the
/// enumeration engines.
pub(crate) fn deferred_acceptance(
    market: &Market,
    rols: &[Rol],
    priorities: &Priorities,
) -> Matching {
    let n = market.students();
    let mut next = vec![0usize; n];
    let mut assignment: Vec<Option<SchoolId>> = vec![None; n];
    let mut held: Vec<Vec<StudentId>> = vec![Vec::new(); market.schools()];
    let mut touched = vec![false; market.schools()];
    loop {
        let mut proposed = false;
        for i in 0..n {
            if assignment[i].is_none() && next[i] < rols[i].len() {
                let s = rols[i].0[next[i]];
                next[i] += 1;
                held[s.0].push(StudentId(i));
                touched[s.0] = true;
                proposed = true;
            }
        }
        if !proposed {
            break;
        }
        for s in 0..market.schools() {
            if !std::mem::take(&mut touched[s]) {
                continue;
            }
            let school = SchoolId(s);
            let list = &mut held[s];
            list.sort_by_key(|&i| priorities.position(school, i));
            let keep = market.capacity(school) as usize;
            for &i in list.iter().skip(keep) {
                assignment[i.0] = None;
            }
            list.truncate(keep);
            for &i in list.iter() {
                assignment[i.0] = Some(school);
            }
        }
    }
    Matching(assignment)
}

/// Realized payoff of every student.
pub fn payoff(matching: &Matching, utilities: &[Utilities]) -> Vec<u32> {
    matching
        .0
        .iter()
        .zip(utilities)
        .map(|(&a, u)| u.payoff(a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(xs: &[usize]) -> Vec<StudentId> {
        xs.iter().map(|&x| StudentId(x - 1)).collect()
    }

    /// Lottery from the instructions: ID3, ID6, ID4, ID5, ID2, ID1.
    fn instructions_lottery() -> Lottery {
        Lottery::from_order(&ids(&[3, 6, 4, 5, 2, 1])).unwrap()
    }

    #[test]
    fn priorities_follow_lottery_without_neighborhoods() {
        let market = Market::example1();
        let lottery = Lottery::from_ranks(vec![3, 1, 2, 6, 4, 5]).unwrap();
        let p = build_priorities(&market, &lottery).unwrap();
        for s in market.school_ids() {
            assert_eq!(p.order(s), ids(&[2, 3, 1, 5, 6, 4]).as_slice());
        }
    }

    #[test]
    fn priorities_match_instructions_table() {
        let market = Market::example2();
        let p = build_priorities(&market, &instructions_lottery()).unwrap();
        assert_eq!(p.order(SchoolId(0)), ids(&[1, 3, 6, 4, 5, 2]).as_slice());
        assert_eq!(p.order(SchoolId(1)), ids(&[2, 3, 6, 4, 5, 1]).as_slice());
        assert_eq!(p.order(SchoolId(2)), ids(&[3, 6, 4, 5, 2, 1]).as_slice());
    }

    #[test]
    fn single_student_single_school() {
        let types = TypeSpace::Finite(vec![UtilityType {
            label: "only".into(),
            utilities: Utilities(vec![10]),
            probability: ratio(1, 1),
        }]);
        let market = Market::new(1, vec![1], 1, types).unwrap();
        let p = build_priorities(&market, &Lottery::identity(1)).unwrap();
        assert_eq!(p.order(SchoolId(0)), &[StudentId(0)]);
    }

    #[test]
    fn lottery_dimension_mismatch_is_rejected() {
        let market = Market::example1();
        assert!(matches!(
            build_priorities(&market, &Lottery::identity(5)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn instructions_worked_example() {
        let market = Market::example2();
        let a = Rol::single(SchoolId(0));
        let b = Rol::single(SchoolId(1));
        let rols = vec![a.clone(), b.clone(), a.clone(), a.clone(), b, a];
        let m = run_da(&market, &rols, &instructions_lottery()).unwrap();
        let s = |k| Some(SchoolId(k));
        assert_eq!(m.assignments(), &[s(0), s(1), s(0), None, s(1), None]);
    }

    #[test]
    fn distinct_achievable_reports_all_matched() {
        let market = Market::example1();
        let lottery = Lottery::identity(6);
        let rols: Vec<Rol> = (0..6).map(|i| Rol::single(SchoolId(i / 2))).collect();
        let m = run_da(&market, &rols, &lottery).unwrap();
        assert_eq!(m.unmatched(), 0);
        for i in 0..6 {
            assert_eq!(m.assignment(StudentId(i)), Some(SchoolId(i / 2)));
        }
    }

    #[test]
    fn everyone_reporting_top_school() {
        let market = Market::example1();
        let rols = vec![Rol::single(SchoolId(0)); 6];
        let m = run_da(
            &market,
            &rols,
            &Lottery::from_ranks(vec![4, 2, 6, 1, 3, 5]).unwrap(),
        )
        .unwrap();
        assert_eq!(m.count(SchoolId(0)), 2);
        assert_eq!(m.unmatched(), 4);
        assert_eq!(m.vacancies(&market), vec![0, 2, 2]);
        assert_eq!(m.assigned_to(SchoolId(0)), vec![StudentId(1), StudentId(3)]);
    }

    #[test]
    fn payoffs() {
        let market = Market::example1();
        let types = market.type_space().finite().unwrap();
        let v = types[0].utilities.clone();
        let v2 = types[1].utilities.clone();
        let m = Matching::from_assignments(vec![Some(SchoolId(0)), None, Some(SchoolId(1))]);
        assert_eq!(payoff(&m, &[v.clone(), v, v2]), vec![90, 0, 60]);
    }

    #[test]
    fn rol_validation() {
        assert!(Rol::new(vec![]).is_err());
        assert!(Rol::new(vec![SchoolId(0), SchoolId(0)]).is_err());
        let market = Market::example1();
        let long = Rol::new(vec![SchoolId(0), SchoolId(1)]).unwrap();
        assert!(long.validate_for(&market).is_err());
        assert_eq!(Rol::all(3, 1).len(), 3);
        assert_eq!(Rol::all(4, 2).len(), 4 + 12);
        assert_eq!(Rol::parse("s2", &market).unwrap(), Rol::single(SchoolId(1)));
        assert!(Rol::parse("s9", &market).is_err());
    }

    #[test]
    fn market_validation() {
        let base = Market::example1();
        // Neighborhood as large as capacity.
        let nb = vec![Some(SchoolId(0)), Some(SchoolId(0)), None, None, None, None];
        assert!(base.clone().with_neighborhoods(nb).is_err());
        assert!(base.clone().with_neighborhoods(vec![None; 5]).is_err());
        assert!(base.clone().with_rol_limit(4).is_err());
        let bad_types = TypeSpace::Finite(vec![UtilityType {
            label: "flat".into(),
            utilities: Utilities(vec![50, 50, 20]),
            probability: ratio(1, 1),
        }]);
        assert!(Market::new(6, vec![2, 2, 2], 1, bad_types).is_err());
        let half = TypeSpace::Finite(vec![UtilityType {
            label: "v".into(),
            utilities: Utilities(vec![50, 40, 20]),
            probability: ratio(1, 2),
        }]);
        assert!(Market::new(6, vec![2, 2, 2], 1, half).is_err());
        assert!(Market::robustness(2).is_ok());
        assert!(Market::replicated_example2(10)
            .unwrap()
            .check_exact_capacity()
            .is_ok());
    }

    #[test]
    fn lottery_roundtrips() {
        let l = Lottery::from_ranks(vec![3, 1, 2]).unwrap();
        assert_eq!(l.order(), vec![StudentId(1), StudentId(2), StudentId(0)]);
        assert_eq!(Lottery::from_order(&l.order()).unwrap(), l);
        assert_eq!(l.student_at(3), Some(StudentId(0)));
        assert!(Lottery::from_ranks(vec![1, 1, 2]).is_err());
        assert_eq!(Lottery::all(4).count(), 24);
    }
}
