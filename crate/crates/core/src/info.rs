//! Lottery disclosure policies and what each student observes before
//! submitting a list.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Lottery, Market, SchoolId, StudentId, Utilities};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Policy {
    /// Nobody learns anything about the lottery before submitting.
    Cover,
    /// Each student privately learns their own rank.
    Reveal,
    /// Own rank plus, for every neighborhood, how many of its students hold
    /// each rank or better.
    RevealMore,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Cover, Policy::Reveal, Policy::RevealMore];
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Policy::Cover => "Cover",
            Policy::Reveal => "Reveal",
            Policy::RevealMore => "RevealMore",
        };
        f.write_str(s)
    }
}

impl TryFrom<String> for Policy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Policy> for String {
    fn from(p: Policy) -> String {
        p.to_string()
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cover" => Ok(Policy::Cover),
            "reveal" => Ok(Policy::Reveal),
            "revealmore" | "reveal-more" | "reveal_more" => Ok(Policy::RevealMore),
            _ => Err(Error::invalid(format!("unknown policy {s:?}"))),
        }
    }
}

/// Cumulative neighborhood counts for one school: `cumulative[x - 1]` is the
/// number of its neighborhood students with rank `x` or better.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NeighborhoodCounts {
    pub school: SchoolId,
    pub cumulative: Vec<u32>,
}

impl NeighborhoodCounts {
    /// Count at rank `x`; `x = 0` gives 0.
    pub fn at(&self, x: u32) -> u32 {
        if x == 0 {
            0
        } else {
            self.cumulative[x as usize - 1]
        }
    }

    pub fn total(&self) -> u32 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    /// Ranks held by the neighborhood's students, best first.
    pub fn ranks(&self) -> Vec<u32> {
        let mut prev = 0;
        let mut ranks = Vec::new();
        for (k, &c) in self.cumulative.iter().enumerate() {
            for _ in prev..c {
                ranks.push(k as u32 + 1);
            }
            prev = c;
        }
        ranks
    }
}

/// Everything one student knows when choosing a list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InfoSet {
    pub own_type: Utilities,
    pub own_role: Option<SchoolId>,
    pub own_rank: Option<u32>,
    pub neighborhood_stats: Option<Vec<NeighborhoodCounts>>,
}

impl InfoSet {
    pub fn counts(&self, school: SchoolId) -> Option<&NeighborhoodCounts> {
        self.neighborhood_stats
            .as_ref()?
            .iter()
            .find(|c| c.school == school)
    }

    /// Ranks of the school's neighborhood students, when disclosed.
    pub fn neighborhood_ranks(&self, school: SchoolId) -> Option<Vec<u32>> {
        self.counts(school).map(NeighborhoodCounts::ranks)
    }

    /// True when every field disclosed here is also disclosed, with the same
    /// value, in `finer`.
    pub fn is_coarsening_of(&self, finer: &InfoSet) -> bool {
        self.own_type == finer.own_type
            && self.own_role == finer.own_role
            && (self.own_rank.is_none() || self.own_rank == finer.own_rank)
            && (self.neighborhood_stats.is_none()
                || self.neighborhood_stats == finer.neighborhood_stats)
    }
}

/// The five experimental treatments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Treatment {
    NoNsCover,
    NoNsReveal,
    NsCover,
    NsReveal,
    NsRevealMore,
}

impl Treatment {
    pub const ALL: [Treatment; 5] = [
        Treatment::NoNsCover,
        Treatment::NoNsReveal,
        Treatment::NsCover,
        Treatment::NsReveal,
        Treatment::NsRevealMore,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Treatment::NoNsCover => "NoNS_Cover",
            Treatment::NoNsReveal => "NoNS_Reveal",
            Treatment::NsCover => "NS_Cover",
            Treatment::NsReveal => "NS_Reveal",
            Treatment::NsRevealMore => "NS_RevealMore",
        }
    }

    pub fn policy(self) -> Policy {
        match self {
            Treatment::NoNsCover | Treatment::NsCover => Policy::Cover,
            Treatment::NoNsReveal | Treatment::NsReveal => Policy::Reveal,
            Treatment::NsRevealMore => Policy::RevealMore,
        }
    }

    pub fn has_neighborhoods(self) -> bool {
        !matches!(self, Treatment::NoNsCover | Treatment::NoNsReveal)
    }

    /// The six-student market the treatment is played in.
    pub fn market(self) -> Market {
        if self.has_neighborhoods() {
            Market::example2()
        } else {
            Market::example1()
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl TryFrom<String> for Treatment {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Treatment> for String {
    fn from(t: Treatment) -> String {
        t.label().to_string()
    }
}

impl FromStr for Treatment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Treatment::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown treatment {s:?}")))
    }
}

/// `|{i in I_s : rank(i) <= x}|`.
pub fn neighborhood_counts(
    market: &Market,
    lottery: &Lottery,
    school: SchoolId,
    x: u32,
) -> Result<u32> {
    if school.0 >= market.schools() || market.neighborhood_size(school) == 0 {
        return Err(Error::invalid(format!(
            "school index {} has no neighborhood",
            school.0
        )));
    }
    if x == 0 || x as usize > market.students() {
        return Err(Error::invalid(format!(
            "rank {x} outside 1..={}",
            market.students()
        )));
    }
    if lottery.len() != market.students() {
        return Err(Error::invalid("lottery does not match market size"));
    }
    Ok(market
        .neighborhood(school)
        .into_iter()
        .filter(|&i| lottery.rank(i) <= x)
        .count() as u32)
}

fn cumulative_counts(market: &Market, lottery: &Lottery, school: SchoolId) -> NeighborhoodCounts {
    let mut at_rank = vec![0u32; market.students()];
    for i in market.neighborhood(school) {
        at_rank[lottery.rank(i) as usize - 1] += 1;
    }
    let mut running = 0;
    let cumulative = at_rank
        .into_iter()
        .map(|c| {
            running += c;
            running
        })
        .collect();
    NeighborhoodCounts { school, cumulative }
}

/// What `student` with utilities `own_type` sees under `policy`.
pub fn observe(
    policy: Policy,
    market: &Market,
    lottery: &Lottery,
    student: StudentId,
    own_type: &Utilities,
) -> Result<InfoSet> {
    market.check_student(student)?;
    if lottery.len() != market.students() {
        return Err(Error::invalid("lottery does not match market size"));
    }
    Ok(observe_unchecked(
        policy, market, lottery, student, own_type,
    ))
}

pub(crate) fn observe_unchecked(
    policy: Policy,
    market: &Market,
    lottery: &Lottery,
    student: StudentId,
    own_type: &Utilities,
) -> InfoSet {
    let own_rank = match policy {
        Policy::Cover => None,
        Policy::Reveal | Policy::RevealMore => Some(lottery.rank(student)),
    };
    let neighborhood_stats = match policy {
        Policy::RevealMore => Some(
            market
                .school_ids()
                .filter(|&s| market.neighborhood_size(s) > 0)
                .map(|s| cumulative_counts(market, lottery, s))
                .collect(),
        ),
        _ => None,
    };
    InfoSet {
        own_type: own_type.clone(),
        own_role: market.neighborhood_of(student),
        own_rank,
        neighborhood_stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instructions_lottery() -> Lottery {
        let order: Vec<StudentId> = [3, 6, 4, 5, 2, 1]
            .iter()
            .map(|&x| StudentId(x - 1))
            .collect();
        Lottery::from_order(&order).unwrap()
    }

    fn v() -> Utilities {
        Utilities(vec![90, 40, 20])
    }

    #[test]
    fn counts_for_late_neighbor() {
        let market = Market::example2();
        let lottery = instructions_lottery();
        for x in 1..=5 {
            assert_eq!(
                neighborhood_counts(&market, &lottery, SchoolId(0), x).unwrap(),
                0
            );
        }
        assert_eq!(
            neighborhood_counts(&market, &lottery, SchoolId(0), 6).unwrap(),
            1
        );
        // Student 3 holds rank 1.
        assert_eq!(
            neighborhood_counts(&market, &lottery, SchoolId(2), 1).unwrap(),
            1
        );
    }

    #[test]
    fn counts_reject_schools_without_neighborhood() {
        let market = Market::example1();
        let err = neighborhood_counts(&market, &Lottery::identity(6), SchoolId(0), 3);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        let market = Market::example2();
        assert!(neighborhood_counts(&market, &Lottery::identity(6), SchoolId(0), 7).is_err());
    }

    #[test]
    fn fields_per_policy() {
        let market = Market::example2();
        let lottery = Lottery::from_ranks(vec![2, 3, 5, 4, 1, 6]).unwrap();
        let cover = observe(Policy::Cover, &market, &lottery, StudentId(3), &v()).unwrap();
        assert_eq!(cover.own_rank, None);
        assert_eq!(cover.neighborhood_stats, None);
        assert_eq!(cover.own_role, None);
        let reveal = observe(Policy::Reveal, &market, &lottery, StudentId(3), &v()).unwrap();
        assert_eq!(reveal.own_rank, Some(4));
        assert_eq!(reveal.neighborhood_stats, None);
        let more = observe(Policy::RevealMore, &market, &lottery, StudentId(1), &v()).unwrap();
        assert_eq!(more.own_role, Some(SchoolId(1)));
        assert_eq!(more.neighborhood_ranks(SchoolId(0)), Some(vec![2]));
        assert_eq!(more.neighborhood_ranks(SchoolId(1)), Some(vec![3]));
        assert_eq!(more.neighborhood_ranks(SchoolId(2)), Some(vec![5]));
    }

    #[test]
    fn revealmore_instructions_table() {
        // Neighbors of A, B, C hold ranks 6, 5, 1.
        let market = Market::example2();
        let info = observe(
            Policy::RevealMore,
            &market,
            &instructions_lottery(),
            StudentId(3),
            &v(),
        )
        .unwrap();
        let ranks: Vec<_> = (0..3)
            .map(|s| info.neighborhood_ranks(SchoolId(s)).unwrap()[0])
            .collect();
        assert_eq!(ranks, vec![6, 5, 1]);
    }

    #[test]
    fn treatment_labels_roundtrip() {
        for t in Treatment::ALL {
            assert_eq!(t.label().parse::<Treatment>().unwrap(), t);
        }
        assert!("NS_Other".parse::<Treatment>().is_err());
        assert_eq!("reveal-more".parse::<Policy>().unwrap(), Policy::RevealMore);
    }
}
