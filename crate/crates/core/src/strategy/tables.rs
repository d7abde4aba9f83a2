use super::{single, PureStrategy, StrategyProfile};
use crate::error::{Error, Result};
use crate::info::{InfoSet, Treatment};
use crate::market::{Market, SchoolId};

/// The two utility types of the six-student experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeClass {
    V,
    VPrime,
}

impl TypeClass {
    pub fn of(market: &Market, info: &InfoSet) -> Result<TypeClass> {
        match market.type_space().index_of(&info.own_type) {
            Some(0) => Ok(TypeClass::V),
            Some(1) => Ok(TypeClass::VPrime),
            _ => Err(Error::invalid(format!(
                "utilities {:?} are not one of the two experiment types",
                info.own_type.0
            ))),
        }
    }
}

const S1: SchoolId = SchoolId(0);
const S2: SchoolId = SchoolId(1);
const S3: SchoolId = SchoolId(2);

fn rank_of(info: &InfoSet) -> Result<u32> {
    info.own_rank
        .ok_or_else(|| Error::invalid("this treatment discloses the own rank"))
}

fn neighbor_rank(info: &InfoSet, school: SchoolId) -> Result<u32> {
    info.neighborhood_ranks(school)
        .and_then(|r| r.first().copied())
        .ok_or_else(|| Error::invalid("neighborhood ranks missing"))
}

fn check_market(treatment: Treatment, market: &Market) -> Result<()> {
    let expected = treatment.market();
    if market.capacities() != expected.capacities()
        || market.neighborhoods() != expected.neighborhoods()
        || market.type_space() != expected.type_space()
    {
        return Err(Error::UnsupportedModel(format!(
            "the {treatment} prescription is defined for the six-student experiment market"
        )));
    }
    Ok(())
}

/// The single school prescribed in equilibrium for a student of the
/// six-student experiment.
pub fn equilibrium_choice(
    treatment: Treatment,
    market: &Market,
    info: &InfoSet,
) -> Result<SchoolId> {
    check_market(treatment, market)?;
    prescribe(treatment, market, info)
}

fn prescribe(treatment: Treatment, market: &Market, info: &InfoSet) -> Result<SchoolId> {
    let role = info.own_role;
    Ok(match treatment {
        Treatment::NoNsCover | Treatment::NsCover => match role {
            Some(S1) => S1,
            Some(S2) => S2,
            _ => match TypeClass::of(market, info)? {
                TypeClass::V => S1,
                TypeClass::VPrime => S2,
            },
        },
        Treatment::NoNsReveal => match rank_of(info)? {
            1 | 2 => S1,
            3 | 4 => S2,
            _ => S3,
        },
        Treatment::NsReveal => {
            let r = rank_of(info)?;
            match role {
                Some(S1) => S1,
                Some(S2) if r == 1 => S1,
                Some(S2) => S2,
                Some(_) => match r {
                    1 => S1,
                    2 | 3 => S2,
                    _ => S3,
                },
                None => match r {
                    1 | 5 => S1,
                    2 | 3 => S2,
                    _ => S3,
                },
            }
        }
        Treatment::NsRevealMore => {
            let r = rank_of(info)?;
            let a = neighbor_rank(info, S1)?;
            let b = neighbor_rank(info, S2)?;
            match role {
                Some(S1) => S1,
                Some(S2) => {
                    if r == 1 || (r == 2 && a == 1) {
                        S1
                    } else {
                        S2
                    }
                }
                _ => match r {
                    1 => S1,
                    2 if a == 1 => S1,
                    2 => S2,
                    3 if a <= 2 || b <= 2 => S2,
                    4 if a <= 3 && b <= 3 => S2,
                    _ => S3,
                },
            }
        }
    })
}

/// Row label of the prescription table used by [`equilibrium_choice`]:
/// the student's role, plus type or own rank where the rule depends on it.
pub fn prescription_row(treatment: Treatment, market: &Market, info: &InfoSet) -> Result<String> {
    check_market(treatment, market)?;
    let role = match info.own_role {
        Some(s) => format!("{}-neighbor", market.school_label(s)),
        None if treatment.has_neighborhoods() => "others".to_string(),
        None => "all".to_string(),
    };
    Ok(match treatment {
        Treatment::NoNsCover | Treatment::NsCover => {
            let t = match TypeClass::of(market, info)? {
                TypeClass::V => "v",
                TypeClass::VPrime => "v'",
            };
            format!("{role} type {t}")
        }
        _ => format!("{role} lottery {}", rank_of(info)?),
    })
}

/// The prescription as a symmetric profile.
pub fn equilibrium_table(treatment: Treatment) -> StrategyProfile {
    let market = treatment.market();
    let students = market.students();
    let strategy = PureStrategy::new(format!("{treatment} equilibrium"), move |info: &InfoSet| {
        single(prescribe(treatment, &market, info)?)
    });
    StrategyProfile::symmetric(treatment.policy(), students, strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::observe;
    use crate::market::{Lottery, StudentId};
    use crate::strategy::{achievable_school_from_info, lemma1_strategy};

    #[test]
    fn total_over_every_observation() {
        for t in Treatment::ALL {
            let market = t.market();
            let types = market.type_space().finite().unwrap();
            for lottery in Lottery::all(6) {
                for i in market.student_ids() {
                    for ty in types {
                        let info =
                            observe(t.policy(), &market, &lottery, i, &ty.utilities).unwrap();
                        equilibrium_choice(t, &market, &info).unwrap();
                        prescription_row(t, &market, &info).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn revealmore_rows_agree_with_cutoffs() {
        let t = Treatment::NsRevealMore;
        let market = t.market();
        let v = &market.type_space().finite().unwrap()[0].utilities;
        for lottery in Lottery::all(6) {
            for i in market.student_ids() {
                let info = observe(t.policy(), &market, &lottery, i, v).unwrap();
                assert_eq!(
                    equilibrium_choice(t, &market, &info).unwrap(),
                    achievable_school_from_info(&market, &info).unwrap(),
                    "lottery {:?} student {}",
                    lottery.ranks(),
                    i.0
                );
            }
        }
    }

    #[test]
    fn no_neighborhood_reveal_is_rank_bands() {
        let t = Treatment::NoNsReveal;
        let market = t.market();
        let v = &market.type_space().finite().unwrap()[1].utilities;
        let lottery = Lottery::identity(6);
        for i in market.student_ids() {
            let info = observe(t.policy(), &market, &lottery, i, v).unwrap();
            assert_eq!(
                equilibrium_choice(t, &market, &info).unwrap(),
                lemma1_strategy(&market, info.own_rank.unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn non_monotone_row() {
        let t = Treatment::NsReveal;
        let market = t.market();
        let v = &market.type_space().finite().unwrap()[0].utilities;
        let lottery = Lottery::from_ranks(vec![1, 2, 3, 5, 4, 6]).unwrap();
        let info = observe(t.policy(), &market, &lottery, StudentId(3), v).unwrap();
        assert_eq!(equilibrium_choice(t, &market, &info).unwrap(), S1);
        assert_eq!(
            prescription_row(t, &market, &info).unwrap(),
            "others lottery 5"
        );
    }

    #[test]
    fn rejects_other_markets() {
        let market = Market::robustness(2).unwrap();
        let info = InfoSet {
            own_type: crate::market::Utilities(vec![90, 70, 50, 30]),
            own_role: None,
            own_rank: Some(1),
            neighborhood_stats: None,
        };
        assert!(matches!(
            equilibrium_choice(Treatment::NsReveal, &market, &info),
            Err(Error::UnsupportedModel(_))
        ));
    }
}
