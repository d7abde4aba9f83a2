use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;

use super::log::DecisionLog;
use super::replay::group_lottery;
use crate::error::Result;
use crate::info::{observe, Policy, Treatment};
use crate::market::{StudentId, Utilities};
use crate::strategy::{equilibrium_choice, TypeClass};

/// Rows left out of every AAD denominator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Exclusions {
    /// Drop students without a neighborhood school holding this rank.
    pub no_neighborhood_rank: Option<u32>,
    /// Keep only rounds at or after this one.
    pub from_round: Option<u32>,
}

impl Exclusions {
    /// The robustness check that drops no-neighborhood students with
    /// lottery number 5.
    pub fn rank5() -> Self {
        Exclusions {
            no_neighborhood_rank: Some(5),
            from_round: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AadCell {
    /// "all", "others" or "<school>-neighbor".
    pub role: String,
    /// "all", a type label or "lottery <r>".
    pub key: String,
    pub deviations: u64,
    pub total: u64,
}

impl AadCell {
    pub fn rate(&self) -> Option<BigRational> {
        (self.total > 0)
            .then(|| BigRational::new(BigInt::from(self.deviations), BigInt::from(self.total)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AadReport {
    pub treatment: Treatment,
    pub overall: AadCell,
    /// Role by type (Cover) or role by own lottery number (otherwise).
    pub cells: Vec<AadCell>,
    /// Data rows (from 1) whose observation cannot arise in the treatment.
    pub flagged: Vec<usize>,
    pub excluded: u64,
}

impl AadReport {
    pub fn cell(&self, role: &str, key: &str) -> Option<&AadCell> {
        self.cells.iter().find(|c| c.role == role && c.key == key)
    }
}

/// Frequency of lists that differ from the treatment's prescription.
pub fn compute_aad(
    log: &DecisionLog,
    treatment: Treatment,
    exclusions: &Exclusions,
) -> Result<AadReport> {
    let market = treatment.market();
    let policy = treatment.policy();
    let mut cells: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    let mut overall = (0u64, 0u64);
    let mut flagged = Vec::new();
    let mut excluded = 0u64;
    let types = market
        .type_space()
        .finite()
        .expect("experiment types are finite");

    for (key, indices) in log.group_indices() {
        if log.schools != market.schools() || indices.len() != market.students() {
            flagged.extend(indices.iter().map(|k| k + 1));
            continue;
        }
        let (lottery, by_student) = group_lottery(log, key, &indices, &market, false)?;
        for (i, &k) in by_student.iter().enumerate() {
            let row = &log.rows[k];
            let student = StudentId(i);
            let home = market
                .neighborhood_of(student)
                .map(|s| market.school_label(s));
            let utilities = Utilities(row.utilities.clone());
            let known_type = types
                .iter()
                .any(|t| t.utilities == utilities && t.label == row.type_label);
            if row.neighborhood.as_deref() != home || !known_type || row.rol.is_empty() {
                flagged.push(k + 1);
                continue;
            }
            if exclusions.from_round.is_some_and(|r| row.round < r)
                || (home.is_none() && exclusions.no_neighborhood_rank == Some(row.lottery_rank))
            {
                excluded += 1;
                continue;
            }
            let info = observe(policy, &market, &lottery, student, &utilities)?;
            let prescribed = equilibrium_choice(treatment, &market, &info)?;
            let deviated = row.rol.len() != 1 || row.rol[0] != market.school_label(prescribed);
            let role = match home {
                Some(l) => format!("{l}-neighbor"),
                None if treatment.has_neighborhoods() => "others".into(),
                None => "all".into(),
            };
            let cell_key = match policy {
                Policy::Cover => match TypeClass::of(&market, &info)? {
                    TypeClass::V => "v".to_string(),
                    TypeClass::VPrime => "v'".to_string(),
                },
                _ => format!("lottery {}", row.lottery_rank),
            };
            let c = cells.entry((role, cell_key)).or_default();
            c.0 += deviated as u64;
            c.1 += 1;
            overall.0 += deviated as u64;
            overall.1 += 1;
        }
    }
    flagged.sort_unstable();
    Ok(AadReport {
        treatment,
        overall: AadCell {
            role: "all".into(),
            key: "all".into(),
            deviations: overall.0,
            total: overall.1,
        },
        cells: cells
            .into_iter()
            .map(|((role, key), (deviations, total))| AadCell {
                role,
                key,
                deviations,
                total,
            })
            .collect(),
        flagged,
        excluded,
    })
}
