use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rayon::prelude::*;

use super::log::{DecisionLog, LogRow};
use crate::error::{Error, Result};
use crate::market::{run_da, Lottery, Market, Rol, SchoolId, StudentId};
use crate::stats::{GroupStats, Mode, OutcomeStats, Role, Value};

/// Row index, recomputed assignment and the group's vacancies.
type Replayed = Vec<(usize, Option<SchoolId>, Vec<u32>)>;

/// A recorded outcome that DA does not reproduce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    /// Data row number, counting from 1.
    pub row: usize,
    pub recorded: (Option<String>, u32),
    pub recomputed: (Option<String>, u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub groups: usize,
    pub disagreements: Vec<Disagreement>,
    /// Recomputed assignment for every row of the log, in log order.
    pub assignments: Vec<Option<SchoolId>>,
    /// Realized frequencies and mean payoffs.
    pub stats: OutcomeStats,
}

/// The market a group was played in. Six-student, three-school groups use
/// the main experiment market and sixteen-student, four-school groups the
/// robustness market; neighborhoods come from the rows and the list limit
/// from the longest submitted list.
pub fn infer_market(log: &DecisionLog) -> Result<Option<Market>> {
    let groups = log.group_indices();
    let Some((_, first)) = groups.first() else {
        return Ok(None);
    };
    let n = first.len();
    let longest = log
        .rows
        .iter()
        .map(|r| r.rol.len())
        .max()
        .unwrap_or(1)
        .max(1);
    let base = match (n, log.schools) {
        (6, 3) => Market::example1(),
        (16, 4) => {
            let r = Market::robustness(1)?;
            Market::new(16, r.capacities().to_vec(), 1, r.type_space().clone())?
                .with_labels(r.school_labels().to_vec())?
        }
        _ => {
            return Err(Error::invalid(format!(
                "cannot infer a market for {n} students and {} schools; pass one explicitly",
                log.schools
            )))
        }
    }
    .with_rol_limit(longest.min(log.schools))?;
    let mut hoods = vec![None; n];
    for &k in first {
        let r = &log.rows[k];
        let i = student_index(r, n, k)?;
        hoods[i] = match &r.neighborhood {
            None => None,
            Some(l) => Some(lookup(&base, l, k)?),
        };
    }
    if hoods.iter().all(Option::is_none) {
        return Ok(Some(base));
    }
    Ok(Some(base.with_neighborhoods(hoods)?))
}

fn lookup(market: &Market, label: &str, row: usize) -> Result<SchoolId> {
    market.school_by_label(label).ok_or_else(|| Error::Schema {
        row: row + 1,
        message: format!("unknown school {label:?}"),
    })
}

fn student_index(r: &LogRow, n: usize, row: usize) -> Result<usize> {
    if r.student_id == 0 || r.student_id as usize > n {
        return Err(Error::Schema {
            row: row + 1,
            message: format!("student_id {} outside 1..={n}", r.student_id),
        });
    }
    Ok(r.student_id as usize - 1)
}

/// Lottery of one group-round, checking that ids and ranks are bijections.
pub(crate) fn group_lottery(
    log: &DecisionLog,
    key: (u32, u32, u32),
    indices: &[usize],
    market: &Market,
    check_neighborhoods: bool,
) -> Result<(Lottery, Vec<usize>)> {
    let n = market.students();
    if indices.len() != n {
        return Err(Error::Schema {
            row: indices[0] + 1,
            message: format!("group has {} rows, market has {n} students", indices.len()),
        });
    }
    let mut by_student = vec![usize::MAX; n];
    let mut ranks = vec![0u32; n];
    for &k in indices {
        let r = &log.rows[k];
        let i = student_index(r, n, k)?;
        if by_student[i] != usize::MAX {
            return Err(Error::Schema {
                row: k + 1,
                message: format!("student_id {} repeated in the group", r.student_id),
            });
        }
        by_student[i] = k;
        ranks[i] = r.lottery_rank;
        let expected = market
            .neighborhood_of(StudentId(i))
            .map(|s| market.school_label(s));
        if check_neighborhoods && r.neighborhood.as_deref() != expected {
            return Err(Error::Schema {
                row: k + 1,
                message: "neighborhood differs from the market".into(),
            });
        }
    }
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, &r) in ranks.iter().enumerate() {
        if r == 0 || r as usize > n {
            return Err(Error::Schema {
                row: by_student[i] + 1,
                message: format!("lottery_rank {r} outside 1..={n}"),
            });
        }
        holders[r as usize].push(by_student[i] + 1);
    }
    if let Some(rows) = holders.into_iter().find(|h| h.len() > 1) {
        return Err(Error::LotteryCollision {
            session: key.0,
            round: key.1,
            group: key.2,
            rows,
        });
    }
    Ok((Lottery::from_ranks(ranks)?, by_student))
}

fn parse_rol(market: &Market, r: &LogRow, row: usize) -> Result<Rol> {
    if r.rol.is_empty() {
        return Err(Error::Schema {
            row: row + 1,
            message: "no list recorded".into(),
        });
    }
    let schools = r
        .rol
        .iter()
        .map(|l| lookup(market, l, row))
        .collect::<Result<Vec<_>>>()?;
    let rol = Rol::new(schools).map_err(|e| Error::Schema {
        row: row + 1,
        message: e.to_string(),
    })?;
    rol.validate_for(market).map_err(|e| Error::Schema {
        row: row + 1,
        message: e.to_string(),
    })?;
    Ok(rol)
}

/// Replays a log in the inferred market.
pub fn replay(log: &DecisionLog) -> Result<ReplayReport> {
    match infer_market(log)? {
        Some(market) => replay_in(log, &market),
        None => Ok(empty_report()),
    }
}

fn empty_report() -> ReplayReport {
    ReplayReport {
        groups: 0,
        disagreements: Vec::new(),
        assignments: Vec::new(),
        stats: OutcomeStats {
            mode: Mode::Exact,
            groups: Vec::new(),
            vacancies: Vec::new(),
        },
    }
}

/// Re-runs DA for every group-round of `log` in `market`, compares with
/// any recorded outcomes and tallies realized statistics.
pub fn replay_in(log: &DecisionLog, market: &Market) -> Result<ReplayReport> {
    if log.is_empty() {
        return Ok(empty_report());
    }
    if log.schools != market.schools() {
        return Err(Error::invalid(
            "log and market disagree on the number of schools",
        ));
    }
    let groups = log.group_indices();
    let results = groups
        .par_iter()
        .map(|(key, indices)| -> Result<Replayed> {
            let (lottery, by_student) = group_lottery(log, *key, indices, market, true)?;
            let rols = by_student
                .iter()
                .map(|&k| parse_rol(market, &log.rows[k], k))
                .collect::<Result<Vec<_>>>()?;
            let matching = run_da(market, &rols, &lottery)?;
            Ok(by_student
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    (
                        k,
                        matching.assignment(StudentId(i)),
                        matching.vacancies(market),
                    )
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut assignments = vec![None; log.rows.len()];
    let mut vacancy_sums = vec![0u64; market.schools()];
    for group in &results {
        for (s, v) in group[0].2.iter().enumerate() {
            vacancy_sums[s] += *v as u64;
        }
        for (k, a, _) in group {
            assignments[*k] = *a;
        }
    }
    let mut disagreements = Vec::new();
    for (k, r) in log.rows.iter().enumerate() {
        let a = assignments[k];
        let recomputed = (
            a.map(|s| market.school_label(s).to_string()),
            a.map_or(0, |s| r.utilities[s.0]),
        );
        if let Some(recorded) = &r.outcome {
            if *recorded != recomputed {
                disagreements.push(Disagreement {
                    row: k + 1,
                    recorded: recorded.clone(),
                    recomputed,
                });
            }
        }
    }
    let stats = realized_stats(log, market, &assignments, &vacancy_sums, groups.len());
    Ok(ReplayReport {
        groups: groups.len(),
        disagreements,
        assignments,
        stats,
    })
}

fn realized_stats(
    log: &DecisionLog,
    market: &Market,
    assignments: &[Option<SchoolId>],
    vacancy_sums: &[u64],
    groups: usize,
) -> OutcomeStats {
    let m = market.schools();
    let roles: BTreeSet<Role> = log
        .rows
        .iter()
        .map(|r| Role::of(market, StudentId(r.student_id as usize - 1)))
        .collect();
    let labels: BTreeSet<String> = log.rows.iter().map(|r| r.type_label.clone()).collect();
    let mut keys: Vec<(Option<Role>, Option<String>)> = vec![(None, None)];
    keys.extend(labels.iter().map(|l| (None, Some(l.clone()))));
    for &r in &roles {
        keys.push((Some(r), None));
        keys.extend(labels.iter().map(|l| (Some(r), Some(l.clone()))));
    }
    let frac = |a: u64, b: u64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let mut out = Vec::new();
    for (role, label) in keys {
        let mut count = 0u64;
        let mut payoff = 0u64;
        let mut hits = vec![0u64; m + 1];
        for (k, r) in log.rows.iter().enumerate() {
            let rr = Role::of(market, StudentId(r.student_id as usize - 1));
            if role.is_some_and(|x| x != rr) || label.as_ref().is_some_and(|l| *l != r.type_label) {
                continue;
            }
            count += 1;
            let a = assignments[k];
            payoff += a.map_or(0, |s| r.utilities[s.0] as u64);
            hits[a.map_or(m, |s| s.0)] += 1;
        }
        if count == 0 {
            continue;
        }
        out.push(GroupStats {
            role,
            type_label: label,
            match_rate: Value::Exact(BigRational::one() - frac(hits[m], count)),
            payoff: Value::Exact(frac(payoff, count)),
            assignment: hits.iter().map(|&h| Value::Exact(frac(h, count))).collect(),
        });
    }
    let vacancies = vacancy_sums
        .iter()
        .map(|&v| {
            Value::Exact(if groups == 0 {
                BigRational::zero()
            } else {
                frac(v, groups as u64)
            })
        })
        .collect();
    OutcomeStats {
        mode: Mode::Exact,
        groups: out,
        vacancies,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // The worked example from the participant instructions: lottery order
    // 3, 6, 4, 5, 2, 1 and lists A, B, A, A, B, A with students 1-3 living
    // near A, B and C.
    const WORKED: &str =
        "session,round,group,student_id,neighborhood_school,type_label,u1,u2,u3,lottery_rank,rol\n\
1,1,1,1,s1,v,90,40,20,6,s1\n\
1,1,1,2,s2,v,90,40,20,5,s2\n\
1,1,1,3,s3,v,90,40,20,1,s1\n\
1,1,1,4,,v,90,40,20,3,s1\n\
1,1,1,5,,v,90,40,20,4,s2\n\
1,1,1,6,,v,90,40,20,2,s1\n";

    #[test]
    fn worked_example_assignments() {
        let log = DecisionLog::from_csv_str(WORKED).unwrap();
        let report = replay(&log).unwrap();
        let labels: Vec<Option<SchoolId>> = report.assignments.clone();
        assert_eq!(
            labels,
            vec![
                Some(SchoolId(0)),
                Some(SchoolId(1)),
                Some(SchoolId(0)),
                None,
                Some(SchoolId(1)),
                None
            ]
        );
        assert!(report.disagreements.is_empty());
        assert_eq!(
            report.stats.aggregate().match_rate.exact().unwrap(),
            &BigRational::new(2.into(), 3.into())
        );
    }

    #[test]
    fn collisions_name_rows() {
        let log = DecisionLog::from_csv_str(&WORKED.replace(",4,s2\n", ",6,s2\n")).unwrap();
        match replay(&log) {
            Err(Error::LotteryCollision { rows, .. }) => assert_eq!(rows, vec![1, 5]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_log_gives_empty_stats() {
        let log = DecisionLog::from_csv_str("").unwrap();
        let report = replay(&log).unwrap();
        assert_eq!(report.groups, 0);
        assert!(report.stats.groups.is_empty());
    }
}
