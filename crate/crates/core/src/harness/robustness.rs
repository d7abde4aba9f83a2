use num::bigint::BigInt;
use num::rational::BigRational;

use super::log::DecisionLog;
use super::replay::{infer_market, replay_in};
use crate::error::{Error, Result};

/// Counts for one lottery bracket. Rates are derived on demand.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BracketCounts {
    /// "1-4", ..., or "all".
    pub label: String,
    pub students: u64,
    pub matched: u64,
    pub payoff_sum: u64,
    /// Students with a neighborhood school.
    pub neighborhood_students: u64,
    /// ... listing it first, second, or anywhere.
    pub home_first: u64,
    pub home_second: u64,
    pub home_listed: u64,
    /// ... assigned to it.
    pub home_assigned: u64,
    /// Neighborhood students whose school lies outside the top `rol_limit`.
    pub bias_students: u64,
    pub bias_first: u64,
    pub bias_second: u64,
    pub bias_listed: u64,
}

fn frac(a: u64, b: u64) -> Option<BigRational> {
    (b > 0).then(|| BigRational::new(BigInt::from(a), BigInt::from(b)))
}

impl BracketCounts {
    pub fn report_rate(&self) -> Option<BigRational> {
        frac(self.home_listed, self.neighborhood_students)
    }

    pub fn report_rate_first(&self) -> Option<BigRational> {
        frac(self.home_first, self.neighborhood_students)
    }

    pub fn report_rate_second(&self) -> Option<BigRational> {
        frac(self.home_second, self.neighborhood_students)
    }

    pub fn bias(&self) -> Option<BigRational> {
        frac(self.bias_listed, self.bias_students)
    }

    pub fn bias_first(&self) -> Option<BigRational> {
        frac(self.bias_first, self.bias_students)
    }

    pub fn bias_second(&self) -> Option<BigRational> {
        frac(self.bias_second, self.bias_students)
    }

    /// Share of neighborhood students assigned to their neighborhood school.
    pub fn segregation(&self) -> Option<BigRational> {
        frac(self.home_assigned, self.neighborhood_students)
    }

    pub fn match_rate(&self) -> Option<BigRational> {
        frac(self.matched, self.students)
    }

    /// Mean realized payoff.
    pub fn efficiency(&self) -> Option<BigRational> {
        frac(self.payoff_sum, self.students)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobustnessReport {
    pub rol_limit: usize,
    pub overall: BracketCounts,
    /// Lottery numbers 1-4, 5-8, 9-12 and 13-16.
    pub brackets: Vec<BracketCounts>,
}

/// Neighborhood-school reporting, bias, segregation and efficiency by
/// lottery bracket for logs of the sixteen-student environment. Outcomes
/// are recomputed by DA. `rol_limit` defaults to the longest list in the
/// log.
pub fn robustness_stats(log: &DecisionLog, rol_limit: Option<usize>) -> Result<RobustnessReport> {
    let brackets: Vec<BracketCounts> = ["1-4", "5-8", "9-12", "13-16"]
        .iter()
        .map(|l| BracketCounts {
            label: l.to_string(),
            ..Default::default()
        })
        .collect();
    let mut report = RobustnessReport {
        rol_limit: rol_limit.unwrap_or(1),
        overall: BracketCounts {
            label: "all".into(),
            ..Default::default()
        },
        brackets,
    };
    if log.is_empty() {
        return Ok(report);
    }
    let shape_ok = log.schools == 4 && log.group_indices().iter().all(|(_, rows)| rows.len() == 16);
    if !shape_ok {
        return Err(Error::invalid(
            "robustness statistics need sixteen-student, four-school groups",
        ));
    }
    let mut market = infer_market(log)?.expect("nonempty log");
    if let Some(l) = rol_limit {
        market = market.with_rol_limit(l)?;
    }
    let limit = market.rol_limit();
    report.rol_limit = limit;
    let replayed = replay_in(log, &market)?;
    for (k, row) in log.rows.iter().enumerate() {
        let bracket = ((row.lottery_rank - 1) / 4) as usize;
        let assigned = replayed.assignments[k];
        let home = row
            .neighborhood
            .as_ref()
            .map(|l| market.school_by_label(l).expect("validated by replay"));
        for c in [&mut report.overall, &mut report.brackets[bracket]] {
            c.students += 1;
            c.matched += assigned.is_some() as u64;
            c.payoff_sum += assigned.map_or(0, |s| row.utilities[s.0] as u64);
            let Some(home) = home else { continue };
            let label = market.school_label(home);
            let pos = row.rol.iter().position(|l| l == label);
            c.neighborhood_students += 1;
            c.home_first += (pos == Some(0)) as u64;
            c.home_second += (pos == Some(1)) as u64;
            c.home_listed += pos.is_some() as u64;
            c.home_assigned += (assigned == Some(home)) as u64;
            if home.0 >= limit {
                c.bias_students += 1;
                c.bias_first += (pos == Some(0)) as u64;
                c.bias_second += (pos == Some(1)) as u64;
                c.bias_listed += pos.is_some() as u64;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{RobustnessConfig, SessionConfig, StrategyChoice};
    use crate::harness::generate::generate_sessions;
    use crate::info::Policy;

    fn log(strategy: StrategyChoice, rol_limit: usize) -> DecisionLog {
        generate_sessions(&SessionConfig {
            treatment: None,
            robustness: Some(RobustnessConfig {
                policy: Policy::Reveal,
                rol_limit,
            }),
            sessions: 1,
            participants: 16,
            group_size: 16,
            rounds: 20,
            seed: 9,
            strategy,
            stats: None,
        })
        .unwrap()
    }

    #[test]
    fn everyone_safe_reports_home() {
        let r = robustness_stats(&log(StrategyChoice::Safe, 1), None).unwrap();
        assert_eq!(r.overall.report_rate(), frac(1, 1));
        assert_eq!(r.overall.neighborhood_students, 6 * 20);
        // With one-school lists, everyone listing home is admitted there.
        assert_eq!(r.overall.segregation(), frac(1, 1));
        assert_eq!(r.overall.bias(), r.overall.report_rate());
    }

    #[test]
    fn truthful_never_reports_home() {
        let r = robustness_stats(&log(StrategyChoice::Truthful, 1), None).unwrap();
        assert_eq!(r.overall.home_listed, 0);
        assert_eq!(r.overall.report_rate(), frac(0, 1));
        let sum: u64 = r.brackets.iter().map(|b| b.students).sum();
        assert_eq!(sum, r.overall.students);
    }

    #[test]
    fn wrong_environment() {
        let main = generate_sessions(&SessionConfig {
            treatment: Some(crate::info::Treatment::NsCover),
            robustness: None,
            sessions: 1,
            participants: 6,
            group_size: 6,
            rounds: 1,
            seed: 1,
            strategy: StrategyChoice::Equilibrium,
            stats: None,
        })
        .unwrap();
        assert!(matches!(
            robustness_stats(&main, None),
            Err(Error::InvalidInput(_))
        ));
    }
}
