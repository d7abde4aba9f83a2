use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{Policy, Treatment};
use crate::market::{Market, SchoolId, TypeSpace, Utilities, UtilityType};
use crate::rational::parse_ratio;

/// How simulated students choose their lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyChoice {
    /// The treatment's equilibrium prescription (main treatments only).
    Equilibrium,
    /// The top schools of the common ranking.
    Truthful,
    /// Neighborhood students keep their own school on the list.
    Safe,
    /// Target the school whose capacity band contains the own rank.
    RankBand,
    /// Worlds only, no decisions.
    None,
}

/// Settings for the sixteen-student, four-school environment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    pub policy: Policy,
    pub rol_limit: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsMode {
    Exact,
    Montecarlo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsConfig {
    pub mode: StatsMode,
    #[serde(default = "default_reps")]
    pub reps: u64,
}

fn default_reps() -> u64 {
    100_000
}

fn default_strategy() -> StrategyChoice {
    StrategyChoice::Equilibrium
}

/// One simulated experiment: sessions of participants split into groups,
/// replaying the same seeded sequence of worlds in every session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    /// Main-experiment treatment; omit when `robustness` is set.
    pub treatment: Option<Treatment>,
    pub robustness: Option<RobustnessConfig>,
    pub sessions: u32,
    pub participants: u32,
    pub group_size: u32,
    pub rounds: u32,
    pub seed: u64,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyChoice,
    pub stats: Option<StatsConfig>,
}

impl SessionConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: SessionConfig =
            toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        SessionConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.treatment.is_some() == self.robustness.is_some() {
            return Err(Error::invalid(
                "set exactly one of `treatment` and `[robustness]`",
            ));
        }
        if self.rounds == 0 || self.sessions == 0 {
            return Err(Error::invalid("rounds and sessions must be at least 1"));
        }
        if self.group_size == 0 || !self.participants.is_multiple_of(self.group_size) {
            return Err(Error::invalid(format!(
                "{} participants do not split into groups of {}",
                self.participants, self.group_size
            )));
        }
        let market = self.market()?;
        if market.students() != self.group_size as usize {
            return Err(Error::invalid(format!(
                "group size {} does not match the {}-student market",
                self.group_size,
                market.students()
            )));
        }
        if self.robustness.is_some() && self.strategy == StrategyChoice::Equilibrium {
            return Err(Error::invalid(
                "no equilibrium prescription exists for the robustness environment",
            ));
        }
        Ok(())
    }

    pub fn groups(&self) -> u32 {
        self.participants / self.group_size
    }

    pub fn policy(&self) -> Policy {
        match (&self.treatment, &self.robustness) {
            (Some(t), _) => t.policy(),
            (None, Some(r)) => r.policy,
            (None, None) => Policy::Cover,
        }
    }

    /// The market each group plays.
    pub fn market(&self) -> Result<Market> {
        match (&self.treatment, &self.robustness) {
            (Some(t), _) => Ok(t.market()),
            (None, Some(r)) => Market::robustness(r.rol_limit),
            (None, None) => Err(Error::invalid("no treatment or environment configured")),
        }
    }
}

/// A utility type in a market file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeConfig {
    pub label: String,
    pub utilities: Vec<u32>,
    /// Fraction such as "2/3" or a decimal.
    pub probability: String,
}

/// Market file schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub students: usize,
    pub capacities: Vec<u32>,
    pub rol_limit: usize,
    pub labels: Option<Vec<String>>,
    /// Per student: the label of their neighborhood school, or "".
    pub neighborhoods: Option<Vec<String>>,
    #[serde(default)]
    pub types: Vec<TypeConfig>,
    /// Inclusive integer ranges per school, used when `types` is empty.
    pub uniform_ranges: Option<Vec<(u32, u32)>>,
}

impl MarketConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("market file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Market> {
        MarketConfig::from_toml(&std::fs::read_to_string(path)?)?.build()
    }

    pub fn build(&self) -> Result<Market> {
        let type_space = match (self.types.is_empty(), &self.uniform_ranges) {
            (false, None) => TypeSpace::Finite(
                self.types
                    .iter()
                    .map(|t| {
                        Ok(UtilityType {
                            label: t.label.clone(),
                            utilities: Utilities(t.utilities.clone()),
                            probability: parse_ratio(&t.probability)?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            (true, Some(ranges)) => TypeSpace::UniformRanges(ranges.clone()),
            _ => {
                return Err(Error::invalid(
                    "market file needs either [[types]] or uniform_ranges",
                ))
            }
        };
        let mut market = Market::new(
            self.students,
            self.capacities.clone(),
            self.rol_limit,
            type_space,
        )?;
        if let Some(labels) = &self.labels {
            market = market.with_labels(labels.clone())?;
        }
        if let Some(hoods) = &self.neighborhoods {
            if hoods.len() != self.students {
                return Err(Error::invalid("one neighborhood entry per student"));
            }
            let parsed = hoods
                .iter()
                .map(|h| {
                    if h.trim().is_empty() {
                        Ok(None)
                    } else {
                        market
                            .school_by_label(h.trim())
                            .map(Some)
                            .ok_or_else(|| Error::invalid(format!("unknown school {h:?}")))
                    }
                })
                .collect::<Result<Vec<Option<SchoolId>>>>()?;
            market = market.with_neighborhoods(parsed)?;
        }
        Ok(market)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAIN: &str = r#"
treatment = "NS_Reveal"
sessions = 4
participants = 12
group_size = 6
rounds = 20
seed = 7
"#;

    #[test]
    fn parses_main_config() {
        let c = SessionConfig::from_toml(MAIN).unwrap();
        assert_eq!(c.treatment, Some(Treatment::NsReveal));
        assert_eq!(c.groups(), 2);
        assert_eq!(c.strategy, StrategyChoice::Equilibrium);
        assert_eq!(SessionConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SessionConfig::from_toml(&MAIN.replace("12", "13")).is_err());
        assert!(SessionConfig::from_toml(&MAIN.replace("rounds = 20", "rounds = 0")).is_err());
        assert!(SessionConfig::from_toml(&MAIN.replace("NS_Reveal", "NS_Other")).is_err());
        let robust = r#"
sessions = 1
participants = 16
group_size = 16
rounds = 2
seed = 1
strategy = "safe"
[robustness]
policy = "Cover"
rol_limit = 2
"#;
        let c = SessionConfig::from_toml(robust).unwrap();
        assert_eq!(c.market().unwrap().students(), 16);
        assert!(SessionConfig::from_toml(&robust.replace("safe", "equilibrium")).is_err());
    }

    #[test]
    fn market_file() {
        let text = r#"
students = 6
capacities = [2, 2, 2]
rol_limit = 1
neighborhoods = ["s1", "s2", "s3", "", "", ""]

[[types]]
label = "v"
utilities = [90, 40, 20]
probability = "2/3"

[[types]]
label = "v'"
utilities = [70, 60, 20]
probability = "1/3"
"#;
        let market = MarketConfig::from_toml(text).unwrap().build().unwrap();
        assert_eq!(market, Market::example2());
    }
}
