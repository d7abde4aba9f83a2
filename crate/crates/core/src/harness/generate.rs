use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{SessionConfig, StrategyChoice};
use super::log::{DecisionLog, LogRow};
use crate::error::{Error, Result};
use crate::info::{observe, InfoSet, Policy};
use crate::market::{run_da, Lottery, Market, Rol, SchoolId, StudentId, Utilities};
use crate::strategy::{equilibrium_table, PureStrategy, StrategyProfile};

/// What is drawn for one group in one round: the lottery and every
/// student's type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub round: u32,
    pub group: u32,
    pub lottery: Lottery,
    /// Type label and utilities per student.
    pub types: Vec<(String, Utilities)>,
}

/// Generator for one (round, group) cell; independent of session and
/// treatment so every session replays the same worlds.
pub fn world_rng(seed: u64, round: u32, group: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((round as u64) << 32) | group as u64);
    rng
}

pub fn draw_world(market: &Market, seed: u64, round: u32, group: u32) -> World {
    let mut rng = world_rng(seed, round, group);
    let lottery = Lottery::random(market.students(), &mut rng);
    let types = (0..market.students())
        .map(|_| market.type_space().sample(&mut rng))
        .collect();
    World {
        round,
        group,
        lottery,
        types,
    }
}

/// The seeded world sequence of a configuration, ordered by round, group.
pub fn world_sequence(config: &SessionConfig) -> Result<Vec<World>> {
    config.validate()?;
    let market = config.market()?;
    Ok((1..=config.rounds)
        .flat_map(|r| (1..=config.groups()).map(move |g| (r, g)))
        .map(|(r, g)| draw_world(&market, config.seed, r, g))
        .collect())
}

fn top(market: &Market, from: usize) -> Result<Rol> {
    let m = market.schools();
    let len = market.rol_limit();
    let start = from.min(m - len);
    Rol::new((start..start + len).map(SchoolId).collect())
}

fn band(market: &Market, rank: u32) -> usize {
    let mut cumulative = 0;
    for s in market.school_ids() {
        cumulative += market.capacity(s);
        if rank <= cumulative {
            return s.0;
        }
    }
    market.schools() - 1
}

fn safe_rol(market: &Market, info: &InfoSet, from: usize) -> Result<Rol> {
    let mut rol = top(market, from)?.schools().to_vec();
    if let Some(home) = info.own_role {
        if home.0 < rol[0].0 {
            return top(market, home.0);
        }
        if !rol.contains(&home) {
            *rol.last_mut().expect("nonempty") = home;
        }
    }
    Rol::new(rol)
}

/// Simple behavioral rules usable in any market.
pub fn heuristic_profile(
    market: &Market,
    policy: Policy,
    choice: StrategyChoice,
) -> Result<StrategyProfile> {
    let m = market.clone();
    let strategy = match choice {
        StrategyChoice::Truthful => PureStrategy::new("truthful", move |_| top(&m, 0)),
        StrategyChoice::Safe => PureStrategy::new("safe", move |info| safe_rol(&m, info, 0)),
        StrategyChoice::RankBand => PureStrategy::new("rank band", move |info| {
            let from = info.own_rank.map_or(0, |r| band(&m, r));
            safe_rol(&m, info, from)
        }),
        StrategyChoice::Equilibrium | StrategyChoice::None => {
            return Err(Error::invalid(format!("{choice:?} is not a heuristic")))
        }
    };
    Ok(StrategyProfile::symmetric(
        policy,
        market.students(),
        strategy,
    ))
}

fn profile_for(config: &SessionConfig, market: &Market) -> Result<Option<StrategyProfile>> {
    Ok(match (config.strategy, config.treatment) {
        (StrategyChoice::None, _) => None,
        (StrategyChoice::Equilibrium, Some(t)) => Some(equilibrium_table(t)),
        (StrategyChoice::Equilibrium, None) => {
            return Err(Error::invalid("equilibrium play needs a main treatment"))
        }
        (choice, _) => Some(heuristic_profile(market, config.policy(), choice)?),
    })
}

/// Rows for one group-round under an optional profile.
pub fn play_world(
    market: &Market,
    policy: Policy,
    profile: Option<&StrategyProfile>,
    session: u32,
    world: &World,
) -> Result<Vec<LogRow>> {
    let decisions = match profile {
        None => None,
        Some(p) => {
            let rols = market
                .student_ids()
                .map(|i| {
                    let info = observe(policy, market, &world.lottery, i, &world.types[i.0].1)?;
                    p.decide(i, &info)
                })
                .collect::<Result<Vec<Rol>>>()?;
            let matching = run_da(market, &rols, &world.lottery)?;
            Some((rols, matching))
        }
    };
    Ok(market
        .student_ids()
        .map(|i| {
            let (label, utilities) = &world.types[i.0];
            let (rol, outcome) = match &decisions {
                None => (Vec::new(), None),
                Some((rols, matching)) => {
                    let a = matching.assignment(i);
                    (
                        rols[i.0]
                            .schools()
                            .iter()
                            .map(|&s| market.school_label(s).to_string())
                            .collect(),
                        Some((
                            a.map(|s| market.school_label(s).to_string()),
                            utilities.payoff(a),
                        )),
                    )
                }
            };
            LogRow {
                session,
                round: world.round,
                group: world.group,
                student_id: i.0 as u32 + 1,
                neighborhood: market
                    .neighborhood_of(StudentId(i.0))
                    .map(|s| market.school_label(s).to_string()),
                type_label: label.clone(),
                utilities: utilities.0.clone(),
                lottery_rank: world.lottery.rank(i),
                rol,
                outcome,
            }
        })
        .collect())
}

/// Simulates every session of a configuration. Rows come out sorted by
/// session, round, group and student whatever the thread count.
pub fn generate_sessions(config: &SessionConfig) -> Result<DecisionLog> {
    let market = config.market()?;
    let worlds = world_sequence(config)?;
    let profile = profile_for(config, &market)?;
    let policy = config.policy();
    let cells: Vec<(u32, &World)> = (1..=config.sessions)
        .flat_map(|s| worlds.iter().map(move |w| (s, w)))
        .collect();
    let chunks = cells
        .par_iter()
        .map(|(s, w)| play_world(&market, policy, profile.as_ref(), *s, w))
        .collect::<Result<Vec<_>>>()?;
    let mut log = DecisionLog::new(market.schools(), chunks.into_iter().flatten().collect());
    log.sort();
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::Treatment;

    fn config(t: Treatment) -> SessionConfig {
        SessionConfig {
            treatment: Some(t),
            robustness: None,
            sessions: 2,
            participants: 12,
            group_size: 6,
            rounds: 3,
            seed: 11,
            strategy: StrategyChoice::Equilibrium,
            stats: None,
        }
    }

    #[test]
    fn worlds_shared_across_treatments() {
        let a = generate_sessions(&config(Treatment::NoNsCover)).unwrap();
        let b = generate_sessions(&config(Treatment::NsRevealMore)).unwrap();
        assert_eq!(a.rows.len(), 2 * 3 * 2 * 6);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(
                (
                    x.session,
                    x.round,
                    x.group,
                    x.student_id,
                    &x.type_label,
                    &x.utilities,
                    x.lottery_rank
                ),
                (
                    y.session,
                    y.round,
                    y.group,
                    y.student_id,
                    &y.type_label,
                    &y.utilities,
                    y.lottery_rank
                )
            );
        }
        // Sessions replay the same sequence.
        let per_session = a.rows.len() / 2;
        for (x, y) in a.rows[..per_session].iter().zip(&a.rows[per_session..]) {
            assert_eq!(
                (x.lottery_rank, &x.utilities),
                (y.lottery_rank, &y.utilities)
            );
        }
    }

    #[test]
    fn seed_determinism() {
        let c = config(Treatment::NsReveal);
        let a = generate_sessions(&c).unwrap().to_csv_string().unwrap();
        let b = generate_sessions(&c).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b);
        let mut other = c.clone();
        other.seed += 1;
        assert_ne!(
            a,
            generate_sessions(&other).unwrap().to_csv_string().unwrap()
        );
    }

    #[test]
    fn heuristics_respect_list_limit() {
        let market = Market::robustness(2).unwrap();
        for choice in [
            StrategyChoice::Truthful,
            StrategyChoice::Safe,
            StrategyChoice::RankBand,
        ] {
            let p = heuristic_profile(&market, Policy::Reveal, choice).unwrap();
            let world = draw_world(&market, 3, 1, 1);
            for i in market.student_ids() {
                let info = observe(
                    Policy::Reveal,
                    &market,
                    &world.lottery,
                    i,
                    &world.types[i.0].1,
                )
                .unwrap();
                let rol = p.decide(i, &info).unwrap();
                assert_eq!(rol.len(), 2);
                rol.validate_for(&market).unwrap();
                if choice == StrategyChoice::Safe {
                    if let Some(home) = market.neighborhood_of(i) {
                        assert!(rol.contains(home));
                    }
                }
            }
        }
    }
}
