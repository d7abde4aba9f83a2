mod common;

use num::rational::BigRational;
use num::{BigInt, One};
use proptest::prelude::*;

use common::*;
use lottery_disclosure::harness::{
    generate_sessions, replay, DecisionLog, SessionConfig, StrategyChoice,
};
use lottery_disclosure::info::{observe, Treatment};
use lottery_disclosure::market::{
    run_da, Lottery, Market, Rol, SchoolId, StudentId, TypeSpace, Utilities, UtilityType,
};
use lottery_disclosure::oracle::admission_distribution;
use lottery_disclosure::stats::{exante_stats, Mode, Value};
use lottery_disclosure::strategy::{continuum_cutoffs, equilibrium_table};

#[derive(Debug, Clone)]
struct Instance {
    caps: Vec<u32>,
    home: Vec<Option<usize>>,
    rols: Vec<Vec<usize>>,
    ranks: Vec<u32>,
    rol_limit: usize,
}

impl Instance {
    fn market(&self) -> Option<Market> {
        let m = self.caps.len() as u32;
        let types = TypeSpace::Finite(vec![UtilityType {
            label: "t".into(),
            utilities: Utilities((0..m).map(|k| 100 - k).collect()),
            probability: BigRational::one(),
        }]);
        Market::new(self.home.len(), self.caps.clone(), self.rol_limit, types)
            .ok()?
            .with_neighborhoods(self.home.iter().map(|h| h.map(SchoolId)).collect())
            .ok()
    }

    fn library_da(&self, market: &Market) -> Vec<Option<usize>> {
        let rols: Vec<Rol> = self
            .rols
            .iter()
            .map(|r| Rol::new(r.iter().map(|&s| SchoolId(s)).collect()).unwrap())
            .collect();
        let lottery = Lottery::from_ranks(self.ranks.clone()).unwrap();
        run_da(market, &rols, &lottery)
            .unwrap()
            .assignments()
            .iter()
            .map(|a| a.map(|s| s.0))
            .collect()
    }
}

fn instance(max_students: usize) -> impl Strategy<Value = Instance> {
    (1..=max_students, 1..=4usize)
        .prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(1..=3u32, m),
                prop::collection::vec(prop::option::weighted(0.3, 0..m), n),
                prop::collection::vec(Just((0..m).collect::<Vec<usize>>()).prop_shuffle(), n),
                Just((1..=n as u32).collect::<Vec<u32>>()).prop_shuffle(),
                1..=m,
            )
        })
        .prop_flat_map(|(caps, home, prefs, ranks, l)| {
            let n = prefs.len();
            (
                Just(caps),
                Just(home),
                Just(prefs),
                Just(ranks),
                Just(l),
                prop::collection::vec(1..=l, n),
            )
        })
        .prop_map(|(caps, home, prefs, ranks, l, lens)| Instance {
            caps,
            home,
            rols: prefs
                .into_iter()
                .zip(lens)
                .map(|(mut p, k)| {
                    p.truncate(k);
                    p
                })
                .collect(),
            ranks,
            rol_limit: l,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn da_is_feasible_and_stable_within_reports(inst in instance(8)) {
        let Some(market) = inst.market() else { return Ok(()) };
        let at = inst.library_da(&market);
        prop_assert!(is_stable(&inst.caps, &inst.home, &inst.rols, &inst.ranks, &at));
        prop_assert_eq!(at, naive_da(&inst.caps, &inst.home, &inst.rols, &inst.ranks));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn da_is_student_optimal_stable(inst in instance(5)) {
        let Some(market) = inst.market() else { return Ok(()) };
        let at = inst.library_da(&market);
        prop_assert_eq!(at, brute_student_optimal(&inst.caps, &inst.home, &inst.rols, &inst.ranks));
    }

    #[test]
    fn continuum_ends_at_one(
        shares in prop::collection::vec((1..=20i64, 0..=5i64), 2..=5)
    ) {
        let total: i64 = shares.iter().map(|s| s.0).sum();
        let q_: Vec<BigRational> = shares.iter().map(|s| q(s.0, total)).collect();
        // Neighborhoods strictly smaller than capacity.
        let n_: Vec<BigRational> = shares.iter().map(|s| q(s.0 * s.1, total * 6)).collect();
        let x = continuum_cutoffs(&q_, &n_).unwrap();
        prop_assert_eq!(x.last().unwrap(), &BigRational::one());
        prop_assert!(x.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_distribution_sums_to_one(
        t in prop::sample::select(Treatment::ALL.to_vec()),
        ranks in Just((1..=6u32).collect::<Vec<u32>>()).prop_shuffle(),
        student in 0..6usize,
        ty in 0..2usize,
        action in 0..3usize,
    ) {
        let market = t.market();
        let lottery = Lottery::from_ranks(ranks).unwrap();
        let u = Utilities(experiment_types()[ty].0.to_vec());
        let info = observe(t.policy(), &market, &lottery, StudentId(student), &u).unwrap();
        let d = admission_distribution(
            &market, t.policy(), &equilibrium_table(t), StudentId(student), &u, &info,
            &Rol::single(SchoolId(action)),
        ).unwrap();
        prop_assert_eq!(d.total(), BigRational::one());
        prop_assert!(d.as_slice().iter().all(|p| *p >= BigRational::from_integer(BigInt::from(0))));
    }

    #[test]
    fn generated_logs_round_trip_and_replay(
        t in prop::sample::select(Treatment::ALL.to_vec()),
        seed in any::<u64>(),
        sessions in 1..=3u32,
        groups in 1..=3u32,
        rounds in 1..=6u32,
    ) {
        let log = generate_sessions(&SessionConfig {
            treatment: Some(t),
            robustness: None,
            sessions,
            participants: 6 * groups,
            group_size: 6,
            rounds,
            seed,
            strategy: StrategyChoice::Equilibrium,
            stats: None,
        }).unwrap();
        let text = log.to_csv_string().unwrap();
        let back = DecisionLog::from_csv_str(&text).unwrap();
        prop_assert_eq!(back.to_csv_string().unwrap(), text);
        prop_assert!(replay(&back).unwrap().disagreements.is_empty());
    }
}

#[test]
fn monte_carlo_within_three_standard_errors() {
    for t in Treatment::ALL {
        let market = t.market();
        let profile = equilibrium_table(t);
        let exact = exante_stats(&market, t.policy(), &profile, Mode::Exact).unwrap();
        let mc = exante_stats(
            &market,
            t.policy(),
            &profile,
            Mode::MonteCarlo {
                seed: 17,
                reps: 20_000,
            },
        )
        .unwrap();
        for (e, m) in exact.groups.iter().zip(&mc.groups) {
            let pairs = [(&e.match_rate, &m.match_rate), (&e.payoff, &m.payoff)]
                .into_iter()
                .chain(e.assignment.iter().zip(&m.assignment));
            for (ev, mv) in pairs {
                let Value::Exact(x) = ev else {
                    panic!("exact mode")
                };
                let x = lottery_disclosure::rational::to_f64(x);
                let gap = (mv.mean() - x).abs();
                assert!(
                    gap <= 3.0 * mv.stderr() + 1e-12,
                    "{t} {:?}/{:?}: estimate {} +- {} vs exact {x}",
                    e.role,
                    e.type_label,
                    mv.mean(),
                    mv.stderr()
                );
            }
        }
    }
}
