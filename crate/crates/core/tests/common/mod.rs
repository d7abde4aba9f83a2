//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's matching or enumeration code.
#![allow(dead_code)]

use itertools::Itertools;
use num::rational::BigRational;
use num::{BigInt, One, Zero};

pub fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Lower key means higher priority: own neighborhood first, then lottery.
fn key(home: &[Option<usize>], ranks: &[u32], s: usize, i: usize) -> (bool, u32) {
    (home[i] != Some(s), ranks[i])
}

/// Textbook one-proposal-at-a-time student-proposing DA.
pub fn naive_da(
    caps: &[u32],
    home: &[Option<usize>],
    rols: &[Vec<usize>],
    ranks: &[u32],
) -> Vec<Option<usize>> {
    let n = rols.len();
    let mut next = vec![0usize; n];
    let mut at: Vec<Option<usize>> = vec![None; n];
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); caps.len()];
    while let Some(i) = (0..n).find(|&i| at[i].is_none() && next[i] < rols[i].len()) {
        let s = rols[i][next[i]];
        next[i] += 1;
        held[s].push(i);
        at[i] = Some(s);
        if held[s].len() > caps[s] as usize {
            let worst = *held[s]
                .iter()
                .max_by_key(|&&j| key(home, ranks, s, j))
                .unwrap();
            held[s].retain(|&j| j != worst);
            at[worst] = None;
        }
    }
    at
}

/// Stable with respect to the submitted lists: feasible, only listed
/// schools, and no student-school pair would both rather match.
pub fn is_stable(
    caps: &[u32],
    home: &[Option<usize>],
    rols: &[Vec<usize>],
    ranks: &[u32],
    at: &[Option<usize>],
) -> bool {
    let mut load = vec![0u32; caps.len()];
    for (i, a) in at.iter().enumerate() {
        if let Some(s) = *a {
            if !rols[i].contains(&s) {
                return false;
            }
            load[s] += 1;
        }
    }
    if load.iter().zip(caps).any(|(l, c)| l > c) {
        return false;
    }
    for (i, rol) in rols.iter().enumerate() {
        let cut = at[i]
            .and_then(|s| rol.iter().position(|&x| x == s))
            .unwrap_or(rol.len());
        for &s in &rol[..cut] {
            if load[s] < caps[s] {
                return false;
            }
            let beaten = (0..at.len())
                .filter(|&j| at[j] == Some(s))
                .any(|j| key(home, ranks, s, i) < key(home, ranks, s, j));
            if beaten {
                return false;
            }
        }
    }
    true
}

/// Student-optimal stable matching by exhaustive search.
pub fn brute_student_optimal(
    caps: &[u32],
    home: &[Option<usize>],
    rols: &[Vec<usize>],
    ranks: &[u32],
) -> Vec<Option<usize>> {
    let options: Vec<Vec<Option<usize>>> = rols
        .iter()
        .map(|r| r.iter().map(|&s| Some(s)).chain([None]).collect())
        .collect();
    let score = |i: usize, a: Option<usize>| {
        a.and_then(|s| rols[i].iter().position(|&x| x == s))
            .unwrap_or(usize::MAX)
    };
    let stable: Vec<Vec<Option<usize>>> = options
        .into_iter()
        .multi_cartesian_product()
        .filter(|at| is_stable(caps, home, rols, ranks, at))
        .collect();
    let best = stable
        .iter()
        .find(|a| {
            stable
                .iter()
                .all(|b| (0..a.len()).all(|i| score(i, a[i]) <= score(i, b[i])))
        })
        .expect("a student-optimal stable matching exists");
    best.clone()
}

/// The two types of the six-student experiment: (utilities, probability).
pub fn experiment_types() -> [([u32; 3], BigRational); 2] {
    [([90, 40, 20], q(2, 3)), ([70, 60, 20], q(1, 3))]
}

/// Probability that `student` of type `own_type` reporting `action` alone
/// is admitted to each school (unmatched last), when everyone else reports
/// `rule(other, type index)` and nothing about the lottery is observed.
pub fn cover_admission(
    home: &[Option<usize>],
    student: usize,
    own_type: usize,
    action: usize,
    rule: impl Fn(usize, usize) -> usize,
) -> Vec<BigRational> {
    let n = home.len();
    let types = experiment_types();
    let mut out = vec![BigRational::zero(); 4];
    let perms: Vec<Vec<u32>> = (1..=n as u32).permutations(n).collect();
    let p_lottery = q(1, perms.len() as i64);
    for combo in (0..n).map(|_| 0..2usize).multi_cartesian_product() {
        if combo[student] != own_type {
            continue;
        }
        let mut w = BigRational::one();
        for (j, &t) in combo.iter().enumerate() {
            if j != student {
                w *= &types[t].1;
            }
        }
        let rols: Vec<Vec<usize>> = (0..n)
            .map(|j| {
                vec![if j == student {
                    action
                } else {
                    rule(j, combo[j])
                }]
            })
            .collect();
        for ranks in &perms {
            let at = naive_da(&[2, 2, 2], home, &rols, ranks);
            out[at[student].unwrap_or(3)] += &w * &p_lottery;
        }
    }
    out
}

pub fn no_neighborhoods() -> Vec<Option<usize>> {
    vec![None; 6]
}

/// Students 1-3 live next to s1-s3.
pub fn three_neighborhoods() -> Vec<Option<usize>> {
    vec![Some(0), Some(1), Some(2), None, None, None]
}
