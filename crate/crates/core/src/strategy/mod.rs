//! Strategy representations, closed-form equilibrium play and the cutoff
//! machinery for the neighborhood model.

mod cutoffs;
mod tables;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::info::{InfoSet, Policy};
use crate::market::{Market, Rol, SchoolId, StudentId};

pub use cutoffs::{
    achievable_school, achievable_school_from_info, continuum_cutoffs, cutoff_profile,
    lemma1_profile, lemma1_strategy, solve_cutoffs_from_info, solve_cutoffs_revealmore,
    stay_home_condition, Cutoffs,
};
pub use tables::{equilibrium_choice, equilibrium_table, prescription_row, TypeClass};

type Rule = dyn Fn(&InfoSet) -> Result<Rol> + Send + Sync;

/// A deterministic decision rule from observations to a list.
#[derive(Clone)]
pub struct PureStrategy {
    name: Arc<str>,
    rule: Arc<Rule>,
}

impl PureStrategy {
    pub fn new<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&InfoSet) -> Result<Rol> + Send + Sync + 'static,
    {
        PureStrategy {
            name: Arc::from(name.into()),
            rule: Arc::new(rule),
        }
    }

    /// Always submits `rol`.
    pub fn constant(rol: Rol) -> Self {
        let name = format!("constant {:?}", rol.schools());
        PureStrategy::new(name, move |_| Ok(rol.clone()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn decide(&self, info: &InfoSet) -> Result<Rol> {
        (self.rule)(info)
    }
}

impl fmt::Debug for PureStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("PureStrategy").field(&self.name).finish()
    }
}

/// One pure strategy per student, all written for the same policy.
#[derive(Clone, Debug)]
pub struct StrategyProfile {
    policy: Policy,
    strategies: Vec<PureStrategy>,
}

impl StrategyProfile {
    pub fn new(policy: Policy, strategies: Vec<PureStrategy>) -> Self {
        StrategyProfile { policy, strategies }
    }

    /// Everyone plays `strategy`.
    pub fn symmetric(policy: Policy, students: usize, strategy: PureStrategy) -> Self {
        StrategyProfile {
            policy,
            strategies: vec![strategy; students],
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn students(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategy(&self, student: StudentId) -> &PureStrategy {
        &self.strategies[student.0]
    }

    pub fn decide(&self, student: StudentId, info: &InfoSet) -> Result<Rol> {
        self.strategies[student.0].decide(info)
    }

    pub fn with_strategy(mut self, student: StudentId, strategy: PureStrategy) -> Self {
        self.strategies[student.0] = strategy;
        self
    }

    /// Replaces the prescribed action with `rol` wherever `when` holds, for
    /// one student or (with `None`) for everyone.
    pub fn perturbed<F>(mut self, student: Option<StudentId>, when: F, rol: Rol) -> Self
    where
        F: Fn(&InfoSet) -> bool + Send + Sync + 'static,
    {
        let when = Arc::new(when);
        for (i, slot) in self.strategies.iter_mut().enumerate() {
            if student.is_some_and(|s| s.0 != i) {
                continue;
            }
            let base = slot.clone();
            let when = Arc::clone(&when);
            let rol = rol.clone();
            *slot = PureStrategy::new(format!("{} (perturbed)", base.name()), move |info| {
                if when(info) {
                    Ok(rol.clone())
                } else {
                    base.decide(info)
                }
            });
        }
        self
    }

    pub(crate) fn check_for(&self, market: &Market, policy: Policy) -> Result<()> {
        if self.policy != policy {
            return Err(Error::invalid(format!(
                "profile written for {} evaluated under {}",
                self.policy, policy
            )));
        }
        if self.strategies.len() != market.students() {
            return Err(Error::invalid(format!(
                "profile has {} strategies for {} students",
                self.strategies.len(),
                market.students()
            )));
        }
        Ok(())
    }
}

pub(crate) fn single(school: SchoolId) -> Result<Rol> {
    Ok(Rol::single(school))
}
