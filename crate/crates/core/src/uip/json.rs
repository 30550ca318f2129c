//! JSON interchange for UIP problems and solutions.
//!
//! A problem file carries the space, the downset as bit masks, one factor
//! (atom array) and one event (point-index array) per member, optional
//! filtrations for top-height members, and the epsilon budget.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probspace::{Event, FactorJson, RatJson, SpaceJson};

use super::construct::{Certificate, UipProblem, UipSolution};
use super::downset::Downset;
use super::system::FactorSystem;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UipProblemJson {
    pub space: SpaceJson,
    pub ground: usize,
    /// Downset members as bit masks.
    pub i_max: Vec<u32>,
    /// Factor per member, keyed by the decimal mask.
    pub factors: BTreeMap<String, FactorJson>,
    /// Optional ascending chains for top-height members.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub filtrations: BTreeMap<String, Vec<FactorJson>>,
    /// Event per member as point indices.
    pub events: BTreeMap<String, Vec<usize>>,
    pub epsilon: RatJson,
}

fn parse_mask(key: &str) -> Result<u32> {
    key.parse::<u32>()
        .map_err(|_| Error::input(format!("invalid mask key '{key}'")))
}

impl UipProblemJson {
    pub fn to_problem(&self) -> Result<UipProblem> {
        let space = self.space.to_space()?;
        let i_max = Downset::new(self.ground, self.i_max.iter().copied())?;
        let mut factors = BTreeMap::new();
        for (key, fj) in &self.factors {
            factors.insert(parse_mask(key)?, fj.to_factor(&space)?);
        }
        let mut system = FactorSystem::new(space.clone(), i_max, factors)?;
        for (key, chain) in &self.filtrations {
            let mask = parse_mask(key)?;
            let chain = chain
                .iter()
                .map(|fj| fj.to_factor(&space))
                .collect::<Result<Vec<_>>>()?;
            system = system.with_filtration(mask, chain)?;
        }
        let mut events = BTreeMap::new();
        for (key, indices) in &self.events {
            events.insert(parse_mask(key)?, Event::from_indices(&space, indices)?);
        }
        UipProblem::new(system, events, self.epsilon.to_rational()?)
    }

    pub fn from_problem(problem: &UipProblem) -> UipProblemJson {
        let system = problem.system();
        let space = system.space();
        let mut factors = BTreeMap::new();
        let mut events = BTreeMap::new();
        let mut filtrations = BTreeMap::new();
        for e in system.index_set().members() {
            factors.insert(
                e.to_string(),
                FactorJson::from_factor(system.factor(e).unwrap()),
            );
            events.insert(e.to_string(), problem.event(e).indices());
            if let Some(chain) = system.filtration(e) {
                filtrations.insert(
                    e.to_string(),
                    chain.iter().map(FactorJson::from_factor).collect(),
                );
            }
        }
        UipProblemJson {
            space: SpaceJson::from_space(space),
            ground: system.index_set().ground(),
            i_max: system.index_set().members().collect(),
            factors,
            filtrations,
            events,
            epsilon: RatJson::from_rational(problem.epsilon()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UipSolutionJson {
    /// `F_e` per member as point indices.
    pub events: BTreeMap<String, Vec<usize>>,
    pub empty_intersection: bool,
    /// Exact `P(E_e \ F_e)` per member.
    pub bounds: BTreeMap<String, RatJson>,
    pub achieved: RatJson,
    pub within_epsilon: bool,
    pub hypothesis_slack: RatJson,
}

impl UipSolutionJson {
    pub fn from_solution(solution: &UipSolution) -> Result<UipSolutionJson> {
        let cert = &solution.certificate;
        let rat_of = |s: &crate::probspace::Scalar| -> Result<RatJson> {
            s.as_rational()
                .map(RatJson::from_rational)
                .ok_or_else(|| Error::input("solution serialization requires rational mode"))
        };
        let mut bounds = BTreeMap::new();
        for (e, b) in &cert.bounds {
            bounds.insert(e.to_string(), rat_of(b)?);
        }
        Ok(UipSolutionJson {
            events: solution
                .events
                .iter()
                .map(|(e, f)| (e.to_string(), f.indices()))
                .collect(),
            empty_intersection: cert.empty_intersection,
            bounds,
            achieved: rat_of(&cert.achieved)?,
            within_epsilon: cert.within_epsilon,
            hypothesis_slack: rat_of(&cert.hypothesis_slack)?,
        })
    }
}

/// Round-trips a certificate into report-friendly JSON.
pub fn certificate_summary(cert: &Certificate) -> serde_json::Value {
    serde_json::json!({
        "empty_intersection": cert.empty_intersection,
        "achieved": cert.achieved.to_f64(),
        "within_epsilon": cert.within_epsilon,
    })
}
