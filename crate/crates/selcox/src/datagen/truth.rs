//! Submodel truths: population-level projections of the data-generating
//! mechanism onto covariate subsets, obtained by fitting the unpenalized
//! Cox model on one large uncensored dataset.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::datagen::{generate_toy_dataset, ToyScenario};
use crate::error::{Error, Result};
use crate::seed::derive_rng;
use crate::survival::{fit_cox_mle, FitOptions, SurvivalDataset};

pub const DEFAULT_N_POP: usize = 200_000;

/// Cache of submodel projections keyed by (DGM label, subset). The backing
/// population dataset is large, so only the most recent one stays resident;
/// projections themselves are small and kept indefinitely.
#[derive(Debug, Default)]
pub struct SubmodelTruthCache {
    projections: Mutex<HashMap<(String, Vec<usize>), Arc<Vec<f64>>>>,
    population: Mutex<Option<(String, Arc<SurvivalDataset>)>>,
}

impl SubmodelTruthCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn population_for(&self, scenario: &ToyScenario, n_pop: usize) -> Result<Arc<SurvivalDataset>> {
        let key = format!("{}@{}", scenario.dgm_label(), n_pop);
        {
            let guard = self.population.lock().unwrap();
            if let Some((k, data)) = guard.as_ref() {
                if *k == key {
                    return Ok(Arc::clone(data));
                }
            }
        }
        // Uncensored population draw with a seed derived from the DGM alone,
        // so every run and every subset sees the same dataset.
        let pop_scenario = ToyScenario {
            n: n_pop,
            censor_target: 0.0,
            ..scenario.clone()
        };
        let mut rng = derive_rng(&["submodel-truth", &key]);
        let rep = generate_toy_dataset(&pop_scenario, &mut rng)?;
        let data = Arc::new(rep.data);
        let mut guard = self.population.lock().unwrap();
        *guard = Some((key, Arc::clone(&data)));
        Ok(data)
    }
}

/// Population projection beta_{., M}: coefficients of the unpenalized Cox
/// fit on `subset` over one uncensored dataset of `n_pop` draws from the
/// scenario's data-generating mechanism. Deterministic per (DGM, subset);
/// results are cached. The returned vector is aligned with the sorted,
/// deduplicated subset.
pub fn submodel_truth(
    scenario: &ToyScenario,
    subset: &[usize],
    n_pop: usize,
    cache: &SubmodelTruthCache,
) -> Result<Vec<f64>> {
    if subset.is_empty() {
        return Err(Error::invalid("submodel truth needs a nonempty subset"));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let key = (format!("{}@{}", scenario.dgm_label(), n_pop), sorted.clone());
    {
        let guard = cache.projections.lock().unwrap();
        if let Some(v) = guard.get(&key) {
            return Ok(v.as_ref().clone());
        }
    }
    let population = cache.population_for(scenario, n_pop)?;
    let fit = fit_cox_mle(&population, &sorted, &FitOptions::default())?;
    if !fit.converged {
        return Err(Error::numerical(format!(
            "population projection did not converge for subset {sorted:?}"
        )));
    }
    let beta: Vec<f64> = fit.beta.iter().copied().collect();
    cache
        .projections
        .lock()
        .unwrap()
        .insert(key, Arc::new(beta.clone()));
    Ok(beta)
}

impl ToyScenario {
    /// Label of the data-generating mechanism only: excludes n and the
    /// censoring target, which do not affect population projections.
    pub fn dgm_label(&self) -> String {
        let dich = if self.dichotomize.is_empty() {
            String::new()
        } else {
            format!(
                "_dich{}",
                self.dichotomize
                    .iter()
                    .map(|j| j.to_string())
                    .collect::<Vec<_>>()
                    .join("-")
            )
        };
        format!(
            "p{}_rho{}_{}_{}{}",
            self.p,
            self.rho,
            match self.baseline {
                crate::datagen::BaselineSpec::Exponential => "exponential".to_string(),
                crate::datagen::BaselineSpec::Weibull { shape, scale } =>
                    format!("weibull-k{shape}-s{scale}"),
            },
            self.pattern.label(),
            dich
        )
    }
}
