//! Sample splitting: select on one half, do plain Wald inference on the
//! other. Independence of the halves makes the intervals valid for the
//! submodel target; the price is half the data for each stage.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::inference::{Method, SelectionEvent, SelectiveInterval, TargetKind};
use crate::lasso::{select_model, LassoFlavor, TuningRule};
use crate::survival::SurvivalDataset;

/// The outcome of split inference: the selection made on half A and the
/// intervals computed on half B.
#[derive(Debug, Clone)]
pub struct SplitInference {
    pub selection: SelectionEvent,
    pub intervals: Vec<SelectiveInterval>,
    /// Set when no event-balanced split existed; selection is then empty
    /// and there are no intervals.
    pub failed: bool,
}

/// Event-stratified random halves: events and censored records are shuffled
/// separately and dealt alternately, so the halves differ by at most one in
/// both counts.
fn stratified_halves<R: Rng>(status: &[bool], rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut events: Vec<usize> = (0..status.len()).filter(|&i| status[i]).collect();
    let mut censored: Vec<usize> = (0..status.len()).filter(|&i| !status[i]).collect();
    events.shuffle(rng);
    censored.shuffle(rng);
    let mut half_a = Vec::with_capacity(status.len() / 2 + 1);
    let mut half_b = Vec::with_capacity(status.len() / 2 + 1);
    for group in [&events, &censored] {
        for (pos, &i) in group.iter().enumerate() {
            if pos % 2 == 0 {
                half_a.push(i);
            } else {
                half_b.push(i);
            }
        }
    }
    half_a.sort_unstable();
    half_b.sort_unstable();
    (half_a, half_b)
}

/// Run the selection pipeline on a random half of the data and Wald
/// inference for the selected set on the other half. Re-randomizes the
/// split up to 10 times if a half ends up without an event or with fewer
/// than two records; persistent failure is flagged, not an error.
pub fn infer_split<R: Rng>(
    data: &SurvivalDataset,
    flavor: &LassoFlavor,
    rule: &TuningRule,
    cv_folds: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<SplitInference> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::invalid("alpha must be in (0, 1)"));
    }
    let mut halves = None;
    for _ in 0..10 {
        let (a, b) = stratified_halves(data.status(), rng);
        let ok = |rows: &[usize]| {
            rows.len() >= 2 && rows.iter().any(|&i| data.status()[i])
        };
        if ok(&a) && ok(&b) {
            halves = Some((a, b));
            break;
        }
    }
    let Some((rows_a, rows_b)) = halves else {
        return Ok(SplitInference {
            selection: SelectionEvent {
                active: Vec::new(),
                signs: Vec::new(),
                lambda: f64::NAN,
                weights: crate::lasso::PenaltyWeights::uniform(data.p()),
            },
            intervals: Vec::new(),
            failed: true,
        });
    };

    let half_a = data.subset_rows(&rows_a)?;
    let half_b = data.subset_rows(&rows_b)?;

    let outcome = select_model(&half_a, flavor, rule, cv_folds, rng)?;
    let selection = SelectionEvent::from_fit(&outcome.fit, &outcome.weights);

    // a non-convergent refit on half B yields degenerate intervals, not an
    // error; wald_family already handles that
    let intervals = super::wald_family(
        &half_b,
        &selection.active,
        alpha,
        Method::Split,
        TargetKind::Submodel,
    )?;

    Ok(SplitInference {
        selection,
        intervals,
        failed: false,
    })
}
