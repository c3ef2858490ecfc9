//! Exponential growth of prevalence at the origin, estimated from exported
//! cases with a binomial traveler model.
//!
//! Cases arriving at destination `i` on day `t` follow
//! `n_it ~ Binomial(round(N_i q_it), min(rho_t e^(alpha + b_i), 1))` with
//! `rho_t = exp(beta0 + beta1 t)`.

mod domestic;
mod fit;
mod likelihood;
mod sequential;

pub use domestic::{domestic_fit, DomesticFit};
pub use fit::{
    alpha_prior_sd, fit_growth, GrowthMeta, GrowthOptions, GrowthPosterior, GrowthSample, Interval,
    BETA1_MAX, BETA1_MIN,
};
pub use likelihood::{growth_log_likelihood, GrowthData};
pub use sequential::{
    fit_at_date, sensitivity_run, sequential_estimates, write_comparison_csv, Scenario,
    SequentialOptions, SequentialRow, SequentialSummary, COMPARISON_COLUMNS, DEFAULT_THRESHOLD,
    SEQUENTIAL_COLUMNS,
};

use crate::domain::{prevalence_at, DayIndex};
use crate::ingest::OriginConfig;

/// Share of posterior draws for which severe cases on day `t` exceed the
/// hospital bed count.
pub fn severe_exceedance(posterior: &GrowthPosterior, config: &OriginConfig, t: DayIndex) -> f64 {
    if posterior.samples.is_empty() {
        return 0.0;
    }
    let beta0 = config.beta0();
    let scale = config.severe_fraction * config.population as f64;
    let beds = config.hospital_beds as f64;
    let over = posterior
        .samples
        .iter()
        .filter(|s| scale * prevalence_at(beta0, s.beta1, t.0 as f64) > beds)
        .count();
    over as f64 / posterior.samples.len() as f64
}
