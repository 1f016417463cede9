//! Adequacy checks, one-way ANOVA, and Dunnett's many-to-one comparisons
//! over groups of per-algorithm scores.

mod adequacy;
mod anova;
mod dunnett;
pub mod special;

pub use adequacy::{adequacy, anderson_darling, brown_forsythe, AdequacyReport};
pub use anova::{anova_oneway, AnovaReport};
pub use dunnett::{dunnett, dunnett_critical, Comparison, DunnettReport};
