//! Oracles for the compressor and the energy constructions.
//!
//! Every probability in a chunk depends on a leaf only through its error
//! class `(m_x, m_y)`, so the exact output law of the chunk sampler fits in
//! a `(γ/2 + 1)²` table ([`exact_chunk_distribution`]). Sampled runs
//! ([`monte_carlo_chunk`]) are compared against such tables with a pooled
//! chi-square test ([`chi_square_gof`]). [`suite`] runs the full battery.

mod class;
mod gof;
mod monte;
pub mod suite;

pub use class::{exact_chunk_distribution, trace_threshold, ChunkLaw, ClassLaw, MAX_EXACT_GAMMA};
pub use gof::{bonferroni, chi_square_gof, GofResult, MIN_EXPECTED, SIGNIFICANCE};
pub use monte::{monte_carlo_chunk, MonteCarloChunk};
pub use suite::{
    criterion_name, random_table_protocol, run_criterion, run_suite, table1_grid, CriterionReport,
    SuiteConfig, CRITERIA,
};
