//! Entity-level scoring, the synthetic corpus generator and the experiment
//! grid that runs the standard training conditions against held-out data.

mod grid;
mod metrics;
mod synthetic;

pub use grid::{
    keep_one_entity_per_sentence, run_experiment_grid, standard_conditions, Condition, GridConfig,
    GridReport, GridRow, LabelSource, OutputMode, PolicyChoice,
};
pub use metrics::{evaluate, predict_all, score_entities, score_labelings, Decode, EvalReport};
pub use synthetic::{
    generate_synthetic, SyntheticCorpus, SyntheticSpec, AMBIGUOUS_SLOT, ENTITY_SLOT, WORD_SLOT,
};
