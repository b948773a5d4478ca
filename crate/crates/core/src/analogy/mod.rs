//! Analogy grids, exemplar pairing, prompts and training datasets.

pub mod grid;
pub mod manifest;
pub mod pairs;
pub mod prompt;
pub mod trainset;

pub use grid::{
    compose_grid, compose_row, extract_panel, inference_mask, AnalogyGrid, GridPanels, Layout,
    Quadrant, MASK_FILL, MIN_PANEL_SIZE,
};
pub use manifest::{AdapterIds, Exemplar, PipelineParams, StyleManifest};
pub use pairs::{build_pairs, PairMode};
pub use prompt::{render_prompt, PROMPT_TEMPLATE, STYVEC_PLACEHOLDER};
pub use trainset::{
    build_trainset, write_trainset, ExemplarReps, SampleKind, TrainingSample, WriteReport,
};
