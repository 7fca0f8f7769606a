//! Mapping logical programs onto physical coupling maps.

pub mod coupling;
pub mod layout;
pub mod route;
pub mod schedule;
pub mod synth;

pub use coupling::{CalibrationData, CouplingMap};
pub use layout::{layout_search, LayoutParams, LayoutReport};
pub use route::{entangling_layer_count, route, Layout, RoutedProgram};
pub use schedule::{layer_counts, program_layers, LayerCounts, ProgramLayers};
pub use synth::{lower_program, cnot_count};
