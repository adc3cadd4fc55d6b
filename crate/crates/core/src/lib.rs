//! Dispatchable regions for renewable injections: the set of renewable
//! output vectors that the flexible fleet can still accommodate without
//! violating network, generation or ramping limits, computed as a polytope
//! by cutting planes.

pub mod analysis;
pub mod binding;
pub mod case;
pub mod checks;
pub mod config;
pub mod engine;
mod error;
pub mod export;
pub mod feasibility;
pub mod iblp;
pub mod maxmin;
pub mod model;
pub mod polytope;

pub use analysis::{high_risk_event, vertices_2d, RampEvent};
pub use binding::{identify, BindingReport, FacetOrigin};
pub use case::{
    apply_renewables, parse_matpower, parse_renewables_json, CaseData, RawCase, RenewableSpec,
};
pub use config::{Method, StudyConfig};
pub use engine::{init_w0, run, run_model, Cut, DrrResult, Termination};
pub use error::{DrrError, Result};
pub use export::export_artifacts;
pub use feasibility::{feasibility_model, FeasibilityModel, SlackWeights};
pub use maxmin::{solve_maxmin_milp, MaxMinSolution};
pub use model::{build_compact, initial_dispatch, CompactPsd, DispatchPoint};
pub use polytope::{remove_redundant, Polytope, Provenance};
