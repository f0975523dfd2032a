//! Closed forms for the majority and copy dynamics, per-phase bounds, the
//! inductive constraints, and a planner that searches for parameters meeting them.

pub mod am;
pub mod bounds;
pub mod constraints;
pub mod copy;
pub mod params;
pub mod planner;

pub use am::{am_equilibria, am_travel_time, growth_travel_time_as_printed, AmError, AmParams, Equilibrium, EquilibriumSet, Stability, Variant};
pub use bounds::{phase_bounds, BoundError, BoundOptions, BoundRecord, Direction, Phase, Target};
pub use constraints::{check_constraints, ih1_z0, ih2_z0, CheckOptions, ConstraintEntry, ConstraintReport, GrowthTime, PBand};
pub use copy::{copy_bounds, copy_solution, CopyBounds, CopyError};
pub use params::{CopyRate, ParamError, ParameterSet};
pub use planner::{plan_parameters, Plan, PlanError, PlanRequest, GAMMA_MARGIN};
