//! Reference solvers for the scaling limits: Fisher-KPP (deterministic,
//! stochastic, fractional) and the branching-coalescing limit dual.

mod dual;
mod pde;
pub mod stable;

pub use dual::{simulate_limit_dual, LimitDualConfig, LimitDualSample, LimitDualTrajectory, Motion};
pub use pde::{
    logistic_solution, solve_fkpp, solve_fkpp_stochastic_1d, solve_fractional_fkpp, Diffusion, PdeConfig,
    PdeTrajectory,
};
