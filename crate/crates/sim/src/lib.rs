//! Monte Carlo harness for the TIM/RIS link: configuration, reproducible
//! sweeps and CSV output. The `timris` binary wraps these functions.

pub mod config;
pub mod stream;
pub mod sweep;
pub mod table;
pub mod trial;
pub mod validate;

pub use config::{ConfigError, Scheme, SimConfig};
pub use sweep::{
    benchmark_mode, ber_sweep, harvest_sweep, power_budget, power_budget_report, HarvestReport,
    PowerBudget, PowerBudgetReport, RunOptions,
};
pub use table::{Estimate, ResultRow, ResultTable, HEADER};
pub use trial::{run_block_trial, BlockErrors, BlockRecord, SimError, SystemModel};
