//! Configuration, day data, and run artifacts.

mod config;
mod data;
mod report;

pub use config::{
    gwh, kusd_to_usd, load_config, musd_to_usd, parse_config, render_config, usd_to_kusd, usd_to_musd,
    write_config, AgentConfigFile, ConfigFile, GeneratorEntry, InitialSection, SimulationSection, SolverSection,
    SystemSection, TreeSection,
};
pub use data::{
    generate_synthetic_day, load_day_csv, parse_day_csv, render_day_csv, write_day_csv, DayData, DAY_COLUMNS,
};
pub use report::{render_table_row, write_report, RunArtifacts, RunOutput};
