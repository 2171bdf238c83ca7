//! Generators, enumerators and oracles for testing `cohere`.

pub mod enumerate;
pub mod gen;
pub mod naive;
pub mod schedules;
pub mod settings;

pub use enumerate::{enumerate_raw_programs, raw_layout};
pub use gen::{gen_well_declared, overlapping_pairs, GenLimits};
pub use naive::{run_naive, NaiveOutcome, NaiveRun};
pub use schedules::{all_schedules_run, ScheduleReport, ScheduleRun};
pub use settings::CorpusSettings;
