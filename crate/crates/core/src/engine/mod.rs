//! Monte Carlo engine: scenarios, time-tag generation, coincidence counting.

pub mod branch;
pub mod coincidence;
pub mod counts;
pub mod rates;
pub mod scenario;
pub mod simulate;
pub mod timetag_io;

pub use coincidence::{count_coincidences, count_in_window, delay_histogram, CoincidenceCounts, DelayHistogram, HistogramSpec, WindowSpec};
pub use counts::{measure, sample_counts, timetag_counts, Mode, SettingCounts};
pub use rates::{expected_rates, ExpectedRates};
pub use scenario::{AnalyzerSetting, ArmLoss, Scenario, Scheme, Settings};
pub use simulate::{simulate, SimulationOutput};
pub use timetag_io::{TimeTag, TimeTagFile};
