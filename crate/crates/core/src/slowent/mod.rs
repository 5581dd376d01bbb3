//! Rate families, slow-entropy curves built from covering numbers, and
//! entropy growth of name distributions.

mod entropy;
mod rate;
mod report;

pub use entropy::{blume_curve, blume_entropy, mass_split_check, InequalityCheck, MassSplitReport};
pub use rate::{subexponential_probe, sublinear_probe, Probe, RateFamily, RatePoint, Sequence};
pub use report::{classify_trend, slow_entropy_curves, CurveReport, ReportRow, Trend, TREND_DEAD_BAND};
