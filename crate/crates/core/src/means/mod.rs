//! Central-tendency estimators for collections of diagrams.

mod frechet;
mod mean;
mod quantize;

use std::io::Write;

pub use frechet::{frechet_function, frechet_mean, FrechetConfig, FrechetInit, FrechetMean, FrechetStep};
pub use mean::mean_measure;
pub use quantize::{quantize, QuantInit, Quantization, QuantizationConfig, QuantizeStep};

use crate::error::Result;
use crate::fmt::g17;

/// Writes one JSON object per line: iteration, objective value, and the
/// number of structural changes in that step.
pub fn write_trace_jsonl<W: Write>(rows: impl IntoIterator<Item = (usize, f64, usize)>, value_name: &str, mut out: W) -> Result<()> {
    for (iteration, value, changes) in rows {
        writeln!(out, "{{\"iteration\": {iteration}, \"{value_name}\": {}, \"changes\": {changes}}}", g17(value))?;
    }
    Ok(())
}
