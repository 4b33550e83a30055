use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use phsub::fmt::g17;
use phsub::measure::PersistenceMeasure;
use phsub::vr::PersistenceDiagram;
use phsub::Result;

use crate::args::Format;

/// Buffered writer to a file, or to stdout when no path is given.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_diagrams(diagrams: &[PersistenceDiagram], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json if diagrams.len() == 1 => {
            diagrams[0].write_json(&mut *out)?;
            writeln!(out)?;
        }
        Format::Json => phsub::vr::write_diagrams_json(diagrams, &mut *out)?,
        Format::Csv => {
            writeln!(out, "dim,birth,death,multiplicity")?;
            for d in diagrams {
                for p in d.points() {
                    writeln!(out, "{},{},{},{}", d.hom_dim, g17(p.birth), g17(p.death), p.multiplicity)?;
                }
                for &b in d.essential() {
                    writeln!(out, "{},{},inf,1", d.hom_dim, g17(b))?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_measure(mu: &PersistenceMeasure, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            mu.write_json(&mut *out)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "birth,death,mass")?;
            for a in mu.atoms() {
                writeln!(out, "{},{},{}", g17(a.birth), g17(a.death), g17(a.mass))?;
            }
        }
    }
    Ok(())
}

/// A table as CSV, or as a JSON array of objects keyed by the header.
pub fn write_table(header: &[&str], rows: &[Vec<String>], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", header.join(","))?;
            for r in rows {
                writeln!(out, "{}", r.join(","))?;
            }
        }
        Format::Json => {
            writeln!(out, "[")?;
            for (i, r) in rows.iter().enumerate() {
                let fields: Vec<String> = header.iter().zip(r).map(|(h, v)| format!("\"{h}\": {}", json_number(v))).collect();
                let sep = if i + 1 < rows.len() { "," } else { "" };
                writeln!(out, "  {{{}}}{sep}", fields.join(", "))?;
            }
            writeln!(out, "]")?;
        }
    }
    Ok(())
}

/// JSON has no infinities or NaN; they become strings.
fn json_number(v: &str) -> String {
    match v {
        "inf" | "-inf" | "nan" => format!("\"{v}\""),
        _ if v.parse::<f64>().is_ok() => v.to_string(),
        _ => format!("\"{v}\""),
    }
}
