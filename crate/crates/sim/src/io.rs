//! Plain-text serialization of traces, edges and impact reports.
//!
//! The formats are deliberately dependency-free CSV: no quoting is ever
//! needed and floats carry 11 significant digits so downstream diffing and
//! plotting see full precision.

use std::io::Write;

use crate::attack::ImpactReport;
use crate::plant::{SocTrace, TransitionEdge};
use crate::SimError;

/// Fixed-precision float rendering used by every simulation CSV.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.10e}")
}

pub fn write_trace_csv<W: Write>(trace: &SocTrace, out: &mut W) -> Result<(), SimError> {
    writeln!(out, "time,soc,mode")?;
    for s in &trace.samples {
        writeln!(out, "{},{},{}", fmt_float(s.time), fmt_float(s.soc), s.mode)?;
    }
    Ok(())
}

pub fn write_edges_csv<W: Write>(edges: &[TransitionEdge], out: &mut W) -> Result<(), SimError> {
    writeln!(out, "time,soc,from,to")?;
    for e in edges {
        writeln!(out, "{},{},{},{}", fmt_float(e.time), fmt_float(e.soc), e.from, e.to)?;
    }
    Ok(())
}

/// One row per matched reversal plus the percentage deltas.
pub fn write_impact_csv<W: Write>(report: &ImpactReport, out: &mut W) -> Result<(), SimError> {
    writeln!(
        out,
        "edge_index,ref_time,ref_soc,att_time,att_soc,edge_delay_pct,soc_overshoot_pct"
    )?;
    for (i, (r, a)) in report.matched_edges.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            i,
            fmt_float(r.time),
            fmt_float(r.soc),
            fmt_float(a.time),
            fmt_float(a.soc),
            fmt_float(report.edge_delay_pct[i]),
            fmt_float(report.soc_overshoot_pct[i]),
        )?;
    }
    Ok(())
}

pub fn write_violations_csv<W: Write>(
    report: &ImpactReport,
    out: &mut W,
) -> Result<(), SimError> {
    writeln!(out, "time,soc,threshold")?;
    for v in &report.threshold_violations {
        let side = match v.threshold {
            crate::attack::WhichThreshold::Low => "low",
            crate::attack::WhichThreshold::High => "high",
        };
        writeln!(out, "{},{},{}", fmt_float(v.time), fmt_float(v.soc), side)?;
    }
    Ok(())
}

pub fn trace_csv_string(trace: &SocTrace) -> String {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

pub fn edges_csv_string(edges: &[TransitionEdge]) -> String {
    let mut buf = Vec::new();
    write_edges_csv(edges, &mut buf).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}
