use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::DiagRecord;
use crate::integrator::SimState;

/// Header row, then one record per line. Absent values are empty fields.
pub fn write_series_csv(path: &Path, records: &[DiagRecord]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", DiagRecord::COLUMNS.join(","))?;
    for r in records {
        let line: Vec<String> = r
            .columns()
            .iter()
            .map(|c| c.map(|x| format!("{x:.16e}")).unwrap_or_default())
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

/// Plain-text dump of all three fields:
///
/// ```text
/// dims <nx> [<ny>]
/// h <hx> [<hy>]
/// t <t>
/// u
/// <one line per grid row>
/// v
/// ...
/// ```
pub fn write_snapshot(path: &Path, s: &SimState) -> io::Result<()> {
    let g = s.grid();
    let axes = 0..g.dim();
    let mut w = BufWriter::new(File::create(path)?);
    let dims: Vec<String> = axes.clone().map(|a| g.cells(a).to_string()).collect();
    let hs: Vec<String> = axes.map(|a| format!("{:.16e}", g.spacing(a))).collect();
    writeln!(w, "dims {}", dims.join(" "))?;
    writeln!(w, "h {}", hs.join(" "))?;
    writeln!(w, "t {:.16e}", s.t)?;
    let nx = g.cells(0);
    for (name, f) in [("u", &s.u), ("v", &s.v), ("w", &s.w)] {
        writeln!(w, "{name}")?;
        for row in f.values().chunks(nx) {
            let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    w.flush()
}
