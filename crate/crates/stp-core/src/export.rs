//! CSV emission with deterministic bytes and atomic file writes.
//!
//! All numeric fields are written with Rust's shortest round-trip float
//! formatting, so identical inputs always produce identical bytes.

use crate::asym::ScanReport;
use crate::lattice::LatticeLaw;
use crate::mc::{Histogram, SimConfig, SimOutput};
use std::io::Write;
use std::path::Path;

/// Write `bytes` to `path` via a temp file in the same directory plus
/// rename, so readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `# provenance: stp <version> command=<cmd> key=value ...`
pub fn provenance(command: &str, params: &[(&str, String)]) -> String {
    let mut s = format!(
        "# provenance: stp {} command={}",
        env!("CARGO_PKG_VERSION"),
        command
    );
    for (k, v) in params {
        s.push_str(&format!(" {k}={v}"));
    }
    s.push('\n');
    s
}

/// Lattice law as `value,prob` rows plus a trailing `__overflow__,mass`.
pub fn law_csv(law: &LatticeLaw<f64>, comments: &str) -> String {
    let mut s = String::from(comments);
    s.push_str("value,prob\n");
    for (v, w) in law.atoms() {
        s.push_str(&format!("{v},{w}\n"));
    }
    s.push_str(&format!("__overflow__,{}\n", law.overflow()));
    s
}

/// Scan report as `# key=value` comments plus `x,statistic` rows.
pub fn scan_csv(rep: &ScanReport) -> String {
    let mut s = String::new();
    for (k, v) in &rep.meta {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s.push_str(&format!(
        "# sup={} at={} inf={} at={}\n",
        rep.sup_val, rep.sup_at, rep.inf_val, rep.inf_at
    ));
    s.push_str("x,statistic\n");
    for &(x, v) in &rep.points {
        s.push_str(&format!("{x},{v}\n"));
    }
    s
}

/// CDF/PDF table as `x,value,quad_err`.
pub fn cdf_table_csv(rows: &[(f64, f64, f64)], comments: &str) -> String {
    let mut s = String::from(comments);
    s.push_str("x,value,quad_err\n");
    for &(x, v, e) in rows {
        s.push_str(&format!("{x},{v},{e}\n"));
    }
    s
}

/// Simulation table: `# seed=…,n=…,reps=…` header then `rep,sum,max`.
pub fn sim_csv(cfg: &SimConfig, out: &SimOutput) -> String {
    let mut s = format!(
        "# seed={},n={},reps={},cap_tally={}\n",
        cfg.seed, cfg.n, cfg.reps, out.cap_tally
    );
    s.push_str("rep,sum,max\n");
    for r in &out.rows {
        s.push_str(&format!("{},{},{}\n", r.rep, r.sum, r.max));
    }
    s
}

/// Histogram table: `bin_left,bin_right,count,density`.
pub fn hist_csv(h: &Histogram, comments: &str) -> String {
    let mut s = String::from(comments);
    s.push_str("bin_left,bin_right,count,density\n");
    for &(l, r, c, d) in &h.bins {
        s.push_str(&format!("{l},{r},{c},{d}\n"));
    }
    s
}
