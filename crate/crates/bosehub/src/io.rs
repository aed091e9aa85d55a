//! Plot-ready file formats and their parsers.
//!
//! Numeric payloads are written with 17 significant digits (`{:.16e}`), which
//! round-trips IEEE doubles exactly; every writer here has a matching reader
//! and the pair is bit-exact on the numeric payload. Standard errors that are
//! unavailable (single-realization cells) appear as `na`.

use std::io::Read;

use crate::analysis::ObservableSet;
use crate::ensemble::{CellStats, ComparePtCell, CriticalTauRow, MeanSe, PhaseGrid};
use crate::error::{Error, Result};
use crate::fock::basis_size;
use crate::hamil::{Boundary, SparseOperator};
use crate::pert::Phase;

/// Cap on the dimension of state-vector files accepted by the reader.
pub const STATE_VECTOR_READ_CAP: u64 = 1 << 24;

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_se(se: Option<f64>) -> String {
    se.map(fmt_f64).unwrap_or_else(|| "na".to_string())
}

fn parse_f64(line: usize, field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid float in '{field}': '{s}'")))
}

fn parse_se(line: usize, field: &str, s: &str) -> Result<Option<f64>> {
    if s == "na" {
        Ok(None)
    } else {
        parse_f64(line, field, s).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(line: usize, field: &str, s: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::parse(line, format!("invalid integer in '{field}': '{s}'")))
}

fn split_csv_line(line_no: usize, line: &str, want: usize) -> Result<Vec<String>> {
    let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
    if fields.len() != want {
        return Err(Error::parse(
            line_no,
            format!("expected {want} fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

// ---------------------------------------------------------------------------
// Phase-grid CSV
// ---------------------------------------------------------------------------

pub const PHASE_GRID_HEADER: &str = "tau,delta,ps_mean,ps_se,pr_mean,pr_se,eps_mean,eps_se";

/// One parsed row of a phase-grid CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow {
    pub tau: f64,
    pub delta: f64,
    pub ps: MeanSe,
    pub pr: MeanSe,
    pub eps: MeanSe,
}

/// Serialize a grid, one row per cell in storage order.
pub fn write_phase_grid_csv(grid: &PhaseGrid) -> String {
    let mut out = String::from(PHASE_GRID_HEADER);
    out.push('\n');
    for c in &grid.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(c.tau),
            fmt_f64(c.delta),
            fmt_f64(c.ps.mean),
            fmt_se(c.ps.se),
            fmt_f64(c.pr.mean),
            fmt_se(c.pr.se),
            fmt_f64(c.eps.mean),
            fmt_se(c.eps.se),
        ));
    }
    out
}

pub fn read_phase_grid_csv(text: &str) -> Result<Vec<PhaseRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == PHASE_GRID_HEADER => {}
        Some((_, h)) => return Err(Error::parse(1, format!("unexpected header '{h}'"))),
        None => return Err(Error::parse(1, "empty file")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let f = split_csv_line(ln, line, 8)?;
        rows.push(PhaseRow {
            tau: parse_f64(ln, "tau", &f[0])?,
            delta: parse_f64(ln, "delta", &f[1])?,
            ps: MeanSe {
                mean: parse_f64(ln, "ps_mean", &f[2])?,
                se: parse_se(ln, "ps_se", &f[3])?,
            },
            pr: MeanSe {
                mean: parse_f64(ln, "pr_mean", &f[4])?,
                se: parse_se(ln, "pr_se", &f[5])?,
            },
            eps: MeanSe {
                mean: parse_f64(ln, "eps_mean", &f[6])?,
                se: parse_se(ln, "eps_se", &f[7])?,
            },
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Critical-tau CSV
// ---------------------------------------------------------------------------

pub const CRITICAL_TAU_HEADER: &str = "n,delta,tau_c_s,tau_c_r";

pub fn write_critical_tau_csv(rows: &[CriticalTauRow]) -> String {
    let mut out = String::from(CRITICAL_TAU_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            fmt_f64(r.delta),
            fmt_f64(r.tau_c_s),
            fmt_f64(r.tau_c_r)
        ));
    }
    out
}

pub fn read_critical_tau_csv(text: &str) -> Result<Vec<CriticalTauRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CRITICAL_TAU_HEADER => {}
        Some((_, h)) => return Err(Error::parse(1, format!("unexpected header '{h}'"))),
        None => return Err(Error::parse(1, "empty file")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let f = split_csv_line(ln, line, 4)?;
        rows.push(CriticalTauRow {
            n: parse_int(ln, "n", &f[0])?,
            delta: parse_f64(ln, "delta", &f[1])?,
            tau_c_s: parse_f64(ln, "tau_c_s", &f[2])?,
            tau_c_r: parse_f64(ln, "tau_c_r", &f[3])?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Analytic boundary curves: plain (tau, delta) polylines
// ---------------------------------------------------------------------------

pub const CURVE_HEADER: &str = "tau,delta";

pub fn write_curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for (tau, delta) in points {
        out.push_str(&format!("{},{}\n", fmt_f64(*tau), fmt_f64(*delta)));
    }
    out
}

pub fn read_curve_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CURVE_HEADER => {}
        Some((_, h)) => return Err(Error::parse(1, format!("unexpected header '{h}'"))),
        None => return Err(Error::parse(1, "empty file")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let f = split_csv_line(ln, line, 2)?;
        rows.push((parse_f64(ln, "tau", &f[0])?, parse_f64(ln, "delta", &f[1])?));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Occupation-density CSV: rows n = 0..N, columns per site or mode
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationTable {
    /// Column label stem: "site" or "mode".
    pub axis: String,
    /// `rows[n][col]` = p_n at that site/mode.
    pub rows: Vec<Vec<f64>>,
}

pub fn write_occupation_csv(axis: &str, rows: &[Vec<f64>]) -> String {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = String::from("n");
    for c in 1..=cols {
        out.push_str(&format!(",{axis}{c}"));
    }
    out.push('\n');
    for (n, row) in rows.iter().enumerate() {
        out.push_str(&n.to_string());
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn read_occupation_csv(text: &str) -> Result<OccupationTable> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.is_empty() || cols[0].trim() != "n" || cols.len() < 2 {
        return Err(Error::parse(1, "expected header 'n,<axis>1,...'"));
    }
    let first = cols[1].trim();
    let axis: String = first.chars().take_while(|c| c.is_alphabetic()).collect();
    if axis.is_empty() {
        return Err(Error::parse(1, "column labels must start with a label stem"));
    }
    for (idx, c) in cols[1..].iter().enumerate() {
        if c.trim() != format!("{axis}{}", idx + 1) {
            return Err(Error::parse(1, format!("unexpected column label '{c}'")));
        }
    }
    let width = cols.len() - 1;
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let f = split_csv_line(ln, line, width + 1)?;
        let n: usize = parse_int(ln, "n", &f[0])?;
        if n != rows.len() {
            return Err(Error::parse(ln, format!("expected row n={} found n={n}", rows.len())));
        }
        rows.push(
            f[1..]
                .iter()
                .map(|s| parse_f64(ln, "p", s))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(OccupationTable { axis, rows })
}

// ---------------------------------------------------------------------------
// Perturbation-comparison CSV
// ---------------------------------------------------------------------------

pub const COMPARE_PT_HEADER: &str = "tau,delta,ov_loc_mean,ov_loc_se,ov_w_mean,ov_w_se,\
ov_sf_mean,ov_sf_se,de_loc_mean,de_loc_se,de_w_mean,de_w_se,de_sf_mean,de_sf_se,skipped";

pub fn write_compare_pt_csv(cells: &[ComparePtCell]) -> String {
    let mut out = String::from(COMPARE_PT_HEADER);
    out.push('\n');
    for c in cells {
        let ms = |m: &MeanSe| format!("{},{}", fmt_f64(m.mean), fmt_se(m.se));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_f64(c.tau),
            fmt_f64(c.delta),
            ms(&c.overlap_localized),
            ms(&c.overlap_w),
            ms(&c.overlap_superfluid),
            ms(&c.de_localized),
            ms(&c.de_w),
            ms(&c.de_superfluid),
        ));
        // skipped is appended on the same row
        let end = out.len() - 1;
        out.truncate(end);
        out.push_str(&format!(",{}\n", c.skipped));
    }
    out
}

pub fn read_compare_pt_csv(text: &str) -> Result<Vec<ComparePtCell>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == COMPARE_PT_HEADER => {}
        Some((_, h)) => return Err(Error::parse(1, format!("unexpected header '{h}'"))),
        None => return Err(Error::parse(1, "empty file")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = i + 1;
        let f = split_csv_line(ln, line, 15)?;
        let ms = |mi: usize, name: &str| -> Result<MeanSe> {
            Ok(MeanSe {
                mean: parse_f64(ln, name, &f[mi])?,
                se: parse_se(ln, name, &f[mi + 1])?,
            })
        };
        rows.push(ComparePtCell {
            tau: parse_f64(ln, "tau", &f[0])?,
            delta: parse_f64(ln, "delta", &f[1])?,
            overlap_localized: ms(2, "ov_loc")?,
            overlap_w: ms(4, "ov_w")?,
            overlap_superfluid: ms(6, "ov_sf")?,
            de_localized: ms(8, "de_loc")?,
            de_w: ms(10, "de_w")?,
            de_superfluid: ms(12, "de_sf")?,
            skipped: parse_int(ln, "skipped", &f[14])?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Key-value text records (observables, metadata)
// ---------------------------------------------------------------------------

pub fn write_kv(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

/// Parse `key = value` lines with their line numbers; blank lines and `#`
/// comments are skipped.
pub fn read_kv_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let ln = i + 1;
        let (k, v) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::parse(ln, "expected 'key = value'"))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::parse(ln, "empty key"));
        }
        pairs.push((ln, key.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
pub fn read_kv(text: &str) -> Result<Vec<(String, String)>> {
    Ok(read_kv_lines(text)?
        .into_iter()
        .map(|(_, k, v)| (k, v))
        .collect())
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn parse_float_list(line: usize, field: &str, s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| parse_f64(line, field, tok.trim()))
        .collect()
}

/// Serialize an observable bundle as a key-value record.
pub fn write_observables(obs: &ObservableSet) -> String {
    let mut pairs = vec![
        ("energy_scaled".to_string(), fmt_f64(obs.energy_scaled)),
        ("ipr_s".to_string(), fmt_f64(obs.ipr_s)),
        ("ipr_r".to_string(), fmt_f64(obs.ipr_r)),
        ("occupations_s".to_string(), join_floats(&obs.occupations_s)),
        ("occupations_r".to_string(), join_floats(&obs.occupations_r)),
    ];
    if let Some(f) = &obs.fidelities {
        for (phase, value) in f {
            pairs.push((format!("fidelity_{phase}"), fmt_f64(*value)));
        }
    }
    write_kv(&pairs)
}

pub fn read_observables(text: &str) -> Result<ObservableSet> {
    let pairs = read_kv(text)?;
    let lookup = |key: &str| -> Result<&str> {
        pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::parse(0, format!("missing key '{key}'")))
    };
    let mut fidelities = std::collections::BTreeMap::new();
    for (k, v) in &pairs {
        if let Some(phase) = k.strip_prefix("fidelity_") {
            let phase = match phase {
                "localized" => Phase::Localized,
                "w" => Phase::W,
                "superfluid" => Phase::Superfluid,
                other => return Err(Error::parse(0, format!("unknown phase '{other}'"))),
            };
            fidelities.insert(phase, parse_f64(0, k, v)?);
        }
    }
    Ok(ObservableSet {
        energy_scaled: parse_f64(0, "energy_scaled", lookup("energy_scaled")?)?,
        ipr_s: parse_f64(0, "ipr_s", lookup("ipr_s")?)?,
        ipr_r: parse_f64(0, "ipr_r", lookup("ipr_r")?)?,
        occupations_s: parse_float_list(0, "occupations_s", lookup("occupations_s")?)?,
        occupations_r: parse_float_list(0, "occupations_r", lookup("occupations_r")?)?,
        fidelities: (!fidelities.is_empty()).then_some(fidelities),
    })
}

// ---------------------------------------------------------------------------
// Checkpoint records: one self-describing line per finished cell
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CheckpointRecord {
    pub spec_hash: u64,
    pub cell_index: u64,
    pub stats: CellStats,
}

fn fmt_mean_se_packed(m: &MeanSe) -> String {
    format!("{}:{}", fmt_f64(m.mean), fmt_se(m.se))
}

fn parse_mean_se_packed(line: usize, field: &str, s: &str) -> Result<MeanSe> {
    let (m, se) = s
        .split_once(':')
        .ok_or_else(|| Error::parse(line, format!("expected mean:se in '{field}'")))?;
    Ok(MeanSe {
        mean: parse_f64(line, field, m)?,
        se: parse_se(line, field, se)?,
    })
}

/// Append one checkpoint line to `out`.
pub fn write_checkpoint_record(out: &mut String, spec_hash: u64, cell_index: u64, c: &CellStats) {
    out.push_str(&format!(
        "spec={spec_hash:016x} cell={cell_index} tau={} delta={} n={} skipped={} ps={} pr={} eps={}",
        fmt_f64(c.tau),
        fmt_f64(c.delta),
        c.realizations,
        c.skipped,
        fmt_mean_se_packed(&c.ps),
        fmt_mean_se_packed(&c.pr),
        fmt_mean_se_packed(&c.eps),
    ));
    if let (Some(fl), Some(fw), Some(fs)) = (&c.fid_localized, &c.fid_w, &c.fid_superfluid) {
        out.push_str(&format!(
            " floc={} fw={} fsf={}",
            fmt_mean_se_packed(fl),
            fmt_mean_se_packed(fw),
            fmt_mean_se_packed(fs),
        ));
    }
    out.push('\n');
}

/// Parse a whole checkpoint file.
pub fn read_checkpoint(text: &str) -> Result<Vec<CheckpointRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_checkpoint_line(i + 1, line)?);
    }
    Ok(records)
}

/// Parse one checkpoint record line.
pub fn parse_checkpoint_line(ln: usize, line: &str) -> Result<CheckpointRecord> {
    let mut fields: Vec<(&str, &str)> = Vec::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(ln, format!("expected key=value, found '{tok}'")))?;
        if fields.iter().any(|(seen, _)| *seen == k) {
            return Err(Error::parse(ln, format!("duplicate key '{k}'")));
        }
        fields.push((k, v));
    }
    let get = |key: &str| -> Result<&str> {
        fields
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::parse(ln, format!("missing key '{key}'")))
    };
    const KNOWN: [&str; 12] = [
        "spec", "cell", "tau", "delta", "n", "skipped", "ps", "pr", "eps", "floc", "fw", "fsf",
    ];
    for (k, _) in &fields {
        if !KNOWN.contains(k) {
            return Err(Error::parse(ln, format!("unknown key '{k}'")));
        }
    }
    let spec_hash = u64::from_str_radix(get("spec")?, 16)
        .map_err(|_| Error::parse(ln, "invalid spec hash"))?;
    let has_fid = fields.iter().any(|(k, _)| *k == "floc");
    let fid = |key: &str| -> Result<Option<MeanSe>> {
        if has_fid {
            Ok(Some(parse_mean_se_packed(ln, key, get(key)?)?))
        } else {
            Ok(None)
        }
    };
    Ok(CheckpointRecord {
        spec_hash,
        cell_index: parse_int(ln, "cell", get("cell")?)?,
        stats: CellStats {
            tau: parse_f64(ln, "tau", get("tau")?)?,
            delta: parse_f64(ln, "delta", get("delta")?)?,
            realizations: parse_int(ln, "n", get("n")?)?,
            skipped: parse_int(ln, "skipped", get("skipped")?)?,
            ps: parse_mean_se_packed(ln, "ps", get("ps")?)?,
            pr: parse_mean_se_packed(ln, "pr", get("pr")?)?,
            eps: parse_mean_se_packed(ln, "eps", get("eps")?)?,
            fid_localized: fid("floc")?,
            fid_w: fid("fw")?,
            fid_superfluid: fid("fsf")?,
        },
    })
}

// ---------------------------------------------------------------------------
// Binary state vectors
// ---------------------------------------------------------------------------

const STATE_MAGIC: &[u8; 4] = b"BHSV";
const STATE_VERSION: u16 = 1;
const BASIS_TAG: &[u8; 16] = b"lexdec-occ\0\0\0\0\0\0";

#[derive(Debug, Clone)]
pub struct StateVectorFile {
    pub l: u32,
    pub n: u32,
    pub boundary: Boundary,
    pub data: Vec<f64>,
}

/// Serialize a state vector: a 40-byte header (magic, version, boundary,
/// L, N, dimension, basis-order tag) followed by little-endian doubles in
/// basis order.
pub fn write_state_vector(
    out: &mut Vec<u8>,
    l: u32,
    n: u32,
    boundary: Boundary,
    data: &[f64],
) -> Result<()> {
    let dim = basis_size(l as usize, n)?;
    if data.len() != dim {
        return Err(Error::domain(format!(
            "state has {} entries, sector (L={l}, N={n}) has {dim}",
            data.len()
        )));
    }
    out.extend_from_slice(STATE_MAGIC);
    out.extend_from_slice(&STATE_VERSION.to_le_bytes());
    out.push(match boundary {
        Boundary::Open => 0,
        Boundary::Periodic => 1,
    });
    out.push(0); // reserved
    out.extend_from_slice(&l.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&(dim as u64).to_le_bytes());
    out.extend_from_slice(BASIS_TAG);
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(())
}

/// Parse and validate a state-vector file. The declared dimension must match
/// the `(L, N)` sector exactly and the payload must end at EOF.
pub fn read_state_vector(mut r: impl Read) -> Result<StateVectorFile> {
    let mut header = [0u8; 40];
    r.read_exact(&mut header)
        .map_err(|_| Error::parse(0, "truncated header"))?;
    if &header[0..4] != STATE_MAGIC {
        return Err(Error::parse(0, "bad magic"));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != STATE_VERSION {
        return Err(Error::parse(0, format!("unsupported version {version}")));
    }
    let boundary = match header[6] {
        0 => Boundary::Open,
        1 => Boundary::Periodic,
        other => return Err(Error::parse(0, format!("unknown boundary tag {other}"))),
    };
    if header[7] != 0 {
        return Err(Error::parse(0, "nonzero reserved byte"));
    }
    let l = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let n = u32::from_le_bytes(header[12..16].try_into().unwrap());
    let dim = u64::from_le_bytes(header[16..24].try_into().unwrap());
    if &header[24..40] != BASIS_TAG {
        return Err(Error::parse(0, "unknown basis-order tag"));
    }
    if dim > STATE_VECTOR_READ_CAP {
        return Err(Error::capacity(format!(
            "state vector declares dimension {dim} beyond the read cap"
        )));
    }
    let expected = basis_size(l as usize, n).map_err(|e| match e {
        Error::Capacity(m) => Error::Capacity(m),
        _ => Error::parse(0, format!("invalid sector (L={l}, N={n})")),
    })?;
    if dim as usize != expected {
        return Err(Error::parse(
            0,
            format!("declared dimension {dim} but sector (L={l}, N={n}) has {expected}"),
        ));
    }
    let mut payload = vec![0u8; dim as usize * 8];
    r.read_exact(&mut payload)
        .map_err(|_| Error::parse(0, "truncated payload"))?;
    let mut probe = [0u8; 1];
    if r.read(&mut probe).map_err(Error::Io)? != 0 {
        return Err(Error::parse(0, "trailing bytes after payload"));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(StateVectorFile { l, n, boundary, data })
}

// ---------------------------------------------------------------------------
// Matrix Market dump (writer only; for cross-checks in external tools)
// ---------------------------------------------------------------------------

pub fn write_matrix_market(op: &SparseOperator) -> String {
    let dim = op.dimension();
    let mut entries = Vec::new();
    for i in 0..dim {
        for (j, v) in op.row(i) {
            if j <= i {
                entries.push((i + 1, j + 1, v));
            }
        }
    }
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str(&format!("{dim} {dim} {}\n", entries.len()));
    for (i, j, v) in entries {
        out.push_str(&format!("{i} {j} {}\n", fmt_f64(v)));
    }
    out
}
