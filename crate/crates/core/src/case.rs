//! MATPOWER case files and renewable designations.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{DrrError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawBus {
    pub id: usize,
    pub bus_type: u8,
    pub load_mw: f64,
    pub load_mvar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawBranch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub reactance_pu: f64,
    pub rate_a_mw: f64,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub status: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawGen {
    pub bus: usize,
    pub p_max_mw: f64,
    pub p_min_mw: f64,
    pub status: bool,
}

/// One `mpc.gencost` row: model 1 is piecewise linear with `(x, y)` pairs,
/// model 2 polynomial with coefficients from the highest order down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenCost {
    pub model: u8,
    pub startup: f64,
    pub shutdown: f64,
    pub coeffs: Vec<f64>,
}

impl GenCost {
    /// Marginal cost used by the initial dispatch: the linear coefficient of
    /// a polynomial, or the end-to-end slope of a piecewise-linear curve.
    pub fn linear_term(&self) -> Option<f64> {
        let v = match self.model {
            2 => match self.coeffs.len() {
                0 | 1 => 0.0,
                n => self.coeffs[n - 2],
            },
            1 => {
                let c = &self.coeffs;
                if c.len() < 4 || c.len() % 2 != 0 {
                    return None;
                }
                let (x0, y0) = (c[0], c[1]);
                let (x1, y1) = (c[c.len() - 2], c[c.len() - 1]);
                if x1 <= x0 {
                    return None;
                }
                (y1 - y0) / (x1 - x0)
            }
            _ => return None,
        };
        v.is_finite().then_some(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCase {
    pub base_mva: f64,
    pub buses: Vec<RawBus>,
    pub branches: Vec<RawBranch>,
    pub generators: Vec<RawGen>,
    pub gencost: Vec<GenCost>,
}

/// Designates generator `generator_index` (0-based row of `mpc.gen`) as a
/// renewable farm with forecast output `forecast_mw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewableSpec {
    pub generator_index: usize,
    pub forecast_mw: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct SidecarEntry {
    gen_index: usize,
    forecast_mw: f64,
}

/// Reads the sidecar JSON `[{"gen_index": k, "forecast_mw": v}, ...]`,
/// where `gen_index` counts `mpc.gen` rows from 1 as MATPOWER does.
pub fn parse_renewables_json(text: &str) -> Result<Vec<RenewableSpec>> {
    let entries: Vec<SidecarEntry> = serde_json::from_str(text)?;
    entries
        .into_iter()
        .map(|e| {
            if e.gen_index == 0 {
                return Err(DrrError::InvalidRenewable("gen_index is 1-based".into()));
            }
            Ok(RenewableSpec {
                generator_index: e.gen_index - 1,
                forecast_mw: e.forecast_mw,
            })
        })
        .collect()
}

pub fn renewables_to_json(specs: &[RenewableSpec]) -> String {
    let rows: Vec<serde_json::Value> = specs
        .iter()
        .map(|s| serde_json::json!({"gen_index": s.generator_index + 1, "forecast_mw": s.forecast_mw}))
        .collect();
    serde_json::to_string_pretty(&rows).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// parsing

struct Table {
    rows: Vec<(usize, usize, Vec<f64>)>,
    line: usize,
    column: usize,
}

struct Scanner<'a> {
    text: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'\n' {
                break;
            }
            self.bump();
        }
    }

    /// Skips blanks and comments, but not newlines.
    fn skip_inline(&mut self) {
        while let Some(c) = self.peek() {
            match c {
                b' ' | b'\t' | b'\r' => {
                    self.bump();
                }
                b'%' => self.skip_comment(),
                b'.' if self.text[self.pos..].starts_with(b"...") => {
                    // continuation: ignore the rest of the line and the newline
                    self.skip_comment();
                    self.bump();
                }
                _ => break,
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> DrrError {
        DrrError::MalformedCase {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    fn read_number(&mut self) -> Result<f64> {
        let start = self.pos;
        let (line, col) = (self.line, self.col);
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || matches!(c, b'.' | b'+' | b'-') {
                self.bump();
            } else {
                break;
            }
        }
        let tok = std::str::from_utf8(&self.text[start..self.pos]).unwrap_or("");
        let v = match tok {
            "Inf" | "inf" => Some(f64::INFINITY),
            "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
            _ => tok.parse::<f64>().ok(),
        };
        v.ok_or_else(|| DrrError::MalformedCase {
            line,
            column: col,
            message: format!("expected a number, found `{tok}`"),
        })
    }

    /// Reads a matrix literal; the opening bracket has been consumed.
    fn read_matrix(&mut self, line: usize, column: usize) -> Result<Table> {
        let mut rows = Vec::new();
        let mut cur: Vec<f64> = Vec::new();
        let mut row_pos = (self.line, self.col);
        loop {
            self.skip_inline();
            let Some(c) = self.peek() else {
                return Err(self.error("unterminated matrix literal"));
            };
            match c {
                b']' => {
                    self.bump();
                    if !cur.is_empty() {
                        rows.push((row_pos.0, row_pos.1, std::mem::take(&mut cur)));
                    }
                    return Ok(Table { rows, line, column });
                }
                b';' | b'\n' => {
                    self.bump();
                    if !cur.is_empty() {
                        rows.push((row_pos.0, row_pos.1, std::mem::take(&mut cur)));
                    }
                }
                b',' => {
                    self.bump();
                }
                _ => {
                    if cur.is_empty() {
                        row_pos = (self.line, self.col);
                    }
                    cur.push(self.read_number()?);
                }
            }
        }
    }

    /// Skips a balanced `{...}` or `[...]` literal or a quoted string.
    fn skip_value(&mut self) -> Result<()> {
        let mut depth = 0i32;
        let mut quoted = false;
        while let Some(c) = self.bump() {
            match c {
                b'\'' => quoted = !quoted,
                _ if quoted => {}
                b'{' | b'[' => depth += 1,
                b'}' | b']' => depth -= 1,
                b'%' => self.skip_comment(),
                b';' | b'\n' if depth <= 0 => return Ok(()),
                _ => {}
            }
        }
        if depth > 0 {
            return Err(self.error("unterminated literal"));
        }
        Ok(())
    }
}

/// Parses the subset of MATLAB used by MATPOWER case files: `mpc.field =`
/// assignments of scalars and matrix literals, with `%` comments.
pub fn parse_matpower(text: &str) -> Result<RawCase> {
    let mut sc = Scanner::new(text);
    let mut tables: HashMap<String, Table> = HashMap::new();
    let mut base_mva: Option<f64> = None;
    while sc.peek().is_some() {
        sc.skip_inline();
        let Some(c) = sc.peek() else { break };
        if c == b'\n' || c == b';' {
            sc.bump();
            continue;
        }
        if !sc.text[sc.pos..].starts_with(b"mpc.") {
            // function header, version string or other statements
            sc.skip_comment();
            continue;
        }
        for _ in 0..4 {
            sc.bump();
        }
        let start = sc.pos;
        while sc
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            sc.bump();
        }
        let name = String::from_utf8_lossy(&sc.text[start..sc.pos]).into_owned();
        sc.skip_inline();
        if sc.peek() != Some(b'=') {
            return Err(sc.error(format!("expected `=` after mpc.{name}")));
        }
        sc.bump();
        sc.skip_inline();
        match sc.peek() {
            Some(b'[') => {
                let (line, column) = (sc.line, sc.col);
                sc.bump();
                let table = sc.read_matrix(line, column)?;
                tables.insert(name, table);
            }
            Some(c) if name == "baseMVA" && (c.is_ascii_digit() || c == b'.') => {
                base_mva = Some(sc.read_number()?);
            }
            _ => sc.skip_value()?,
        }
    }

    let base_mva = base_mva.ok_or_else(|| DrrError::MissingTable("baseMVA".into()))?;
    if !(base_mva > 0.0) {
        return Err(DrrError::MalformedCase {
            line: 1,
            column: 1,
            message: "baseMVA must be positive".into(),
        });
    }
    let take = |tables: &mut HashMap<String, Table>, name: &str| {
        tables
            .remove(name)
            .ok_or_else(|| DrrError::MissingTable(name.into()))
    };
    let bus_t = take(&mut tables, "bus")?;
    let branch_t = take(&mut tables, "branch")?;
    let gen_t = take(&mut tables, "gen")?;
    let cost_t = take(&mut tables, "gencost")?;

    let buses = rows_with_min(&bus_t, "bus", 4)?
        .map(|(_, _, r)| RawBus {
            id: r[0] as usize,
            bus_type: r[1] as u8,
            load_mw: r[2],
            load_mvar: r[3],
        })
        .collect::<Vec<_>>();
    let branches = rows_with_min(&branch_t, "branch", 11)?
        .map(|(_, _, r)| RawBranch {
            from_bus: r[0] as usize,
            to_bus: r[1] as usize,
            reactance_pu: r[3],
            rate_a_mw: r[5],
            angle_min_deg: r.get(11).copied().unwrap_or(-360.0),
            angle_max_deg: r.get(12).copied().unwrap_or(360.0),
            status: r[10] != 0.0,
        })
        .collect::<Vec<_>>();
    let generators = rows_with_min(&gen_t, "gen", 10)?
        .map(|(_, _, r)| RawGen {
            bus: r[0] as usize,
            p_max_mw: r[8],
            p_min_mw: r[9],
            status: r[7] > 0.0,
        })
        .collect::<Vec<_>>();
    let mut gencost = Vec::new();
    for (line, column, r) in rows_with_min(&cost_t, "gencost", 4)? {
        let n = r[3] as usize;
        let need = if r[0] as u8 == 1 { 2 * n } else { n };
        if r.len() < 4 + need {
            return Err(DrrError::MalformedCase {
                line: *line,
                column: *column,
                message: format!(
                    "gencost row declares {n} cost terms but has {} columns",
                    r.len()
                ),
            });
        }
        gencost.push(GenCost {
            model: r[0] as u8,
            startup: r[1],
            shutdown: r[2],
            coeffs: r[4..4 + need].to_vec(),
        });
    }

    if branches.is_empty() {
        return Err(DrrError::MalformedCase {
            line: branch_t.line,
            column: branch_t.column,
            message: "mpc.branch is empty".into(),
        });
    }
    if buses.is_empty() || generators.is_empty() {
        return Err(DrrError::MalformedCase {
            line: bus_t.line,
            column: bus_t.column,
            message: "mpc.bus and mpc.gen must be nonempty".into(),
        });
    }
    // a second block of rows holds reactive costs; only the active ones are kept
    if gencost.len() == 2 * generators.len() {
        gencost.truncate(generators.len());
    }
    if gencost.len() != generators.len() {
        return Err(DrrError::InconsistentDimensions(format!(
            "{} gencost rows for {} generators",
            gencost.len(),
            generators.len()
        )));
    }
    let case = RawCase {
        base_mva,
        buses,
        branches,
        generators,
        gencost,
    };
    check_references(&case)?;
    Ok(case)
}

fn rows_with_min<'t>(
    t: &'t Table,
    name: &str,
    min: usize,
) -> Result<impl Iterator<Item = &'t (usize, usize, Vec<f64>)>> {
    for (line, column, r) in &t.rows {
        if r.len() < min {
            return Err(DrrError::MalformedCase {
                line: *line,
                column: *column,
                message: format!(
                    "mpc.{name} rows need at least {min} columns, found {}",
                    r.len()
                ),
            });
        }
    }
    Ok(t.rows.iter())
}

fn check_references(case: &RawCase) -> Result<()> {
    let ids: HashMap<usize, usize> = case
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id, i))
        .collect();
    if ids.len() != case.buses.len() {
        return Err(DrrError::InconsistentDimensions("duplicate bus ids".into()));
    }
    for (k, br) in case.branches.iter().enumerate() {
        for bus in [br.from_bus, br.to_bus] {
            if !ids.contains_key(&bus) {
                return Err(DrrError::InconsistentDimensions(format!(
                    "branch {} references unknown bus {bus}",
                    k + 1
                )));
            }
        }
        if br.rate_a_mw < 0.0 {
            return Err(DrrError::InconsistentDimensions(format!(
                "branch {} has negative rateA",
                k + 1
            )));
        }
    }
    for (k, g) in case.generators.iter().enumerate() {
        if !ids.contains_key(&g.bus) {
            return Err(DrrError::InconsistentDimensions(format!(
                "generator {} references unknown bus {}",
                k + 1,
                g.bus
            )));
        }
    }
    Ok(())
}

/// Writes `case` back in MATPOWER syntax. Columns the parser does not keep
/// are filled with neutral defaults.
pub fn to_matpower(case: &RawCase, name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "function mpc = {name}\nmpc.version = '2';\nmpc.baseMVA = {};\n",
        case.base_mva
    );
    let _ = writeln!(
        s,
        "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin\nmpc.bus = ["
    );
    for b in &case.buses {
        let _ = writeln!(
            s,
            "\t{} {} {} {} 0 0 1 1 0 1 1 1.1 0.9;",
            b.id, b.bus_type, b.load_mw, b.load_mvar
        );
    }
    let _ = writeln!(
        s,
        "];\n\n%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin\nmpc.gen = ["
    );
    for g in &case.generators {
        let _ = writeln!(
            s,
            "\t{} 0 0 0 0 1 {} {} {} {};",
            g.bus,
            case.base_mva,
            u8::from(g.status),
            g.p_max_mw,
            g.p_min_mw
        );
    }
    let _ = writeln!(s, "];\n\n%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax\nmpc.branch = [");
    for br in &case.branches {
        let _ = writeln!(
            s,
            "\t{} {} 0 {} 0 {} {} {} 0 0 {} {} {};",
            br.from_bus,
            br.to_bus,
            br.reactance_pu,
            br.rate_a_mw,
            br.rate_a_mw,
            br.rate_a_mw,
            u8::from(br.status),
            br.angle_min_deg,
            br.angle_max_deg
        );
    }
    let _ = writeln!(
        s,
        "];\n\n%% model startup shutdown n c(n-1) ... c0\nmpc.gencost = ["
    );
    for c in &case.gencost {
        let n = if c.model == 1 {
            c.coeffs.len() / 2
        } else {
            c.coeffs.len()
        };
        let _ = write!(s, "\t{} {} {} {}", c.model, c.startup, c.shutdown, n);
        for v in &c.coeffs {
            let _ = write!(s, " {v}");
        }
        let _ = writeln!(s, ";");
    }
    let _ = writeln!(s, "];");
    s
}

// ---------------------------------------------------------------------------
// normalized case

#[derive(Debug, Clone, Serialize)]
pub struct Bus {
    pub id: usize,
    pub load_mw: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Line {
    /// 0-based row of `mpc.branch`.
    pub source_row: usize,
    pub from: usize,
    pub to: usize,
    pub reactance_pu: f64,
    /// `None` means unlimited (rateA = 0).
    pub rate_mw: Option<f64>,
    pub angle_min_rad: Option<f64>,
    pub angle_max_rad: Option<f64>,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlexGen {
    /// 0-based row of `mpc.gen`.
    pub source_row: usize,
    pub bus: usize,
    pub p_max_mw: f64,
    pub p_min_mw: f64,
    /// Marginal cost; `None` if the cost record is malformed.
    pub linear_cost: Option<f64>,
    pub name: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RenewableFarm {
    pub source_row: usize,
    pub bus: usize,
    pub capacity_mw: f64,
    pub forecast_mw: f64,
    pub name: String,
}

/// In-service network with generators split into flexible units (`p`) and
/// renewable farms (`w`). Bus references are 0-based indices into `buses`.
#[derive(Debug, Clone, Serialize)]
pub struct CaseData {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub reference: usize,
    pub lines: Vec<Line>,
    pub flexible: Vec<FlexGen>,
    pub renewables: Vec<RenewableFarm>,
}

impl CaseData {
    /// Forecast vector in MW, renewable order.
    pub fn w_bar(&self) -> Vec<f64> {
        self.renewables.iter().map(|r| r.forecast_mw).collect()
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.renewables.iter().map(|r| r.capacity_mw).collect()
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }
}

fn angle_limit(deg: f64, lower: bool) -> Option<f64> {
    // MATPOWER treats 0 and anything at or beyond ±360 as "no limit"
    let active = deg != 0.0 && deg.is_finite() && if lower { deg > -360.0 } else { deg < 360.0 };
    active.then(|| deg.to_radians())
}

/// Drops out-of-service equipment, fixes the reference bus and splits the
/// generators. Renewables are named `R1, R2, ...` in `specs` order and
/// flexible units `G<row>` by their 1-based `mpc.gen` row.
pub fn apply_renewables(raw: &RawCase, specs: &[RenewableSpec]) -> Result<CaseData> {
    let mut seen = BTreeMap::new();
    for s in specs {
        let g = raw
            .generators
            .get(s.generator_index)
            .filter(|g| g.status)
            .ok_or(DrrError::UnknownGenerator(s.generator_index))?;
        if seen.insert(s.generator_index, ()).is_some() {
            return Err(DrrError::DuplicateDesignation(s.generator_index));
        }
        if !(s.forecast_mw >= 0.0 && s.forecast_mw <= g.p_max_mw) {
            return Err(DrrError::InvalidRenewable(format!(
                "forecast {} MW of generator {} outside [0, {}]",
                s.forecast_mw,
                s.generator_index + 1,
                g.p_max_mw
            )));
        }
    }

    // isolated buses (type 4) are dropped together with anything attached
    let kept: Vec<usize> = (0..raw.buses.len())
        .filter(|&i| raw.buses[i].bus_type != 4)
        .collect();
    let index: HashMap<usize, usize> = kept
        .iter()
        .enumerate()
        .map(|(k, &i)| (raw.buses[i].id, k))
        .collect();
    let buses: Vec<Bus> = kept
        .iter()
        .map(|&i| Bus {
            id: raw.buses[i].id,
            load_mw: raw.buses[i].load_mw,
        })
        .collect();
    if buses.is_empty() {
        return Err(DrrError::Islanded("no in-service buses".into()));
    }

    let mut lines = Vec::new();
    let mut label_count: HashMap<(usize, usize), usize> = HashMap::new();
    for (row, br) in raw.branches.iter().enumerate() {
        if !br.status {
            continue;
        }
        let (Some(&from), Some(&to)) = (index.get(&br.from_bus), index.get(&br.to_bus)) else {
            return Err(DrrError::Islanded(format!(
                "branch {} touches an isolated bus",
                row + 1
            )));
        };
        let c = label_count.entry((br.from_bus, br.to_bus)).or_insert(0);
        *c += 1;
        let label = if *c == 1 {
            format!("line {}-{}", br.from_bus, br.to_bus)
        } else {
            format!("line {}-{} #{}", br.from_bus, br.to_bus, c)
        };
        lines.push(Line {
            source_row: row,
            from,
            to,
            reactance_pu: br.reactance_pu,
            rate_mw: (br.rate_a_mw > 0.0).then_some(br.rate_a_mw),
            angle_min_rad: angle_limit(br.angle_min_deg, true),
            angle_max_rad: angle_limit(br.angle_max_deg, false),
            label,
        });
    }

    let mut flexible = Vec::new();
    let mut renewables = Vec::with_capacity(specs.len());
    for (row, g) in raw.generators.iter().enumerate() {
        if !g.status || specs.iter().any(|s| s.generator_index == row) {
            continue;
        }
        let Some(&bus) = index.get(&g.bus) else {
            continue;
        };
        flexible.push(FlexGen {
            source_row: row,
            bus,
            p_max_mw: g.p_max_mw,
            p_min_mw: g.p_min_mw,
            linear_cost: raw.gencost[row].linear_term(),
            name: format!("G{}", row + 1),
        });
    }
    for (k, s) in specs.iter().enumerate() {
        let g = &raw.generators[s.generator_index];
        let bus = *index
            .get(&g.bus)
            .ok_or(DrrError::UnknownGenerator(s.generator_index))?;
        renewables.push(RenewableFarm {
            source_row: s.generator_index,
            bus,
            capacity_mw: g.p_max_mw,
            forecast_mw: s.forecast_mw,
            name: format!("R{}", k + 1),
        });
    }

    let reference = kept
        .iter()
        .position(|&i| raw.buses[i].bus_type == 3)
        .or_else(|| flexible.first().map(|g| g.bus))
        .ok_or_else(|| DrrError::Islanded("no reference bus and no flexible generator".into()))?;

    let case = CaseData {
        base_mva: raw.base_mva,
        buses,
        reference,
        lines,
        flexible,
        renewables,
    };
    check_connected(&case)?;
    Ok(case)
}

fn check_connected(case: &CaseData) -> Result<()> {
    let n = case.buses.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for l in &case.lines {
        let (a, b) = (find(&mut parent, l.from), find(&mut parent, l.to));
        parent[a] = b;
    }
    let root = find(&mut parent, case.reference);
    let stray: Vec<usize> = (0..n)
        .filter(|&i| find(&mut parent, i) != root)
        .map(|i| case.buses[i].id)
        .collect();
    if stray.is_empty() {
        Ok(())
    } else {
        Err(DrrError::Islanded(format!(
            "buses {stray:?} are not connected to the reference bus"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str =
        "function mpc = t\nmpc.baseMVA = 100;\nmpc.bus = [\n 1 1 0 0;\n 2 3 150 0;\n];\n\
        mpc.gen = [1 0 0 0 0 1 100 1 100 0; 2 0 0 0 0 1 100 1 50 0];\n\
        mpc.branch = [1 2 0 0.1 0 70 70 70 0 0 1 -360 360];\n\
        mpc.gencost = [2 0 0 2 10 0; 2 0 0 2 20 0];\n";

    #[test]
    fn parses_minimal_case() {
        let c = parse_matpower(TWO_BUS).unwrap();
        assert_eq!(c.buses.len(), 2);
        assert_eq!(c.generators[1].p_max_mw, 50.0);
        assert_eq!(c.gencost[0].linear_term(), Some(10.0));
    }

    #[test]
    fn reports_position_of_bad_number() {
        let bad = TWO_BUS.replace("150", "15x0");
        match parse_matpower(&bad) {
            Err(DrrError::MalformedCase { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn piecewise_slope() {
        let c = GenCost {
            model: 1,
            startup: 0.0,
            shutdown: 0.0,
            coeffs: vec![0.0, 0.0, 50.0, 500.0, 100.0, 1500.0],
        };
        assert_eq!(c.linear_term(), Some(15.0));
    }

    #[test]
    fn angle_limits_follow_matpower_convention() {
        assert_eq!(angle_limit(0.0, true), None);
        assert_eq!(angle_limit(-360.0, true), None);
        assert!(angle_limit(30.0, false).is_some());
    }
}
