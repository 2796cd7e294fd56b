//! MPS export and an independent MPS reader.
//!
//! The writer is a pure function of the model: identical models always
//! produce identical bytes. Row and column order is insertion order.
//! Numbers are rendered with Rust's shortest exact representation so a
//! parse of the written file reproduces every coefficient bit-for-bit.
//!
//! The reader is written against the MPS section grammar, not against the
//! writer, and is used by the solver bridge and by round-trip checks.

use super::{MilpModel, Sense, VarKind};
use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet};

/// Output flavor for [`MilpModel::to_mps`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsFormat {
    /// Legacy-compatible: names truncated to 8 characters with a
    /// collision-checked hash suffix.
    Fixed,
    /// Full structured names (whitespace-delimited fields).
    Free,
}

/// An exported model plus the emitted-name maps needed to decode solutions.
#[derive(Debug, Clone)]
pub struct MpsDocument {
    pub text: String,
    pub format: MpsFormat,
    /// Emitted column name per model variable index.
    pub var_names: Vec<String>,
    /// Emitted row name per model constraint index.
    pub row_names: Vec<String>,
    pub objective_row: String,
}

fn render(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e10) {
        format!("{x:E}")
    } else {
        format!("{x}")
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '(' | ',' | ' ' => '_',
            ')' => '.',
            c => c,
        })
        .collect()
}

/// Shorten `full` to at most 8 characters, keeping a recognizable prefix
/// and appending a hash suffix checked against `used` for collisions.
fn mangle(full: &str, used: &mut HashSet<String>) -> String {
    let clean = sanitize(full);
    if clean.len() <= 8 && !used.contains(&clean) {
        used.insert(clean.clone());
        return clean;
    }
    let prefix: String = clean.chars().take(4).collect();
    for salt in 0u32.. {
        let mut h: u32 = 2166136261;
        for b in full.as_bytes() {
            h ^= *b as u32;
            h = h.wrapping_mul(16777619);
        }
        h = h.wrapping_add(salt.wrapping_mul(0x9e3779b9));
        let cand = format!("{prefix}{:04x}", h & 0xffff);
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
    }
    unreachable!()
}

impl MilpModel {
    /// Render the model as MPS text.
    pub fn to_mps(&self, format: MpsFormat) -> MpsDocument {
        let mut used = HashSet::new();
        used.insert("COST".to_string());
        let emit = |full: &str, used: &mut HashSet<String>| match format {
            MpsFormat::Fixed => mangle(full, used),
            MpsFormat::Free => {
                used.insert(full.to_string());
                full.to_string()
            }
        };
        let row_names: Vec<String> = self
            .constrs()
            .iter()
            .map(|c| emit(&c.name, &mut used))
            .collect();
        let var_names: Vec<String> = self
            .vars()
            .iter()
            .map(|v| emit(&v.name, &mut used))
            .collect();

        let name_w = var_names
            .iter()
            .chain(row_names.iter())
            .map(|n| n.len())
            .max()
            .unwrap_or(8)
            .max(8);

        let mut text = String::new();
        text.push_str(&format!("NAME          {}\n", sanitize(&self.name)));
        text.push_str("ROWS\n");
        text.push_str(" N  COST\n");
        for (c, rn) in self.constrs().iter().zip(&row_names) {
            let tag = match c.sense {
                Sense::Le => 'L',
                Sense::Eq => 'E',
                Sense::Ge => 'G',
            };
            text.push_str(&format!(" {tag}  {rn}\n"));
        }

        // Column entries grouped per variable, objective first, then
        // constraints in insertion order.
        let mut per_var: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.num_vars()];
        for (ci, c) in self.constrs().iter().enumerate() {
            for &(v, coeff) in &c.terms {
                per_var[v.0].push((ci, coeff));
            }
        }
        let mut obj_coeff: Vec<Option<f64>> = vec![None; self.num_vars()];
        for &(v, c) in self.objective() {
            obj_coeff[v.0] = Some(c);
        }

        text.push_str("COLUMNS\n");
        let mut in_int = false;
        let mut marker = 0usize;
        for (vi, v) in self.vars().iter().enumerate() {
            let want_int = v.kind == VarKind::Binary;
            if want_int != in_int {
                let kind = if want_int { "'INTORG'" } else { "'INTEND'" };
                text.push_str(&format!(
                    "    {:<w$}  'MARKER'                 {kind}\n",
                    format!("M{marker:06}"),
                    w = name_w
                ));
                marker += 1;
                in_int = want_int;
            }
            let vn = &var_names[vi];
            let mut wrote = false;
            if let Some(c) = obj_coeff[vi] {
                text.push_str(&format!(
                    "    {:<w$}  {:<w$}  {}\n",
                    vn,
                    "COST",
                    render(c),
                    w = name_w
                ));
                wrote = true;
            }
            for &(ci, coeff) in &per_var[vi] {
                text.push_str(&format!(
                    "    {:<w$}  {:<w$}  {}\n",
                    vn,
                    row_names[ci],
                    render(coeff),
                    w = name_w
                ));
                wrote = true;
            }
            if !wrote {
                // Keep otherwise-unreferenced columns alive in the file.
                text.push_str(&format!(
                    "    {:<w$}  {:<w$}  0\n",
                    vn,
                    "COST",
                    w = name_w
                ));
            }
        }
        if in_int {
            text.push_str(&format!(
                "    {:<w$}  'MARKER'                 'INTEND'\n",
                format!("M{marker:06}"),
                w = name_w
            ));
        }

        text.push_str("RHS\n");
        for (ci, c) in self.constrs().iter().enumerate() {
            if c.rhs != 0.0 {
                text.push_str(&format!(
                    "    {:<w$}  {:<w$}  {}\n",
                    "RHS",
                    row_names[ci],
                    render(c.rhs),
                    w = name_w
                ));
            }
        }

        text.push_str("BOUNDS\n");
        for (vi, v) in self.vars().iter().enumerate() {
            let vn = &var_names[vi];
            let w = name_w;
            if v.lower == v.upper {
                text.push_str(&format!(
                    " FX BND       {:<w$}  {}\n",
                    vn,
                    render(v.lower)
                ));
            } else if v.kind == VarKind::Binary {
                text.push_str(&format!(" BV BND       {vn}\n"));
            } else {
                let lo_finite = v.lower.is_finite();
                let up_finite = v.upper.is_finite();
                match (lo_finite, up_finite) {
                    (false, false) => {
                        text.push_str(&format!(" FR BND       {vn}\n"));
                    }
                    (false, true) => {
                        text.push_str(&format!(" MI BND       {vn}\n"));
                        text.push_str(&format!(
                            " UP BND       {:<w$}  {}\n",
                            vn,
                            render(v.upper)
                        ));
                    }
                    (true, up) => {
                        if v.lower != 0.0 {
                            text.push_str(&format!(
                                " LO BND       {:<w$}  {}\n",
                                vn,
                                render(v.lower)
                            ));
                        }
                        if up {
                            text.push_str(&format!(
                                " UP BND       {:<w$}  {}\n",
                                vn,
                                render(v.upper)
                            ));
                        }
                    }
                }
            }
        }
        text.push_str("ENDATA\n");

        MpsDocument {
            text,
            format,
            var_names,
            row_names,
            objective_row: "COST".to_string(),
        }
    }

    /// Write MPS to a file.
    pub fn export_mps(&self, path: &std::path::Path, format: MpsFormat) -> Result<MpsDocument> {
        let doc = self.to_mps(format);
        std::fs::write(path, &doc.text).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(doc)
    }
}

impl MilpModel {
    /// Render the model in CPLEX LP format (optional alternative to MPS
    /// for solvers and humans that prefer it).
    pub fn to_lp(&self) -> String {
        let term = |v: &str, c: f64| {
            if c >= 0.0 {
                format!(" + {c} {v}")
            } else {
                format!(" - {} {v}", -c)
            }
        };
        let mut out = String::from("Minimize\n obj:");
        for &(v, c) in self.objective() {
            out.push_str(&term(&sanitize(&self.vars()[v.0].name), c));
        }
        out.push_str("\nSubject To\n");
        for c in self.constrs() {
            out.push_str(&format!(" {}:", sanitize(&c.name)));
            for &(v, coeff) in &c.terms {
                out.push_str(&term(&sanitize(&self.vars()[v.0].name), coeff));
            }
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            out.push_str(&format!(" {op} {}\n", c.rhs));
        }
        out.push_str("Bounds\n");
        for v in self.vars() {
            let n = sanitize(&v.name);
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (true, true) => out.push_str(&format!(" {} <= {n} <= {}\n", v.lower, v.upper)),
                (true, false) => out.push_str(&format!(" {n} >= {}\n", v.lower)),
                (false, true) => out.push_str(&format!(" -inf <= {n} <= {}\n", v.upper)),
                (false, false) => out.push_str(&format!(" {n} free\n")),
            }
        }
        let binaries: Vec<String> = self
            .vars()
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| sanitize(&v.name))
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binary\n");
            for b in binaries {
                out.push_str(&format!(" {b}\n"));
            }
        }
        out.push_str("End\n");
        out
    }
}

/// A column read back from MPS.
#[derive(Debug, Clone)]
pub struct MpsVar {
    pub name: String,
    pub integer: bool,
    pub lower: f64,
    pub upper: f64,
}

/// A row read back from MPS.
#[derive(Debug, Clone)]
pub struct MpsRow {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    /// (column index, coefficient) in column appearance order.
    pub terms: Vec<(usize, f64)>,
}

/// Model reconstructed from MPS text.
#[derive(Debug, Clone, Default)]
pub struct ParsedMps {
    pub name: String,
    pub vars: Vec<MpsVar>,
    pub rows: Vec<MpsRow>,
    /// (column index, coefficient) on the objective row.
    pub objective: Vec<(usize, f64)>,
}

impl ParsedMps {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }
}

fn parse_num(tok: &str, line_no: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::MpsParse {
        line: line_no,
        message: format!("bad number {tok:?}"),
    })
}

/// Parse MPS text (fixed or free layout; fields are whitespace-delimited).
pub fn parse_mps(text: &str) -> Result<ParsedMps> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Rows,
        Columns,
        Rhs,
        Ranges,
        Bounds,
        Done,
    }
    let mut section = Section::None;
    let mut parsed = ParsedMps::default();
    let mut obj_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut var_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let is_header = !raw.starts_with(' ') && !raw.starts_with('\t');
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if is_header {
            match fields[0] {
                "NAME" => {
                    parsed.name = fields.get(1).unwrap_or(&"").to_string();
                }
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "RANGES" => section = Section::Ranges,
                "BOUNDS" => section = Section::Bounds,
                "ENDATA" => {
                    section = Section::Done;
                    break;
                }
                other => {
                    return Err(Error::MpsParse {
                        line: line_no,
                        message: format!("unknown section {other}"),
                    })
                }
            }
            continue;
        }
        match section {
            Section::Rows => {
                if fields.len() < 2 {
                    return Err(Error::MpsParse {
                        line: line_no,
                        message: "row line needs type and name".into(),
                    });
                }
                let name = fields[1].to_string();
                match fields[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(name);
                        }
                    }
                    tag @ ("L" | "G" | "E") => {
                        let sense = match tag {
                            "L" => Sense::Le,
                            "G" => Sense::Ge,
                            _ => Sense::Eq,
                        };
                        row_index.insert(name.clone(), parsed.rows.len());
                        parsed.rows.push(MpsRow {
                            name,
                            sense,
                            rhs: 0.0,
                            terms: Vec::new(),
                        });
                    }
                    other => {
                        return Err(Error::MpsParse {
                            line: line_no,
                            message: format!("unknown row type {other}"),
                        })
                    }
                }
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    match *fields.last().unwrap() {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" | "'INTEOF'" => in_int = false,
                        other => {
                            return Err(Error::MpsParse {
                                line: line_no,
                                message: format!("unknown marker {other}"),
                            })
                        }
                    }
                    continue;
                }
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(Error::MpsParse {
                        line: line_no,
                        message: "column line needs name plus (row, value) pairs".into(),
                    });
                }
                let col = fields[0].to_string();
                let vi = *var_index.entry(col.clone()).or_insert_with(|| {
                    parsed.vars.push(MpsVar {
                        name: col,
                        integer: in_int,
                        lower: 0.0,
                        upper: f64::INFINITY,
                    });
                    parsed.vars.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let value = parse_num(pair[1], line_no)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        parsed.objective.push((vi, value));
                    } else {
                        let ri =
                            *row_index.get(pair[0]).ok_or_else(|| Error::MpsParse {
                                line: line_no,
                                message: format!("unknown row {}", pair[0]),
                            })?;
                        parsed.rows[ri].terms.push((vi, value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(Error::MpsParse {
                        line: line_no,
                        message: "RHS line needs set name plus (row, value) pairs".into(),
                    });
                }
                for pair in fields[1..].chunks(2) {
                    if Some(pair[0]) == obj_row.as_deref() {
                        continue; // objective constant: unused by our models
                    }
                    let ri = *row_index.get(pair[0]).ok_or_else(|| Error::MpsParse {
                        line: line_no,
                        message: format!("unknown row {}", pair[0]),
                    })?;
                    parsed.rows[ri].rhs = parse_num(pair[1], line_no)?;
                }
            }
            Section::Ranges => {
                return Err(Error::MpsParse {
                    line: line_no,
                    message: "RANGES sections are not supported".into(),
                });
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(Error::MpsParse {
                        line: line_no,
                        message: "bound line needs type, set, column".into(),
                    });
                }
                let vi = *var_index.get(fields[2]).ok_or_else(|| Error::MpsParse {
                    line: line_no,
                    message: format!("bound on unknown column {}", fields[2]),
                })?;
                let v = &mut parsed.vars[vi];
                match fields[0] {
                    "LO" => v.lower = parse_num(fields[3], line_no)?,
                    "UP" => v.upper = parse_num(fields[3], line_no)?,
                    "FX" => {
                        let x = parse_num(fields[3], line_no)?;
                        v.lower = x;
                        v.upper = x;
                    }
                    "FR" => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    "MI" => v.lower = f64::NEG_INFINITY,
                    "PL" => v.upper = f64::INFINITY,
                    "BV" => {
                        v.integer = true;
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                    "UI" => {
                        v.integer = true;
                        v.upper = parse_num(fields[3], line_no)?;
                    }
                    "LI" => {
                        v.integer = true;
                        v.lower = parse_num(fields[3], line_no)?;
                    }
                    other => {
                        return Err(Error::MpsParse {
                            line: line_no,
                            message: format!("unknown bound type {other}"),
                        })
                    }
                }
            }
            Section::None | Section::Done => {
                return Err(Error::MpsParse {
                    line: line_no,
                    message: "data outside of any section".into(),
                })
            }
        }
    }
    if section != Section::Done {
        return Err(Error::MpsParse {
            line: text.lines().count(),
            message: "missing ENDATA".into(),
        });
    }
    Ok(parsed)
}
