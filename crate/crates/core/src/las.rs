//! LAS 2.0 reading and writing.
//!
//! Parsing happens in two passes. [`LasDocument::parse`] splits the text into
//! sections of `MNEM.UNIT VALUE : DESCRIPTION` lines and a data block, mapping
//! null-sentinel tokens to `None`. [`LasDocument::to_well`] then interprets the
//! header, resolves curve mnemonics through an [`AliasTable`] and builds a
//! metric [`WellLog`].
//!
//! Wrapped data (`WRAP. YES`) and LAS 3.0 files are rejected.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::well::{CoordSystem, DepthUnit, ExtraCurve, PropertyKind, WellHeader, WellLog};

/// Relative tolerance when comparing a numeric token against NULL.
const NULL_TOLERANCE: f64 = 1e-9;
/// Allowed drift of a data-row depth from its grid position, as a fraction of step.
const ROW_DEPTH_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct MnemonicLine {
    pub mnemonic: String,
    pub unit: String,
    pub value: String,
    pub description: String,
    pub line: usize,
}

impl MnemonicLine {
    /// Parses one `MNEM.UNIT VALUE : DESCRIPTION` header line.
    pub fn parse(text: &str, line: usize) -> Result<MnemonicLine> {
        let dot = text
            .find('.')
            .ok_or_else(|| Error::parse(line, format!("expected MNEM.UNIT, got {:?}", text.trim())))?;
        let mnemonic = text[..dot].trim();
        if mnemonic.is_empty() {
            return Err(Error::parse(line, "empty mnemonic"));
        }
        let rest = &text[dot + 1..];
        let unit_len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let unit = &rest[..unit_len];
        let rest = &rest[unit_len..];
        let (value, description) = match rest.rfind(':') {
            Some(colon) => (&rest[..colon], &rest[colon + 1..]),
            None => (rest, ""),
        };
        // a unit glued to the colon ("NULL.:...") leaves a trailing ':' in unit
        let unit = unit.strip_suffix(':').unwrap_or(unit);
        Ok(MnemonicLine {
            mnemonic: mnemonic.to_string(),
            unit: unit.trim().to_string(),
            value: value.trim().to_string(),
            description: description.trim().to_string(),
            line,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    /// Upper-case section letter (`V`, `W`, `C`, `P`, `O`, ...).
    pub tag: char,
    pub line: usize,
    pub entries: Vec<MnemonicLine>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub line: usize,
    pub values: Vec<Option<f64>>,
}

/// Syntactic view of a LAS file.
#[derive(Debug, Clone, PartialEq)]
pub struct LasDocument {
    pub sections: Vec<Section>,
    pub data: Vec<DataRow>,
}

struct NullSentinel {
    text: String,
    value: f64,
}

impl NullSentinel {
    fn matches(&self, token: &str, parsed: Option<f64>) -> bool {
        if token == self.text {
            return true;
        }
        match parsed {
            Some(v) => (v - self.value).abs() <= NULL_TOLERANCE * self.value.abs().max(1.0),
            None => false,
        }
    }
}

impl LasDocument {
    pub fn parse(text: &str) -> Result<LasDocument> {
        let mut sections: Vec<Section> = Vec::new();
        let mut data = Vec::new();
        let mut null: Option<NullSentinel> = None;
        let mut in_data = false;
        let mut in_other = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(tag) = line.strip_prefix('~') {
                let tag = tag
                    .chars()
                    .next()
                    .ok_or_else(|| Error::parse(line_no, "section marker without a name"))?
                    .to_ascii_uppercase();
                if in_data {
                    return Err(Error::parse(line_no, "section after the ~A data block"));
                }
                in_other = tag == 'O';
                if tag == 'A' {
                    check_version(&sections)?;
                    if null.is_none() {
                        null = Some(find_null(&sections)?);
                    }
                    in_data = true;
                }
                sections.push(Section { tag, line: line_no, entries: Vec::new() });
                continue;
            }
            let Some(current) = sections.last_mut() else {
                return Err(Error::parse(line_no, "content before the first section"));
            };
            if in_data {
                let sentinel = null.as_ref().expect("null resolved before ~A");
                let mut values = Vec::new();
                for token in line.split_whitespace() {
                    let parsed = token.parse::<f64>().ok();
                    if sentinel.matches(token, parsed) {
                        values.push(None);
                    } else {
                        match parsed {
                            Some(v) if v.is_finite() => values.push(Some(v)),
                            _ => {
                                return Err(Error::parse(
                                    line_no,
                                    format!("non-numeric data token {token:?}"),
                                ))
                            }
                        }
                    }
                }
                data.push(DataRow { line: line_no, values });
            } else if !in_other {
                let entry = MnemonicLine::parse(raw, line_no)?;
                current.entries.push(entry);
            }
        }

        if !in_data {
            check_version(&sections)?;
        }
        Ok(LasDocument { sections, data })
    }

    pub fn section(&self, tag: char) -> Option<&Section> {
        self.sections.iter().find(|s| s.tag == tag)
    }

    fn entry(&self, tag: char, mnemonic: &str) -> Option<&MnemonicLine> {
        self.section(tag)?
            .entries
            .iter()
            .find(|e| e.mnemonic.eq_ignore_ascii_case(mnemonic))
    }

    /// Interprets the document as a metric well.
    pub fn to_well(&self, options: &ParseOptions) -> Result<WellLog> {
        let well_section = self
            .section('W')
            .ok_or_else(|| Error::parse(0, "missing ~W (well information) section"))?;
        let required = |mnem: &str| -> Result<&MnemonicLine> {
            self.entry('W', mnem).ok_or_else(|| {
                Error::parse(well_section.line, format!("missing mandatory ~W entry {mnem}"))
            })
        };
        let number = |entry: &MnemonicLine| -> Result<f64> {
            entry
                .value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::parse(entry.line, format!("{} is not a number: {:?}", entry.mnemonic, entry.value))
                })
        };
        let strt = required("STRT")?;
        let stop = required("STOP")?;
        let step = required("STEP")?;
        let null = required("NULL")?;
        let start_depth = number(strt)?;
        let stop_depth = number(stop)?;
        let step_value = number(step)?;
        let null_value = number(null)?;
        if !(step_value > 0.0) {
            return Err(Error::parse(step.line, format!("STEP must be > 0, got {step_value}")));
        }

        let curve_section = self
            .section('C')
            .ok_or_else(|| Error::parse(0, "missing ~C (curve information) section"))?;
        if curve_section.entries.len() < 2 {
            return Err(Error::parse(curve_section.line, "~C must declare depth and at least one curve"));
        }
        let depth_entry = &curve_section.entries[0];

        let unit_text = [strt, stop, step, depth_entry]
            .iter()
            .map(|e| e.unit.as_str())
            .find(|u| !u.is_empty())
            .ok_or_else(|| Error::parse(strt.line, "no depth unit declared"))?;
        let depth_unit: DepthUnit = unit_text.parse()?;

        // column index -> destination
        let mut slots: Vec<Option<PropertyKind>> = Vec::new();
        let mut seen: BTreeMap<PropertyKind, Vec<String>> = BTreeMap::new();
        for entry in &curve_section.entries[1..] {
            let kind = options.aliases.resolve(&entry.mnemonic);
            if let Some(k) = kind {
                seen.entry(k).or_default().push(entry.mnemonic.clone());
            }
            slots.push(kind);
        }
        let duplicates: Vec<String> = seen
            .iter()
            .filter(|(_, names)| names.len() > 1)
            .map(|(k, names)| format!("{k}: {}", names.join("/")))
            .collect();
        if !duplicates.is_empty() {
            return Err(Error::parse(
                curve_section.line,
                format!("duplicated curves: {}", duplicates.join("; ")),
            ));
        }

        let header = WellHeader {
            well_name: self
                .entry('W', "WELL")
                .map(|e| e.value.clone())
                .unwrap_or_default(),
            x: None,
            y: None,
            coord_system: CoordSystem::ProjectedMeters,
            start_depth,
            stop_depth,
            step: step_value,
            null_value,
            depth_unit,
        };
        let header = self.with_coordinates(header, options);
        let rows = header
            .row_count()
            .map_err(|e| Error::parse(stop.line, e.to_string()))?;
        if self.section('A').is_none() {
            return Err(Error::parse(0, "missing ~A data section"));
        }
        if self.data.len() != rows {
            let line = self.data.last().map(|r| r.line).unwrap_or(0);
            return Err(Error::parse(
                line,
                format!("header implies {rows} rows, data block has {}", self.data.len()),
            ));
        }

        let ncols = curve_section.entries.len();
        let mut curves: [Vec<Option<f64>>; 4] = Default::default();
        for c in curves.iter_mut() {
            c.resize(rows, None);
        }
        let mut extras: Vec<ExtraCurve> = curve_section.entries[1..]
            .iter()
            .zip(&slots)
            .filter(|(_, slot)| slot.is_none())
            .map(|(e, _)| ExtraCurve {
                mnemonic: e.mnemonic.clone(),
                unit: e.unit.clone(),
                values: Vec::with_capacity(rows),
            })
            .collect();

        for (i, row) in self.data.iter().enumerate() {
            if row.values.len() != ncols {
                return Err(Error::parse(
                    row.line,
                    format!("expected {ncols} values, found {}", row.values.len()),
                ));
            }
            let depth = row.values[0]
                .ok_or_else(|| Error::parse(row.line, "depth value is null"))?;
            let expected = start_depth + i as f64 * step_value;
            if (depth - expected).abs() > ROW_DEPTH_TOLERANCE * step_value {
                return Err(Error::parse(
                    row.line,
                    format!("depth {depth} is off the regular grid (expected {expected})"),
                ));
            }
            let mut extra_idx = 0;
            for (slot, value) in slots.iter().zip(&row.values[1..]) {
                match slot {
                    Some(kind) => curves[kind.index()][i] = *value,
                    None => {
                        extras[extra_idx].values.push(*value);
                        extra_idx += 1;
                    }
                }
            }
        }
        extras.iter_mut().for_each(|e| e.values.shrink_to_fit());

        let well = WellLog::new(header, curves, extras)
            .map_err(|e| Error::parse(curve_section.line, e.to_string()))?;
        Ok(well.convert_units())
    }

    fn with_coordinates(&self, mut header: WellHeader, options: &ParseOptions) -> WellHeader {
        const XS: [&str; 6] = ["X", "XCOORD", "X_COORD", "XWELL", "EAST", "EASTING"];
        const YS: [&str; 6] = ["Y", "YCOORD", "Y_COORD", "YWELL", "NORTH", "NORTHING"];
        const LONS: [&str; 3] = ["LON", "LONG", "LONGITUDE"];
        const LATS: [&str; 3] = ["LAT", "LATI", "LATITUDE"];

        let lookup = |names: &[&str]| -> Option<&MnemonicLine> {
            ['W', 'P']
                .iter()
                .flat_map(|tag| names.iter().filter_map(move |n| self.entry(*tag, n)))
                .find(|e| e.value.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false))
        };

        let (x, y, declared) = match (lookup(&XS), lookup(&YS)) {
            (Some(x), Some(y)) => {
                let unit = x.unit.to_ascii_uppercase();
                let declared = match unit.as_str() {
                    "M" | "FT" | "F" => Some(CoordSystem::ProjectedMeters),
                    "DEG" | "DEGREES" | "DEGREE" => Some(CoordSystem::GeographicDegrees),
                    _ => None,
                };
                (x, y, declared)
            }
            _ => match (lookup(&LONS), lookup(&LATS)) {
                (Some(lon), Some(lat)) => (lon, lat, Some(CoordSystem::GeographicDegrees)),
                _ => return header,
            },
        };
        let xv: f64 = x.value.parse().expect("filtered numeric");
        let yv: f64 = y.value.parse().expect("filtered numeric");
        header.x = Some(xv);
        header.y = Some(yv);
        header.coord_system = options.coord_override.or(declared).unwrap_or_else(|| {
            if xv.abs() <= 180.0 && yv.abs() <= 90.0 {
                CoordSystem::GeographicDegrees
            } else {
                CoordSystem::ProjectedMeters
            }
        });
        header
    }
}

fn check_version(sections: &[Section]) -> Result<()> {
    let entry = |mnemonic: &str| {
        sections
            .iter()
            .filter(|s| s.tag == 'V')
            .flat_map(|s| s.entries.iter())
            .find(|e| e.mnemonic.eq_ignore_ascii_case(mnemonic))
    };
    if let Some(vers) = entry("VERS") {
        let major = vers.value.split('.').next().unwrap_or("").trim();
        if major != "1" && major != "2" {
            return Err(Error::parse(vers.line, format!("unsupported LAS version {:?}", vers.value)));
        }
    }
    if let Some(wrap) = entry("WRAP") {
        if wrap.value.eq_ignore_ascii_case("YES") {
            return Err(Error::parse(wrap.line, "wrapped data (WRAP YES) is not supported"));
        }
    }
    Ok(())
}

fn find_null(sections: &[Section]) -> Result<NullSentinel> {
    let entry = sections
        .iter()
        .filter(|s| s.tag == 'W')
        .flat_map(|s| s.entries.iter())
        .find(|e| e.mnemonic.eq_ignore_ascii_case("NULL"));
    let line = sections.iter().find(|s| s.tag == 'W').map(|s| s.line).unwrap_or(0);
    let entry = entry.ok_or_else(|| Error::parse(line, "missing mandatory ~W entry NULL"))?;
    let value = entry
        .value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(entry.line, format!("NULL is not a number: {:?}", entry.value)))?;
    Ok(NullSentinel { text: entry.value.clone(), value })
}

/// Mnemonic to property mapping. Lookups are case-insensitive.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    map: HashMap<String, PropertyKind>,
}

impl Default for AliasTable {
    fn default() -> Self {
        let pairs: &[(&str, PropertyKind)] = &[
            ("NPHI", PropertyKind::Nphi),
            ("NEU", PropertyKind::Nphi),
            ("TNPH", PropertyKind::Nphi),
            ("GR", PropertyKind::Gr),
            ("GRC", PropertyKind::Gr),
            ("RHOB", PropertyKind::Rhob),
            ("DEN", PropertyKind::Rhob),
            ("RHOZ", PropertyKind::Rhob),
            ("DT", PropertyKind::Vp),
            ("AC", PropertyKind::Vp),
            ("DTC", PropertyKind::Vp),
            ("VP", PropertyKind::Vp),
        ];
        AliasTable {
            map: pairs.iter().map(|(m, k)| (m.to_string(), *k)).collect(),
        }
    }
}

impl AliasTable {
    pub fn empty() -> Self {
        AliasTable { map: HashMap::new() }
    }

    pub fn insert(&mut self, mnemonic: &str, kind: PropertyKind) {
        self.map.insert(mnemonic.trim().to_ascii_uppercase(), kind);
    }

    pub fn resolve(&self, mnemonic: &str) -> Option<PropertyKind> {
        self.map.get(&mnemonic.trim().to_ascii_uppercase()).copied()
    }

    /// Built-in defaults extended (and overridden) by a JSON object such as
    /// `{"SGR": "GR", "DTCO": "VP"}`.
    pub fn from_json(json: &str) -> Result<Self> {
        let extra: BTreeMap<String, PropertyKind> = serde_json::from_str(json)?;
        let mut table = AliasTable::default();
        for (mnemonic, kind) in extra {
            table.insert(&mnemonic, kind);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub aliases: AliasTable,
    /// Forces the coordinate system instead of inferring it.
    pub coord_override: Option<CoordSystem>,
}

/// Parses LAS bytes with default aliases.
pub fn parse_las(bytes: &[u8]) -> Result<WellLog> {
    parse_las_with(bytes, &ParseOptions::default())
}

pub fn parse_las_with(bytes: &[u8], options: &ParseOptions) -> Result<WellLog> {
    let text = String::from_utf8_lossy(bytes);
    LasDocument::parse(&text)?.to_well(options)
}

pub fn read_las_file(path: &Path, options: &ParseOptions) -> Result<WellLog> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let well = parse_las_with(&bytes, options)?;
    if well.name().is_empty() {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut header = well.header().clone();
        header.well_name = stem;
        return well.with_header(header);
    }
    Ok(well)
}

/// Serializes a well as LAS 2.0 text. Numbers use the shortest
/// representation that parses back to the same `f64`.
pub fn write_las(well: &WellLog) -> String {
    let h = well.header();
    let unit = match h.depth_unit {
        DepthUnit::Meters => "M",
        DepthUnit::Feet => "F",
    };
    let mut out = String::new();
    out.push_str("~VERSION INFORMATION\n");
    header_line(&mut out, "VERS.", "2.0", "CWLS LOG ASCII STANDARD - VERSION 2.0");
    header_line(&mut out, "WRAP.", "NO", "ONE LINE PER DEPTH STEP");
    out.push_str("~WELL INFORMATION\n");
    header_line(&mut out, &format!("STRT.{unit}"), &fmt_num(h.start_depth), "START DEPTH");
    header_line(&mut out, &format!("STOP.{unit}"), &fmt_num(well.depth(well.rows() - 1)), "STOP DEPTH");
    header_line(&mut out, &format!("STEP.{unit}"), &fmt_num(h.step), "STEP");
    header_line(&mut out, "NULL.", &fmt_num(h.null_value), "NULL VALUE");
    header_line(&mut out, "WELL.", &h.well_name, "WELL");
    if let (Some(x), Some(y)) = (h.x, h.y) {
        match h.coord_system {
            CoordSystem::ProjectedMeters => {
                header_line(&mut out, "XCOORD.M", &fmt_num(x), "X COORDINATE");
                header_line(&mut out, "YCOORD.M", &fmt_num(y), "Y COORDINATE");
            }
            CoordSystem::GeographicDegrees => {
                header_line(&mut out, "LON.DEG", &fmt_num(x), "LONGITUDE");
                header_line(&mut out, "LAT.DEG", &fmt_num(y), "LATITUDE");
            }
        }
    }
    out.push_str("~CURVE INFORMATION\n");
    header_line(&mut out, &format!("DEPT.{unit}"), "", "DEPTH");
    for kind in PropertyKind::ALL {
        header_line(&mut out, &format!("{}.{}", kind.mnemonic(), kind.unit()), "", kind.mnemonic());
    }
    for extra in well.extras() {
        header_line(&mut out, &format!("{}.{}", extra.mnemonic, extra.unit), "", &extra.mnemonic);
    }
    out.push_str("~A\n");
    let null = fmt_num(h.null_value);
    let cell = |v: Option<f64>| v.map(fmt_num).unwrap_or_else(|| null.clone());
    for row in 0..well.rows() {
        let mut fields = Vec::with_capacity(5 + well.extras().len());
        fields.push(fmt_num(well.depth(row)));
        for kind in PropertyKind::ALL {
            fields.push(cell(well.value(kind, row)));
        }
        for extra in well.extras() {
            fields.push(cell(extra.values[row]));
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

fn header_line(out: &mut String, mnemonic: &str, value: &str, description: &str) {
    let _ = writeln!(out, " {mnemonic:<22}{value:>24} : {description}");
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Outcome of reading a directory of LAS files.
#[derive(Debug)]
pub struct Corpus {
    pub wells: Vec<WellLog>,
    pub errors: Vec<FileError>,
}

#[derive(Debug)]
pub struct FileError {
    pub path: PathBuf,
    pub error: Error,
}

/// Parses every `*.las` file in `dir` (not recursive), ordered by file name.
/// Bad files are collected in [`Corpus::errors`].
pub fn load_corpus(dir: &Path, options: &ParseOptions) -> Result<Corpus> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_las = path
            .extension()
            .map(|ext| ext.eq_ignore_ascii_case("las"))
            .unwrap_or(false);
        if is_las && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let results: Vec<(PathBuf, Result<WellLog>)> = paths
        .into_par_iter()
        .map(|p| {
            let r = read_las_file(&p, options);
            (p, r)
        })
        .collect();
    let mut corpus = Corpus { wells: Vec::new(), errors: Vec::new() };
    for (path, result) in results {
        match result {
            Ok(w) => corpus.wells.push(w),
            Err(error) => corpus.errors.push(FileError { path, error }),
        }
    }
    Ok(corpus)
}

/// Writes each well to `dir/<name>.las`.
pub fn write_corpus(dir: &Path, wells: &[WellLog]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    wells
        .iter()
        .map(|w| {
            let path = dir.join(format!("{}.las", sanitize_file_name(w.name())));
            std::fs::write(&path, write_las(w)).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub fn sanitize_file_name(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() {
        "well".to_string()
    } else {
        cleaned
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
~VERSION INFORMATION
 VERS.   2.0 : CWLS LOG ASCII STANDARD
 WRAP.   NO  : ONE LINE PER DEPTH STEP
~WELL INFORMATION
 STRT.M    1000.0 : START
 STOP.M    1000.15 : STOP
 STEP.M    0.15 : STEP
 NULL.     -999.25 : NULL VALUE
 WELL.     TEST-1 : WELL NAME
~CURVE INFORMATION
 DEPT.M          : DEPTH
 GR.API          : GAMMA RAY
 NPHI.V/V        : NEUTRON
 DEN.G/C3        : DENSITY
 DT.US/F         : SONIC
~A
1000.0   -999.25  0.25  2.40  95.0
1000.15  60.5     0.27  2.41  96.5
";

    #[test]
    fn mnemonic_line_grammar() {
        let l = MnemonicLine::parse(" STRT.M   1000.0 : START DEPTH", 3).unwrap();
        assert_eq!(l.mnemonic, "STRT");
        assert_eq!(l.unit, "M");
        assert_eq!(l.value, "1000.0");
        assert_eq!(l.description, "START DEPTH");
        let l = MnemonicLine::parse(" NULL.   -999.25 : NULL", 1).unwrap();
        assert_eq!(l.unit, "");
        assert_eq!(l.value, "-999.25");
        let l = MnemonicLine::parse("DATE.  12:30 2020 : LOG DATE", 1).unwrap();
        assert_eq!(l.value, "12:30 2020");
        assert!(MnemonicLine::parse("no dot here", 7).is_err());
    }

    #[test]
    fn parses_minimal_fixture_with_null() {
        let w = parse_las(MINIMAL.as_bytes()).unwrap();
        assert_eq!(w.name(), "TEST-1");
        assert_eq!(w.rows(), 2);
        assert_eq!(w.value(PropertyKind::Gr, 0), None);
        assert_eq!(w.value(PropertyKind::Gr, 1), Some(60.5));
        assert_eq!(w.value(PropertyKind::Rhob, 0), Some(2.40));
        assert_eq!(w.value(PropertyKind::Vp, 1), Some(96.5));
        assert_eq!(w.value(PropertyKind::Nphi, 0), Some(0.25));
    }

    #[test]
    fn null_matching_accepts_other_float_spellings() {
        let text = MINIMAL.replace("1000.15  60.5", "1000.15  -999.2500");
        let w = parse_las(text.as_bytes()).unwrap();
        assert_eq!(w.value(PropertyKind::Gr, 1), None);
    }

    #[test]
    fn zero_step_is_rejected() {
        let text = MINIMAL.replace("STEP.M    0.15", "STEP.M    0");
        assert!(matches!(parse_las(text.as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn feet_header_is_converted() {
        let text = "\
~V
VERS. 2.0 :
WRAP. NO :
~W
STRT.F 3280.84 :
STOP.F 3281.34 :
STEP.F 0.5 :
NULL. -999.25 :
WELL. FEET-1 :
~C
DEPT.F :
GR.API :
~A
3280.84 50
3281.34 51
";
        let w = parse_las(text.as_bytes()).unwrap();
        assert!((w.header().start_depth - 1000.0).abs() < 1e-3);
        assert_eq!(w.step(), 0.5 * 0.3048);
        assert_eq!(w.header().depth_unit, DepthUnit::Meters);
    }

    #[test]
    fn structural_errors_carry_line_numbers() {
        let text = MINIMAL.replace(" STRT.M    1000.0 : START\n", "");
        match parse_las(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("STRT"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("1000.15  60.5     0.27", "1000.15  60.5");
        match parse_las(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 18),
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("60.5", "abc");
        assert!(matches!(parse_las(text.as_bytes()), Err(Error::Parse { line: 18, .. })));
    }

    #[test]
    fn wrap_mode_and_las3_are_rejected() {
        let text = MINIMAL.replace("WRAP.   NO ", "WRAP.   YES");
        let err = parse_las(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("WRAP"), "{err}");
        let text = MINIMAL.replace("VERS.   2.0", "VERS.   3.0");
        assert!(parse_las(text.as_bytes()).is_err());
    }

    #[test]
    fn duplicate_curves_are_listed() {
        let text = MINIMAL
            .replace(" DT.US/F ", " GRC.API")
            .replace("95.0", "40.0")
            .replace("96.5", "41.0");
        let err = parse_las(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("GR: GR/GRC"), "{err}");
    }

    #[test]
    fn unknown_curves_are_kept_as_extras() {
        let text = MINIMAL.replace(" DT.US/F ", " CALI.IN");
        let w = parse_las(text.as_bytes()).unwrap();
        assert_eq!(w.extras().len(), 1);
        assert_eq!(w.extras()[0].mnemonic, "CALI");
        assert!(w.curve(PropertyKind::Vp).values.iter().all(Option::is_none));
        let again = parse_las(write_las(&w).as_bytes()).unwrap();
        assert_eq!(again, w);
    }

    #[test]
    fn alias_table_from_json_extends_defaults() {
        let table = AliasTable::from_json(r#"{"sgr": "GR", "DTCO": "VP"}"#).unwrap();
        assert_eq!(table.resolve("SGR"), Some(PropertyKind::Gr));
        assert_eq!(table.resolve("dtco"), Some(PropertyKind::Vp));
        assert_eq!(table.resolve("NPHI"), Some(PropertyKind::Nphi));
        assert!(AliasTable::from_json(r#"{"X": "SP"}"#).is_err());
    }

    #[test]
    fn coordinates_are_detected() {
        let with_xy = MINIMAL.replace(
            " WELL.     TEST-1 : WELL NAME\n",
            " WELL.     TEST-1 : WELL NAME\n X.     512345.0 : X\n Y.   5801234.5 : Y\n",
        );
        let w = parse_las(with_xy.as_bytes()).unwrap();
        assert_eq!(w.header().x, Some(512345.0));
        assert_eq!(w.header().coord_system, CoordSystem::ProjectedMeters);

        let with_latlon = MINIMAL.replace(
            " WELL.     TEST-1 : WELL NAME\n",
            " WELL.     TEST-1 : WELL NAME\n LAT.   52.1 : LAT\n LON.   4.3 : LON\n",
        );
        let w = parse_las(with_latlon.as_bytes()).unwrap();
        assert_eq!(w.header().coord_system, CoordSystem::GeographicDegrees);
        assert_eq!((w.header().x, w.header().y), (Some(4.3), Some(52.1)));

        let opts = ParseOptions {
            coord_override: Some(CoordSystem::ProjectedMeters),
            ..ParseOptions::default()
        };
        let w = parse_las_with(with_latlon.as_bytes(), &opts).unwrap();
        assert_eq!(w.header().coord_system, CoordSystem::ProjectedMeters);
    }

    #[test]
    fn round_trip_minimal() {
        let w = parse_las(MINIMAL.as_bytes()).unwrap();
        let text = write_las(&w);
        assert_eq!(parse_las(text.as_bytes()).unwrap(), w);
    }
}
