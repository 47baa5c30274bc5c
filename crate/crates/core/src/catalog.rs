//! Surface catalog and report persistence.
//!
//! # Catalog format
//!
//! UTF-8 text, one surface per line. Blank lines and lines starting with `#`
//! are ignored. Every other line is a space-separated list of `key=value`
//! fields, all required, in any order:
//!
//! | key        | value                                                   |
//! |------------|---------------------------------------------------------|
//! | `surface`  | unique name; a `U`/`N` prefix must match the family     |
//! | `family`   | `unduloidal` or `nodoidal`                              |
//! | `s`, `t`   | torus parameters, `0 < abs(t) < s`                      |
//! | `a`        | profile period                                          |
//! | `k`, `w`   | bulge count and wrapping number, both `>= 1`            |
//! | `B`        | expected bucket counts `B1,B2,B3`                       |
//! | `ind`      | expected Morse index                                    |
//! | `spectrum` | expected nonpositive eigenvalues, comma-separated, with |
//! |            | a double eigenvalue written twice                       |
//!
//! Expected eigenvalues keep their printed text, so the number of decimals
//! each was rounded to is known.
//!
//! # Report format
//!
//! Pretty-printed JSON objects with a top-level `schema_version` (currently
//! `1`) and either a `report` field holding one [`MorseReport`] or a
//! `reports` array. Floats are written in shortest round-trip form.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::morse::MorseReport;
use crate::spectrum::EigenvalueRecord;
use crate::torus::{derive_params, Family, TorusParams};
use crate::{Error, Result};

/// The shipped catalog.
pub const DEFAULT_CATALOG: &str = include_str!("../data/catalog.txt");

/// Environment variable naming a catalog file to use instead of the default.
pub const CATALOG_ENV: &str = "CMC_INDEX_CATALOG";

pub const SCHEMA_VERSION: u32 = 1;

/// An expected eigenvalue as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedValue {
    pub text: String,
    pub value: f64,
    /// Digits after the decimal point in `text`.
    pub decimals: u8,
}

impl ExpectedValue {
    fn parse(text: &str) -> Option<Self> {
        let value: f64 = text.parse().ok()?;
        if !value.is_finite() {
            return None;
        }
        let decimals = text.split_once('.').map_or(0, |(_, frac)| frac.len()) as u8;
        Some(Self {
            text: text.to_string(),
            value,
            decimals,
        })
    }

    /// Half a unit in the last printed place.
    pub fn rounding_radius(&self) -> f64 {
        0.5 * 10f64.powi(-i32::from(self.decimals))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub name: String,
    pub family: Family,
    pub s: f64,
    pub t: f64,
    pub a: f64,
    pub k: u32,
    pub w: u32,
    pub expected_ind: u32,
    pub expected_b: [u32; 3],
    pub expected_spectrum: Vec<ExpectedValue>,
}

impl SurfaceSpec {
    /// Torus parameters with the catalog period as the hint.
    pub fn params(&self) -> Result<TorusParams> {
        derive_params(
            self.s,
            self.t,
            self.k,
            self.w,
            Some(self.a),
            Some(self.family),
        )
    }

    pub fn expected_values(&self) -> Vec<f64> {
        self.expected_spectrum.iter().map(|e| e.value).collect()
    }

    /// Multiplicity of each expected entry: equal consecutive printed values
    /// form a double eigenvalue.
    pub fn expected_multiplicities(&self) -> Vec<u8> {
        let v = &self.expected_spectrum;
        let mut out = vec![1u8; v.len()];
        let mut i = 0;
        while i + 1 < v.len() {
            if v[i].text == v[i + 1].text {
                out[i] = 2;
                out[i + 1] = 2;
                i += 2;
            } else {
                i += 1;
            }
        }
        out
    }
}

/// Parses catalog text; `origin` labels diagnostics.
pub fn parse_catalog(text: &str, origin: &str) -> Result<Vec<SurfaceSpec>> {
    let mut out: Vec<SurfaceSpec> = Vec::new();
    let mut names = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let spec = parse_line(line, origin, i + 1)?;
        if !names.insert(spec.name.clone()) {
            return Err(parse_error(
                origin,
                i + 1,
                "surface",
                format!("duplicate name {}", spec.name),
            ));
        }
        out.push(spec);
    }
    Ok(out)
}

fn parse_error(origin: &str, line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_line(line: &str, origin: &str, n: usize) -> Result<SurfaceSpec> {
    let mut fields = std::collections::HashMap::new();
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_error(origin, n, token, "expected key=value"))?;
        if fields.insert(key, value).is_some() {
            return Err(parse_error(origin, n, key, "repeated field"));
        }
    }
    const KNOWN: [&str; 10] = [
        "surface", "family", "s", "t", "a", "k", "w", "B", "ind", "spectrum",
    ];
    if let Some(unknown) = fields.keys().find(|k| !KNOWN.contains(k)) {
        return Err(parse_error(origin, n, unknown, "unknown field"));
    }
    let get = |key: &str| -> Result<&str> {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| parse_error(origin, n, key, "missing field"))
    };
    let real = |key: &str| -> Result<f64> {
        let v = get(key)?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| parse_error(origin, n, key, format!("not a real number: '{v}'")))
    };
    let int = |key: &str, text: &str| -> Result<u32> {
        text.parse::<u32>().map_err(|_| {
            parse_error(
                origin,
                n,
                key,
                format!("not a nonnegative integer: '{text}'"),
            )
        })
    };

    let name = get("surface")?.to_string();
    let family: Family = get("family")?
        .parse()
        .map_err(|e: Error| parse_error(origin, n, "family", e.to_string()))?;
    let prefix_family = match name.chars().next() {
        Some('U') => Some(Family::Unduloidal),
        Some('N') => Some(Family::Nodoidal),
        _ => None,
    };
    if prefix_family.is_some_and(|f| f != family) {
        return Err(parse_error(
            origin,
            n,
            "family",
            format!("{family} does not match the prefix of {name}"),
        ));
    }

    let b: Vec<u32> = get("B")?
        .split(',')
        .map(|x| int("B", x))
        .collect::<Result<_>>()?;
    let expected_b: [u32; 3] = b
        .try_into()
        .map_err(|_| parse_error(origin, n, "B", "expected three counts B1,B2,B3"))?;
    let expected_spectrum = get("spectrum")?
        .split(',')
        .map(|x| {
            ExpectedValue::parse(x).ok_or_else(|| {
                parse_error(origin, n, "spectrum", format!("not a real number: '{x}'"))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let k = int("k", get("k")?)?;
    let w = int("w", get("w")?)?;
    let spec = SurfaceSpec {
        name,
        family,
        s: real("s")?,
        t: real("t")?,
        a: real("a")?,
        k,
        w,
        expected_ind: int("ind", get("ind")?)?,
        expected_b,
        expected_spectrum,
    };
    spec.params().map_err(|e| {
        let msg = e.to_string();
        let field = if msg.contains("k·x0") || msg.contains("period") {
            "a"
        } else if msg.contains("k and w") {
            "k,w"
        } else if msg.contains("unduloidal") || msg.contains("family") {
            "family"
        } else {
            "s,t"
        };
        parse_error(origin, n, field, msg)
    })?;
    Ok(spec)
}

pub fn load_catalog(path: &Path) -> Result<Vec<SurfaceSpec>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_catalog(&text, &path.display().to_string())
}

/// The catalog named by `CMC_INDEX_CATALOG`, or the shipped one.
pub fn default_catalog() -> Result<Vec<SurfaceSpec>> {
    match std::env::var_os(CATALOG_ENV) {
        Some(p) if !p.is_empty() => load_catalog(&PathBuf::from(p)),
        _ => parse_catalog(DEFAULT_CATALOG, "<built-in catalog>"),
    }
}

pub fn find_surface<'a>(catalog: &'a [SurfaceSpec], name: &str) -> Option<&'a SurfaceSpec> {
    catalog.iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

#[derive(Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    report: &'a MorseReport,
}

#[derive(Serialize)]
struct ReportsFile<'a> {
    schema_version: u32,
    reports: &'a [MorseReport],
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Schema(format!("cannot serialize report: {e}")))?;
    fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("{}: not valid JSON: {e}", path.display())))?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => Ok(value),
        Some(v) => Err(Error::Schema(format!(
            "{}: schema_version {v}, expected {SCHEMA_VERSION}",
            path.display()
        ))),
        None => Err(Error::Schema(format!(
            "{}: missing schema_version",
            path.display()
        ))),
    }
}

pub fn save_report(report: &MorseReport, path: &Path) -> Result<()> {
    write_json(
        &ReportFile {
            schema_version: SCHEMA_VERSION,
            report,
        },
        path,
    )
}

pub fn load_report(path: &Path) -> Result<MorseReport> {
    let mut value = read_json(path)?;
    let report = value
        .get_mut("report")
        .map(serde_json::Value::take)
        .ok_or_else(|| Error::Schema(format!("{}: missing 'report'", path.display())))?;
    serde_json::from_value(report).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

pub fn save_reports(reports: &[MorseReport], path: &Path) -> Result<()> {
    write_json(
        &ReportsFile {
            schema_version: SCHEMA_VERSION,
            reports,
        },
        path,
    )
}

pub fn load_reports(path: &Path) -> Result<Vec<MorseReport>> {
    let mut value = read_json(path)?;
    let reports = value
        .get_mut("reports")
        .map(serde_json::Value::take)
        .ok_or_else(|| Error::Schema(format!("{}: missing 'reports'", path.display())))?;
    serde_json::from_value(reports).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// Computed nonpositive eigenvalues against a catalog row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDiff {
    /// Computed minus expected, entry by entry over the common length.
    pub deltas: Vec<f64>,
    pub max_abs_delta: f64,
    pub computed_len: usize,
    pub expected_len: usize,
    /// Multiplicities agree entry by entry (and the lengths agree).
    pub pattern_matches: bool,
    /// Each delta is within half a unit of the printed last digit.
    pub within_rounding: Vec<bool>,
}

impl SpectrumDiff {
    pub fn matches(&self, tol: f64) -> bool {
        self.pattern_matches && self.max_abs_delta <= tol
    }
}

pub fn diff_spectrum(computed: &[EigenvalueRecord], spec: &SurfaceSpec) -> SpectrumDiff {
    let expected = &spec.expected_spectrum;
    let mults = spec.expected_multiplicities();
    let n = computed.len().min(expected.len());
    let deltas: Vec<f64> = (0..n)
        .map(|i| computed[i].lambda - expected[i].value)
        .collect();
    let within_rounding = (0..n)
        .map(|i| deltas[i].abs() <= expected[i].rounding_radius() + 1e-12)
        .collect();
    let pattern_matches =
        computed.len() == expected.len() && (0..n).all(|i| computed[i].multiplicity == mults[i]);
    SpectrumDiff {
        max_abs_delta: deltas.iter().fold(0.0, |m, d| m.max(d.abs())),
        deltas,
        computed_len: computed.len(),
        expected_len: expected.len(),
        pattern_matches,
        within_rounding,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_rows() {
        let cat = parse_catalog(DEFAULT_CATALOG, "default").unwrap();
        assert_eq!(cat.len(), 28);
        let u1 = &cat[0];
        assert_eq!(u1.name, "U1");
        assert_eq!(
            (u1.s, u1.t, u1.a, u1.k, u1.w),
            (0.4078, 0.1583, 11.7053, 2, 1)
        );
        assert_eq!(u1.expected_values(), vec![-1.28, -1.0, -1.0, -0.25, 0.0]);
        assert_eq!(u1.expected_multiplicities(), vec![1, 2, 2, 1, 1]);
        let n1 = find_surface(&cat, "n1").unwrap();
        assert_eq!(n1.family, Family::Nodoidal);
        assert_eq!(n1.t, -0.0502);
        assert_eq!((n1.expected_ind, n1.expected_b), (12, [0, 3, 1]));
        let names: Vec<&str> = cat.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names[16], "U17");
        assert_eq!(names[27], "N11");
    }

    #[test]
    fn printed_precision_kept() {
        let cat = parse_catalog(DEFAULT_CATALOG, "default").unwrap();
        let u12 = find_surface(&cat, "U12").unwrap();
        let e = &u12.expected_spectrum[7];
        assert_eq!((e.text.as_str(), e.value, e.decimals), ("-.97", -0.97, 2));
        let u9 = find_surface(&cat, "U9").unwrap();
        assert_eq!(u9.expected_spectrum[0].decimals, 3);
        assert_eq!(u9.expected_spectrum[3].decimals, 0);
    }

    fn row(over: &str) -> String {
        let mut base = vec![
            ("surface", "U1"),
            ("family", "unduloidal"),
            ("s", "0.4078"),
            ("t", "0.1583"),
            ("a", "11.7053"),
            ("k", "2"),
            ("w", "1"),
            ("B", "0,1,1"),
            ("ind", "6"),
            ("spectrum", "-1.28,-1,-1,-0.25,0"),
        ];
        for kv in over.split_whitespace() {
            let (k, v) = kv.split_once('=').unwrap();
            match base.iter_mut().find(|(bk, _)| *bk == k) {
                Some(e) => e.1 = v,
                None => base.push((k, v)),
            }
        }
        base.iter()
            .filter(|(_, v)| *v != "-")
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn field_of(err: Error) -> (usize, String) {
        match err {
            Error::Parse { line, field, .. } => (line, field),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_catalog(&row(""), "x").is_ok());
        let text = format!("# header\n\n{}\n", row("s=0.1"));
        assert_eq!(
            field_of(parse_catalog(&text, "x").unwrap_err()),
            (3, "s,t".into())
        );
        assert_eq!(
            field_of(parse_catalog(&row("k=two"), "x").unwrap_err()).1,
            "k"
        );
        assert_eq!(
            field_of(parse_catalog(&row("w=-"), "x").unwrap_err()).1,
            "w"
        );
        assert_eq!(
            field_of(parse_catalog(&row("family=nodoidal"), "x").unwrap_err()).1,
            "family"
        );
        assert_eq!(
            field_of(parse_catalog(&row("B=0,1"), "x").unwrap_err()).1,
            "B"
        );
        assert_eq!(
            field_of(parse_catalog(&row("spectrum=-1,x"), "x").unwrap_err()).1,
            "spectrum"
        );
        assert_eq!(
            field_of(parse_catalog(&row("a=13.0"), "x").unwrap_err()).1,
            "a"
        );
        assert_eq!(
            field_of(parse_catalog(&row("color=red"), "x").unwrap_err()).1,
            "color"
        );
        let dup = format!("{}\n{}", row(""), row(""));
        assert_eq!(
            field_of(parse_catalog(&dup, "x").unwrap_err()),
            (2, "surface".into())
        );
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_catalog(Path::new("/nonexistent/catalog.txt")),
            Err(Error::Io { .. })
        ));
        assert!(matches!(
            load_report(Path::new("/nonexistent/report.json")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn schema_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        fs::write(&p, r#"{"schema_version": 99, "report": {}}"#).unwrap();
        assert!(matches!(load_report(&p), Err(Error::Schema(_))));
        fs::write(&p, r#"{"report": {}}"#).unwrap();
        assert!(matches!(load_report(&p), Err(Error::Schema(_))));
        fs::write(&p, r#"{"schema_version": 1, "report": {"surface": 3}}"#).unwrap();
        assert!(matches!(load_report(&p), Err(Error::Schema(_))));
    }
}
