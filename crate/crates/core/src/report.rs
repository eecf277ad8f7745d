//! Report envelope shared by all commands, JSON with 17 significant digits, and
//! atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const SCHEMA: &str = "hardylab-report";
pub const SCHEMA_VERSION: u32 = 1;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl ErrorInfo {
    pub fn from_error(e: &Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
        ErrorInfo { kind, message: e.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    pub command: String,
    /// `OK`, `PASS`, `FAIL`, `CERTIFIED`, `INCONCLUSIVE`, `DISCRETE`, `VALID` or `ERROR`.
    pub status: String,
    pub exit_code: i32,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub generated_at: u64,
    pub config: Option<RunConfig>,
    pub result: Option<serde_json::Value>,
    pub error: Option<ErrorInfo>,
}

impl Report {
    pub fn new(command: &str, status: &str, exit_code: i32, config: Option<RunConfig>) -> Self {
        Report {
            schema: SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            status: status.into(),
            exit_code,
            generated_at: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            result: None,
            error: None,
        }
    }

    pub fn with_result<T: Serialize>(mut self, result: &T) -> Self {
        self.result = Some(serde_json::to_value(result).expect("result serializes"));
        self
    }

    pub fn with_error(mut self, e: &Error) -> Self {
        self.error = Some(ErrorInfo::from_error(e));
        self
    }

    /// Parses a report and checks the schema tag and version.
    pub fn parse(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| Error::Io(format!("report does not parse: {e}")))?;
        if r.schema != SCHEMA || r.schema_version != SCHEMA_VERSION {
            return Err(Error::Io(format!("unexpected schema {} v{}", r.schema, r.schema_version)));
        }
        Ok(r)
    }
}

/// Writes floats as `d.dddddddddddddddde±x` (17 significant digits).
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Indented JSON with 17-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PrettySeventeen::default());
    value.serialize(&mut ser).expect("serializable");
    String::from_utf8(out).unwrap()
}

/// `PrettyFormatter` with [`SeventeenDigits`] floats.
#[derive(Default)]
struct PrettySeventeen<'a> {
    pretty: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! forward {
    ($($name:ident($($arg:ident : $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.pretty.$name(writer $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for PrettySeventeen<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        SeventeenDigits.write_f64(writer, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        SeventeenDigits.write_f32(writer, value)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<PathBuf> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::Io(e.to_string()))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let v = serde_json::json!({ "x": 0.1, "y": [1.0, -2.5e-300] });
        let s = to_json(&v);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.1);
        assert_eq!(back["y"][1].as_f64().unwrap(), -2.5e-300);
    }

    #[test]
    fn envelope_round_trip_and_atomic_write() {
        let r = Report::new("hardy", "CERTIFIED", EXIT_OK, None).with_result(&vec![1.5, 2.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/report.json");
        write_atomic(&path, &to_json(&r)).unwrap();
        let back = Report::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(Report::parse("{\"schema\": \"other\"}").is_err());
    }

    #[test]
    fn error_kind_is_variant_name() {
        let info = ErrorInfo::from_error(&Error::EmptyRegion);
        assert_eq!(info.kind, "EmptyRegion");
        let info = ErrorInfo::from_error(&Error::PointOutsideDomain { point: vec![2.0], signed_distance: -1.0 });
        assert_eq!(info.kind, "PointOutsideDomain");
    }
}
