//! Output plumbing shared by the subcommands: effective-config echoing,
//! float formatting, and file-or-stdout writing.
//!
//! Convention: every machine-readable output embeds the effective
//! configuration — as a `"config"` object in JSON, as leading `# key=value`
//! comment lines in CSV — so a result file alone identifies the run that
//! produced it. Finite floats always carry 17 significant digits, which
//! round-trips `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::CliError;

/// One effective-config entry (key, already-formatted value).
pub type ConfigEcho = Vec<(&'static str, String)>;

/// Formats a float with 17 significant digits; `inf`/`-inf`/`nan` for
/// non-finite values (used in CSV cells and config echoes, where JSON's
/// `null` convention does not apply).
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Joins a float list back into the comma-separated config spelling.
pub fn fmt_float_list(vs: &[f64]) -> String {
    vs.iter().map(|&v| fmt_float(v)).collect::<Vec<_>>().join(",")
}

/// Appends a JSON string literal (with escaping) to `out`.
pub fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                write!(out, "\\u{:04x}", c as u32).expect("string write");
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// The `"command":…,"config":{…}` prefix fields of a JSON output object.
/// Config values are echoed as strings, exactly as they would appear in a
/// `key=value` config file.
pub fn json_config_fields(command: &str, echo: &ConfigEcho) -> String {
    let mut out = String::from("\"command\":");
    push_json_string(&mut out, command);
    out.push_str(",\"config\":{");
    for (i, (key, value)) in echo.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_json_string(&mut out, key);
        out.push(':');
        push_json_string(&mut out, value);
    }
    out.push('}');
    out
}

/// The `# command=…` and `# key=value` comment header of a CSV output.
pub fn csv_config_header(command: &str, echo: &ConfigEcho) -> String {
    let mut out = format!("# command={command}\n");
    for (key, value) in echo {
        writeln!(out, "# {key}={value}").expect("string write");
    }
    out
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
