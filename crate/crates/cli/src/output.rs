//! JSON summaries with fixed 17-digit floats and fixed-schema CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::value::RawValue;

/// Scientific notation with 17 significant digits; non-finite values as strings.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn raw(s: String) -> Box<RawValue> {
    RawValue::from_string(s).expect("valid JSON fragment")
}

fn json_float(v: f64) -> String {
    if v.is_finite() {
        fmt_float(v)
    } else {
        format!("\"{}\"", fmt_float(v))
    }
}

/// JSON object with keys in sorted order.
#[derive(Debug, Default)]
pub struct Summary {
    fields: BTreeMap<String, Box<RawValue>>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, k: &str, v: f64) -> &mut Self {
        self.fields.insert(k.into(), raw(json_float(v)));
        self
    }

    pub fn opt_num(&mut self, k: &str, v: Option<f64>) -> &mut Self {
        match v {
            Some(v) => self.num(k, v),
            None => {
                self.fields.insert(k.into(), raw("null".into()));
                self
            }
        }
    }

    pub fn nums(&mut self, k: &str, vs: &[f64]) -> &mut Self {
        let items: Vec<String> = vs.iter().map(|v| json_float(*v)).collect();
        self.fields.insert(k.into(), raw(format!("[{}]", items.join(","))));
        self
    }

    pub fn int(&mut self, k: &str, v: u64) -> &mut Self {
        self.fields.insert(k.into(), raw(v.to_string()));
        self
    }

    pub fn bool(&mut self, k: &str, v: bool) -> &mut Self {
        self.fields.insert(k.into(), raw(v.to_string()));
        self
    }

    pub fn str(&mut self, k: &str, v: &str) -> &mut Self {
        let s = serde_json::to_string(v).expect("string serializes");
        self.fields.insert(k.into(), raw(s));
        self
    }

    pub fn strs(&mut self, k: &str, vs: &[String]) -> &mut Self {
        let s = serde_json::to_string(vs).expect("strings serialize");
        self.fields.insert(k.into(), raw(s));
        self
    }

    pub fn objects(&mut self, k: &str, items: &[Summary]) -> &mut Self {
        let parts: Vec<String> = items.iter().map(|s| s.compact()).collect();
        self.fields.insert(k.into(), raw(format!("[{}]", parts.join(","))));
        self
    }

    fn compact(&self) -> String {
        serde_json::to_string(&self.fields).expect("summary serializes")
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.fields).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Per-run output directory.
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, name: &str) -> Result<Self> {
        let path = root.join(name);
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self { path })
    }

    pub fn write_summary(&self, s: &Summary) -> Result<PathBuf> {
        let p = self.path.join("summary.json");
        fs::write(&p, s.render()).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn write_csv(&self, file: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
        let p = self.path.join(file);
        let mut w = csv::Writer::from_path(&p).with_context(|| format!("writing {}", p.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| fmt_float(*v)))?;
        }
        w.flush()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        let back: f64 = fmt_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn summary_is_valid_json() {
        let mut s = Summary::new();
        s.num("a", 1.5).num("b", f64::INFINITY).opt_num("c", None).str("d", "x\"y");
        s.nums("e", &[1.0, f64::NEG_INFINITY]).bool("f", true).int("g", 3);
        let v: serde_json::Value = serde_json::from_str(&s.render()).unwrap();
        assert_eq!(v["a"], 1.5);
        assert_eq!(v["b"], "inf");
        assert!(v["c"].is_null());
        assert_eq!(v["e"][1], "-inf");
    }
}
