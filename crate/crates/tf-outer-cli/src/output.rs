use std::path::PathBuf;

use serde::Serialize;

pub const ENV_OUT: &str = "TF_OUTER_OUT";

pub fn resolve_dir(flag: Option<PathBuf>, config: Option<&str>) -> PathBuf {
    flag.or_else(|| config.map(PathBuf::from))
        .or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("tf-outer-out"))
}

pub struct Output {
    pub dir: PathBuf,
}

impl Output {
    pub fn new(dir: PathBuf) -> Result<Self, String> {
        std::fs::create_dir_all(&dir).map_err(|e| format!("cannot create output dir {}: {e}", dir.display()))?;
        Ok(Self { dir })
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf, String> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| e.to_string())?;
        for r in rows {
            w.serialize(r).map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())?;
        Ok(path)
    }

    /// CSV with an explicit header, used when there may be no rows.
    pub fn csv_with_header<T: Serialize>(&self, name: &str, header: &[&str], rows: &[T]) -> Result<PathBuf, String> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).map_err(|e| e.to_string())?;
        w.write_record(header).map_err(|e| e.to_string())?;
        for r in rows {
            w.serialize(r).map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, String> {
        let path = self.dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
        std::fs::write(&path, text + "\n").map_err(|e| e.to_string())?;
        Ok(path)
    }
}
