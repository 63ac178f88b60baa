use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use memharvest_core::{Manifest, OutcomeClass};
use serde::{Deserialize, Serialize};

/// Outcome-class counts over the attempted URIs of a store. A URI attempted
/// more than once counts with its latest outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub total: u64,
    pub classes: BTreeMap<OutcomeClass, u64>,
}

impl Report {
    pub fn from_manifest(manifest: &Manifest) -> Self {
        let mut classes: BTreeMap<_, _> = OutcomeClass::ALL.iter().map(|c| (*c, 0)).collect();
        let latest = manifest.latest();
        for record in &latest {
            *classes.entry(record.class).or_default() += 1;
        }
        Self {
            total: latest.len() as u64,
            classes,
        }
    }

    pub fn count(&self, class: OutcomeClass) -> u64 {
        self.classes.get(&class).copied().unwrap_or(0)
    }

    /// Every attempted URI that did not end `ok`.
    pub fn problematic(&self) -> u64 {
        self.total - self.count(OutcomeClass::Ok)
    }

    pub fn percent(&self, n: u64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            n as f64 * 100.0 / self.total as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report always serializes")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut row = |label: &str, n: u64| {
            let _ = writeln!(out, "{label:<24}{n:>8}{:>9.1}%", self.percent(n));
        };
        for class in OutcomeClass::ALL {
            row(class.as_str(), self.count(class));
        }
        row("total", self.total);
        row("problematic", self.problematic());
        format!(
            "{:<24}{:>8}{:>10}\n{out}",
            "outcome-class", "count", "percent"
        )
    }

    /// Writes the table to `path` and the JSON form to `path` + `.json`.
    pub fn write(&self, path: &Path) -> std::io::Result<PathBuf> {
        fs::write(path, self.render())?;
        let json = json_sibling(path);
        fs::write(&json, self.to_json() + "\n")?;
        Ok(json)
    }
}

pub fn json_sibling(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use memharvest_core::{ManifestRecord, ManifestWriter, Store};

    fn report(classes: &[OutcomeClass]) -> Report {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let writer = ManifestWriter::open(&store).unwrap();
        for (i, class) in classes.iter().enumerate() {
            writer
                .append(&ManifestRecord::new(&format!("http://h/{i}"), 200, *class))
                .unwrap();
        }
        Report::from_manifest(&Manifest::load(&store).unwrap())
    }

    #[test]
    fn one_failure_in_four() {
        use OutcomeClass::*;
        let r = report(&[Ok, Ok, NetworkError, Ok]);
        assert_eq!(r.total, 4);
        assert_eq!(r.problematic(), 1);
        assert_eq!(r.percent(r.problematic()), 25.0);
        let table = r.render();
        assert!(
            table
                .lines()
                .any(|l| l.starts_with("problematic") && l.ends_with(" 25.0%")),
            "{table}"
        );
        assert!(table
            .lines()
            .any(|l| l.starts_with("network-error") && l.ends_with(" 25.0%")));
    }

    #[test]
    fn json_lists_every_class() {
        let r = report(&[OutcomeClass::Undecodable]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["total"], 1);
        let classes = v["classes"].as_object().unwrap();
        assert_eq!(classes.len(), 6);
        assert_eq!(classes["undecodable"], 1);
        assert_eq!(classes["ok"], 0);
        assert_eq!(serde_json::from_value::<Report>(v).unwrap(), r);
    }

    #[test]
    fn empty_store() {
        let r = report(&[]);
        assert_eq!(r.total, 0);
        assert_eq!(r.percent(0), 0.0);
    }

    #[test]
    fn sibling_path() {
        assert_eq!(
            json_sibling(Path::new("out/run.txt")),
            PathBuf::from("out/run.txt.json")
        );
    }
}
