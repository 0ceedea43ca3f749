//! Verification reports and their JSON / CSV forms.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use varharm_core::Verdict;

use crate::config::Settings;

/// One measured case; every row should carry its error budget among the values.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub case: String,
    pub values: BTreeMap<String, f64>,
}

impl Row {
    pub fn new(case: impl Into<String>) -> Self {
        Self {
            case: case.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }
}

/// A fitted constant at the base resolution and after refinement.
#[derive(Clone, Debug, Serialize)]
pub struct FittedConstant {
    pub name: String,
    pub coarse: f64,
    pub fine: Option<f64>,
    pub relative_change: Option<f64>,
    pub stable: bool,
}

impl FittedConstant {
    pub fn new(name: &str, coarse: f64, fine: Option<f64>, tol: f64) -> Self {
        let relative_change = fine.map(|f| (f - coarse).abs() / coarse.abs().max(f64::MIN_POSITIVE));
        let stable = coarse.is_finite() && relative_change.is_none_or(|c| c < tol);
        Self {
            name: name.to_string(),
            coarse,
            fine,
            relative_change,
            stable,
        }
    }
}

/// A pass/fail condition with its measured value and bound.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

impl Condition {
    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Self::with(name, measured, bound, measured <= bound)
    }

    pub fn with(name: &str, measured: f64, bound: f64, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            measured,
            bound,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    pub fn inconclusive(name: &str, measured: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            bound,
            verdict: Verdict::Inconclusive,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub target: String,
    pub description: String,
    pub notes: Vec<String>,
    pub settings: Settings,
    pub rows: Vec<Row>,
    pub constants: Vec<FittedConstant>,
    pub conditions: Vec<Condition>,
    pub verdict: Verdict,
    pub wall_time_s: f64,
}

impl VerificationReport {
    pub fn new(settings: &Settings, description: &str) -> Self {
        Self {
            target: settings.target.clone(),
            description: description.to_string(),
            notes: Vec::new(),
            settings: settings.clone(),
            rows: Vec::new(),
            constants: Vec::new(),
            conditions: Vec::new(),
            verdict: Verdict::Pass,
            wall_time_s: 0.0,
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&FittedConstant> {
        self.constants.iter().find(|c| c.name == name)
    }

    /// Combines the conditions with the refinement stability of every constant.
    pub fn finish(&mut self) {
        let stability = self
            .constants
            .iter()
            .map(|c| if c.stable { Verdict::Pass } else { Verdict::Fail });
        self.verdict = Verdict::combine(self.conditions.iter().map(|c| c.verdict).chain(stability));
    }

    pub fn write_json(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// One CSV row per case; columns are the union of value keys.
    pub fn write_csv<W: Write>(&self, mut out: W) -> anyhow::Result<()> {
        let mut keys: Vec<&String> = self.rows.iter().flat_map(|r| r.values.keys()).collect();
        keys.sort();
        keys.dedup();
        write!(out, "case")?;
        for k in &keys {
            write!(out, ",{k}")?;
        }
        writeln!(out)?;
        for r in &self.rows {
            write!(out, "{}", r.case)?;
            for k in &keys {
                match r.values.get(*k) {
                    Some(v) => write!(out, ",{v:e}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("{}: {} ({:.1} s)\n", self.target, self.verdict, self.wall_time_s);
        for c in &self.conditions {
            s += &format!(
                "  {:<40} {:>14.6e} vs {:>14.6e}  {}\n",
                c.name, c.measured, c.bound, c.verdict
            );
        }
        for c in &self.constants {
            let fine = c.fine.map_or("-".into(), |f| format!("{f:.6e}"));
            s += &format!(
                "  {:<40} {:>14.6e} -> {:>14}  {}\n",
                c.name,
                c.coarse,
                fine,
                if c.stable { "stable" } else { "unstable" }
            );
        }
        for n in &self.notes {
            s += &format!("  note: {n}\n");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_and_csv() {
        let s = Settings::base("x");
        let mut r = VerificationReport::new(&s, "demo");
        r.rows.push(Row::new("a").with("v", 1.0).with("budget", 0.1));
        r.rows.push(Row::new("b").with("v", 2.0));
        r.conditions.push(Condition::at_most("c", 1.0, 2.0));
        r.constants.push(FittedConstant::new("k", 1.0, Some(1.1), 0.25));
        r.finish();
        assert_eq!(r.verdict, Verdict::Pass);
        r.constants.push(FittedConstant::new("k2", 1.0, Some(2.0), 0.25));
        r.finish();
        assert_eq!(r.verdict, Verdict::Fail);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "case,budget,v");
        assert_eq!(text.lines().count(), 3);
        assert!(r.summary().contains("unstable"));
    }
}
