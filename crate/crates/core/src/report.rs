//! Machine-readable verification reports.

use crate::check::Comparison;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub suite: String,
    pub test: String,
    pub group: String,
    pub t: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub tail: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl TestRecord {
    pub fn from_comparison(
        suite: &str,
        test: impl Into<String>,
        group: &str,
        t: Option<f64>,
        c: &Comparison,
    ) -> Self {
        Self {
            suite: suite.into(),
            test: test.into(),
            group: group.into(),
            t,
            lhs: c.lhs,
            rhs: c.rhs,
            tolerance: c.tolerance,
            tail: c.tail,
            rel_err: c.rel_err(),
            pass: c.pass,
        }
    }

    /// A residual that should vanish: passes if `residual <= tolerance`.
    pub fn residual(
        suite: &str,
        test: impl Into<String>,
        group: &str,
        t: Option<f64>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            suite: suite.into(),
            test: test.into(),
            group: group.into(),
            t,
            lhs: residual,
            rhs: 0.0,
            tolerance,
            tail: 0.0,
            rel_err: residual,
            pass: residual <= tolerance && residual.is_finite(),
        }
    }

    /// A lower bound: passes if `value >= bound`.
    pub fn at_least(
        suite: &str,
        test: impl Into<String>,
        group: &str,
        t: Option<f64>,
        value: f64,
        bound: f64,
    ) -> Self {
        Self {
            suite: suite.into(),
            test: test.into(),
            group: group.into(),
            t,
            lhs: value,
            rhs: bound,
            tolerance: 0.0,
            tail: 0.0,
            rel_err: 0.0,
            pass: value >= bound,
        }
    }

    /// A Monte Carlo mean against its expected value, passing within `z_max` standard errors.
    pub fn statistical(
        suite: &str,
        test: impl Into<String>,
        group: &str,
        t: Option<f64>,
        mean: f64,
        expected: f64,
        std_err: f64,
        z_max: f64,
    ) -> Self {
        let c = Comparison::absolute(mean, expected, z_max * std_err, 0.0);
        Self::from_comparison(suite, test, group, t, &c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tests: Vec<TestRecord>,
    pub all_pass: bool,
}

impl Report {
    pub fn new(tests: Vec<TestRecord>) -> Self {
        let all_pass = tests.iter().all(|r| r.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            tests,
            all_pass,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = self.to_json_string()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestRecord> {
        self.tests.iter().filter(|r| !r.pass)
    }

    /// One line per suite with pass counts, then every failing test.
    pub fn summary(&self) -> String {
        let mut suites: Vec<&str> = Vec::new();
        for r in &self.tests {
            if !suites.contains(&r.suite.as_str()) {
                suites.push(&r.suite);
            }
        }
        let mut out = String::new();
        for s in suites {
            let rows: Vec<&TestRecord> = self.tests.iter().filter(|r| r.suite == s).collect();
            let ok = rows.iter().filter(|r| r.pass).count();
            let _ = writeln!(
                out,
                "{:<20} {:>4}/{:<4} {}",
                s,
                ok,
                rows.len(),
                if ok == rows.len() { "ok" } else { "FAILED" }
            );
        }
        for r in self.failures() {
            let _ = writeln!(
                out,
                "  FAIL {}::{} [{}{}] lhs={:.6e} rhs={:.6e} tol={:.1e} tail={:.1e}",
                r.suite,
                r.test,
                r.group,
                r.t.map(|t| format!(", t={t}")).unwrap_or_default(),
                r.lhs,
                r.rhs,
                r.tolerance,
                r.tail
            );
        }
        let _ = writeln!(
            out,
            "{} tests, {}",
            self.tests.len(),
            if self.all_pass {
                "all passed"
            } else {
                "some failed"
            }
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_passes() {
        let r = Report::new(vec![]);
        assert!(r.all_pass);
        let back: Report = serde_json::from_str(&r.to_json_string().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn one_failure_fails_report() {
        let r = Report::new(vec![
            TestRecord::residual("a", "x", "su2", None, 1e-12, 1e-9),
            TestRecord::residual("a", "y", "su2", Some(0.5), 1e-3, 1e-9),
        ]);
        assert!(!r.all_pass);
        assert_eq!(r.failures().count(), 1);
        assert!(r.summary().contains("FAIL a::y"));
    }

    #[test]
    fn statistical_record_uses_standard_errors() {
        assert!(TestRecord::statistical("s", "m", "g", None, 1.02, 1.0, 0.01, 3.0).pass);
        assert!(!TestRecord::statistical("s", "m", "g", None, 1.04, 1.0, 0.01, 3.0).pass);
    }
}
