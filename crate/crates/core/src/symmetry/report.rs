use std::fmt;

use crate::tube::TargetTube;

/// Outcome of one verified axiom.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    pub max_residual: f64,
    pub violations: usize,
    pub tol: f64,
}

impl Check {
    pub fn new(name: &str, tol: f64) -> Self {
        Check {
            name: name.to_string(),
            trials: 0,
            max_residual: 0.0,
            violations: 0,
            tol,
        }
    }

    pub fn record(&mut self, residual: f64) {
        self.trials += 1;
        // NaN residuals count as failures
        if residual.is_nan() || residual > self.tol {
            self.violations += 1;
        }
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = residual;
        }
    }

    pub(crate) fn record_membership<T: TargetTube>(&mut self, tube: &T, k: usize, x: &[f64], moved: &[f64]) {
        let differs = tube.cost_at(k, x) != tube.cost_at(k, moved);
        self.record(if differs { 1.0 } else { 0.0 });
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<22} trials={:<6} max_residual={:.3e} violations={} {}",
            self.name,
            self.trials,
            self.max_residual,
            self.violations,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>) -> Self {
        VerificationReport { checks }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
