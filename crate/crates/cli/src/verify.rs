//! Text report for the randomized verification suites.

use std::io::Write;

use hyperflock_core::verify::{run_suite, Suite, SuiteReport};

pub const DEFAULT_SEED: u64 = 2024;

/// Runs `suites` and prints one line per check; `Ok(true)` when every check passed.
pub fn run(suites: &[Suite], samples: Option<usize>, seed: u64, out: &mut dyn Write) -> anyhow::Result<bool> {
    let mut all = true;
    for &suite in suites {
        let n = samples.unwrap_or_else(|| suite.default_samples());
        if n == 0 {
            log::warn!("{}: 0 samples, the suite passes vacuously", suite.name());
            writeln!(out, "warning: {}: 0 samples, vacuous pass", suite.name())?;
        }
        let report = run_suite(suite, n, seed)?;
        write_report(&report, out)?;
        all &= report.passed();
    }
    writeln!(out, "{}", if all { "all checks passed" } else { "some checks FAILED" })?;
    Ok(all)
}

pub fn write_report(report: &SuiteReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{} ({} samples, seed {})", report.suite, report.samples, report.seed)?;
    for c in &report.checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        writeln!(out, "  {:<40} max {:>10.3e}  tol {:.0e}  {verdict}", c.name, c.max_residual, c.tolerance)?;
    }
    if report.skipped > 0 {
        writeln!(out, "  skipped {} degenerate cases", report.skipped)?;
    }
    for note in &report.notes {
        writeln!(out, "  note: {note}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_pass_with_warning() {
        let mut buf = Vec::new();
        assert!(run(&[Suite::TrigIdentities], Some(0), 1, &mut buf).unwrap());
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("vacuous pass"));
    }

    #[test]
    fn report_lists_every_check() {
        let mut buf = Vec::new();
        assert!(run(&[Suite::Holonomy], Some(20), 3, &mut buf).unwrap());
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("holonomy (20 samples, seed 3)"));
        assert!(text.lines().any(|l| l.ends_with("pass")));
    }
}
