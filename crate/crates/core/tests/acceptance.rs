use std::process::ExitCode;
use std::time::{Duration, Instant};

use delaywave::verify::{render, run_all, CriterionReport, CRITERIA};

// wall-clock limits per criterion, in criterion order
const LIMITS: [Option<Duration>; 8] = [
    Some(Duration::from_secs(30)),
    None,
    None,
    None,
    Some(Duration::from_secs(120)),
    None,
    None,
    Some(Duration::from_secs(180)),
];

fn main() -> ExitCode {
    let mut lines = Vec::new();
    let mut details = String::new();
    for (f, limit) in CRITERIA.iter().zip(LIMITS) {
        let start = Instant::now();
        let mut report: CriterionReport = f();
        let elapsed = start.elapsed();
        let mut timing = format!("{:.2}s", elapsed.as_secs_f64());
        if let Some(limit) = limit {
            let ok = elapsed < limit;
            timing.push_str(&format!(" (limit {}s)", limit.as_secs()));
            report.pass &= ok;
        }
        details.push_str(&report.render());
        lines.push(format!("{} [{timing}]", report.summary_line()));
    }

    let first = render(&run_all());
    let second = render(&run_all());
    let identical = first == second;
    lines.push(format!(
        "criterion 9: {} reproducible verify report ({} bytes)",
        if identical { "PASS" } else { "FAIL" },
        first.len()
    ));

    println!("{details}");
    for l in &lines {
        println!("{l}");
    }
    let failed = lines.iter().filter(|l| l.contains(": FAIL")).count();
    println!("acceptance: {}/{} passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
