fn main() {
    let criteria = leray_validation::criteria();
    let mut failed = 0;
    for (k, c) in criteria.iter().enumerate() {
        let r = c.run();
        if !r.passed {
            failed += 1;
        }
        let over = if r.elapsed < c.limit {
            ""
        } else {
            ", over time"
        };
        println!(
            "criterion {:>2} {:<24} {}  ({:.2?} of {:?}{over}) {}",
            k + 1,
            c.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.elapsed,
            c.limit,
            r.line.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
