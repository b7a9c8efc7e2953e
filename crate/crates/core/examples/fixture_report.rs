//! Runs the simplification on every fixture and prints the goal check.

use netsimp::fixtures::{all_fixtures, degree_histogram};
use netsimp::pipeline::{simplify, SimplifyParams};

fn main() {
    for f in all_fixtures() {
        let mut params = SimplifyParams::default();
        params.detection.exclusion_mask = f.mask.clone();
        match simplify(&f.input, &params) {
            Ok((out, report)) => {
                let fails = f.predicates.check(&out);
                let arts: Vec<usize> = report.loops.iter().map(|l| l.artifacts).collect();
                println!(
                    "{:<46} {} edges {}->{} degrees {:?} artifacts {:?} warnings {}",
                    f.name,
                    if fails.is_empty() { "ok  " } else { "FAIL" },
                    f.input.edge_count(),
                    out.edge_count(),
                    degree_histogram(&out),
                    arts,
                    report.warnings.len()
                );
                for m in fails {
                    println!("    {m}");
                }
                for w in &report.warnings {
                    println!("    warn: {}", w.message);
                }
            }
            Err(e) => println!("{:<46} ERROR {e}", f.name),
        }
    }
}
