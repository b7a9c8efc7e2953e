use std::time::Instant;

use netsimp::fixtures::synthetic_city;
use netsimp::pipeline::{simplify, SimplifyParams};

fn main() {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(20);
    let net = synthetic_city(n);
    let t = Instant::now();
    let (out, report) = simplify(&net, &SimplifyParams::default()).unwrap();
    println!(
        "n={n} edges {} -> {} in {:.2}s threshold {:?} artifacts {:?} warnings {}",
        net.edge_count(),
        out.edge_count(),
        t.elapsed().as_secs_f64(),
        report.threshold,
        report.loops.iter().map(|l| l.artifacts).collect::<Vec<_>>(),
        report.warnings.len()
    );
    for s in &report.timings {
        println!("  {} {:.2}s", s.stage, s.seconds);
    }
}
