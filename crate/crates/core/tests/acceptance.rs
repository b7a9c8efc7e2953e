//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p netsimp-core --test acceptance`.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use common::*;
use netsimp::continuity::{detect_strokes, ContinuityParams};
use netsimp::evaluation::{chatterjee_xi, compare_networks, euclidean_distance, GridParams, Metric, MetricSeries};
use netsimp::faces::polygonize;
use netsimp::fixtures::{all_fixtures, generate, shortest_path_length, synthetic_city};
use netsimp::geom::Coord;
use netsimp::network::canonical_geometry;
use netsimp::pipeline::{simplify, SimplifyParams};
use netsimp::topology::{check_topology, consolidate_nodes, fix_topology, ConsolidationParams};
use netsimp::{detect_artifacts, EdgeId, Network};
use rand::seq::SliceRandom;
use rand::RngExt;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn topology_suite() -> Outcome {
    let params = ConsolidationParams::default();
    let mut r = rng(1);
    let mut largest = 0;
    for i in 0..50 {
        let k = if i < 2 { 47 } else { r.random_range(2..40) };
        let net = random_raw_network(&mut r, k);
        ensure(net.edge_count() <= 5000, || {
            format!("network {i} has {} edges", net.edge_count())
        })?;
        largest = largest.max(net.edge_count());
        let fixed = fix_topology(&net, &params);
        let d = brute_force_defects(&fixed, params.tolerance);
        ensure(d == Defects::default(), || format!("network {i}: {d:?}"))?;
        ensure(check_topology(&fixed, params.tolerance).is_clean(), || {
            format!("network {i}: checker")
        })?;
        let again = fix_topology(&fixed, &params);
        ensure(again.records() == fixed.records(), || {
            format!("network {i}: not idempotent")
        })?;
    }
    Ok(format!("50 networks clean and idempotent, largest {largest} edges"))
}

fn partition(points: &[Coord], net: &Network) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
    for i in 0..points.len() {
        let c = net
            .edge(EdgeId(3 * i as u64))
            .map(|e| e.geometry[0])
            .unwrap_or(Coord::new(f64::NAN, 0.0));
        groups.entry(c.key()).or_default().push(i);
    }
    let mut g: Vec<Vec<usize>> = groups.into_values().collect();
    g.sort();
    g
}

fn anti_chaining() -> Outcome {
    let params = ConsolidationParams::default();
    let mut r = rng(2);
    let mut merged = 0;
    for inst in 0..200 {
        let n = r.random_range(1..=20);
        let pts: Vec<Coord> = (0..n)
            .map(|_| Coord::new(r.random_range(0.0..6.0), r.random_range(0.0..6.0)))
            .collect();
        let out = consolidate_nodes(&spokes(&pts), &params);
        let oracle = naive_consolidation(&pts, params.tolerance);
        for (i, want) in oracle.iter().enumerate() {
            for k in 0..3 {
                let got = out
                    .edge(EdgeId((3 * i + k) as u64))
                    .map(|e| e.geometry[0])
                    .ok_or_else(|| format!("instance {inst}: spoke {} lost", 3 * i + k))?;
                ensure(got.dist(*want) <= 1e-9, || {
                    format!("instance {inst} point {i}: {got:?} vs {want:?}")
                })?;
            }
        }
        let mut want: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
        for (i, c) in oracle.iter().enumerate() {
            want.entry(c.key()).or_default().push(i);
        }
        let mut want: Vec<Vec<usize>> = want.into_values().collect();
        want.sort();
        let got = partition(&pts, &out);
        ensure(got == want, || format!("instance {inst}: clusters {got:?} vs {want:?}"))?;
        merged += n - got.len();
    }
    let chain = [Coord::new(0.0, 0.0), Coord::new(1.5, 0.0), Coord::new(3.0, 0.0)];
    let out = consolidate_nodes(&spokes(&chain), &params);
    let hubs = out.nodes().iter().filter(|n| n.coord.norm() < 10.0).count();
    ensure(hubs == 2, || format!("chain instance has {hubs} nodes"))?;
    Ok(format!("200 instances match ({merged} merges), chain gives 2 nodes"))
}

fn continuity_suite() -> Outcome {
    let mut r = rng(3);
    let mut nets: Vec<(String, Network)> = all_fixtures()
        .into_iter()
        .map(|f| {
            (
                f.name.to_owned(),
                fix_topology(&f.input, &ConsolidationParams::default()),
            )
        })
        .collect();
    while nets.len() < 100 {
        let k = r.random_range(2..12);
        let net = fix_topology(&random_raw_network(&mut r, k), &ConsolidationParams::default());
        nets.push((format!("random {}", nets.len()), net));
    }
    for (name, net) in &nets {
        let mut prev = f64::INFINITY;
        for angle in [30.0, 60.0, 90.0, 120.0, 135.0, 150.0, 165.0, 179.0] {
            let strokes = detect_strokes(
                net,
                &ContinuityParams {
                    angle_threshold: angle,
                    flow_mode: true,
                },
            );
            let mut count: BTreeMap<EdgeId, usize> = BTreeMap::new();
            for s in &strokes {
                for &e in &s.edge_ids {
                    *count.entry(e).or_insert(0) += 1;
                }
            }
            ensure(
                count.len() == net.edge_count() && count.values().all(|&c| c == 1),
                || format!("{name} at {angle}: not a partition"),
            )?;
            let total: f64 = strokes.iter().map(|s| s.total_length).sum();
            let want = net.total_length();
            ensure((total - want).abs() <= 1e-6 * want.max(1.0), || {
                format!("{name} at {angle}: length {total} vs {want}")
            })?;
            let longest = strokes.iter().map(|s| s.total_length).fold(0.0, f64::max);
            ensure(longest <= prev * (1.0 + 1e-12), || {
                format!("{name}: longest stroke grew at {angle}")
            })?;
            prev = longest;
        }
    }
    Ok(format!("{} networks, 8 thresholds each", nets.len()))
}

fn metric_exactness() -> Outcome {
    let s = |v: &[f64]| MetricSeries::from_values(Metric::EdgeCount, v);
    let one_to_five = [1.0, 2.0, 3.0, 4.0, 5.0];
    let xi = chatterjee_xi(&s(&one_to_five), &s(&one_to_five)).map_err(|e| e.to_string())?;
    ensure(xi == 0.5, || format!("xi(1..5, 1..5) = {xi}"))?;

    let mut r = rng(4);
    let p: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
    let q: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
    let indep = chatterjee_xi(&s(&p), &s(&q)).map_err(|e| e.to_string())?;
    ensure(indep.abs() < 0.05, || format!("independent xi = {indep}"))?;

    for t in 0..100 {
        let n = r.random_range(2..500);
        let mut p: Vec<f64> = (0..n).map(|i| (2 * i) as f64).collect();
        let mut q: Vec<f64> = (0..n).map(|i| (5 * i) as f64).collect();
        p.shuffle(&mut r);
        q.shuffle(&mut r);
        let base = chatterjee_xi(&s(&p), &s(&q)).map_err(|e| e.to_string())?;
        let exact = to_f64(&exact_xi(&p, &q));
        ensure((base - exact).abs() <= 1e-12, || {
            format!("series {t}: {base} vs exact {exact}")
        })?;
        let p2: Vec<f64> = p.iter().map(|x| x.powi(3) + 7.0).collect();
        let q2: Vec<f64> = q.iter().map(|x| (x / 100.0).exp()).collect();
        let moved = chatterjee_xi(&s(&p2), &s(&q2)).map_err(|e| e.to_string())?;
        ensure(moved == base, || {
            format!("series {t}: {moved} after transform vs {base}")
        })?;
    }

    let d = euclidean_distance(&s(&[0.0, 0.0]), &s(&[3.0, 4.0])).map_err(|e| e.to_string())?;
    ensure(d == 5.0, || format!("3-4-5 distance {d}"))?;
    let same = euclidean_distance(&s(&p), &s(&p)).map_err(|e| e.to_string())?;
    ensure(same == 0.0, || format!("identical distance {same}"))?;
    Ok(format!(
        "xi(1..5)=0.5, independent xi={indep:.4}, 100 transforms invariant, d(3,4)=5"
    ))
}

fn default_params(mask: &[netsimp::Region]) -> SimplifyParams {
    let mut p = SimplifyParams::default();
    p.detection.exclusion_mask = mask.to_vec();
    p
}

fn corpus() -> Outcome {
    let mut passed = 0;
    let mut failures = Vec::new();
    for f in all_fixtures().into_iter().filter(|f| f.gated) {
        let (out, _) = simplify(&f.input, &default_params(&f.mask)).map_err(|e| format!("{}: {e}", f.name))?;
        let fails = f.predicates.check(&out);
        if fails.is_empty() {
            passed += 1;
        } else {
            failures.push(format!("{}: {}", f.name, fails.join("; ")));
        }
    }
    ensure(passed == 16, || {
        format!("{passed}/16 gated fixtures pass: {}", failures.join(" | "))
    })?;

    let f = generate("Roundabouts").unwrap();
    let (out, _) = simplify(&f.input, &default_params(&f.mask)).map_err(|e| e.to_string())?;
    let centroid = Coord::new(0.0, 0.0);
    let hubs = out
        .nodes()
        .iter()
        .filter(|n| n.degree == 4 && n.coord.dist(centroid) <= 5.0)
        .count();
    ensure(hubs == 1, || format!("roundabout: {hubs} degree-4 nodes within 5 m"))?;

    let f = generate("Parallel edges").unwrap();
    let (out, _) = simplify(&f.input, &default_params(&f.mask)).map_err(|e| e.to_string())?;
    // one edge across each section of the former dual carriageway
    for x in [125.0, 375.0] {
        let crossing = out
            .edges()
            .iter()
            .filter(|e| e.geometry.windows(2).any(|w| (w[0].x - x) * (w[1].x - x) < 0.0))
            .count();
        ensure(crossing == 1, || {
            format!("dual carriageway: {crossing} edges cross x = {x}")
        })?;
    }
    let through = shortest_path_length(&out, Coord::new(-100.0, 0.0), Coord::new(600.0, 0.0))
        .ok_or("dual carriageway: approaches disconnected")?;
    let centerline = through - 200.0;
    ensure((centerline - 500.0).abs() <= 10.0, || {
        format!("centerline length {centerline}")
    })?;
    Ok(format!(
        "16/16 gated fixtures, one roundabout hub, centerline {centerline:.2} m"
    ))
}

fn second_loop() -> Outcome {
    let mut cases: Vec<(String, Network, Vec<netsimp::Region>)> = all_fixtures()
        .into_iter()
        .map(|f| (f.name.to_owned(), f.input, f.mask))
        .collect();
    for n in [8, 16] {
        cases.push((format!("city {n}"), synthetic_city(n), Vec::new()));
    }
    let mut second = 0;
    for (name, input, mask) in &cases {
        let params = default_params(mask);
        let (out, report) = simplify(input, &params).map_err(|e| format!("{name}: {e}"))?;
        if let [l1, l2, ..] = report.loops.as_slice() {
            second += l2.artifacts;
            if l2.artifacts > 0 {
                ensure(l2.artifacts < l1.artifacts, || {
                    format!("{name}: loop 2 flags {} vs loop 1 {}", l2.artifacts, l1.artifacts)
                })?;
            }
        }
        let faces = polygonize(&out).map_err(|e| format!("{name}: {e}"))?;
        let mut det = params.detection.clone();
        det.threshold = report.threshold;
        let residual = detect_artifacts(&faces, &det).map_err(|e| format!("{name}: {e}"))?;
        let warned = report.unresolved().count();
        ensure(residual.artifact_count() == warned, || {
            format!(
                "{name}: {} residual artifacts, {warned} warned",
                residual.artifact_count()
            )
        })?;
    }
    Ok(format!(
        "{} cases, {second} artifacts left for loop 2, residuals all warned",
        cases.len()
    ))
}

fn exclusion_mask() -> Outcome {
    let f = generate("Special case roundabouts").unwrap();
    ensure(!f.mask.is_empty(), || "fixture has no mask".into())?;
    let faces = polygonize(&fix_topology(&f.input, &ConsolidationParams::default())).map_err(|e| e.to_string())?;
    let masked: Vec<_> = faces
        .iter()
        .filter(|face| f.mask.iter().any(|m| m.intersects(&face.region)))
        .collect();
    ensure(!masked.is_empty(), || "no face touches the mask".into())?;
    let inside: Vec<Vec<(u64, u64)>> = f
        .input
        .edges()
        .iter()
        .filter(|e| masked.iter().any(|face| face.has_edge(e.id)))
        .map(|e| canonical_geometry(&e.geometry))
        .collect();
    let (out, _) = simplify(&f.input, &default_params(&f.mask)).map_err(|e| e.to_string())?;
    let kept: HashSet<Vec<(u64, u64)>> = out.edges().iter().map(|e| canonical_geometry(&e.geometry)).collect();
    let missing = inside.iter().filter(|g| !kept.contains(*g)).count();
    ensure(missing == 0, || {
        format!("{missing} of {} masked boundary edges changed", inside.len())
    })?;
    // the mask is what keeps it: without it the ring is replaced
    let (bare, _) = simplify(&f.input, &SimplifyParams::default()).map_err(|e| e.to_string())?;
    let bare_kept = inside
        .iter()
        .filter(|g| bare.edges().iter().any(|e| &&canonical_geometry(&e.geometry) == g))
        .count();
    ensure(bare_kept < inside.len(), || "ring survives without the mask too".into())?;
    Ok(format!("{} masked boundary edges bit-identical", inside.len()))
}

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn performance() -> Outcome {
    let net = synthetic_city(55);
    ensure(net.edge_count() >= 10_000, || {
        format!("only {} edges", net.edge_count())
    })?;
    let t = Instant::now();
    let (out, _) = simplify(&net, &SimplifyParams::default()).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("{secs:.1} s"))?;
    let peak = peak_rss_kib().ok_or("VmHWM unavailable")?;
    let gib = peak as f64 / (1024.0 * 1024.0);
    ensure(gib < 2.0, || format!("peak {gib:.2} GiB"))?;
    Ok(format!(
        "{} -> {} edges in {secs:.2} s, process peak {:.0} MiB",
        net.edge_count(),
        out.edge_count(),
        peak as f64 / 1024.0
    ))
}

fn evaluation_ordering() -> Outcome {
    let f = generate("Parallel edges").unwrap();
    let (out, _) = simplify(&f.input, &default_params(&f.mask)).map_err(|e| e.to_string())?;
    let grid = GridParams::default();
    let simplified = compare_networks(&f.goal, &out, &grid).map_err(|e| e.to_string())?;
    let raw = compare_networks(&f.goal, &f.input, &grid).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for m in [Metric::AvgNodeDegree, Metric::EdgeCount] {
        let (a, b) = (simplified.metric(m).xi, raw.metric(m).xi);
        ensure(a >= b, || format!("{}: simplified {a} < input {b}", m.as_str()))?;
        parts.push(format!("{} {a:.3} >= {b:.3}", m.as_str()));
    }
    Ok(parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("topology repair", topology_suite),
        ("average-linkage consolidation", anti_chaining),
        ("continuity strokes", continuity_suite),
        ("xi and distance exactness", metric_exactness),
        ("fixture corpus", corpus),
        ("second-loop contraction", second_loop),
        ("exclusion mask", exclusion_mask),
        ("performance", performance),
        ("evaluation ordering", evaluation_ordering),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
