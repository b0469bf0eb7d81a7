use relu_forge::assembly::presets;
use relu_forge::net_ir::serial;
use relu_forge::verify::{build_network, certify, GridSpec, Recipe};
use relu_forge::{bounds, BoundKind, BoundParams, TargetFunction};

fn probe_points(d: usize) -> Vec<Vec<f64>> {
    (0..17).map(|i| (0..d).map(|j| ((i * 7 + j * 3) % 17) as f64 / 16.0).collect()).collect()
}

fn recipes() -> Vec<(Recipe, Option<TargetFunction>)> {
    let sinpi = presets::sinpi(2, 2).unwrap();
    vec![
        (Recipe::new(BoundKind::Square, 1, 1, 2, 3), None),
        (Recipe::new(BoundKind::Product, 1, 2, 2, 2), None),
        (Recipe::new(BoundKind::Step, 1, 2, 3, 1), None),
        (Recipe::new(BoundKind::Mid, 1, 3, 1, 1), None),
        (Recipe::new(BoundKind::BitSingle, 1, 1, 1, 2), None),
        (Recipe::new(BoundKind::PointMatch, 2, 1, 1, 2), None),
        (Recipe::new(BoundKind::Smooth, 2, 2, 1, 2), Some(sinpi)),
    ]
}

#[test]
fn saved_networks_evaluate_identically() {
    let dir = tempfile::tempdir().unwrap();
    for (i, (r, t)) in recipes().iter().enumerate() {
        let net = build_network(r, t.as_ref(), 11).unwrap();
        let path = dir.path().join(format!("net{i}.json"));
        serial::save(&net, &path).unwrap();
        let back = serial::load(&path).unwrap();
        assert_eq!(net.size_report(), back.size_report(), "{}", r.kind);
        assert_eq!(net.widthvec(), back.widthvec());
        for x in probe_points(net.input_dim()) {
            assert_eq!(net.evaluate(&x).unwrap(), back.evaluate(&x).unwrap(), "{} at {x:?}", r.kind);
        }
    }
}

#[test]
fn built_sizes_respect_budgets() {
    for (r, t) in recipes() {
        let net = build_network(&r, t.as_ref(), 0).unwrap();
        let mut p = BoundParams::new(r.s, r.d, r.n, r.l);
        if let Some(t) = &t {
            p = p.with_csnorm(t.csnorm());
        }
        let b = bounds(r.kind, &p).unwrap();
        assert!(net.width() as u64 <= b.width, "{}: width {} > {}", r.kind, net.width(), b.width);
        assert!(net.depth() as u64 <= b.depth, "{}: depth {} > {}", r.kind, net.depth(), b.depth);
    }
}

#[test]
fn certificates_pass_and_roundtrip_as_json() {
    let r = Recipe::new(BoundKind::Square, 1, 1, 1, 4);
    let grid = GridSpec::new(1, 2001, 5).unwrap();
    let c = certify(&r, None, &grid).unwrap();
    assert!(c.pass && c.size_ok && c.error_ok);
    let v: serde_json::Value = serde_json::to_value(&c).unwrap();
    assert_eq!(v["kind"], "square");
    assert_eq!(v["bound"]["error"].as_f64().unwrap(), c.bound.error);
}

#[test]
fn tampered_file_is_rejected() {
    let net = build_network(&Recipe::new(BoundKind::Square, 1, 1, 1, 1), None, 0).unwrap();
    let text = String::from_utf8(serial::serialize(&net).unwrap()).unwrap();
    let broken = text.replacen("\"input_dim\":1", "\"input_dim\":3", 1);
    assert_ne!(text, broken, "fixture must change the file");
    assert!(serial::deserialize(broken.as_bytes()).is_err());
}
