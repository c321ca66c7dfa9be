use slabfold::geometry::{induced_rect_graph, PlanarRect, SlabVertex};
use slabfold::gridgen::{build_catalog, ParamSeed};
use slabfold::percolation::*;
use slabfold::slicing::assemble_phi;
use slabfold::tree::{build_overlap_tree, ray};

mod common;
use common::oracle_crossing;

#[test]
fn open_fraction_is_binomial() {
    let g = induced_rect_graph(&PlanarRect::from_bounds(0, 224, 0, 224), 0);
    let m = g.edge_count() as f64;
    assert!(m >= 1e5);
    let cfg = sample_config(&g, 0.6, 42);
    let frac = cfg.open_count() as f64 / m;
    let sigma = (0.6 * 0.4 / m).sqrt();
    assert!((frac - 0.6).abs() < 3.0 * sigma, "{frac}");
    assert_eq!(sample_config(&g, 0.6, 42), cfg);
}

#[test]
fn single_top_edge_crosses_horizontally_only() {
    let sq = PlanarRect::from_bounds(0, 1, 0, 1);
    let g = induced_rect_graph(&sq, 0);
    let open = g
        .edges()
        .iter()
        .map(|&e| e == (SlabVertex::bottom(0, 1), SlabVertex::bottom(1, 1)))
        .collect();
    let cfg = BondConfig {
        graph: &g,
        open,
        p: 0.5,
        seed: 0,
    };
    assert!(crossing_event(&CrossingSpec::rect(sq, Direction::H), &cfg));
    assert!(!crossing_event(&CrossingSpec::rect(sq, Direction::V), &cfg));
    let none = BondConfig {
        open: vec![false; g.edge_count()],
        ..cfg.clone()
    };
    assert!(!crossing_event(
        &CrossingSpec::rect(sq, Direction::H),
        &none
    ));
    let all = BondConfig {
        open: vec![true; g.edge_count()],
        ..cfg
    };
    assert!(crossing_event(&CrossingSpec::rect(sq, Direction::V), &all));
}

#[test]
fn crossing_estimates_match_enumeration() {
    assert!((oracle_crossing(1, 1, true, 0.5) - 0.75).abs() < 1e-15);
    let shapes = [(1, 1), (2, 1), (1, 2), (3, 1), (2, 2), (3, 2)];
    for &(w, h) in &shapes {
        for &horizontal in &[true, false] {
            let dir = if horizontal {
                Direction::H
            } else {
                Direction::V
            };
            let spec = CrossingSpec::rect(PlanarRect::from_bounds(0, w, 0, h), dir);
            let g = spec.graph();
            let pred = crossing_predicate(&spec, &g);
            for p in [0.2, 0.5, 0.7] {
                let exact = oracle_crossing(w, h, horizontal, p);
                let mine = exact_probability(g.edge_count(), &pred, p).unwrap();
                assert!((exact - mine).abs() < 1e-12, "{w}x{h} {dir:?} {p}");
                let est = estimate_crossing(&spec, p, 200000, 17);
                assert!(
                    (est.p_hat - exact).abs() <= 3.0 * est.sigma.max(1e-3),
                    "{w}x{h} {dir:?} p={p}: {} vs {exact}",
                    est.p_hat
                );
            }
        }
    }
}

#[test]
fn coupled_grid_is_monotone_and_matches_single_runs() {
    let spec = CrossingSpec::rect(PlanarRect::from_bounds(0, 15, 0, 7), Direction::H);
    let ps: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let est = estimate_crossing_coupled(&spec, &ps, 500, 3);
    for w in est.windows(2) {
        assert!(w[0].successes <= w[1].successes);
    }
    assert_eq!(estimate_crossing(&spec, 0.5, 500, 3), est[4]);
}

#[test]
fn fkg_examples() {
    let sq = PlanarRect::from_bounds(0, 1, 0, 1);
    let g = induced_rect_graph(&sq, 0);
    let h = crossing_predicate(&CrossingSpec::rect(sq, Direction::H), &g);
    let v = crossing_predicate(&CrossingSpec::rect(sq, Direction::V), &g);
    let r = fkg_check(&g, &h, &v, 0.5).unwrap();
    assert!((r.p_ab - 9.0 / 16.0).abs() < 1e-15);
    assert!((r.product - 9.0 / 16.0).abs() < 1e-15);
    assert!(r.pass);
    let same = fkg_check(&g, &h, &h, 0.5).unwrap();
    assert!(same.pass && (same.p_ab - 0.75).abs() < 1e-15);

    let wide = PlanarRect::from_bounds(0, 2, 0, 1);
    let g = induced_rect_graph(&wide, 0);
    assert_eq!(g.edge_count(), 7);
    let events = [
        crossing_predicate(&CrossingSpec::rect(wide, Direction::H), &g),
        crossing_predicate(&CrossingSpec::rect(wide, Direction::V), &g),
    ];
    for p in [0.3, 0.5, 0.7] {
        for a in &events {
            for b in &events {
                assert!(fkg_check(&g, a, b, p).unwrap().pass);
            }
        }
    }
    let big = induced_rect_graph(&PlanarRect::from_bounds(0, 4, 0, 3), 0);
    let any = |w: &[bool]| w.iter().any(|&o| o);
    assert!(fkg_check(&big, &any, &any, 0.5).is_err());
}

#[test]
fn road_survival_on_a_desk_ray() {
    let vp = PlanarRect::from_bounds(0, 599, 0, 599);
    let cat = build_catalog(&ParamSeed::new(2, 3, vec![3, 4, 5], 1), vp).unwrap();
    let tree = build_overlap_tree(&cat).unwrap();
    let start = cat
        .entries
        .iter()
        .find(|e| e.j == 0 && ray(&tree, &cat, e.id, 6).is_ok_and(|r| r.entries.len() == 6))
        .unwrap()
        .id;
    let prefix = ray(&tree, &cat, start, 6).unwrap().entries;
    let members: Vec<_> = prefix
        .iter()
        .map(|&k| CrossingSpec::lengthwise(cat.entries[k].rect))
        .collect();

    let one = road_survival(&members[..1], 0.7, 400, 5);
    assert_eq!(one.joint, one.marginals[0]);

    let r = road_survival(&members, 0.9, 2000, 5);
    assert_eq!(r.extraction_failures, 0);
    assert!(r.joint.p_hat >= r.product_of_marginals() - 3.0 * r.joint.sigma);
    assert!(r.joint.interval(2.576).0 > 0.0);
}

#[test]
fn census_at_full_retention_and_under_coupling() {
    let vp = PlanarRect::from_bounds(0, 599, 0, 599);
    let cat = build_catalog(&ParamSeed::new(2, 3, vec![3, 4, 5], 2), vp).unwrap();
    let tree = build_overlap_tree(&cat).unwrap();
    let a = assemble_phi(&cat, &tree, &[1, 1, 1, 1, 3, 3], 2).unwrap();
    let span = cat.default_span_box().unwrap();
    let full = spanning_components(&a, &span);
    assert_eq!(full, 3);
    let c = phi_census(&a, 1.0, 3, 9, &span);
    assert!(c.counts.iter().all(|&k| k == full));
    let ps = [0.5, 0.7, 0.9, 1.0];
    let runs = phi_census_coupled(&a, &ps, 20, 9, &span);
    for t in 0..20 {
        for w in runs.windows(2) {
            assert!(w[0].counts[t] <= w[1].counts[t]);
        }
    }
}
