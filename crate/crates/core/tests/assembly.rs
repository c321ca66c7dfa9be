use slabfold::geometry::PlanarRect;
use slabfold::gridgen::{audit_catalog, build_catalog, ParamSeed};
use slabfold::slicing::assemble_phi;
use slabfold::tree::build_overlap_tree;

const DESK_M: [usize; 6] = [1, 1, 1, 1, 3, 3];

fn desk(seed: u64) -> slabfold::gridgen::RectCatalog {
    let vp = PlanarRect::from_bounds(0, 599, 0, 599);
    build_catalog(&ParamSeed::new(2, 3, vec![3, 4, 5], seed), vp).unwrap()
}

#[test]
fn desk_assembly_is_clean_and_matches_forest() {
    for seed in 0..4 {
        let cat = desk(seed);
        assert!(audit_catalog(&cat).is_empty());
        let tree = build_overlap_tree(&cat).unwrap();
        let a = assemble_phi(&cat, &tree, &DESK_M, seed).unwrap();
        let report = a.audit();
        assert!(
            report.pass,
            "seed {seed}: {:?}",
            &report.violations[..report.violations.len().min(3)]
        );
        for f in &a.folded {
            assert!(f.graph.is_connected());
            assert_eq!(
                f.graph.vertex_count(),
                f.source.rect.area() as usize + f.top_boundary.len()
            );
        }
        let slots: Vec<usize> = a.full_chain_slots().collect();
        assert!(!slots.is_empty());
        assert_eq!(
            a.components_among(slots.iter().copied()),
            a.forest.components_among(slots.iter().copied())
        );
        assert!(
            !a.graph.missing_adjacencies().is_empty() || a.forest.beta.iter().all(|b| b.is_none())
        );
    }
}

#[test]
fn assembly_is_deterministic() {
    let cat = desk(7);
    let tree = build_overlap_tree(&cat).unwrap();
    let a = assemble_phi(&cat, &tree, &DESK_M, 7).unwrap();
    let b = assemble_phi(&cat, &tree, &DESK_M, 7).unwrap();
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.records(), b.records());
}
