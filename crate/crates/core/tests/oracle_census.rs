use kautz_core::oracle::{
    bfs_distances, delta_census, rho_census, rho_census_with, sigma_census, sigma_census_with,
    DistanceMethod, Execution, SpectrumKind,
};
use kautz_core::words::{WordGraph, WordSpace};
use kautz_core::{BigCount, EnumerationCap, Error, GraphParams, Spectrum64};

fn params(d: u32, row: usize) -> GraphParams {
    GraphParams::new(d, row).unwrap()
}

fn counts(s: &Spectrum64) -> Vec<u64> {
    s.counts().values().copied().collect()
}

fn rho(d: u32, row: usize) -> Vec<u64> {
    counts(&rho_census(&params(d, row), &EnumerationCap::default()).unwrap())
}

fn sigma(d: u32, row: usize, method: DistanceMethod) -> Vec<u64> {
    counts(&sigma_census(&params(d, row), method, &EnumerationCap::default()).unwrap())
}

/// `ρ` from shortest return paths found by BFS, independent of overlaps.
fn rho_by_bfs(d: u32, row: usize) -> Vec<u64> {
    let g = WordGraph::build(&params(d, row), &EnumerationCap::default()).unwrap();
    let mut out = vec![0u64; row];
    for u in 0..g.vertex_count() {
        for &v in g.successors(u) {
            let back = bfs_distances(&g, v as usize)[u] as usize;
            out[back - 1] += 1;
        }
    }
    out
}

#[test]
fn reference_rows() {
    assert_eq!(rho(2, 3), [6, 6, 12]);
    assert_eq!(rho(2, 4), [6, 6, 12, 24]);
    assert_eq!(rho(2, 10), [6, 6, 12, 30, 54, 126, 234, 474, 804, 1326]);
    assert_eq!(sigma(2, 2, DistanceMethod::Overlap), [12, 18]);
    assert_eq!(sigma(2, 3, DistanceMethod::Overlap), [24, 42, 66]);
    assert_eq!(sigma(2, 4, DistanceMethod::Bfs), [48, 90, 162, 252]);
    let tops: Vec<u64> = (2..=5).map(|row| rho(3, row)[row - 1]).collect();
    assert_eq!(tops, [24, 72, 216, 624]);
}

#[test]
fn rho_agrees_with_bfs_return_paths() {
    for (d, max) in [(2u32, 9usize), (3, 5), (4, 4)] {
        for row in 2..=max {
            assert_eq!(rho(d, row), rho_by_bfs(d, row), "d={d} D={row}");
        }
    }
}

#[test]
fn sigma_methods_agree() {
    for (d, max) in [(2u32, 9usize), (3, 5), (5, 3)] {
        for row in 1..=max {
            assert_eq!(
                sigma(d, row, DistanceMethod::Overlap),
                sigma(d, row, DistanceMethod::Bfs)
            );
        }
    }
}

#[test]
fn partitions_hold() {
    for (d, max) in [(2u32, 12usize), (3, 7), (4, 5)] {
        for row in 1..=max {
            let p = params(d, row);
            assert_eq!(rho(d, row).iter().sum::<u64>() as u128, p.edge_count_u128());
            if row <= 8 {
                let v = p.vertex_count_u128();
                assert_eq!(
                    sigma(d, row, DistanceMethod::Bfs).iter().sum::<u64>() as u128,
                    v * (v - 1)
                );
            }
        }
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let cap = EnumerationCap::default();
    let p = params(2, 12);
    let seq: Spectrum64 = rho_census_with(&p, &cap, Execution::Sequential).unwrap();
    let par: Spectrum64 = rho_census_with(&p, &cap, Execution::Parallel { chunk: 777 }).unwrap();
    assert_eq!(seq, par);
    let p = params(3, 5);
    let seq: Spectrum64 =
        sigma_census_with(&p, DistanceMethod::Overlap, &cap, Execution::Sequential).unwrap();
    let par: Spectrum64 = sigma_census_with(
        &p,
        DistanceMethod::Overlap,
        &cap,
        Execution::Parallel { chunk: 13 },
    )
    .unwrap();
    assert_eq!(seq, par);
}

#[test]
fn big_and_machine_scalars_agree() {
    let cap = EnumerationCap::default();
    let small: Spectrum64 = rho_census(&params(3, 6), &cap).unwrap();
    let big: kautz_core::Spectrum = rho_census(&params(3, 6), &cap).unwrap();
    for (k, v) in small.counts() {
        assert_eq!(BigCount::from(*v), big.get(*k));
    }
}

#[test]
fn delta_rows() {
    let cap = EnumerationCap::default();
    let first: Spectrum64 = delta_census(2, 1, &cap).unwrap();
    assert_eq!(counts(&first), rho(2, 1));
    let d11: Spectrum64 = delta_census(2, 11, &cap).unwrap();
    assert_eq!(d11.kind(), SpectrumKind::Delta);
    assert_eq!(counts(&d11)[6..], [6, 18, 96, 384, 2568]);
}

#[test]
fn caps_are_enforced() {
    let tight = EnumerationCap::default().with_edges(100);
    let err = rho_census::<u64>(&params(2, 6), &tight).unwrap_err();
    assert!(matches!(err, Error::Resource { .. }), "{err}");
    assert!(rho_census::<u64>(&params(2, 5), &tight).is_ok());
}

#[test]
fn spaces_have_the_right_size() {
    for (d, row) in [(2u32, 1usize), (2, 7), (3, 4), (7, 3)] {
        let p = params(d, row);
        assert_eq!(WordSpace::new(p).len() as u128, p.vertex_count_u128());
        assert_eq!(
            WordSpace::new(p.next_row()).len() as u128,
            p.edge_count_u128()
        );
    }
}
