use std::collections::BTreeMap;

use kautz_core::oracle::delta_census;
use kautz_core::transfer::{
    build_transfer, calibrate_schedule, delta_by_transfer, masks_d2, per_start_counts,
    search_masks, terminal_states, CalibrationReport, Mask, MaskSchedule, SquareMatrix,
};
use kautz_core::{BigCount, DeltaRow, EnumerationCap, Error, TransferSystem64};
use proptest::prelude::*;

#[test]
fn states_and_degrees() {
    for q in 3u32..=6 {
        let sys: TransferSystem64 = build_transfer(q).unwrap();
        let n = (q * (q - 1)) as usize;
        assert_eq!(sys.states(), terminal_states(q).as_slice());
        assert_eq!(sys.state_count(), n);
        assert_eq!(
            sys.transfer().row_sums().unwrap(),
            vec![u64::from(q - 1); n]
        );
        assert_eq!(
            sys.transfer().column_sums().unwrap(),
            vec![u64::from(q - 1); n]
        );
        assert_eq!(sys.has_masks(), q == 3);
    }
    assert!(matches!(build_transfer::<u64>(2), Err(Error::Domain(_))));
}

#[test]
fn printed_masks() {
    let masks = masks_d2();
    assert_eq!(masks[&0].bits(), [0, 0, 1, 0, 1, 0]);
    assert_eq!(masks[&1].bits(), [1, 0, 1, 1, 0, 1]);
    assert_eq!(masks[&2].bits(), [1, 1, 0, 1, 0, 1]);
}

#[test]
fn calibration_finds_no_schedule() {
    let report = calibrate_schedule(2, 2..=8, &EnumerationCap::default()).unwrap();
    assert_eq!(report.candidates.len(), 16);
    assert_eq!(report.tested_range, [2, 8]);
    assert!(matches!(report.resolve(), Err(Error::NoMatch(16))));
    assert!(report.chosen().is_none());
    // The k = 1 cells alone rule out every reading.
    assert!(report.candidates.iter().all(|c| c.mismatches >= 7));
    let text = report.to_json().unwrap();
    assert_eq!(CalibrationReport::from_json(&text).unwrap(), report);
    assert_eq!(
        calibrate_schedule(2, 2..=8, &EnumerationCap::default())
            .unwrap()
            .to_json()
            .unwrap(),
        text
    );
}

#[test]
fn calibration_requires_masks() {
    assert!(matches!(
        calibrate_schedule(3, 2..=3, &EnumerationCap::default()),
        Err(Error::MasksUndefined(4))
    ));
}

#[test]
fn identity_masks_count_walks() {
    // Closing factor S (I - Λ0) = S, every inner factor S: plain walk counts.
    let mut masks: BTreeMap<usize, Mask> = (1..3).map(|s| (s, Mask::identity(6))).collect();
    masks.insert(0, Mask::identity(6).complement());
    let sys: TransferSystem64 = build_transfer::<u64>(3).unwrap().with_masks(masks).unwrap();
    for row in 2..=9 {
        for k in 1..=row {
            let starts = per_start_counts(&sys, &MaskSchedule::default(), 2, row, k).unwrap();
            assert_eq!(starts, vec![1u64 << k; 6], "D={row} k={k}");
        }
    }
}

#[test]
fn per_start_counts_vary_under_printed_masks() {
    let sys: TransferSystem64 = build_transfer(3).unwrap();
    let starts = per_start_counts(&sys, &MaskSchedule::default(), 2, 10, 1).unwrap();
    assert!(starts.iter().any(|s| *s != starts[0]), "{starts:?}");
    let delta = delta_by_transfer(&sys, &MaskSchedule::default(), 2, 10, 9).unwrap();
    assert_eq!(delta % 6, 0);
}

#[test]
fn mask_search_finds_nothing() {
    let rows: Vec<DeltaRow> = (2..=7)
        .map(|row| delta_census::<BigCount>(2, row, &EnumerationCap::default()).unwrap())
        .collect();
    let report = search_masks(2, &rows, &MaskSchedule::default(), 3, 1 << 20).unwrap();
    assert!(report.masks.is_none());
    assert!(matches!(report.into_masks(), Err(Error::NoFit(_))));
}

#[test]
fn schedule_candidates_are_distinct() {
    let all = MaskSchedule::candidates();
    let mut names: Vec<String> = all.iter().map(|s| s.descriptor()).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 16);
    assert_eq!(MaskSchedule::default().offsets(10, 3), [8, 9]);
    assert!(MaskSchedule::default().offsets(10, 1).is_empty());
}

fn matrix(n: usize) -> impl Strategy<Value = SquareMatrix<u64>> {
    prop::collection::vec(0u64..4, n * n)
        .prop_map(move |v| SquareMatrix::from_fn(n, |i, j| v[i * n + j]))
}

proptest! {
    #[test]
    fn multiplication_is_associative((a, b, c) in (matrix(5), matrix(5), matrix(5))) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn mul_vec_matches_row_sums(a in matrix(6)) {
        prop_assert_eq!(a.mul_vec(&[1; 6]).unwrap(), a.row_sums().unwrap());
    }

    #[test]
    fn mask_bits_round_trip(bits in prop::collection::vec(0u8..=1, 1..30)) {
        let mask = Mask::from_bits(&bits).unwrap();
        prop_assert_eq!(mask.bits(), bits.clone());
        prop_assert_eq!(mask.complement().complement(), mask.clone());
        let json = serde_json::to_string(&mask).unwrap();
        prop_assert_eq!(serde_json::from_str::<Mask>(&json).unwrap(), mask);
    }

    #[test]
    fn transfer_deltas_are_multiples_of_n(row in 2usize..=12, k_seed in 0usize..100) {
        let k = 1 + k_seed % row;
        let sys: TransferSystem64 = build_transfer(3).unwrap();
        for schedule in MaskSchedule::candidates() {
            prop_assert_eq!(delta_by_transfer(&sys, &schedule, 2, row, k).unwrap() % 6, 0);
        }
    }
}
