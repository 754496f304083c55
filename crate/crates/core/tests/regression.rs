//! Frozen-seed regression: a random code is certified Suboptimal with a
//! pinned minimum distance.

use stiefel_core::optimizer::{random_stiefel, restart_rng};
use stiefel_core::{certify_default, Classification, FieldTag, StiefelCode64, StiefelPoint64};

fn random_code(field: FieldTag, d: usize, r: usize, n: usize, seed: u64) -> StiefelCode64 {
    let mut rng = restart_rng(seed, 0);
    let mats = (0..n)
        .map(|_| {
            let p: StiefelPoint64 = random_stiefel(field, d, r, &mut rng).unwrap();
            p.matrix().clone()
        })
        .collect();
    StiefelCode64::from_matrices(field, mats, 1e-10).unwrap()
}

#[test]
fn frozen_random_codes() {
    let cases = [
        (FieldTag::R, 4, 2, 6, 20260101, FROZEN_R),
        (FieldTag::C, 3, 2, 9, 20260102, FROZEN_C),
    ];
    for (field, d, r, n, seed, frozen) in cases {
        let code = random_code(field, d, r, n, seed);
        let rep = certify_default(&code);
        println!("{field} ({d},{r},{n}) seed {seed}: {:.17e}", rep.min_distance);
        assert_eq!(rep.classification, Classification::Suboptimal);
        assert!((rep.min_distance - frozen).abs() <= 1e-12, "{} vs {frozen}", rep.min_distance);
        assert_eq!(code, random_code(field, d, r, n, seed));
    }
}

const FROZEN_R: f64 = 7.052189484758444e-1;
const FROZEN_C: f64 = 9.566655167124042e-1;
