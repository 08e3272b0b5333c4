//! Shared small groups and codes used across unit tests.

use crate::algebra::{validate_group, FiniteGroup};
use std::sync::Arc;

pub fn z2() -> Arc<FiniteGroup> {
    Arc::new(validate_group("Z2", vec![vec![0, 1], vec![1, 0]]).unwrap())
}

/// Klein four-group as XOR on {0,1,2,3} (bit pairs 00,01,10,11).
pub fn v4() -> Arc<FiniteGroup> {
    let table = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
    Arc::new(validate_group("V4", table).unwrap())
}

pub fn z4() -> Arc<FiniteGroup> {
    let table = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
    Arc::new(validate_group("Z4", table).unwrap())
}

/// The (8,4) extended Hamming code viewed over V4 (bit pairs XOR), closure
/// of four generators; 16 codewords, controllability index 3.
pub fn h8_code() -> Arc<crate::system::BlockCode> {
    let gens = vec![
        vec![2, 2, 2, 2],
        vec![3, 3, 0, 0],
        vec![0, 3, 3, 0],
        vec![0, 0, 3, 3],
    ];
    crate::system::BlockCode::new("H8", vec![v4(); 4], gens, true, false).unwrap()
}

/// Repetition code over Z2^2: closure of (1,1); index 1.
pub fn z2rep_code() -> Arc<crate::system::BlockCode> {
    crate::system::BlockCode::new("z2rep", vec![z2(); 2], vec![vec![1, 1]], true, false).unwrap()
}

/// Even-weight words of length 4 over Z2, declared period-1; the block
/// presentation of the time-invariant rate-1 2-state binary system.
pub fn even4_code() -> Arc<crate::system::BlockCode> {
    let gens = vec![vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 1, 1]];
    crate::system::BlockCode::new("even4", vec![z2(); 4], gens, true, true).unwrap()
}

pub fn trivial_code() -> Arc<crate::system::BlockCode> {
    crate::system::BlockCode::new("triv", vec![z2(); 2], vec![], true, false).unwrap()
}

pub fn s3() -> Arc<FiniteGroup> {
    // Permutations of {0,1,2} listed so that index 0 is the identity.
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
    let idx = |r: [usize; 3]| perms.iter().position(|p| *p == r).unwrap();
    let table = perms
        .iter()
        .map(|p| perms.iter().map(|q| idx(compose(p, q))).collect())
        .collect();
    Arc::new(validate_group("S3", table).unwrap())
}
