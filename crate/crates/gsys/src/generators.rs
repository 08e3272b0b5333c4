//! Granules, their path-segment twins, generator extraction, bases, and the
//! per-time representative sets feeding the encoder.
//!
//! A *granule* at (t, k) is the quotient of the span-(k+1) segment subcode by
//! the product of its two span-k children; its coset representatives are the
//! generators of span exactly k+1 starting at t.  Collecting one transversal
//! per (t, k) gives a basis: every codeword is a unique product of basis
//! generators, which is what the time-domain encoder exploits.

use crate::algebra::{
    is_subset, quotient, set_product, subgroup_as_group, ElementSet, FiniteGroup, QuotientGroup,
    validate_group,
};
use crate::chains::{delta, follower, matrix_entry};
use crate::system::{BlockCode, GroupTrellis};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(thiserror::Error, Debug)]
pub enum GeneratorError {
    #[error("slot (j={j}, k={k}) at time {t} is not a transversal of its chain quotient")]
    TransversalDeficit { t: i64, j: usize, k: usize },
    #[error("granule and path-segment quotient disagree at (t={0}, k={1})")]
    CorrespondenceMismatch(i64, usize),
}

/// Codewords identity outside [t1, t2], as a subgroup of the codeword group.
pub fn segment_subcode(code: &Arc<BlockCode>, t1: i64, t2: i64) -> ElementSet {
    let members = (0..code.words.len())
        .filter(|&c| code.supported_on(c, t1, t2))
        .collect();
    ElementSet::new(&code.group, members)
}

/// A granule: the span-(k+1) segment subcode modulo the product of its two
/// span-k children.
#[derive(Debug)]
pub struct Granule {
    pub t: i64,
    pub k: usize,
    /// Quotient over the segment subcode (re-indexed as its own group).
    pub quotient: QuotientGroup,
    /// Codeword indices of the segment subcode, by subgroup index.
    pub members: Vec<usize>,
    /// Least codeword index per coset; entry 0 is the all-identity word.
    pub transversal_words: Vec<usize>,
}

impl Granule {
    pub fn order(&self) -> usize {
        self.quotient.quotient.order
    }

    /// Coset index (in this granule) of a codeword lying in the segment.
    pub fn coset_of_word(&self, c: usize) -> Option<usize> {
        let idx = self.members.binary_search(&c).ok()?;
        Some(self.quotient.projection[idx])
    }
}

pub fn granule(code: &Arc<BlockCode>, t: i64, k: usize) -> Granule {
    let seg = segment_subcode(code, t, t + k as i64);
    let (sub, members) = subgroup_as_group("segment", &seg).unwrap();
    let inner = set_product(
        &segment_subcode(code, t, t + k as i64 - 1),
        &segment_subcode(code, t + 1, t + k as i64),
    )
    .unwrap();
    let inner_sub = ElementSet::new(
        &sub,
        (0..members.len())
            .filter(|&i| inner.contains(members[i]))
            .collect(),
    );
    let q = quotient(&sub, &inner_sub).unwrap();
    // Coset labels follow least member, and member order follows codeword
    // order, so coset c's least codeword is its first member.
    let transversal_words = q
        .cosets
        .iter()
        .map(|coset| members[coset.members[0]])
        .collect();
    Granule {
        t,
        k,
        quotient: q,
        members,
        transversal_words,
    }
}

/// The path-segment quotient over [t, t+k]: branch tuples of codewords whose
/// branches stay inside the follower images of Delta_k, modulo the same data
/// for Delta_{k-1}.  Its order must match the granule's, with the granule
/// transversal hitting each coset once.
pub fn lambda(trellis: &GroupTrellis, t: i64, k: usize) -> Result<usize, GeneratorError> {
    let tuples = |kk: i64| -> (Vec<Vec<usize>>, Vec<usize>) {
        // Follower images F^p(Delta_kk) for p = 0..=k.
        let mut sets = Vec::with_capacity(k + 1);
        let mut cur = delta(trellis, t, kk);
        for p in 0..=k {
            if p > 0 {
                cur = follower(trellis, &cur, t + p as i64 - 1);
            }
            sets.push(cur.clone());
        }
        let mut seen: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut reps = Vec::new();
        for c in 0..trellis.code.words.len() {
            let tuple: Vec<usize> = (0..=k)
                .map(|p| trellis.branch_of_word(c, t + p as i64))
                .collect();
            if tuple
                .iter()
                .zip(&sets)
                .all(|(&b, s)| s.contains(b))
                && !seen.contains_key(&tuple)
            {
                seen.insert(tuple.clone(), reps.len());
                reps.push(c);
            }
        }
        let mut pairs: Vec<(Vec<usize>, usize)> =
            seen.into_iter().map(|(tup, i)| (tup, reps[i])).collect();
        pairs.sort();
        let (tuples, word_reps): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        (tuples, word_reps)
    };
    let (big, big_reps) = tuples(k as i64);
    let (small, _) = tuples(k as i64 - 1);
    // The tuple sets are subgroups under componentwise branch products;
    // build the big one as a group and quotient by the small one.
    let index: BTreeMap<&[usize], usize> = big
        .iter()
        .enumerate()
        .map(|(i, tup)| (tup.as_slice(), i))
        .collect();
    let n = big.len();
    let mut table = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let c = trellis.code.group.mul(big_reps[a], big_reps[b]);
            let tup: Vec<usize> = (0..=k)
                .map(|p| trellis.branch_of_word(c, t + p as i64))
                .collect();
            table[a][b] = index[tup.as_slice()];
        }
    }
    let big_group = Arc::new(validate_group("segments", table).unwrap());
    let small_set = ElementSet::new(
        &big_group,
        small.iter().map(|tup| index[tup.as_slice()]).collect(),
    );
    let q = quotient(&big_group, &small_set)
        .map_err(|_| GeneratorError::CorrespondenceMismatch(t, k))?;
    let order = q.quotient.order;

    // One-to-one correspondence with the granule: its transversal words map
    // to pairwise distinct cosets and cover them.
    let gran = granule(&trellis.code, t, k);
    if gran.order() != order {
        return Err(GeneratorError::CorrespondenceMismatch(t, k));
    }
    let mut hit = std::collections::BTreeSet::new();
    for &w in &gran.transversal_words {
        let tup: Vec<usize> = (0..=k)
            .map(|p| trellis.branch_of_word(w, t + p as i64))
            .collect();
        let idx = *index
            .get(tup.as_slice())
            .ok_or(GeneratorError::CorrespondenceMismatch(t, k))?;
        hit.insert(q.projection[idx]);
    }
    if hit.len() != order {
        return Err(GeneratorError::CorrespondenceMismatch(t, k));
    }
    Ok(order)
}

/// One granule transversal with its branch components.
#[derive(Debug, Clone)]
pub struct GenFamily {
    pub start: i64,
    pub k: usize,
    /// Codeword per coset (least-codeword rule; entry 0 is the identity).
    pub words: Vec<usize>,
    /// branches[c][p] = branch of words[c] at time start + p.
    pub branches: Vec<Vec<usize>>,
}

/// A transversal choice for every (t, k) with a nontrivial granule.
#[derive(Debug)]
pub struct GeneratorBasis {
    pub ell: usize,
    pub families: BTreeMap<(i64, usize), GenFamily>,
    /// Declared time-invariance (from the code's period-1 flag).
    pub constant: bool,
}

impl GeneratorBasis {
    pub fn family(&self, start: i64, k: usize) -> Option<&GenFamily> {
        self.families.get(&(start, k))
    }

    /// Number of nontrivial generators (nonidentity transversal entries).
    pub fn generator_count(&self) -> usize {
        self.families.values().map(|f| f.words.len() - 1).sum()
    }
}

/// Extracts the deterministic generator family at (t, k); `None` when the
/// granule is trivial.  Each branch-component set is verified to be a
/// transversal of its chain quotient.
pub fn extract_generators(
    trellis: &GroupTrellis,
    t: i64,
    k: usize,
) -> Result<Option<GenFamily>, GeneratorError> {
    let gran = granule(&trellis.code, t, k);
    if gran.order() == 1 {
        return Ok(None);
    }
    let words = gran.transversal_words.clone();
    let branches: Vec<Vec<usize>> = words
        .iter()
        .map(|&w| {
            (0..=k)
                .map(|p| trellis.branch_of_word(w, t + p as i64))
                .collect()
        })
        .collect();
    let family = GenFamily {
        start: t,
        k,
        words,
        branches,
    };
    for j in 0..=k {
        check_component_transversal(trellis, &family, j)?;
    }
    Ok(Some(family))
}

/// The j-th components of a family must be a transversal of
/// entry(j,k)/entry(j,k-1) at time start+j.
fn check_component_transversal(
    trellis: &GroupTrellis,
    family: &GenFamily,
    j: usize,
) -> Result<(), GeneratorError> {
    let t = family.start + j as i64;
    let k = family.k;
    let num = matrix_entry(trellis, t, j, k as i64);
    let den = matrix_entry(trellis, t, j, k as i64 - 1);
    let group = trellis.section_group(t);
    let reps: Vec<usize> = family.branches.iter().map(|b| b[j]).collect();
    let fail = || GeneratorError::TransversalDeficit { t, j, k };
    if reps.len() * den.len() != num.len() {
        return Err(fail());
    }
    let mut seen = std::collections::BTreeSet::new();
    for &r in &reps {
        if !num.contains(r) {
            return Err(fail());
        }
        let label = den.members.iter().map(|&y| group.mul(r, y)).min().unwrap();
        if !seen.insert(label) {
            return Err(fail());
        }
    }
    Ok(())
}

pub fn build_basis(trellis: &GroupTrellis, ell: usize) -> Result<GeneratorBasis, GeneratorError> {
    let mut families = BTreeMap::new();
    for t in 0..trellis.len() as i64 {
        for k in 0..=ell {
            if let Some(f) = extract_generators(trellis, t, k)? {
                families.insert((t, k), f);
            }
        }
    }
    Ok(GeneratorBasis {
        ell,
        families,
        constant: trellis.code.period1,
    })
}

/// One encoder slot: the (j, k) position of the representative matrix at a
/// fixed time, holding the j-th components of the generators starting at
/// t - j with span k+1, together with its chain level.
#[derive(Debug, Clone)]
pub struct RepSlot {
    pub j: usize,
    pub k: usize,
    pub start: i64,
    /// Branch per granule coset; [0] alone when the granule is trivial.
    pub reps: Vec<usize>,
    pub level: ElementSet,
}

/// The complete representative set at one time, slots in column-major order
/// (0,0), (0,1), ..., (0,ell), (1,1), ..., (ell,ell).  Consecutive slot
/// levels form the normal chain that the encoder walks.
#[derive(Debug)]
pub struct RepSet {
    pub t: i64,
    pub ell: usize,
    pub slots: Vec<RepSlot>,
    pub group: Arc<FiniteGroup>,
}

impl RepSet {
    pub fn slot_index(&self, j: usize, k: usize) -> usize {
        debug_assert!(j <= k && k <= self.ell);
        // Column j starts after columns 0..j of lengths ell+1-j'.
        let before: usize = (0..j).map(|jp| self.ell + 1 - jp).sum();
        before + (k - j)
    }

    pub fn slot(&self, j: usize, k: usize) -> &RepSlot {
        &self.slots[self.slot_index(j, k)]
    }

    pub fn below(&self, idx: usize) -> ElementSet {
        if idx == 0 {
            ElementSet::identity_only(&self.group)
        } else {
            self.slots[idx - 1].level.clone()
        }
    }

    /// Total carrier size: the product of slot sizes.
    pub fn carrier_size(&self) -> usize {
        self.slots.iter().map(|s| s.reps.len()).product()
    }
}

/// Assembles the representative set at time `t` from a basis, verifying that
/// every slot is a transversal of its chain quotient.
pub fn complete_rep_set(
    trellis: &GroupTrellis,
    basis: &GeneratorBasis,
    t: i64,
) -> Result<RepSet, GeneratorError> {
    let ell = basis.ell;
    let group = trellis.section_group(t);
    let mut slots = Vec::new();
    for j in 0..=ell {
        for k in j..=ell {
            let start = t - j as i64;
            let reps = match basis.family(start, k) {
                Some(f) => f.branches.iter().map(|b| b[j]).collect(),
                None => vec![0],
            };
            let level = matrix_entry(trellis, t, j, k as i64);
            slots.push(RepSlot {
                j,
                k,
                start,
                reps,
                level,
            });
        }
    }
    let set = RepSet {
        t,
        ell,
        slots,
        group,
    };
    for idx in 0..set.slots.len() {
        let slot = &set.slots[idx];
        let below = set.below(idx);
        if !is_subset(&below, &slot.level)
            || slot.reps.len() * below.len() != slot.level.len()
        {
            return Err(GeneratorError::TransversalDeficit {
                t,
                j: slot.j,
                k: slot.k,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for &r in &slot.reps {
            if !slot.level.contains(r) {
                return Err(GeneratorError::TransversalDeficit {
                    t,
                    j: slot.j,
                    k: slot.k,
                });
            }
            let label = below
                .members
                .iter()
                .map(|&y| set.group.mul(r, y))
                .min()
                .unwrap();
            if !seen.insert(label) {
                return Err(GeneratorError::TransversalDeficit {
                    t,
                    j: slot.j,
                    k: slot.k,
                });
            }
        }
    }
    Ok(set)
}

/// A representative matrix at one time, stored as the granule-coset index of
/// each slot (column-major, aligned with `RepSet::slots`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepMatrix {
    pub t: i64,
    pub cosets: Vec<usize>,
}

impl RepMatrix {
    pub fn identity(rep_set: &RepSet) -> RepMatrix {
        RepMatrix {
            t: rep_set.t,
            cosets: vec![0; rep_set.slots.len()],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.cosets.iter().all(|&c| c == 0)
    }
}

/// A per-time sequence of representative matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor {
    pub start: i64,
    pub mats: Vec<RepMatrix>,
}

/// Shift condition between consecutive matrices: every non-first-column slot
/// of the later matrix repeats the slot one position up-left in the earlier
/// one (same generator, next component); diagonal slots shift out.
pub fn validate_tensor(rep_sets: &[RepSet], tensor: &Tensor) -> bool {
    if tensor.mats.len() != rep_sets.len()
        || tensor
            .mats
            .iter()
            .zip(rep_sets)
            .any(|(m, rs)| m.t != rs.t || m.cosets.len() != rs.slots.len())
    {
        return false;
    }
    for w in 0..tensor.mats.len().saturating_sub(1) {
        let rs = &rep_sets[w];
        let rs_next = &rep_sets[w + 1];
        let ell = rs.ell;
        for j in 0..ell {
            for k in (j + 1)..=ell {
                if tensor.mats[w + 1].cosets[rs_next.slot_index(j + 1, k)]
                    != tensor.mats[w].cosets[rs.slot_index(j, k)]
                {
                    return false;
                }
            }
        }
    }
    true
}

/// Renders a basis as `gen t=<t> k=<k> : <elements>` lines, generators
/// restricted to their nontrivial window.
pub fn dump_basis(code: &BlockCode, basis: &GeneratorBasis) -> String {
    let mut out = String::new();
    for ((t, k), family) in &basis.families {
        for &w in family.words.iter().skip(1) {
            let lo = (*t).max(0) as usize;
            let hi = ((*t + *k as i64).min(code.length as i64 - 1)) as usize;
            let elems: Vec<String> = (lo..=hi)
                .map(|s| code.words[w][s].to_string())
                .collect();
            out.push_str(&format!("gen t={} k={} : {}\n", t, k, elems.join(" ")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::controllability_index;
    use crate::system::build_canonic_trellis;
    use crate::testutil::{even4_code, h8_code, trivial_code, z2rep_code};

    #[test]
    fn h8_segment_sizes() {
        let code = h8_code();
        assert_eq!(segment_subcode(&code, 0, 3).len(), 16);
        assert_eq!(segment_subcode(&code, 0, 1).len(), 2);
        assert_eq!(segment_subcode(&code, 0, 2).len(), 4);
        assert_eq!(segment_subcode(&code, 1, 2).len(), 2);
        assert_eq!(segment_subcode(&code, 0, 0).len(), 1);
    }

    #[test]
    fn h8_granule_orders() {
        let code = h8_code();
        // Span 4 at the start, span 2 at each of the three starts; nothing of
        // span 3 or 1.
        assert_eq!(granule(&code, 0, 3).order(), 2);
        assert_eq!(granule(&code, 0, 1).order(), 2);
        assert_eq!(granule(&code, 1, 1).order(), 2);
        assert_eq!(granule(&code, 2, 1).order(), 2);
        for t in 0..4 {
            assert_eq!(granule(&code, t, 0).order(), 1);
            assert_eq!(granule(&code, t, 2).order(), 1);
        }
        assert_eq!(granule(&code, 1, 3).order(), 1);
    }

    #[test]
    fn h8_lambda_matches_granules() {
        let trellis = build_canonic_trellis(&h8_code()).unwrap();
        for t in 0..4i64 {
            for k in 0..=3usize {
                let lam = lambda(&trellis, t, k).unwrap();
                assert_eq!(lam, granule(&trellis.code, t, k).order(), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn h8_basis_families() {
        let trellis = build_canonic_trellis(&h8_code()).unwrap();
        let basis = build_basis(&trellis, 3).unwrap();
        assert_eq!(basis.generator_count(), 4);
        let keys: Vec<(i64, usize)> = basis.families.keys().copied().collect();
        assert_eq!(keys, vec![(0, 1), (0, 3), (1, 1), (2, 1)]);
        // The least-codeword rule picks (1,1,1,1) for the span-4 coset and
        // the pure generators for the span-2 cosets.
        let f = basis.family(0, 3).unwrap();
        assert_eq!(trellis.code.words[f.words[1]], vec![1, 1, 1, 1]);
        let f = basis.family(0, 1).unwrap();
        assert_eq!(trellis.code.words[f.words[1]], vec![3, 3, 0, 0]);
        let f = basis.family(1, 1).unwrap();
        assert_eq!(trellis.code.words[f.words[1]], vec![0, 3, 3, 0]);
        let f = basis.family(2, 1).unwrap();
        assert_eq!(trellis.code.words[f.words[1]], vec![0, 0, 3, 3]);
    }

    #[test]
    fn rep_set_sizes_multiply_to_branch_order() {
        for code in [trivial_code(), z2rep_code(), even4_code(), h8_code()] {
            let trellis = build_canonic_trellis(&code).unwrap();
            let ell = controllability_index(&trellis).unwrap();
            let basis = build_basis(&trellis, ell).unwrap();
            for t in 0..trellis.len() as i64 {
                let rs = complete_rep_set(&trellis, &basis, t).unwrap();
                assert_eq!(
                    rs.carrier_size(),
                    trellis.section_group(t).order,
                    "{} t={t}",
                    code.name
                );
            }
        }
    }

    #[test]
    fn even4_families_are_shifts() {
        let trellis = build_canonic_trellis(&even4_code()).unwrap();
        let basis = build_basis(&trellis, 1).unwrap();
        let keys: Vec<(i64, usize)> = basis.families.keys().copied().collect();
        assert_eq!(keys, vec![(0, 1), (1, 1), (2, 1)]);
        for (key, f) in &basis.families {
            let w = f.words[1];
            let word = &trellis.code.words[w];
            let t = key.0 as usize;
            assert!(word.iter().enumerate().all(|(s, &x)| {
                if s == t || s == t + 1 { x == 1 } else { x == 0 }
            }));
        }
    }

    #[test]
    fn tensor_shift_condition() {
        let trellis = build_canonic_trellis(&h8_code()).unwrap();
        let basis = build_basis(&trellis, 3).unwrap();
        let rep_sets: Vec<RepSet> = (0..4)
            .map(|t| complete_rep_set(&trellis, &basis, t).unwrap())
            .collect();
        let mut tensor = Tensor {
            start: 0,
            mats: rep_sets.iter().map(RepMatrix::identity).collect(),
        };
        assert!(validate_tensor(&rep_sets, &tensor));
        // Select the span-4 generator at time 0 in every component.
        for (t, mat) in tensor.mats.iter_mut().enumerate() {
            let rs = &rep_sets[t];
            mat.cosets[rs.slot_index(t, 3)] = 1;
        }
        assert!(validate_tensor(&rep_sets, &tensor));
        // Breaking one shifted entry must fail.
        let rs = &rep_sets[2];
        tensor.mats[2].cosets[rs.slot_index(2, 3)] = 0;
        assert!(!validate_tensor(&rep_sets, &tensor));
    }

    #[test]
    fn basis_dump_shape() {
        let trellis = build_canonic_trellis(&h8_code()).unwrap();
        let basis = build_basis(&trellis, 3).unwrap();
        let dump = dump_basis(&trellis.code, &basis);
        assert!(dump.contains("gen t=0 k=1 : 3 3"));
        assert!(dump.contains("gen t=0 k=3 : 1 1 1 1"));
        assert!(dump.contains("gen t=2 k=1 : 3 3"));
    }
}
