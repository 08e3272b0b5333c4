//! Time-domain encoding: branch groups factored through representative
//! matrices, path-level encoding of tensors to codewords, the induced
//! component-group operation, and the triangle quotient groups carried by
//! sub-triangles of the representative matrices.

use crate::algebra::{validate_group, FiniteGroup};
use crate::chains::{compute_x, compute_y, controllability_index, ChainError};
use crate::generators::{
    build_basis, complete_rep_set, GeneratorBasis, GeneratorError, RepMatrix, RepSet, Tensor,
    validate_tensor,
};
use crate::report::Certificate;
use crate::system::{build_canonic_trellis, BlockCode, GroupTrellis, SystemError};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(thiserror::Error, Debug)]
pub enum EncoderError {
    #[error("coset index out of range in slot (j={j}, k={k}) at time {t}")]
    ForeignRepresentative { t: i64, j: usize, k: usize },
    #[error("tensor violates the shift condition entering time {0}")]
    ShiftViolation(i64),
    #[error("branch sequence does not trace a codeword path")]
    UnknownPath,
    #[error("slice product is not well defined on triangle (j={j}, k={k}) at time {t}")]
    IllDefinedOperation { t: i64, j: usize, k: usize },
    #[error("triangle (j={j}, k={k}) at time {t} has the wrong order")]
    SizeMismatch { t: i64, j: usize, k: usize },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}

/// Everything the codecs need for one analyzed system: canonic trellis,
/// controllability index, generator basis, and the representative set at
/// every time in the window.
pub struct SystemContext {
    pub trellis: GroupTrellis,
    pub ell: usize,
    pub basis: GeneratorBasis,
    pub rep_sets: Vec<RepSet>,
    path_index: BTreeMap<Vec<usize>, usize>,
}

impl SystemContext {
    pub fn code(&self) -> &Arc<BlockCode> {
        &self.trellis.code
    }

    pub fn rep_set(&self, t: i64) -> &RepSet {
        &self.rep_sets[t as usize]
    }

    pub fn len(&self) -> usize {
        self.rep_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep_sets.is_empty()
    }
}

pub fn analyze(code: &Arc<BlockCode>) -> Result<SystemContext, EncoderError> {
    let trellis = build_canonic_trellis(code)?;
    let ell = controllability_index(&trellis)?;
    let basis = build_basis(&trellis, ell)?;
    let rep_sets: Vec<RepSet> = (0..trellis.len() as i64)
        .map(|t| complete_rep_set(&trellis, &basis, t))
        .collect::<Result<_, _>>()?;
    let path_index = (0..code.words.len())
        .map(|c| {
            let path: Vec<usize> = (0..trellis.len() as i64)
                .map(|t| trellis.branch_of_word(c, t))
                .collect();
            (path, c)
        })
        .collect();
    Ok(SystemContext {
        trellis,
        ell,
        basis,
        rep_sets,
        path_index,
    })
}

/// Multiplies out a representative matrix to its branch.  The factor order
/// walks the slots from the top of the chain down: diagonal-first within each
/// column, highest column first.
pub fn encode_component(rep_set: &RepSet, mat: &RepMatrix) -> Result<usize, EncoderError> {
    let mut acc = 0;
    for (idx, slot) in rep_set.slots.iter().enumerate().rev() {
        let c = mat.cosets[idx];
        if c >= slot.reps.len() {
            return Err(EncoderError::ForeignRepresentative {
                t: rep_set.t,
                j: slot.j,
                k: slot.k,
            });
        }
        acc = rep_set.group.mul(acc, slot.reps[c]);
    }
    Ok(acc)
}

/// Peels a branch back into slot cosets, top of the chain first.  Total by
/// the transversal property, inverse to `encode_component`.
pub fn decode_component(rep_set: &RepSet, branch: usize) -> RepMatrix {
    let group = &rep_set.group;
    let mut cur = branch;
    let mut cosets = vec![0usize; rep_set.slots.len()];
    for idx in (0..rep_set.slots.len()).rev() {
        let slot = &rep_set.slots[idx];
        let below = rep_set.below(idx);
        let c = slot
            .reps
            .iter()
            .position(|&r| below.contains(group.mul(group.inv(r), cur)))
            .expect("chain transversals cover the branch group");
        cosets[idx] = c;
        cur = group.mul(group.inv(slot.reps[c]), cur);
    }
    debug_assert_eq!(cur, 0);
    RepMatrix {
        t: rep_set.t,
        cosets,
    }
}

/// Encodes a full tensor to the codeword it addresses.  The tensor must obey
/// the shift condition and its component branches must trace a path.
pub fn encode_path(ctx: &SystemContext, tensor: &Tensor) -> Result<usize, EncoderError> {
    if tensor.start != 0 || !validate_tensor(&ctx.rep_sets, tensor) {
        return Err(EncoderError::ShiftViolation(tensor.start));
    }
    let path: Vec<usize> = tensor
        .mats
        .iter()
        .zip(&ctx.rep_sets)
        .map(|(m, rs)| encode_component(rs, m))
        .collect::<Result<_, _>>()?;
    ctx.path_index
        .get(&path)
        .copied()
        .ok_or(EncoderError::UnknownPath)
}

/// Decodes a codeword into its tensor of representative matrices.
pub fn decode_path(ctx: &SystemContext, c: usize) -> Result<Tensor, EncoderError> {
    let mats: Vec<RepMatrix> = ctx
        .rep_sets
        .iter()
        .map(|rs| decode_component(rs, ctx.trellis.branch_of_word(c, rs.t)))
        .collect();
    let tensor = Tensor { start: 0, mats };
    if !validate_tensor(&ctx.rep_sets, &tensor) {
        return Err(EncoderError::ShiftViolation(tensor.start));
    }
    Ok(tensor)
}

/// The group operation induced on representative matrices by the branch
/// group: decode the branch product of the two encodings.
pub fn induced_product(
    rep_set: &RepSet,
    m1: &RepMatrix,
    m2: &RepMatrix,
) -> Result<RepMatrix, EncoderError> {
    let b = rep_set
        .group
        .mul(encode_component(rep_set, m1)?, encode_component(rep_set, m2)?);
    Ok(decode_component(rep_set, b))
}

/// The set of matrices at one time as a group in its own right, elements
/// indexed in mixed radix over the slot coset counts (identity at 0).
pub struct ComponentGroup {
    pub group: Arc<FiniteGroup>,
    pub sizes: Vec<usize>,
}

impl ComponentGroup {
    pub fn index_of(&self, mat: &RepMatrix) -> usize {
        let mut idx = 0;
        for (&c, &s) in mat.cosets.iter().zip(&self.sizes).rev() {
            idx = idx * s + c;
        }
        idx
    }

    pub fn mat_at(&self, t: i64, mut idx: usize) -> RepMatrix {
        let mut cosets = Vec::with_capacity(self.sizes.len());
        for &s in &self.sizes {
            cosets.push(idx % s);
            idx /= s;
        }
        RepMatrix { t, cosets }
    }
}

pub fn component_group(rep_set: &RepSet) -> Result<ComponentGroup, EncoderError> {
    let sizes: Vec<usize> = rep_set.slots.iter().map(|s| s.reps.len()).collect();
    let n = rep_set.carrier_size();
    let stub = ComponentGroup {
        group: FiniteGroup::trivial("stub"),
        sizes: sizes.clone(),
    };
    let mut table = vec![vec![0usize; n]; n];
    for a in 0..n {
        let ma = stub.mat_at(rep_set.t, a);
        let ba = encode_component(rep_set, &ma)?;
        for b in 0..n {
            let mb = stub.mat_at(rep_set.t, b);
            let bb = encode_component(rep_set, &mb)?;
            let prod = decode_component(rep_set, rep_set.group.mul(ba, bb));
            table[a][b] = stub.index_of(&prod);
        }
    }
    let group = Arc::new(validate_group("component", table).map_err(SystemError::from)?);
    Ok(ComponentGroup { group, sizes })
}

/// A matrix slice keyed by provenance: (generator start time, span index,
/// granule coset) per position, sorted.  Slices at congruent positions of
/// different times are directly comparable.
pub type Slice = Vec<(i64, usize, usize)>;

/// Positions of the sub-triangle with top-left corner (j, k): columns n from
/// k to ell, rows m from j to j + (n - k).
fn triangle_positions(ell: usize, j: usize, k: usize) -> Vec<(usize, usize)> {
    let mut pos = Vec::new();
    for n in k..=ell {
        for m in j..=(j + n - k) {
            pos.push((m, n));
        }
    }
    pos
}

pub fn slice_of(rep_set: &RepSet, mat: &RepMatrix, j: usize, k: usize) -> Slice {
    let mut s: Slice = triangle_positions(rep_set.ell, j, k)
        .into_iter()
        .map(|(m, n)| {
            (
                rep_set.t - m as i64,
                n,
                mat.cosets[rep_set.slot_index(m, n)],
            )
        })
        .collect();
    s.sort();
    s
}

/// The quotient group carried by one sub-triangle: distinct slices under the
/// operation inherited from the branch group.  Construction fails if the
/// inherited operation is not a function of the slices alone.
pub struct TriangleGroup {
    pub t: i64,
    pub j: usize,
    pub k: usize,
    pub carrier: Vec<Slice>,
    pub group: Arc<FiniteGroup>,
}

impl TriangleGroup {
    pub fn order(&self) -> usize {
        self.carrier.len()
    }

    pub fn index_of(&self, s: &Slice) -> Option<usize> {
        self.carrier.iter().position(|c| c == s)
    }
}

pub fn triangle_group(
    ctx: &SystemContext,
    t: i64,
    j: usize,
    k: usize,
) -> Result<TriangleGroup, EncoderError> {
    let rep_set = ctx.rep_set(t);
    let order = rep_set.group.order;
    let mats: Vec<RepMatrix> = (0..order).map(|b| decode_component(rep_set, b)).collect();
    let slices: Vec<Slice> = mats.iter().map(|m| slice_of(rep_set, m, j, k)).collect();
    // Identity slice first, the rest sorted, for a stable carrier order.
    let identity = slices[0].clone();
    debug_assert!(identity.iter().all(|&(_, _, c)| c == 0));
    let mut carrier: Vec<Slice> = slices.iter().filter(|s| **s != identity).cloned().collect();
    carrier.sort();
    carrier.dedup();
    carrier.insert(0, identity);
    let index: BTreeMap<&Slice, usize> = carrier.iter().enumerate().map(|(i, s)| (s, i)).collect();

    let ill = || EncoderError::IllDefinedOperation { t, j, k };
    let n = carrier.len();
    let mut table = vec![vec![usize::MAX; n]; n];
    for b1 in 0..order {
        for b2 in 0..order {
            let prod = slices[rep_set.group.mul(b1, b2)].clone();
            let (i1, i2) = (index[&slices[b1]], index[&slices[b2]]);
            let ip = index[&prod];
            if table[i1][i2] == usize::MAX {
                table[i1][i2] = ip;
            } else if table[i1][i2] != ip {
                return Err(ill());
            }
        }
    }
    let group =
        Arc::new(validate_group("triangle", table).map_err(|_| ill())?);

    // Order check against the chain at the congruent diagonal time, read two
    // equivalent ways.
    let td = t + k as i64 - j as i64;
    let expect = ctx.trellis.section_group(td).order
        / compute_x(&ctx.trellis, td, k as i64 - 1).len();
    let tu = t - j as i64;
    let expect2 = ctx.trellis.section_group(tu).order
        / compute_y(&ctx.trellis, tu, k as i64 - 1).len();
    if n != expect || n != expect2 {
        return Err(EncoderError::SizeMismatch { t, j, k });
    }
    Ok(TriangleGroup {
        t,
        j,
        k,
        carrier,
        group,
    })
}

/// Slices at congruent positions carry identical provenance, so the triangle
/// groups there must agree elementwise, carrier and table both.
pub fn congruent_triangles_agree(a: &TriangleGroup, b: &TriangleGroup) -> bool {
    if a.carrier.len() != b.carrier.len() {
        return false;
    }
    let mut map = Vec::with_capacity(a.carrier.len());
    for s in &a.carrier {
        match b.index_of(s) {
            Some(i) => map.push(i),
            None => return false,
        }
    }
    for x in 0..a.carrier.len() {
        for y in 0..a.carrier.len() {
            if map[a.group.mul(x, y)] != b.group.mul(map[x], map[y]) {
                return false;
            }
        }
    }
    true
}

/// End-to-end certificate for the encoder layer of one analyzed system.
pub fn verify_encoder(ctx: &SystemContext) -> Certificate {
    let mut cert = Certificate::new(format!("encoder checks: {}", ctx.code().name).as_str());
    let num_words = ctx.code().words.len();

    let mut round = true;
    for rs in &ctx.rep_sets {
        for b in 0..rs.group.order {
            if encode_component(rs, &decode_component(rs, b)).ok() != Some(b) {
                round = false;
            }
        }
    }
    cert.push("component round trip", round, "");

    let basis_product: usize = ctx
        .basis
        .families
        .values()
        .map(|f| f.words.len())
        .product();
    cert.push(
        "basis spans the code",
        basis_product == num_words,
        format!("{} addressable words", basis_product),
    );

    let mut paths = true;
    for c in 0..num_words {
        match decode_path(ctx, c).and_then(|tensor| encode_path(ctx, &tensor)) {
            Ok(back) if back == c => {}
            _ => paths = false,
        }
    }
    cert.push("path round trip", paths, "");

    let mut induced = true;
    for rs in &ctx.rep_sets {
        match component_group(rs) {
            Ok(cg) if cg.group.order == rs.group.order => {}
            _ => induced = false,
        }
    }
    cert.push("induced component groups", induced, "");

    let mut tri = true;
    let mut congruent = true;
    for t in 0..ctx.len() as i64 {
        for k in 0..=ctx.ell {
            for j in 0..=k {
                match triangle_group(ctx, t, j, k) {
                    Ok(tg) => {
                        let td = t + k as i64 - j as i64;
                        if j != k && td < ctx.len() as i64 {
                            match triangle_group(ctx, td, k, k) {
                                Ok(other) => {
                                    if !congruent_triangles_agree(&tg, &other) {
                                        congruent = false;
                                    }
                                }
                                Err(_) => congruent = false,
                            }
                        }
                    }
                    Err(_) => tri = false,
                }
            }
        }
    }
    cert.push("triangle quotients well defined", tri, "");
    cert.push("congruent triangles agree", congruent, "");
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{even4_code, h8_code, trivial_code, z2rep_code};

    #[test]
    fn h8_analysis_shape() {
        let ctx = analyze(&h8_code()).unwrap();
        assert_eq!(ctx.ell, 3);
        let sizes: Vec<usize> = ctx.rep_sets.iter().map(|rs| rs.carrier_size()).collect();
        assert_eq!(sizes, vec![4, 8, 8, 4]);
    }

    #[test]
    fn h8_decode_selects_generators() {
        let ctx = analyze(&h8_code()).unwrap();
        // Word (2,1,1,2) is the span-4 transversal representative (1,1,1,1)
        // times all three span-2 generators, so every family is selected.
        let c = ctx.code().index_of(&[2, 1, 1, 2]).unwrap();
        let tensor = decode_path(&ctx, c).unwrap();
        let rs0 = ctx.rep_set(0);
        assert_eq!(tensor.mats[0].cosets[rs0.slot_index(0, 3)], 1);
        assert_eq!(tensor.mats[0].cosets[rs0.slot_index(0, 1)], 1);
        let rs1 = ctx.rep_set(1);
        assert_eq!(tensor.mats[1].cosets[rs1.slot_index(1, 3)], 1);
        assert_eq!(tensor.mats[1].cosets[rs1.slot_index(1, 1)], 1);
        assert_eq!(tensor.mats[1].cosets[rs1.slot_index(0, 1)], 1);
        let rs2 = ctx.rep_set(2);
        assert_eq!(tensor.mats[2].cosets[rs2.slot_index(2, 3)], 1);
        assert_eq!(tensor.mats[2].cosets[rs2.slot_index(1, 1)], 1);
        assert_eq!(tensor.mats[2].cosets[rs2.slot_index(0, 1)], 1);
        let rs3 = ctx.rep_set(3);
        assert_eq!(tensor.mats[3].cosets[rs3.slot_index(3, 3)], 1);
        assert_eq!(tensor.mats[3].cosets[rs3.slot_index(1, 1)], 1);
    }

    #[test]
    fn round_trips_on_all_fixtures() {
        for code in [trivial_code(), z2rep_code(), even4_code(), h8_code()] {
            let ctx = analyze(&code).unwrap();
            for c in 0..ctx.code().words.len() {
                let tensor = decode_path(&ctx, c).unwrap();
                assert_eq!(encode_path(&ctx, &tensor).unwrap(), c, "{}", code.name);
            }
        }
    }

    #[test]
    fn induced_product_matches_word_product() {
        let ctx = analyze(&h8_code()).unwrap();
        let code = ctx.code();
        for t in 0..4i64 {
            let rs = ctx.rep_set(t);
            for a in 0..code.words.len() {
                for b in 0..code.words.len() {
                    let ma = decode_component(rs, ctx.trellis.branch_of_word(a, t));
                    let mb = decode_component(rs, ctx.trellis.branch_of_word(b, t));
                    let prod = induced_product(rs, &ma, &mb).unwrap();
                    let direct = decode_component(
                        rs,
                        ctx.trellis.branch_of_word(code.group.mul(a, b), t),
                    );
                    assert_eq!(prod, direct);
                }
            }
        }
    }

    #[test]
    fn h8_triangle_orders() {
        let ctx = analyze(&h8_code()).unwrap();
        assert_eq!(triangle_group(&ctx, 0, 0, 3).unwrap().order(), 2);
        assert_eq!(triangle_group(&ctx, 3, 3, 3).unwrap().order(), 2);
        assert_eq!(triangle_group(&ctx, 1, 0, 0).unwrap().order(), 8);
        assert_eq!(triangle_group(&ctx, 0, 0, 0).unwrap().order(), 4);
        // The big triangle at each time is the whole branch group.
        for t in 0..4i64 {
            assert_eq!(
                triangle_group(&ctx, t, 0, 0).unwrap().order(),
                ctx.trellis.section_group(t).order
            );
        }
    }

    #[test]
    fn h8_congruent_triangles_identical() {
        let ctx = analyze(&h8_code()).unwrap();
        let a = triangle_group(&ctx, 0, 0, 3).unwrap();
        let b = triangle_group(&ctx, 3, 3, 3).unwrap();
        assert!(congruent_triangles_agree(&a, &b));
        assert_eq!(a.carrier, b.carrier);
    }

    #[test]
    fn encoder_certificates_pass() {
        for code in [trivial_code(), z2rep_code(), even4_code(), h8_code()] {
            let cert = verify_encoder(&analyze(&code).unwrap());
            assert!(cert.all_pass(), "{}:\n{}", code.name, cert.render());
        }
    }

    #[test]
    fn foreign_representative_rejected() {
        let ctx = analyze(&h8_code()).unwrap();
        let rs = ctx.rep_set(0);
        let mut mat = crate::generators::RepMatrix::identity(rs);
        mat.cosets[rs.slot_index(0, 0)] = 1;
        assert!(matches!(
            encode_component(rs, &mat),
            Err(EncoderError::ForeignRepresentative { t: 0, j: 0, k: 0 })
        ));
    }
}
