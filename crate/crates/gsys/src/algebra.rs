//! Finite-group kernel: operation tables, subgroups, quotients, transversals,
//! and chain decompositions.
//!
//! Every group is given by a dense multiplication table with the identity at
//! index 0.  All structural claims (associativity, normality, homomorphism
//! properties, ...) are checked exhaustively at construction time; nothing is
//! taken on faith.  Groups are capped at order 4096 so that exhaustive
//! verification stays cheap.

use std::sync::Arc;

pub const MAX_GROUP_ORDER: usize = 4096;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("table is not square or has out-of-range entries")]
    MalformedTable,
    #[error("group order {0} exceeds the supported maximum {MAX_GROUP_ORDER}")]
    OrderTooLarge(usize),
    #[error("element 0 is not a two-sided identity (fails at element {0})")]
    NoIdentityAtZero(usize),
    #[error("element {0} has no inverse (row or column is not a permutation)")]
    MissingInverse(usize),
    #[error("associativity fails at triple ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("element sets have different parent groups")]
    ParentMismatch,
    #[error("set is not a subgroup")]
    NotSubgroup,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("transversal arguments are not nested subgroups")]
    NotNested,
    #[error("invalid subgroup chain: {0}")]
    InvalidChain(String),
}

/// A finite group as a dense Cayley table.  Element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    pub name: String,
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn trivial(name: &str) -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup {
            name: name.to_string(),
            order: 1,
            table: vec![vec![0]],
            inverse: vec![0],
        })
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Subgroup generated by `gens`, as a sorted member list.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    frontier.push(y);
                }
            }
        }
        (0..self.order).filter(|&i| seen[i]).collect()
    }
}

/// Validates a raw table and returns the group.  All `FiniteGroup` invariants
/// are established here: identity at index 0, row/column permutations
/// (inverses), and exhaustive associativity.
pub fn validate_group(name: &str, table: Vec<Vec<usize>>) -> Result<FiniteGroup, AlgebraError> {
    let n = table.len();
    if n == 0 || n > MAX_GROUP_ORDER {
        return Err(if n == 0 {
            AlgebraError::MalformedTable
        } else {
            AlgebraError::OrderTooLarge(n)
        });
    }
    for row in &table {
        if row.len() != n || row.iter().any(|&x| x >= n) {
            return Err(AlgebraError::MalformedTable);
        }
    }
    for a in 0..n {
        if table[0][a] != a || table[a][0] != a {
            return Err(AlgebraError::NoIdentityAtZero(a));
        }
    }
    let mut inverse = vec![usize::MAX; n];
    for a in 0..n {
        let mut row_seen = vec![false; n];
        let mut col_seen = vec![false; n];
        for b in 0..n {
            if row_seen[table[a][b]] || col_seen[table[b][a]] {
                return Err(AlgebraError::MissingInverse(a));
            }
            row_seen[table[a][b]] = true;
            col_seen[table[b][a]] = true;
            if table[a][b] == 0 {
                inverse[a] = b;
            }
        }
        if inverse[a] == usize::MAX {
            return Err(AlgebraError::MissingInverse(a));
        }
    }
    for a in 0..n {
        for b in 0..n {
            let ab = table[a][b];
            for c in 0..n {
                if table[ab][c] != table[a][table[b][c]] {
                    return Err(AlgebraError::NotAssociative(a, b, c));
                }
            }
        }
    }
    Ok(FiniteGroup {
        name: name.to_string(),
        order: n,
        table,
        inverse,
    })
}

/// A subset of a group's elements, kept sorted.
#[derive(Debug, Clone)]
pub struct ElementSet {
    pub parent: Arc<FiniteGroup>,
    pub members: Vec<usize>,
}

impl PartialEq for ElementSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) && self.members == other.members
    }
}
impl Eq for ElementSet {}

impl ElementSet {
    pub fn new(parent: &Arc<FiniteGroup>, mut members: Vec<usize>) -> ElementSet {
        members.sort_unstable();
        members.dedup();
        assert!(members.iter().all(|&m| m < parent.order));
        ElementSet {
            parent: Arc::clone(parent),
            members,
        }
    }

    pub fn identity_only(parent: &Arc<FiniteGroup>) -> ElementSet {
        ElementSet::new(parent, vec![0])
    }

    pub fn full(parent: &Arc<FiniteGroup>) -> ElementSet {
        let order = parent.order;
        ElementSet::new(parent, (0..order).collect())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    fn check_parent(&self, other: &ElementSet) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.parent, &other.parent) {
            Ok(())
        } else {
            Err(AlgebraError::ParentMismatch)
        }
    }
}

/// {hk : h in H, k in K}, sorted and deduplicated.
pub fn set_product(h: &ElementSet, k: &ElementSet) -> Result<ElementSet, AlgebraError> {
    h.check_parent(k)?;
    let g = &h.parent;
    let mut seen = vec![false; g.order];
    for &a in &h.members {
        for &b in &k.members {
            seen[g.mul(a, b)] = true;
        }
    }
    Ok(ElementSet::new(
        &h.parent,
        (0..g.order).filter(|&i| seen[i]).collect(),
    ))
}

pub fn intersect(h: &ElementSet, k: &ElementSet) -> Result<ElementSet, AlgebraError> {
    h.check_parent(k)?;
    Ok(ElementSet::new(
        &h.parent,
        h.members.iter().copied().filter(|&x| k.contains(x)).collect(),
    ))
}

pub fn is_subgroup(h: &ElementSet) -> bool {
    if !h.contains(0) {
        return false;
    }
    let g = &h.parent;
    h.members
        .iter()
        .all(|&a| h.contains(g.inv(a)) && h.members.iter().all(|&b| h.contains(g.mul(a, b))))
}

pub fn is_normal(h: &ElementSet) -> bool {
    if !is_subgroup(h) {
        return false;
    }
    let g = &h.parent;
    (0..g.order).all(|x| {
        h.members
            .iter()
            .all(|&a| h.contains(g.mul(g.mul(x, a), g.inv(x))))
    })
}

pub fn is_subset(h: &ElementSet, k: &ElementSet) -> bool {
    h.members.iter().all(|&x| k.contains(x))
}

/// A quotient G/N with cosets labeled in order of least member; coset 0 is N
/// itself (it contains the identity).
#[derive(Debug, Clone)]
pub struct QuotientGroup {
    pub parent: Arc<FiniteGroup>,
    pub kernel: ElementSet,
    pub cosets: Vec<ElementSet>,
    pub quotient: Arc<FiniteGroup>,
    pub projection: Vec<usize>,
}

pub fn quotient(g: &Arc<FiniteGroup>, n: &ElementSet) -> Result<QuotientGroup, AlgebraError> {
    if !Arc::ptr_eq(g, &n.parent) {
        return Err(AlgebraError::ParentMismatch);
    }
    if !is_subgroup(n) {
        return Err(AlgebraError::NotSubgroup);
    }
    if !is_normal(n) {
        return Err(AlgebraError::NotNormal);
    }
    let order = g.order;
    let mut projection = vec![usize::MAX; order];
    let mut cosets: Vec<ElementSet> = Vec::new();
    // Scanning elements in increasing order labels cosets by least member,
    // which puts N (containing 0) at label 0.
    for x in 0..order {
        if projection[x] != usize::MAX {
            continue;
        }
        let label = cosets.len();
        let members: Vec<usize> = n.members.iter().map(|&a| g.mul(x, a)).collect();
        for &m in &members {
            projection[m] = label;
        }
        cosets.push(ElementSet::new(g, members));
    }
    let q = cosets.len();
    let mut table = vec![vec![0usize; q]; q];
    for (i, ci) in cosets.iter().enumerate() {
        for (j, cj) in cosets.iter().enumerate() {
            table[i][j] = projection[g.mul(ci.members[0], cj.members[0])];
        }
    }
    let quotient_group = Arc::new(validate_group(&format!("{}/{}", g.name, "N"), table)?);
    // The projection must be a homomorphism for every pair, not just for the
    // coset representatives used to fill the table.
    for a in 0..order {
        for b in 0..order {
            if projection[g.mul(a, b)] != quotient_group.mul(projection[a], projection[b]) {
                return Err(AlgebraError::NotNormal);
            }
        }
    }
    Ok(QuotientGroup {
        parent: Arc::clone(g),
        kernel: n.clone(),
        cosets,
        quotient: quotient_group,
        projection,
    })
}

/// One representative per coset of K in H, by the least-element rule.  The
/// representative of K itself is the identity.
pub fn transversal(h: &ElementSet, k: &ElementSet) -> Result<Vec<usize>, AlgebraError> {
    h.check_parent(k)?;
    if !is_subgroup(h) || !is_normal(k) || !is_subset(k, h) {
        return Err(AlgebraError::NotNested);
    }
    let g = &h.parent;
    let mut covered = vec![false; g.order];
    let mut reps = Vec::new();
    for &x in &h.members {
        if covered[x] {
            continue;
        }
        reps.push(x);
        for &a in &k.members {
            covered[g.mul(x, a)] = true;
        }
    }
    Ok(reps)
}

/// An increasing normal chain {identity} = levels[0] < ... < levels[N] = G.
#[derive(Debug, Clone)]
pub struct SubgroupChain {
    pub parent: Arc<FiniteGroup>,
    pub levels: Vec<ElementSet>,
}

impl SubgroupChain {
    pub fn new(parent: &Arc<FiniteGroup>, levels: Vec<ElementSet>) -> Result<SubgroupChain, AlgebraError> {
        if levels.is_empty() {
            return Err(AlgebraError::InvalidChain("empty chain".into()));
        }
        if levels[0].members != vec![0] {
            return Err(AlgebraError::InvalidChain("level 0 must be {identity}".into()));
        }
        if levels.last().unwrap().len() != parent.order {
            return Err(AlgebraError::InvalidChain("last level must be the whole group".into()));
        }
        for (i, level) in levels.iter().enumerate() {
            if !Arc::ptr_eq(&level.parent, parent) {
                return Err(AlgebraError::ParentMismatch);
            }
            if !is_normal(level) {
                return Err(AlgebraError::InvalidChain(format!("level {i} is not normal")));
            }
            if i > 0 && !(is_subset(&levels[i - 1], level) && levels[i - 1].len() < level.len()) {
                return Err(AlgebraError::InvalidChain(format!(
                    "level {i} does not strictly contain level {}",
                    i - 1
                )));
            }
        }
        Ok(SubgroupChain {
            parent: Arc::clone(parent),
            levels,
        })
    }
}

/// Decomposes `b` along a (not necessarily strict) chain of subgroups,
/// top-down: the first returned factor is the representative of b's coset
/// modulo the next-to-last level, then the peeled remainder is decomposed
/// recursively.  Multiplying the output left-to-right reproduces `b`.
///
/// `levels` runs from {identity} up to a level containing `b`; `reps[i]` is a
/// transversal of `levels[i]` over `levels[i-1]`.
pub fn chain_decompose(
    b: usize,
    levels: &[ElementSet],
    reps: &[Vec<usize>],
) -> Result<Vec<usize>, AlgebraError> {
    if levels.is_empty() || reps.len() != levels.len() - 1 {
        return Err(AlgebraError::InvalidChain("levels/reps length mismatch".into()));
    }
    let g = &levels[0].parent;
    if !levels.last().unwrap().contains(b) {
        return Err(AlgebraError::InvalidChain("element outside top level".into()));
    }
    let mut out = Vec::with_capacity(reps.len());
    let mut cur = b;
    for i in (1..levels.len()).rev() {
        let below = &levels[i - 1];
        let mut found = None;
        for &r in &reps[i - 1] {
            if below.contains(g.mul(g.inv(r), cur)) {
                found = Some(r);
                break;
            }
        }
        let r = found.ok_or_else(|| {
            AlgebraError::InvalidChain(format!("no representative peels element at level {i}"))
        })?;
        out.push(r);
        cur = g.mul(g.inv(r), cur);
    }
    if cur != 0 {
        return Err(AlgebraError::InvalidChain("nonidentity residue after decomposition".into()));
    }
    Ok(out)
}

pub fn check_homomorphism(f: &[usize], g: &FiniteGroup, h: &FiniteGroup) -> bool {
    f.len() == g.order
        && f.iter().all(|&y| y < h.order)
        && (0..g.order)
            .all(|a| (0..g.order).all(|b| f[g.mul(a, b)] == h.mul(f[a], f[b])))
}

pub fn check_isomorphism_via_bijection(f: &[usize], g: &FiniteGroup, h: &FiniteGroup) -> bool {
    if g.order != h.order || !check_homomorphism(f, g, h) {
        return false;
    }
    let mut seen = vec![false; h.order];
    for &y in f {
        if seen[y] {
            return false;
        }
        seen[y] = true;
    }
    true
}

/// Builds a standalone group from a subgroup's member list, together with the
/// member list mapping new indices back to the parent.  Member 0 of a subgroup
/// is the identity, so index conventions carry over.
pub fn subgroup_as_group(
    name: &str,
    h: &ElementSet,
) -> Result<(Arc<FiniteGroup>, Vec<usize>), AlgebraError> {
    if !is_subgroup(h) {
        return Err(AlgebraError::NotSubgroup);
    }
    let g = &h.parent;
    let members = h.members.clone();
    let index_of = |x: usize| members.binary_search(&x).unwrap();
    let n = members.len();
    let mut table = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            table[i][j] = index_of(g.mul(members[i], members[j]));
        }
    }
    Ok((Arc::new(validate_group(name, table)?), members))
}

/// Parses the group file format:
/// `group <name>` / `order <n>` / `table` / n rows / `end`.
pub fn parse_group_file(text: &str) -> Result<FiniteGroup, String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("empty file")?;
    let name = header
        .strip_prefix("group ")
        .ok_or("expected `group <name>`")?
        .trim()
        .to_string();
    let order_line = lines.next().ok_or("missing `order` line")?;
    let order: usize = order_line
        .strip_prefix("order ")
        .ok_or("expected `order <n>`")?
        .trim()
        .parse()
        .map_err(|e| format!("bad order: {e}"))?;
    if lines.next() != Some("table") {
        return Err("expected `table`".into());
    }
    let mut table = Vec::with_capacity(order);
    for i in 0..order {
        let row_line = lines.next().ok_or_else(|| format!("missing table row {i}"))?;
        let row: Vec<usize> = row_line
            .split_whitespace()
            .map(|w| w.parse().map_err(|e| format!("bad entry in row {i}: {e}")))
            .collect::<Result<_, _>>()?;
        table.push(row);
    }
    if lines.next() != Some("end") {
        return Err("expected `end`".into());
    }
    if lines.next().is_some() {
        return Err("trailing content after `end`".into());
    }
    validate_group(&name, table).map_err(|e| e.to_string())
}
