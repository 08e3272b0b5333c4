//! Group systems as data: block codes over group alphabets, canonic state
//! spaces, and the canonic trellis with its per-time branch groups.
//!
//! A code lives on a finite window `[0, L)`; times outside the window carry
//! the trivial alphabet (identity extension).  Time-invariant systems are
//! represented as a block code on a window of length at least `2*ell + 2`
//! with the `period1` flag set; analyses that need time invariance read the
//! central sections.

use crate::algebra::{
    check_isomorphism_via_bijection, is_normal, quotient, set_product, validate_group,
    ElementSet, FiniteGroup, QuotientGroup,
};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// Hard cap on codeword count so every verification stays exhaustive.
pub const MAX_CODEWORDS: usize = 4096;

#[derive(thiserror::Error, Debug)]
pub enum SystemError {
    #[error("code is not closed under componentwise products: words {0} and {1} multiply outside the listed set")]
    NotClosed(usize, usize),
    #[error("word has {got} coordinates, expected {want}, or a coordinate exceeds its alphabet order")]
    AlphabetMismatch { got: usize, want: usize },
    #[error("duplicate codeword listed")]
    DuplicateCodeword,
    #[error("time {0} is outside the window")]
    OutOfWindow(i64),
    #[error("closure exceeds {MAX_CODEWORDS} codewords")]
    TooLarge,
    #[error("branch products are inconsistent at time {0} (not a group system)")]
    InconsistentBranches(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// A finite-window set of sequences over per-coordinate alphabet groups,
/// closed under componentwise products.  `words` is sorted lexicographically,
/// so word 0 is the all-identity word.
#[derive(Debug)]
pub struct BlockCode {
    pub name: String,
    pub length: usize,
    pub alphabets: Vec<Arc<FiniteGroup>>,
    pub words: Vec<Vec<usize>>,
    /// The codeword group, on word indices.
    pub group: Arc<FiniteGroup>,
    pub period1: bool,
}

impl BlockCode {
    pub fn new(
        name: &str,
        alphabets: Vec<Arc<FiniteGroup>>,
        listed: Vec<Vec<usize>>,
        close: bool,
        period1: bool,
    ) -> Result<Arc<BlockCode>, SystemError> {
        let length = alphabets.len();
        for w in &listed {
            if w.len() != length || w.iter().zip(&alphabets).any(|(&x, a)| x >= a.order) {
                return Err(SystemError::AlphabetMismatch {
                    got: w.len(),
                    want: length,
                });
            }
        }
        let mul = |a: &[usize], b: &[usize]| -> Vec<usize> {
            a.iter()
                .zip(b)
                .zip(&alphabets)
                .map(|((&x, &y), g)| g.mul(x, y))
                .collect()
        };
        let mut words: Vec<Vec<usize>>;
        if close {
            let mut set: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
            set.insert(vec![0; length]);
            let mut frontier: Vec<Vec<usize>> = vec![vec![0; length]];
            while let Some(w) = frontier.pop() {
                for g in &listed {
                    let p = mul(&w, g);
                    if set.insert(p.clone()) {
                        if set.len() > MAX_CODEWORDS {
                            return Err(SystemError::TooLarge);
                        }
                        frontier.push(p);
                    }
                }
            }
            words = set.into_iter().collect();
        } else {
            words = listed;
            words.sort();
            let before = words.len();
            words.dedup();
            if words.len() != before {
                return Err(SystemError::DuplicateCodeword);
            }
            if words.binary_search(&vec![0; length]).is_err() {
                words.insert(0, vec![0; length]);
                words.sort();
            }
        }
        if words.len() > MAX_CODEWORDS {
            return Err(SystemError::TooLarge);
        }
        // Index map and closure check; builds the codeword group table.
        let index: BTreeMap<&[usize], usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), i))
            .collect();
        let n = words.len();
        let mut table = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                let p = mul(&words[i], &words[j]);
                table[i][j] = *index
                    .get(p.as_slice())
                    .ok_or(SystemError::NotClosed(i, j))?;
            }
        }
        let group = Arc::new(validate_group(&format!("{name}.codewords"), table)?);
        Ok(Arc::new(BlockCode {
            name: name.to_string(),
            length,
            alphabets,
            words,
            group,
            period1,
        }))
    }

    pub fn index_of(&self, word: &[usize]) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_slice().cmp(word)).ok()
    }

    /// True when codeword `c` is the identity at every coordinate `s < t`
    /// (identity extension outside the window).
    pub fn identity_before(&self, c: usize, t: i64) -> bool {
        (0..self.length).all(|s| (s as i64) >= t || self.words[c][s] == 0)
    }

    /// True when codeword `c` is the identity at every coordinate `s >= t`.
    pub fn identity_at_after(&self, c: usize, t: i64) -> bool {
        (0..self.length).all(|s| (s as i64) < t || self.words[c][s] == 0)
    }

    /// True when codeword `c` is the identity outside `[t1, t2]`.
    pub fn supported_on(&self, c: usize, t1: i64, t2: i64) -> bool {
        (0..self.length).all(|s| {
            let s = s as i64;
            (t1 <= s && s <= t2) || self.words[c][s as usize] == 0
        })
    }
}

/// Codewords identity at and after `t` (the "past" subcode) and identity
/// before `t` (the "future" subcode), as subgroups of the codeword group.
pub fn past_future_subcodes(
    code: &Arc<BlockCode>,
    t: i64,
) -> Result<(ElementSet, ElementSet), SystemError> {
    if t < 0 || t > code.length as i64 {
        return Err(SystemError::OutOfWindow(t));
    }
    let past = (0..code.words.len())
        .filter(|&c| code.identity_at_after(c, t))
        .collect();
    let future = (0..code.words.len())
        .filter(|&c| code.identity_before(c, t))
        .collect();
    Ok((
        ElementSet::new(&code.group, past),
        ElementSet::new(&code.group, future),
    ))
}

/// The canonic state space at time `t`: the codeword group modulo the product
/// of the past and future subcodes.
pub fn state_space(code: &Arc<BlockCode>, t: i64) -> Result<QuotientGroup, SystemError> {
    let (past, future) = past_future_subcodes(code, t)?;
    Ok(quotient(&code.group, &set_product(&past, &future)?)?)
}

/// One trellis section: the distinct branch triples (left state, label,
/// right state) at a time, with their induced group structure.
#[derive(Debug)]
pub struct Section {
    pub t: usize,
    /// Sorted triples; index 0 is the identity branch (0, 0, 0).
    pub branches: Vec<(usize, usize, usize)>,
    pub group: Arc<FiniteGroup>,
    /// Codeword index -> branch index at this section.
    pub of_word: Vec<usize>,
    /// Branch index -> one codeword realizing it.
    pub word_rep: Vec<usize>,
}

/// The canonic trellis of a block code.
#[derive(Debug)]
pub struct GroupTrellis {
    pub code: Arc<BlockCode>,
    /// State spaces at times 0..=L.
    pub states: Vec<QuotientGroup>,
    pub sections: Vec<Section>,
    trivial: Arc<FiniteGroup>,
}

impl GroupTrellis {
    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// Branch group at time `t`, trivial outside the window.
    pub fn section_group(&self, t: i64) -> Arc<FiniteGroup> {
        if t < 0 || t >= self.len() as i64 {
            Arc::clone(&self.trivial)
        } else {
            Arc::clone(&self.sections[t as usize].group)
        }
    }

    /// The full branch set at `t` as an element set ({identity} off-window).
    pub fn full_branch_set(&self, t: i64) -> ElementSet {
        ElementSet::full(&self.section_group(t))
    }

    pub fn identity_branch_set(&self, t: i64) -> ElementSet {
        ElementSet::identity_only(&self.section_group(t))
    }

    /// Branch index of codeword `c` at time `t` (identity off-window).
    pub fn branch_of_word(&self, c: usize, t: i64) -> usize {
        if t < 0 || t >= self.len() as i64 {
            0
        } else {
            self.sections[t as usize].of_word[c]
        }
    }
}

pub fn build_canonic_trellis(code: &Arc<BlockCode>) -> Result<GroupTrellis, SystemError> {
    let length = code.length;
    let mut states = Vec::with_capacity(length + 1);
    for t in 0..=length {
        states.push(state_space(code, t as i64)?);
    }
    let mut sections = Vec::with_capacity(length);
    for t in 0..length {
        let mut triples: Vec<(usize, usize, usize)> = (0..code.words.len())
            .map(|c| {
                (
                    states[t].projection[c],
                    code.words[c][t],
                    states[t + 1].projection[c],
                )
            })
            .collect();
        triples.sort_unstable();
        triples.dedup();
        let index: BTreeMap<(usize, usize, usize), usize> = triples
            .iter()
            .enumerate()
            .map(|(i, &tr)| (tr, i))
            .collect();
        let of_word: Vec<usize> = (0..code.words.len())
            .map(|c| {
                index[&(
                    states[t].projection[c],
                    code.words[c][t],
                    states[t + 1].projection[c],
                )]
            })
            .collect();
        let mut word_rep = vec![usize::MAX; triples.len()];
        for c in 0..code.words.len() {
            if word_rep[of_word[c]] == usize::MAX {
                word_rep[of_word[c]] = c;
            }
        }
        let n = triples.len();
        let mut table = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                table[i][j] = of_word[code.group.mul(word_rep[i], word_rep[j])];
            }
        }
        // The branch product must not depend on which codewords realize the
        // branches; check against every codeword pair.
        for a in 0..code.words.len() {
            for b in 0..code.words.len() {
                if of_word[code.group.mul(a, b)] != table[of_word[a]][of_word[b]] {
                    return Err(SystemError::InconsistentBranches(t));
                }
            }
        }
        let group = Arc::new(validate_group(&format!("{}.B{}", code.name, t), table)?);
        sections.push(Section {
            t,
            branches: triples,
            group,
            of_word,
            word_rep,
        });
    }
    let trellis = GroupTrellis {
        code: Arc::clone(code),
        states,
        sections,
        trivial: FiniteGroup::trivial("1"),
    };
    verify_path_bijection(&trellis)?;
    Ok(trellis)
}

/// Paths of the trellis are exactly the codewords: distinct branch sequences
/// per codeword, and the adjacency-path count matches the codeword count.
fn verify_path_bijection(trellis: &GroupTrellis) -> Result<(), SystemError> {
    let code = &trellis.code;
    let n = code.words.len();
    let mut seqs: Vec<Vec<usize>> = (0..n)
        .map(|c| trellis.sections.iter().map(|s| s.of_word[c]).collect())
        .collect();
    seqs.sort_unstable();
    seqs.dedup();
    if seqs.len() != n {
        return Err(SystemError::InconsistentBranches(0));
    }
    // Count adjacency-valid branch sequences from the trivial initial state
    // to the trivial final state by forward dynamic programming over states.
    let mut reach: BTreeMap<usize, u64> = BTreeMap::new();
    reach.insert(0usize, 1);
    for section in &trellis.sections {
        let mut next: BTreeMap<usize, u64> = BTreeMap::new();
        for &(left, _label, right) in &section.branches {
            if let Some(&ways) = reach.get(&left) {
                *next.entry(right).or_insert(0) += ways;
            }
        }
        reach = next;
    }
    let total: u64 = reach.values().sum();
    if total != n as u64 {
        return Err(SystemError::InconsistentBranches(0));
    }
    Ok(())
}

/// Axiom of state: two codewords sharing a state at time `t` may be spliced
/// into another codeword.  Exhaustive over all pairs and times.
pub fn check_axiom_of_state(trellis: &GroupTrellis) -> bool {
    let code = &trellis.code;
    let n = code.words.len();
    for t in 0..=code.length {
        for a in 0..n {
            for b in 0..n {
                if trellis.states[t].projection[a] == trellis.states[t].projection[b] {
                    let spliced: Vec<usize> = (0..code.length)
                        .map(|s| if s < t { code.words[a][s] } else { code.words[b][s] })
                        .collect();
                    if code.index_of(&spliced).is_none() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// The splitting kernel X_0 (branches leaving the identity state) and the
/// merging kernel Y_0 (branches entering it), both normal in the branch
/// group.
pub fn branch_kernels(trellis: &GroupTrellis, t: i64) -> Result<(ElementSet, ElementSet), SystemError> {
    if t < 0 || t >= trellis.len() as i64 {
        return Err(SystemError::OutOfWindow(t));
    }
    let section = &trellis.sections[t as usize];
    let x0: Vec<usize> = (0..section.branches.len())
        .filter(|&b| section.branches[b].0 == 0)
        .collect();
    let y0: Vec<usize> = (0..section.branches.len())
        .filter(|&b| section.branches[b].2 == 0)
        .collect();
    let x0 = ElementSet::new(&section.group, x0);
    let y0 = ElementSet::new(&section.group, y0);
    debug_assert!(is_normal(&x0) && is_normal(&y0));
    Ok((x0, y0))
}

/// State group isomorphisms at `t`: both B^{t-1}/Y_0^{t-1} and B^t/X_0^t are
/// isomorphic to the canonic state space via the natural projections.
pub fn check_state_isomorphism(trellis: &GroupTrellis, t: i64) -> Result<bool, SystemError> {
    if t < 1 || t >= trellis.len() as i64 {
        return Err(SystemError::OutOfWindow(t));
    }
    let sigma = &trellis.states[t as usize].quotient;
    let prev = &trellis.sections[(t - 1) as usize];
    let here = &trellis.sections[t as usize];
    let (_, y0_prev) = branch_kernels(trellis, t - 1)?;
    let (x0_here, _) = branch_kernels(trellis, t)?;

    let check = |section: &Section, kernel: &ElementSet, state_of: &dyn Fn(usize) -> usize| -> bool {
        let q = match quotient(&section.group, kernel) {
            Ok(q) => q,
            Err(_) => return false,
        };
        if q.quotient.order != sigma.order {
            return false;
        }
        // Induced map: coset of the kernel -> state of any member branch.
        let mut f = vec![usize::MAX; q.quotient.order];
        for b in 0..section.branches.len() {
            let coset = q.projection[b];
            let s = state_of(b);
            if f[coset] == usize::MAX {
                f[coset] = s;
            } else if f[coset] != s {
                return false;
            }
        }
        check_isomorphism_via_bijection(&f, &q.quotient, sigma)
    };
    Ok(check(prev, &y0_prev, &|b| prev.branches[b].2)
        && check(here, &x0_here, &|b| here.branches[b].0))
}

/// Parses the code file format:
/// `code <name>` / `length <L>` / `alphabet <groupname>` (one line or L
/// lines) / `period1` (optional) / `generators` or `codewords` / one word per
/// line / `end`.  Alphabet names are resolved through `lookup`.
pub fn parse_block_code(
    text: &str,
    lookup: &dyn Fn(&str) -> Result<Arc<FiniteGroup>, String>,
) -> Result<Arc<BlockCode>, SystemError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let err = |m: &str| SystemError::Parse(m.to_string());
    let name = lines
        .next()
        .and_then(|l| l.strip_prefix("code "))
        .ok_or_else(|| err("expected `code <name>`"))?
        .trim()
        .to_string();
    let length: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("length "))
        .ok_or_else(|| err("expected `length <L>`"))?
        .trim()
        .parse()
        .map_err(|e| err(&format!("bad length: {e}")))?;
    let mut alphabets: Vec<Arc<FiniteGroup>> = Vec::new();
    while alphabets.len() < length {
        match lines.peek() {
            Some(l) if l.starts_with("alphabet ") => {
                let gname = lines.next().unwrap().strip_prefix("alphabet ").unwrap().trim();
                let g = lookup(gname).map_err(|e| err(&e))?;
                alphabets.push(g);
            }
            _ => break,
        }
    }
    if alphabets.len() == 1 && length > 1 {
        let g = alphabets[0].clone();
        alphabets = vec![g; length];
    }
    if alphabets.len() != length {
        return Err(err("expected one `alphabet` line or L of them"));
    }
    let mut period1 = false;
    if lines.peek() == Some(&"period1") {
        lines.next();
        period1 = true;
    }
    let mode = lines.next().ok_or_else(|| err("expected `generators` or `codewords`"))?;
    let close = match mode {
        "generators" => true,
        "codewords" => false,
        other => return Err(err(&format!("unknown mode `{other}`"))),
    };
    let mut listed: Vec<Vec<usize>> = Vec::new();
    loop {
        let line = lines.next().ok_or_else(|| err("missing `end`"))?;
        if line == "end" {
            break;
        }
        let word: Vec<usize> = line
            .split_whitespace()
            .map(|w| w.parse().map_err(|e| err(&format!("bad element: {e}"))))
            .collect::<Result<_, _>>()?;
        listed.push(word);
    }
    if lines.next().is_some() {
        return Err(err("trailing content after `end`"));
    }
    BlockCode::new(&name, alphabets, listed, close, period1)
}

/// Loads a code file from disk, resolving `alphabet <name>` lines to
/// `<name>.group` files next to the code file.
pub fn load_block_code(path: &Path) -> Result<Arc<BlockCode>, SystemError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SystemError::Parse(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let lookup = move |name: &str| -> Result<Arc<FiniteGroup>, String> {
        let gpath = dir.join(format!("{name}.group"));
        let gtext = std::fs::read_to_string(&gpath)
            .map_err(|e| format!("{}: {e}", gpath.display()))?;
        crate::algebra::parse_group_file(&gtext).map(Arc::new)
    };
    parse_block_code(&text, &lookup)
}
