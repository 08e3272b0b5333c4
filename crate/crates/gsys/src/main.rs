use clap::{Parser, Subcommand};
use gsys::algebra::FiniteGroup;
use gsys::chains::{compute_x, compute_y, static_matrix, shift_matrix, verify_chain_properties};
use gsys::encoder::{analyze, decode_path, encode_path, verify_encoder, SystemContext};
use gsys::generators::{dump_basis, granule, RepMatrix, Tensor};
use gsys::signature::{
    hom_c_to_product, quotient_sequence_check, trellis_product_group, verify_signature_group,
    verify_signature_sequence, IndexSequence, SignatureError,
};
use gsys::synthesis::{parse_sigspec, realize_trellis, synthesize, SpecMode};
use gsys::system::{load_block_code, BlockCode};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "gsys", about = "Analysis and synthesis of controllable group systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// States, branch groups, chains and the chain-property certificate.
    Analyze {
        code: PathBuf,
        /// Limit per-time listings to the first N times.
        #[arg(long)]
        window: Option<usize>,
        /// Treat the code as time invariant.
        #[arg(long)]
        period1: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generator basis, granule orders and representative-set profile.
    Generators {
        code: PathBuf,
        #[arg(long)]
        period1: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a tensor file to a codeword.
    Encode {
        code: PathBuf,
        tensor: PathBuf,
        #[arg(long)]
        period1: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a codeword file to its tensor.
    Decode {
        code: PathBuf,
        word: PathBuf,
        #[arg(long)]
        period1: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All verification certificates (chains, encoder, signature).
    Verify {
        code: PathBuf,
        #[arg(long)]
        period1: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group stack, product listings and homomorphism fibers.
    BlockReport {
        code: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        period1: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slice-sequence quotient for chosen indices, or the full quotient
    /// sequence when none are given.
    Quotient {
        code: PathBuf,
        /// Comma-separated `k@t` items, times strictly increasing.
        #[arg(long)]
        indices: Option<String>,
        #[arg(long)]
        period1: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct a signature from a spec file and realize it as a code.
    Synthesize {
        spec: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        /// Base path for the realized code file and its alphabet files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path, period1: bool) -> Result<Arc<BlockCode>, String> {
    let code = load_block_code(path).map_err(|e| e.to_string())?;
    if period1 && !code.period1 {
        Ok(Arc::new(BlockCode {
            name: code.name.clone(),
            length: code.length,
            alphabets: code.alphabets.clone(),
            words: code.words.clone(),
            group: code.group.clone(),
            period1: true,
        }))
    } else {
        Ok(code)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.cmd {
        Cmd::Analyze {
            code,
            window,
            period1,
            out,
        } => {
            let code = load(&code, period1)?;
            let ctx = analyze(&code).map_err(|e| e.to_string())?;
            let text = analyze_report(&ctx, window);
            emit(&out, &text)?;
            Ok(verify_chain_properties(&ctx.trellis, ctx.ell).all_pass())
        }
        Cmd::Generators { code, period1, out } => {
            let code = load(&code, period1)?;
            let ctx = analyze(&code).map_err(|e| e.to_string())?;
            let text = generators_report(&ctx);
            emit(&out, &text)?;
            Ok(true)
        }
        Cmd::Encode {
            code,
            tensor,
            period1,
            out,
        } => {
            let code = load(&code, period1)?;
            let ctx = analyze(&code).map_err(|e| e.to_string())?;
            let text =
                std::fs::read_to_string(&tensor).map_err(|e| e.to_string())?;
            let tensor = parse_tensor(&ctx, &text)?;
            let c = encode_path(&ctx, &tensor).map_err(|e| e.to_string())?;
            let line: Vec<String> = ctx.code().words[c].iter().map(|x| x.to_string()).collect();
            emit(&out, &format!("{}\n", line.join(" ")))?;
            Ok(true)
        }
        Cmd::Decode {
            code,
            word,
            period1,
            out,
        } => {
            let code = load(&code, period1)?;
            let ctx = analyze(&code).map_err(|e| e.to_string())?;
            let text = std::fs::read_to_string(&word).map_err(|e| e.to_string())?;
            let c = parse_word(&ctx, &text)?;
            let tensor = decode_path(&ctx, c).map_err(|e| e.to_string())?;
            emit(&out, &render_tensor(&ctx, &tensor))?;
            Ok(true)
        }
        Cmd::Verify { code, period1, out } => {
            let code = load(&code, period1)?;
            let ctx = analyze(&code).map_err(|e| e.to_string())?;
            let mut text = String::new();
            let mut pass = true;
            for cert in [
                verify_chain_properties(&ctx.trellis, ctx.ell),
                verify_encoder(&ctx),
                verify_signature_sequence(&ctx),
            ] {
                pass &= cert.all_pass();
                text.push_str(&cert.render());
            }
            if ctx.code().period1 {
                match verify_signature_group(&ctx) {
                    Ok(cert) => {
                        pass &= cert.all_pass();
                        text.push_str(&cert.render());
                    }
                    Err(e) => {
                        pass = false;
                        text.push_str(&format!("signature group checks\n  => {e}\n"));
                    }
                }
            }
            emit(&out, &text)?;
            Ok(pass)
        }
        Cmd::BlockReport {
            code,
            window,
            period1,
            out,
        } => {
            let code = load(&code, period1)?;
            let ctx = analyze(&code).map_err(|e| e.to_string())?;
            let text = block_report(&ctx, window).map_err(|e| e.to_string())?;
            emit(&out, &text)?;
            Ok(true)
        }
        Cmd::Quotient {
            code,
            indices,
            period1,
            out,
        } => {
            let code = load(&code, period1)?;
            let ctx = analyze(&code).map_err(|e| e.to_string())?;
            match indices {
                Some(spec) => {
                    let i = parse_indices(&spec)?;
                    let text = quotient_report(&ctx, &i).map_err(|e: SignatureError| e.to_string())?;
                    emit(&out, &text)?;
                    Ok(true)
                }
                None => {
                    let cert = quotient_sequence_check(&ctx);
                    emit(&out, &cert.render())?;
                    Ok(cert.all_pass())
                }
            }
        }
        Cmd::Synthesize { spec, budget, out } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| e.to_string())?;
            let mut spec = parse_sigspec(&text).map_err(|e| e.to_string())?;
            if let Some(b) = budget {
                spec.budget = b;
            }
            let sig = synthesize(&spec).map_err(|e| e.to_string())?;
            let realized = realize_trellis(sig).map_err(|e| e.to_string())?;
            let mut report = String::new();
            report.push_str(&format!(
                "synthesized {} signature: ell={} window={}\n",
                match realized.sig.mode {
                    SpecMode::Sequence => "sequence",
                    SpecMode::Group => "group",
                    SpecMode::Block => "block",
                },
                realized.sig.ell,
                realized.sig.window
            ));
            for ((s, k), labels) in &realized.sig.families {
                report.push_str(&format!(
                    "gen family t={} k={} : {}\n",
                    s,
                    k,
                    labels.join(" ")
                ));
            }
            for comp in &realized.sig.components {
                report.push_str(&format!(
                    "component t={} order {}\n",
                    comp.t, comp.group.order
                ));
            }
            report.push_str(&realized.cert.render());
            if let Some(base) = &out {
                write_realized(base, &realized.code)?;
                report.push_str(&format!("wrote {}\n", base.display()));
            }
            print!("{report}");
            Ok(realized.cert.all_pass())
        }
    }
}

fn analyze_report(ctx: &SystemContext, window: Option<usize>) -> String {
    let code = ctx.code();
    let limit = window.unwrap_or(ctx.len()).min(ctx.len());
    let mut out = format!(
        "code {}: {} codewords, window length {}\n",
        code.name,
        code.words.len(),
        code.length
    );
    out.push_str(&format!("controllability index: {}\n", ctx.ell));
    let states: Vec<String> = ctx
        .trellis
        .states
        .iter()
        .map(|s| s.quotient.order.to_string())
        .collect();
    out.push_str(&format!("state profile: {}\n", states.join(" ")));
    let branches: Vec<String> = (0..ctx.len() as i64)
        .map(|t| ctx.trellis.section_group(t).order.to_string())
        .collect();
    out.push_str(&format!("branch orders: {}\n", branches.join(" ")));
    for t in 0..limit as i64 {
        let xs: Vec<String> = (-1..=ctx.ell as i64)
            .map(|j| compute_x(&ctx.trellis, t, j).len().to_string())
            .collect();
        let ys: Vec<String> = (-1..=ctx.ell as i64)
            .map(|i| compute_y(&ctx.trellis, t, i).len().to_string())
            .collect();
        out.push_str(&format!("t={t} |X_-1..X_{}|: {}  |Y_-1..Y_{}|: {}\n", ctx.ell, xs.join(" "), ctx.ell, ys.join(" ")));
    }
    for t in 0..limit as i64 {
        let stat = static_matrix(&ctx.trellis, ctx.ell, t);
        let shift = shift_matrix(&ctx.trellis, ctx.ell, t);
        for (label, m) in [("static", &stat), ("shift", &shift)] {
            out.push_str(&format!("{label} matrix t={t}:"));
            for j in 0..=ctx.ell {
                let row: Vec<String> = (j as i64..=ctx.ell as i64)
                    .map(|k| m.entry(j, k).len().to_string())
                    .collect();
                out.push_str(&format!("  [{}]", row.join(" ")));
            }
            out.push('\n');
        }
    }
    out.push_str(&verify_chain_properties(&ctx.trellis, ctx.ell).render());
    out
}

fn generators_report(ctx: &SystemContext) -> String {
    let code = ctx.code();
    let mut out = format!("generator basis of {} (ell={})\n", code.name, ctx.ell);
    out.push_str("granule orders (rows t, columns k):\n");
    for t in 0..ctx.len() as i64 {
        let row: Vec<String> = (0..=ctx.ell)
            .map(|k| granule(code, t, k).order().to_string())
            .collect();
        out.push_str(&format!("  t={t}: {}\n", row.join(" ")));
    }
    out.push_str(&dump_basis(code, &ctx.basis));
    out.push_str("representative slot sizes (per time, column-major):\n");
    for rs in &ctx.rep_sets {
        let sizes: Vec<String> = rs.slots.iter().map(|s| s.reps.len().to_string()).collect();
        out.push_str(&format!(
            "  t={}: {} (product {})\n",
            rs.t,
            sizes.join(" "),
            rs.carrier_size()
        ));
    }
    out
}

fn parse_word(ctx: &SystemContext, text: &str) -> Result<usize, String> {
    let line = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .ok_or("empty word file")?;
    let word: Vec<usize> = line
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| format!("bad element `{s}`")))
        .collect::<Result<_, _>>()?;
    ctx.code()
        .index_of(&word)
        .ok_or_else(|| "not a codeword".to_string())
}

fn parse_tensor(ctx: &SystemContext, text: &str) -> Result<Tensor, String> {
    let mut mats: Vec<RepMatrix> = ctx.rep_sets.iter().map(RepMatrix::identity).collect();
    let mut cur: Option<usize> = None;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, "tensor")) => {}
        _ => return Err("expected `tensor` header".into()),
    }
    for (i, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["end"] => return Ok(Tensor { start: 0, mats }),
            ["t", s] => {
                let t: usize = s.parse().map_err(|_| format!("line {i}: bad time"))?;
                if t >= mats.len() {
                    return Err(format!("line {i}: time outside the window"));
                }
                cur = Some(t);
            }
            ["r", js, ks, cs] => {
                let t = cur.ok_or(format!("line {i}: entry before any `t`"))?;
                let j: usize = js.parse().map_err(|_| format!("line {i}: bad row"))?;
                let k: usize = ks.parse().map_err(|_| format!("line {i}: bad span"))?;
                let c: usize = cs.parse().map_err(|_| format!("line {i}: bad coset"))?;
                if j > k || k > ctx.ell {
                    return Err(format!("line {i}: slot outside the matrix"));
                }
                let rs = ctx.rep_set(t as i64);
                mats[t].cosets[rs.slot_index(j, k)] = c;
            }
            _ => return Err(format!("line {i}: unrecognized tensor line")),
        }
    }
    Err("missing `end`".into())
}

fn render_tensor(ctx: &SystemContext, tensor: &Tensor) -> String {
    let mut out = String::from("tensor\n");
    for mat in &tensor.mats {
        out.push_str(&format!("t {}\n", mat.t));
        let rs = ctx.rep_set(mat.t);
        for (idx, slot) in rs.slots.iter().enumerate() {
            if mat.cosets[idx] != 0 {
                out.push_str(&format!("r {} {} {}\n", slot.j, slot.k, mat.cosets[idx]));
            }
        }
    }
    out.push_str("end\n");
    out
}

/// Provenance keys of the nontrivial families visible in the (0, k)
/// triangle at time t.
fn term_keys(ctx: &SystemContext, k: usize, t: i64) -> BTreeSet<(i64, usize)> {
    let mut keys = BTreeSet::new();
    for n in k..=ctx.ell {
        for m in 0..=(n - k) {
            let start = t - m as i64;
            if ctx.basis.family(start, n).is_some() {
                keys.insert((start, n));
            }
        }
    }
    keys
}

fn block_report(ctx: &SystemContext, window: Option<usize>) -> Result<String, SignatureError> {
    let limit = window.unwrap_or(ctx.len()).min(ctx.len()) as i64;
    let mut out = format!("block report for {} (ell={})\n", ctx.code().name, ctx.ell);
    out.push_str("group stack (rows k, entries by time):\n");
    for k in (0..=ctx.ell).rev() {
        out.push_str(&format!("  k={k}:"));
        for t in (0..limit).rev() {
            let p = trellis_product_group(ctx, &vec![(k, t)])?;
            if p.order() > 1 {
                out.push_str(&format!(" U[(0,{k})@{t}]={}", p.order()));
            }
        }
        out.push('\n');
    }

    // Multi-term products: one nontrivial term per chosen time, at least
    // two terms, no term whose generator points are covered by the others.
    out.push_str("trellis products:\n");
    let mut options: Vec<Vec<(usize, i64)>> = Vec::new();
    for t in 0..limit {
        let terms: Vec<(usize, i64)> = (0..=ctx.ell)
            .filter(|&k| {
                let keys = term_keys(ctx, k, t);
                !keys.is_empty()
            })
            .map(|k| (k, t))
            .collect();
        options.push(terms);
    }
    let mut sequences: Vec<IndexSequence> = vec![Vec::new()];
    for terms in &options {
        let mut next = Vec::new();
        for seq in &sequences {
            next.push(seq.clone());
            for &term in terms {
                let mut s = seq.clone();
                s.push(term);
                next.push(s);
            }
        }
        sequences = next;
    }
    sequences.retain(|seq| seq.len() >= 2);
    sequences.retain(|seq| {
        let keysets: Vec<BTreeSet<(i64, usize)>> = seq
            .iter()
            .map(|&(k, t)| term_keys(ctx, k, t))
            .collect();
        keysets.iter().enumerate().all(|(i, ks)| {
            let union: BTreeSet<_> = keysets
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, other)| other.iter().copied())
                .collect();
            !ks.is_subset(&union)
        })
    });
    for seq in &sequences {
        let p = trellis_product_group(ctx, seq)?;
        let terms: Vec<String> = seq.iter().map(|&(k, t)| format!("(0,{k})@{t}")).collect();
        let sets: Vec<String> = seq
            .iter()
            .map(|&(k, t)| {
                let keys: Vec<String> = term_keys(ctx, k, t)
                    .iter()
                    .map(|&(s, n)| format!("r(0,{n})@{s}"))
                    .collect();
                format!("{{{}}}", keys.join(","))
            })
            .collect();
        out.push_str(&format!(
            "  {} : order {} : {}\n",
            terms.join(" x "),
            p.order(),
            sets.join(" x ")
        ));
    }

    // Homomorphism fibers for the full-span and first-shift selection.
    if ctx.ell >= 1 && ctx.len() >= 2 {
        let i: IndexSequence = vec![(ctx.ell, 0), (1, 1)];
        let hom = hom_c_to_product(ctx, &i)?;
        out.push_str(&format!(
            "fibers of the map onto U[(0,{})@0 x (0,1)@1] (order {}):\n",
            ctx.ell,
            hom.product.order()
        ));
        for (x, fiber) in hom.fibers().iter().enumerate() {
            let words: Vec<String> = fiber
                .iter()
                .map(|&c| {
                    ctx.code().words[c]
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join("")
                })
                .collect();
            out.push_str(&format!("  fiber {x}: {}\n", words.join(" ")));
        }
    }
    Ok(out)
}

fn parse_indices(spec: &str) -> Result<IndexSequence, String> {
    spec.split(',')
        .map(|item| {
            let (k, t) = item
                .trim()
                .split_once('@')
                .ok_or_else(|| format!("bad index `{item}`, expected k@t"))?;
            Ok((
                k.trim().parse().map_err(|_| format!("bad span `{k}`"))?,
                t.trim().parse().map_err(|_| format!("bad time `{t}`"))?,
            ))
        })
        .collect()
}

fn quotient_report(ctx: &SystemContext, i: &IndexSequence) -> Result<String, SignatureError> {
    let hom = hom_c_to_product(ctx, i)?;
    let terms: Vec<String> = i.iter().map(|&(k, t)| format!("(0,{k})@{t}")).collect();
    let mut out = format!(
        "quotient by indices {}: kernel order {}, image order {}\n",
        terms.join(" "),
        hom.kernel.len(),
        hom.product.order()
    );
    for (x, seq) in hom.product.carrier.iter().enumerate() {
        let points: Vec<String> = seq
            .iter()
            .flatten()
            .filter(|&&(_, _, c)| c != 0)
            .collect::<BTreeSet<_>>()
            .iter()
            .map(|&&(s, n, c)| format!("r(0,{n})@{s}={c}"))
            .collect();
        let label = if points.is_empty() {
            "identity".to_string()
        } else {
            points.join(" ")
        };
        out.push_str(&format!("  element {x}: {label}\n"));
    }
    for (x, fiber) in hom.fibers().iter().enumerate() {
        let words: Vec<String> = fiber
            .iter()
            .map(|&c| {
                ctx.code().words[c]
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("")
            })
            .collect();
        out.push_str(&format!("  fiber {x}: {}\n", words.join(" ")));
    }
    Ok(out)
}

fn render_group_file(name: &str, group: &FiniteGroup) -> String {
    let mut out = format!("group {}\norder {}\ntable\n", name, group.order);
    for row in &group.table {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("{}\n", line.join(" ")));
    }
    out.push_str("end\n");
    out
}

fn write_realized(base: &Path, code: &Arc<BlockCode>) -> Result<(), String> {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or("bad output path")?
        .to_string();
    let dir = base.parent().unwrap_or(Path::new("."));
    let mut text = format!("code {}\nlength {}\n", stem, code.length);
    for (t, alphabet) in code.alphabets.iter().enumerate() {
        let gname = format!("{stem}_t{t}");
        std::fs::write(
            dir.join(format!("{gname}.group")),
            render_group_file(&gname, alphabet),
        )
        .map_err(|e| e.to_string())?;
        text.push_str(&format!("alphabet {gname}\n"));
    }
    if code.period1 {
        text.push_str("period1\n");
    }
    text.push_str("codewords\n");
    for word in &code.words {
        let line: Vec<String> = word.iter().map(|x| x.to_string()).collect();
        text.push_str(&format!("{}\n", line.join(" ")));
    }
    text.push_str("end\n");
    std::fs::write(base, text).map_err(|e| e.to_string())
}
