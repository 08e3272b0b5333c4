//! End-to-end acceptance checks, one test per criterion.  Each test prints a
//! single pass line once its assertions hold.

use gsys::algebra::is_normal;
use gsys::chains::verify_chain_properties;
use gsys::encoder::{decode_component, decode_path, encode_component, encode_path, SystemContext};
use gsys::generators::granule;
use gsys::signature::{
    controllable_subcode, hom_c_to_product, quotient_sequence_check, trellis_product_group,
    verify_signature_group, verify_signature_sequence,
};
use gsys::synthesis::{parse_sigspec, realize_trellis, synthesize};
use gsys::system::{load_block_code, BlockCode};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(name: &str) -> Arc<BlockCode> {
    load_block_code(&fixtures().join(name)).unwrap()
}

fn analyzed(name: &str) -> SystemContext {
    gsys::encoder::analyze(&load(name)).unwrap()
}

fn synthesized(spec_name: &str) -> SystemContext {
    let text = std::fs::read_to_string(fixtures().join(spec_name)).unwrap();
    let spec = parse_sigspec(&text).unwrap();
    realize_trellis(synthesize(&spec).unwrap()).unwrap().ctx
}

/// All fixture systems used by the property suites: the four on-disk codes
/// plus the three synthesized ones.
fn all_systems() -> Vec<SystemContext> {
    let mut out: Vec<SystemContext> = ["trivial.code", "z2rep.code", "even4.code", "h8.code"]
        .iter()
        .map(|n| analyzed(n))
        .collect();
    for spec in ["trivial.sigspec", "z2l1.sigspec", "l2block.sigspec"] {
        out.push(synthesized(spec));
    }
    out
}

fn word_string(ctx: &SystemContext, c: usize) -> String {
    ctx.code().words[c]
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("")
}

#[test]
fn criterion_1_hamming_reproduction() {
    let start = Instant::now();
    let code = load("h8.code");
    let ctx = gsys::encoder::analyze(&code).unwrap();
    assert_eq!(code.words.len(), 16);
    assert_eq!(ctx.ell, 3);
    for t in 0..4i64 {
        for k in 0..=3usize {
            let expected = matches!((t, k), (0, 3) | (0, 1) | (1, 1) | (2, 1));
            assert_eq!(
                granule(&code, t, k).order() == 2,
                expected,
                "granule order at t={t} k={k}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1 (Hamming reproduction, <1s): pass");
}

#[test]
fn criterion_2_fiber_quartets() {
    let ctx = analyzed("h8.code");
    let hom = hom_c_to_product(&ctx, &vec![(3, 0), (1, 1)]).unwrap();
    let fibers: Vec<Vec<String>> = hom
        .fibers()
        .iter()
        .map(|f| f.iter().map(|&c| word_string(&ctx, c)).collect())
        .collect();
    let expected: Vec<Vec<&str>> = vec![
        vec!["0000", "0033", "3300", "3333"],
        vec!["0303", "0330", "3003", "3030"],
        vec!["1111", "1122", "2211", "2222"],
        vec!["1212", "1221", "2112", "2121"],
    ];
    assert_eq!(fibers, expected);
    assert!(is_normal(&hom.kernel));
    println!("criterion 2 (homomorphism fiber quartets, first one normal): pass");
}

#[test]
fn criterion_3_level_two_block_template() {
    let dir = std::env::temp_dir().join("gsys-acceptance-l2");
    std::fs::create_dir_all(&dir).unwrap();
    let code_path = dir.join("l2.code");
    let bin = env!("CARGO_BIN_EXE_gsys");
    let out = Command::new(bin)
        .args([
            "synthesize",
            fixtures().join("l2block.sigspec").to_str().unwrap(),
            "--out",
            code_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "synthesize failed: {}", String::from_utf8_lossy(&out.stderr));
    let out = Command::new(bin)
        .args(["block-report", code_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();

    // Stack shape: one entry on the top row, then two, then three.
    let entries = |k: usize| {
        report
            .lines()
            .find(|l| l.trim_start().starts_with(&format!("k={k}:")))
            .unwrap()
            .matches("U[")
            .count()
    };
    assert_eq!((entries(2), entries(1), entries(0)), (1, 2, 3));
    for (needle, order) in [
        ("U[(0,2)@0]=2", 2),
        ("U[(0,1)@0]=4", 4),
        ("U[(0,1)@1]=4", 4),
        ("U[(0,0)@0]=8", 8),
        ("U[(0,0)@1]=16", 16),
        ("U[(0,0)@2]=8", 8),
    ] {
        assert!(report.contains(needle), "missing {needle} (order {order})");
    }

    // Product listing: exactly the seven non-redundant compositions, each
    // with its carrier order.
    let products: Vec<&str> = report
        .lines()
        .skip_while(|l| !l.starts_with("trellis products:"))
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .collect();
    assert_eq!(products.len(), 7, "product rows:\n{}", products.join("\n"));
    for row in &products {
        assert!(row.contains(": order "), "row without order: {row}");
    }
    println!("criterion 3 (two-step block template stack and products): pass");
}

#[test]
fn criterion_4_encoder_bijection() {
    for ctx in all_systems() {
        // Per-component: every branch decodes to a matrix that re-encodes to
        // itself, and every coset assignment encodes injectively.
        for rs in &ctx.rep_sets {
            let order = ctx.trellis.section_group(rs.t).order;
            let mut seen = vec![false; order];
            for b in 0..order {
                let mat = decode_component(rs, b);
                let back = encode_component(rs, &mat).unwrap();
                assert_eq!(back, b, "{} t={}", ctx.code().name, rs.t);
                assert!(!seen[b]);
                seen[b] = true;
            }
        }
        // Per-path: decode then encode is the identity on codewords.
        for c in 0..ctx.code().words.len() {
            let tensor = decode_path(&ctx, c).unwrap();
            assert_eq!(encode_path(&ctx, &tensor).unwrap(), c, "{}", ctx.code().name);
        }
    }
    println!("criterion 4 (encoder bijection on all fixtures): pass");
}

#[test]
fn criterion_5_chain_properties() {
    for ctx in all_systems() {
        let cert = verify_chain_properties(&ctx.trellis, ctx.ell);
        assert!(cert.all_pass(), "{}:\n{}", ctx.code().name, cert.render());
    }
    println!("criterion 5 (chain properties on all fixtures): pass");
}

#[test]
fn criterion_6_signature_verification() {
    for ctx in all_systems() {
        let cert = verify_signature_sequence(&ctx);
        assert!(cert.all_pass(), "{}:\n{}", ctx.code().name, cert.render());
        if ctx.code().period1 {
            let cert = verify_signature_group(&ctx).unwrap();
            assert!(cert.all_pass(), "{}:\n{}", ctx.code().name, cert.render());
        }
    }
    println!("criterion 6 (signature sequence and group verification): pass");
}

#[test]
fn criterion_7_quotient_sequence() {
    for ctx in all_systems() {
        let cert = quotient_sequence_check(&ctx);
        assert!(cert.all_pass(), "{}:\n{}", ctx.code().name, cert.render());
        // Order bookkeeping: the span-limited subcode times the image of the
        // full span-k index sequence recovers the whole code.
        for k in 1..=ctx.ell {
            let index: Vec<(usize, i64)> = (0..ctx.len() as i64).map(|t| (k, t)).collect();
            let image = trellis_product_group(&ctx, &index).unwrap();
            let sub = controllable_subcode(&ctx, k as i64 - 1);
            assert_eq!(
                image.order() * sub.len(),
                ctx.code().words.len(),
                "{} k={k}",
                ctx.code().name
            );
        }
    }
    let h8 = analyzed("h8.code");
    assert_eq!(controllable_subcode(&h8, 1).len(), 8);
    println!("criterion 7 (quotient sequence and subcode orders): pass");
}

#[test]
fn criterion_8_synthesis_round_trip() {
    for spec_name in ["trivial.sigspec", "z2l1.sigspec", "l2block.sigspec"] {
        let start = Instant::now();
        let text = std::fs::read_to_string(fixtures().join(spec_name)).unwrap();
        let spec = parse_sigspec(&text).unwrap();
        let realized = realize_trellis(synthesize(&spec).unwrap()).unwrap();
        assert!(
            realized.cert.all_pass(),
            "{spec_name}:\n{}",
            realized.cert.render()
        );
        assert_eq!(realized.ctx.ell, spec.ell, "{spec_name}");
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 60.0, "{spec_name} took {elapsed:?}");
    }
    println!("criterion 8 (synthesis round trip on three specs, <60s each): pass");
}
