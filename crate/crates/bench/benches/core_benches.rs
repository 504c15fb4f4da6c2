//! Benchmarks for the hot paths: pattern matching over a tree, keyword
//! search over a populated bank, the brace-metrics scanner, and log replay.

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use utpada_core::analyzer::{run_validation, SourceFile, SourceTree};
use utpada_core::metrics::analyze_file;
use utpada_core::normalize::LanguageTag;
use utpada_core::snippetbank::{SnippetBank, SnippetDraft, SubmitterRole};
use utpada_core::store::{Event, MetricDb};
use utpada_core::valcase::parse_case_text;

const WORDS: [&str; 12] = [
    "layout", "overflow", "retry", "logging", "session", "cache", "widget", "resize", "scroll",
    "margin", "padding", "focus",
];

fn synth_kotlin(rng: &mut ChaCha8Rng, functions: usize) -> String {
    let mut out = String::new();
    for f in 0..functions {
        out.push_str(&format!("fun handler{f}(x: Int): Int {{\n"));
        let depth = rng.gen_range(1..4);
        for d in 0..depth {
            out.push_str(&format!("{}if (x > {d}) {{\n", "    ".repeat(d + 1)));
        }
        out.push_str(&format!("{}return x\n", "    ".repeat(depth + 1)));
        for d in (0..depth).rev() {
            out.push_str(&format!("{}}}\n", "    ".repeat(d + 1)));
        }
        out.push_str("    return -x\n}\n\n");
    }
    out
}

fn build_bank(dir: &Path, snippets: usize) -> SnippetBank {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bank = SnippetBank::create(dir).unwrap();
    for i in 0..snippets {
        let kw = WORDS[rng.gen_range(0..WORDS.len())];
        let id = bank
            .add_snippet(SnippetDraft {
                title: format!("{kw} helper {i}"),
                language_tag: "kotlin".into(),
                keywords: vec![kw.to_string(), format!("extra{i}")],
                guideline_ids: vec![],
                body: format!("fun {kw}{i}() = {i} // body {i}"),
                submitted_by_role: SubmitterRole::Developer,
            })
            .unwrap()
            .snippet_id;
        bank.curate(id, true).unwrap();
    }
    bank
}

fn bench_validation(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    std::fs::create_dir_all(&src).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..40 {
        std::fs::write(src.join(format!("file{i}.kt")), synth_kotlin(&mut rng, 10)).unwrap();
    }
    std::fs::write(
        src.join("style.css"),
        ".extActAttributes { display: inline-block; overflow: hidden; width: 70%; }",
    )
    .unwrap();
    let tree = SourceTree::load(&src).unwrap();
    let bank = SnippetBank::create(&dir.path().join("bank")).unwrap();
    let case = parse_case_text(
        "id: VC-1\nguideline: REQ-21890\ndesc: width check\napplies: **/*.css\n\
         pattern: anti\nkind: cssdecl\nmatch: .extActAttributes :: width :: =70%\n\
         pattern: required\nkind: cssdecl\nmatch: .extActAttributes :: width :: =100%\n",
        Path::new("bench.vcase"),
    )
    .unwrap();
    let token_case = parse_case_text(
        "id: VC-2\nguideline: REQ-1289\ndesc: token scan\napplies: **/*.kt\n\
         pattern: required\nkind: tokenseq\nmatch: return - x\n",
        Path::new("bench2.vcase"),
    )
    .unwrap();
    let cases = vec![case, token_case];
    c.bench_function("run_validation 41 files x 2 cases", |b| {
        b.iter(|| run_validation(&tree, &cases, &bank).unwrap())
    });
}

fn bench_search(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let bank = build_bank(&dir.path().join("bank"), 500);
    c.bench_function("search 500-snippet bank", |b| {
        b.iter(|| bank.search("overflow resize", 10).unwrap())
    });
}

fn bench_metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let file = SourceFile::from_text(
        "big.kt",
        LanguageTag::KotlinLike,
        synth_kotlin(&mut rng, 120),
    );
    c.bench_function("analyze_file 120 functions", |b| {
        b.iter(|| analyze_file(&file).unwrap())
    });
}

fn bench_replay(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.db");
    let mut db = MetricDb::open(&path).unwrap();
    for i in 0..1000 {
        db.append(Event::Curation {
            snippet_id: utpada_core::snippetbank::SnippetId::new(i + 1),
            approved: i % 2 == 0,
        })
        .unwrap();
    }
    drop(db);
    c.bench_function("replay 1000-event log", |b| {
        b.iter(|| MetricDb::open_read_only(&path).unwrap().len())
    });
}

criterion_group!(
    benches,
    bench_validation,
    bench_search,
    bench_metrics,
    bench_replay
);
criterion_main!(benches);
