use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use lmvr_core::synthetic::{generate, SyntheticConfig};
use tempfile::TempDir;

fn lmvr(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lmvr"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn lmvr");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(bytes) = stdin {
            pipe.write_all(bytes).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

// The small fixture corpus is far from any budget; these tests care about
// plumbing, so the tolerance is loose enough that training exits 0.
struct Fixture {
    dir: TempDir,
    corpus: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let corpus = dir.path().join("corpus.txt");
        let synthetic = generate(&SyntheticConfig {
            stems: 12,
            suffixes: 8,
            tokens: 4000,
            seed: 3,
        });
        fs::write(&corpus, synthetic.to_text(3)).unwrap();
        Self { dir, corpus }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_segment_detok_round_trip() {
    let fx = Fixture::new();
    let model = fx.path("m.lmvr");
    let out = lmvr(
        &[
            "train",
            "-i",
            s(&fx.corpus),
            "--target-vocab",
            "60",
            "--size-tolerance",
            "0.9",
            "-m",
            s(&model),
            "--no-timestamp",
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(fx.path("m.lmvr.report")).unwrap();
    assert!(report.contains("stop_reason\t"));
    assert!(!report.contains("timestamp"));

    let input = fs::read(&fx.corpus).unwrap();
    for marker in ["plus", "atat"] {
        let seg = lmvr(&["segment", "-m", s(&model), "--marker", marker], Some(&input));
        assert_eq!(code(&seg), 0);
        assert_ne!(seg.stdout, input);
        let back = lmvr(&["detok", "--marker", marker], Some(&seg.stdout));
        assert_eq!(code(&back), 0);
        assert_eq!(back.stdout, input);
    }
}

#[test]
fn missing_final_newline_is_kept() {
    let fx = Fixture::new();
    let bpe = fx.path("b.bpe");
    let learned = lmvr(
        &["bpe-train", "-i", s(&fx.corpus), "--merges", "30", "-m", s(&bpe)],
        None,
    );
    assert_eq!(code(&learned), 0);
    let summary = String::from_utf8(learned.stdout).unwrap();
    assert!(
        summary.starts_with("requested_merges\t30\nmerges\t30\nvocab_types\t"),
        "{summary}"
    );
    let text = b"  alpha\tbeta\n\ngamma ";
    let seg = lmvr(&["bpe-apply", "-m", s(&bpe)], Some(text));
    assert_eq!(code(&seg), 0);
    let back = lmvr(&["detok", "--marker", "atat"], Some(&seg.stdout));
    assert_eq!(back.stdout, text);
}

#[test]
fn outputs_are_deterministic() {
    let fx = Fixture::new();
    let run = |tag: &str| {
        let model = fx.path(&format!("{tag}.lmvr"));
        let bpe = fx.path(&format!("{tag}.bpe"));
        let seg = fx.path(&format!("{tag}.seg"));
        let train = [
            "train",
            "-i",
            s(&fx.corpus),
            "--target-vocab",
            "60",
            "--size-tolerance",
            "0.9",
            "-m",
            s(&model),
            "--no-timestamp",
        ];
        assert_eq!(code(&lmvr(&train, None)), 0);
        assert_eq!(
            code(&lmvr(
                &["bpe-train", "-i", s(&fx.corpus), "--merges", "40", "-m", s(&bpe)],
                None
            )),
            0
        );
        let segment = ["segment", "-m", s(&model), "-i", s(&fx.corpus), "-o", s(&seg)];
        assert_eq!(code(&lmvr(&segment, None)), 0);
        [
            model.clone(),
            PathBuf::from(format!("{}.report", model.display())),
            bpe,
            seg,
        ]
        .map(|p| fs::read(p).unwrap())
    };
    assert_eq!(run("one"), run("two"));
}

#[test]
fn threads_keep_line_order() {
    let fx = Fixture::new();
    let model = fx.path("m.lmvr");
    lmvr(
        &[
            "train",
            "-i",
            s(&fx.corpus),
            "--target-vocab",
            "60",
            "--size-tolerance",
            "0.9",
            "-m",
            s(&model),
        ],
        None,
    );
    let input = fs::read(&fx.corpus).unwrap();
    let one = lmvr(&["segment", "-m", s(&model)], Some(&input));
    let four = lmvr(&["segment", "-m", s(&model), "--threads", "4"], Some(&input));
    assert_eq!(code(&four), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn usage_errors_exit_1_and_write_nothing() {
    let fx = Fixture::new();
    let model = fx.path("m.lmvr");
    let bad = [
        vec![
            "train",
            "-i",
            s(&fx.corpus),
            "--target-vocab",
            "0",
            "-m",
            s(&model),
        ],
        vec![
            "train",
            "-i",
            s(&fx.corpus),
            "--target-vocab",
            "10",
            "-m",
            s(&model),
            "--size-tolerance",
            "2",
        ],
        vec![
            "train",
            "-i",
            s(&fx.corpus),
            "--target-vocab",
            "10",
            "-m",
            s(&model),
            "--dampening",
            "sqrt",
        ],
        vec!["train", "-i", s(&fx.corpus), "-m", s(&model)],
        vec!["segment", "-m", s(&model), "--threads", "0"],
        vec!["frobnicate"],
    ];
    for args in bad {
        let out = lmvr(&args, Some(b""));
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert!(!model.exists());
    assert_eq!(code(&lmvr(&["--help"], None)), 0);
    assert_eq!(code(&lmvr(&["train", "--help"], None)), 0);
}

#[test]
fn data_errors_exit_2() {
    let fx = Fixture::new();
    let model = fx.path("m.lmvr");
    let empty = lmvr(&["train", "--target-vocab", "5", "-m", s(&model)], Some(b"\n\n"));
    assert_eq!(code(&empty), 2);
    assert!(!model.exists());

    let reserved = lmvr(
        &["bpe-train", "--merges", "5", "-m", s(&model)],
        Some(b"ok +bad\n"),
    );
    assert_eq!(code(&reserved), 2);
    assert!(String::from_utf8_lossy(&reserved.stderr).contains("line 1"));

    let garbage = fx.path("garbage.model");
    fs::write(&garbage, "not a model\n").unwrap();
    assert_eq!(code(&lmvr(&["segment", "-m", s(&garbage)], Some(b"x\n"))), 2);
    assert_eq!(code(&lmvr(&["detok"], Some(b"+ab cd\n"))), 2);
    assert_eq!(code(&lmvr(&["convert-analyses"], Some(b"+Noun\n"))), 2);
    assert_eq!(code(&lmvr(&["stats"], Some(&[0xff, b'\n'][..]))), 2);
}

#[test]
fn missed_target_still_writes_model() {
    let fx = Fixture::new();
    let model = fx.path("m.lmvr");
    let out = lmvr(
        &[
            "train",
            "-i",
            s(&fx.corpus),
            "--target-vocab",
            "1",
            "-m",
            s(&model),
            "--max-epochs",
            "1",
            "--alpha",
            "0",
            "--no-timestamp",
        ],
        None,
    );
    assert_eq!(code(&out), 3);
    assert!(model.exists());
    let report = fs::read_to_string(fx.path("m.lmvr.report")).unwrap();
    assert!(report.contains("warning\ttarget_missed"));
}

#[test]
fn analysis_tools() {
    let out = lmvr(&["convert-analyses"], Some("ağ+Noun+A3pl ev+Noun\n".as_bytes()));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "ağ +Noun +A3pl <EOW> ev +Noun <EOW>\n"
    );

    let out = lmvr(&["stats"], Some(b"a bb a\nccc\n"));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "sentences\t2\ntokens\t4\ntypes\t3\nmean_word_length\t1.750000\n"
    );

    let out = lmvr(&["report", "--top", "1"], Some(b"ev +ler ev\n"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("words\t2\n"));
    assert!(text.contains("top\tev\t2\n"));

    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    fs::write(&a, "ev\n+ler\n").unwrap();
    fs::write(&b, "ev\tx\nler@@\n").unwrap();
    let out = lmvr(&["overlap", "--a", s(&a), "--b", s(&b)], None);
    assert!(String::from_utf8_lossy(&out.stdout).contains("intersection\t1\n"));
    let out = lmvr(&["overlap", "--a", s(&a), "--b", s(&b), "--strip-markers"], None);
    assert!(String::from_utf8_lossy(&out.stdout).contains("intersection\t2\n"));
}
