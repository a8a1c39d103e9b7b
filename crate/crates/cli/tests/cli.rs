use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

fn argzone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argzone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = argzone(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const CATS: [&str; 7] = ["AIM", "CTR", "OWN", "BKG", "OTH", "BAS", "TXT"];

/// Each category speaks its own small vocabulary.
fn write_corpora(dir: &Path) {
    let mut labeled = String::new();
    let mut plain = String::new();
    for (c, cat) in CATS.iter().enumerate() {
        let n = if *cat == "OWN" { 40 } else { 12 };
        for i in 0..n {
            let words: Vec<String> = (0..7)
                .map(|j| format!("c{c}w{}", (i * 3 + j * 5) % 9))
                .collect();
            let text = words.join(" ");
            writeln!(labeled, "{cat}\t{text}").unwrap();
            writeln!(plain, "{text}").unwrap();
        }
    }
    std::fs::write(dir.join("labeled.tsv"), labeled).unwrap();
    std::fs::write(dir.join("plain.txt"), plain).unwrap();
    std::fs::write(dir.join("cues.txt"), "c0w1\nc0w2\n").unwrap();
}

fn train_common(dir: &Path, out: &str, method: &str) -> Vec<String> {
    [
        "train-embeddings",
        "--corpus",
        dir.join("plain.txt").to_str().unwrap(),
        "--out",
        dir.join(out).to_str().unwrap(),
        "--method",
        method,
        "--dim",
        "10",
        "--window",
        "3",
        "--min-count",
        "1",
        "--epochs",
        "3",
        "--workers",
        "1",
        "--seed",
        "7",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[test]
fn full_workflow() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_corpora(dir);
    let p = |name: &str| dir.join(name).to_str().unwrap().to_owned();

    let mut args = train_common(dir, "w2v.json", "avgwvec");
    args.extend([
        "--text-out".into(),
        p("w2v.txt"),
        "--arch".into(),
        "skipgram".into(),
        "--output".into(),
        "hs".into(),
    ]);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());

    let nn = ok(&[
        "neighbors",
        "--model",
        &p("w2v.txt"),
        "--word",
        "c1w1",
        "--top-k",
        "3",
    ]);
    assert_eq!(nn.lines().count(), 3);

    ok(&[
        "vectorize",
        "--model",
        &p("w2v.json"),
        "--data",
        &p("labeled.tsv"),
        "--out",
        &p("features.tsv"),
    ]);
    let table = ok(&[
        "evaluate",
        "--features",
        &p("features.tsv"),
        "--folds",
        "4",
        "--classifier-epochs",
        "30",
        "--smote-k",
        "3",
        "--label",
        "toy",
        "--report-out",
        &p("toy.json"),
    ]);
    assert!(table.contains("| toy |"), "{table}");
    ok(&[
        "evaluate",
        "--data",
        &p("labeled.tsv"),
        "--model",
        &p("w2v.json"),
        "--folds",
        "4",
        "--classifier-epochs",
        "10",
        "--smote-before-split",
        "--pooled",
        "--report-out",
        &p("pooled.json"),
    ]);
    ok(&[
        "evaluate",
        "--data",
        &p("labeled.tsv"),
        "--cuewords",
        "starter",
        "--folds",
        "4",
        "--report-out",
        &p("cue.json"),
    ]);

    let report = ok(&["report", &p("toy.json"), &p("pooled.json"), &p("cue.json")]);
    assert!(
        report.contains("| Teufel 2002 † | 0.44/0.65/0.52 |"),
        "{report}"
    );
    assert!(report.contains("| Cuewords |"));
    let tsv = ok(&["report", "--tsv", &p("toy.json")]);
    assert!(tsv.starts_with("config\tcategory\tprecision\trecall\tf1\n"));
    assert_eq!(tsv.lines().count(), 8);
}

#[test]
fn paragraph_vectors_and_cueword_embeddings() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_corpora(dir);
    let p = |name: &str| dir.join(name).to_str().unwrap().to_owned();

    let args = train_common(dir, "pv.json", "paravec");
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let v = ok(&[
        "infer",
        "--model",
        &p("pv.json"),
        "--text",
        "c2w1 c2w3 c2w4",
        "--steps",
        "5",
    ]);
    assert_eq!(v.trim().split('\t').count(), 10);
    ok(&[
        "vectorize",
        "--model",
        &p("pv.json"),
        "--data",
        &p("labeled.tsv"),
        "--method",
        "paravec",
        "--steps",
        "3",
        "--out",
        &p("pv.tsv"),
    ]);

    let mut args = train_common(dir, "bswe.json", "bswe");
    args.extend([
        "--cuewords".into(),
        p("cues.txt"),
        "--mix-alpha".into(),
        "0.7".into(),
    ]);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    ok(&[
        "vectorize",
        "--model",
        &p("bswe.json"),
        "--data",
        &p("labeled.tsv"),
        "--method",
        "bswe",
        "--out",
        &p("b.tsv"),
    ]);
}

#[test]
fn errors_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_corpora(dir);
    let p = |name: &str| dir.join(name).to_str().unwrap().to_owned();

    let args = train_common(dir, "w2v.json", "bswe");
    let out = argzone(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--cuewords"));

    let args = train_common(dir, "w2v.json", "avgwvec");
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let out = argzone(&["neighbors", "--model", &p("w2v.json"), "--word", "unseen"]);
    assert!(!out.status.success());
    let out = argzone(&[
        "vectorize",
        "--model",
        &p("w2v.json"),
        "--data",
        &p("labeled.tsv"),
        "--method",
        "paravec",
        "--out",
        &p("x.tsv"),
    ]);
    assert!(!out.status.success());
    let out = argzone(&["train-embeddings", "--arch", "rnn"]);
    assert!(!out.status.success());
}
