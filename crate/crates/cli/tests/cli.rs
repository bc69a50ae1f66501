use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rmi_core::golden;
use rmi_core::keyfile::serialize_key;
use rmi_core::pgm::{load_pgm, save_pgm, PgmVariant};
use rmi_core::rmi::{generate_key, key_from_matrix};
use rmi_core::GrayImage;
use tempfile::TempDir;

fn rmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmi"))
        .args(args)
        .output()
        .expect("spawn rmi")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    fn put_image(&self, name: &str, img: &GrayImage) -> String {
        std::fs::write(self.path(name), save_pgm(img, PgmVariant::Binary)).unwrap();
        self.s(name)
    }

    fn put(&self, name: &str, bytes: &[u8]) -> String {
        std::fs::write(self.path(name), bytes).unwrap();
        self.s(name)
    }
}

fn load(path: &Path) -> GrayImage {
    load_pgm(&std::fs::read(path).unwrap()).unwrap()
}

fn gradient(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| ((x * 7 + y * 13) % 246) as u8).unwrap()
}

#[test]
fn gen_key_writes_regenerable_files() {
    let d = Dir::new();
    let args = [
        "gen-key", "--width", "8", "--height", "8", "--seed", "7", "--out",
    ];
    let a = rmi(&[&args[..], &[&d.s("a.rmik")]].concat());
    let b = rmi(&[&args[..], &[&d.s("b.rmik")]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let bytes = std::fs::read(d.path("a.rmik")).unwrap();
    assert_eq!(bytes, std::fs::read(d.path("b.rmik")).unwrap());
    assert_eq!(
        rmi_core::parse_key(&bytes).unwrap(),
        generate_key(8, 8, 7).unwrap()
    );

    let e = rmi(&[&args[..], &[&d.s("e.rmik"), "--explicit"]].concat());
    assert_eq!(code(&e), 0);
    let text = std::fs::read_to_string(d.path("e.rmik")).unwrap();
    assert!(text.starts_with("RMIK1\n8 8\nexplicit\n"));
    assert_eq!(
        rmi_core::parse_key(text.as_bytes()).unwrap().entries(),
        generate_key(8, 8, 7).unwrap().entries()
    );
}

#[test]
fn gen_key_rejects_bad_flags() {
    let d = Dir::new();
    let out = d.s("k");
    assert_eq!(
        code(&rmi(&[
            "gen-key", "--width", "0", "--height", "8", "--seed", "1", "--out", &out
        ])),
        2
    );
    assert_eq!(
        code(&rmi(&[
            "gen-key", "--width", "8", "--height", "8", "--out", &out
        ])),
        2
    );
    assert_eq!(
        code(&rmi(&[
            "gen-key", "--width", "8", "--height", "8", "--seed", "-3", "--out", &out
        ])),
        2
    );
    let missing_dir = d.path("nope").join("k.rmik");
    assert_eq!(
        code(&rmi(&[
            "gen-key",
            "--width",
            "2",
            "--height",
            "2",
            "--seed",
            "1",
            "--out",
            missing_dir.to_str().unwrap(),
        ])),
        4
    );
}

#[test]
fn embed_reproduces_worked_example() {
    let d = Dir::new();
    let host = d.put_image("host.pgm", &golden::host_image());
    let key = d.put("key.rmik", serialize_key(&golden::key()).as_bytes());
    let o = rmi(&[
        "embed",
        "--host",
        &host,
        "--key",
        &key,
        "--out",
        &d.s("wm.pgm"),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(load(&d.path("wm.pgm")), golden::watermarked_image());
}

#[test]
fn embed_with_zero_key_keeps_payload() {
    let d = Dir::new();
    let img = gradient(5, 4);
    let host = d.put_image("h.pgm", &img);
    let zero = key_from_matrix(&[0; 20], 5, 4).unwrap();
    let key = d.put("z.rmik", serialize_key(&zero).as_bytes());
    assert_eq!(
        code(&rmi(&[
            "embed",
            "--host",
            &host,
            "--key",
            &key,
            "--out",
            &d.s("o.pgm")
        ])),
        0
    );
    assert_eq!(
        std::fs::read(d.path("o.pgm")).unwrap(),
        std::fs::read(d.path("h.pgm")).unwrap()
    );
}

#[test]
fn embed_preconditions() {
    let d = Dir::new();
    let mut px = vec![10u8; 4];
    px[3] = 246;
    let bright = d.put_image("b.pgm", &GrayImage::new(2, 2, px).unwrap());
    let key = d.put(
        "k.rmik",
        serialize_key(&generate_key(2, 2, 1).unwrap()).as_bytes(),
    );
    let o = rmi(&[
        "embed",
        "--host",
        &bright,
        "--key",
        &key,
        "--out",
        &d.s("o.pgm"),
    ]);
    assert_eq!(code(&o), 3);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("(1, 1)") && msg.contains("246"), "{msg}");

    let wide = d.put_image("w.pgm", &gradient(3, 2));
    let o = rmi(&[
        "embed",
        "--host",
        &wide,
        "--key",
        &key,
        "--out",
        &d.s("o.pgm"),
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension mismatch"));
}

#[test]
fn recover_round_trip_and_failures() {
    let d = Dir::new();
    let img = gradient(16, 9);
    let host = d.put_image("h.pgm", &img);
    let key = d.put(
        "k.rmik",
        serialize_key(&generate_key(16, 9, 5).unwrap()).as_bytes(),
    );
    assert_eq!(
        code(&rmi(&[
            "embed",
            "--host",
            &host,
            "--key",
            &key,
            "--out",
            &d.s("w.pgm")
        ])),
        0
    );
    assert_eq!(
        code(&rmi(&[
            "recover",
            "--watermarked",
            &d.s("w.pgm"),
            "--key",
            &key,
            "--out",
            &d.s("r.pgm")
        ])),
        0
    );
    assert_eq!(
        std::fs::read(d.path("r.pgm")).unwrap(),
        std::fs::read(d.path("h.pgm")).unwrap()
    );

    let wrong = d.put(
        "x.rmik",
        serialize_key(&generate_key(16, 9, 6).unwrap()).as_bytes(),
    );
    let o = rmi(&[
        "recover",
        "--watermarked",
        &d.s("w.pgm"),
        "--key",
        &wrong,
        "--out",
        &d.s("x.pgm"),
    ]);
    assert!(
        code(&o) == 3 || load(&d.path("x.pgm")) != img,
        "wrong key reproduced the host"
    );

    let dark = d.put_image("dark.pgm", &GrayImage::filled(16, 9, 0).unwrap());
    let o = rmi(&[
        "recover",
        "--watermarked",
        &dark,
        "--key",
        &key,
        "--out",
        &d.s("y.pgm"),
    ]);
    assert_eq!(code(&o), 3);

    let small = d.put_image("s.pgm", &gradient(2, 2));
    let o = rmi(&[
        "recover",
        "--watermarked",
        &small,
        "--key",
        &key,
        "--out",
        &d.s("y.pgm"),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_reports_and_exit_codes() {
    let d = Dir::new();
    let host = d.put_image("h.pgm", &golden::host_image());
    let wm = d.put_image("w.pgm", &golden::watermarked_image());
    let key = d.put("k.rmik", serialize_key(&golden::key()).as_bytes());

    let o = rmi(&[
        "verify",
        "--watermarked",
        &wm,
        "--original",
        &host,
        "--key",
        &key,
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "match_ratio=1.000000\nncc=1.000000\ndecision=present\n"
    );

    // Original compared with itself: the extracted watermark is all zeros.
    let o = rmi(&[
        "verify",
        "--watermarked",
        &host,
        "--original",
        &host,
        "--key",
        &key,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).ends_with("decision=absent\n"));

    let o = rmi(&[
        "verify",
        "--watermarked",
        &host,
        "--original",
        &host,
        "--key",
        &key,
        "--threshold",
        "0",
    ]);
    assert_eq!(code(&o), 0);

    let o = rmi(&[
        "verify",
        "--watermarked",
        &wm,
        "--original",
        &host,
        "--key",
        &key,
        "--threshold",
        "1.5",
    ]);
    assert_eq!(code(&o), 2);

    let other = d.put_image("o.pgm", &gradient(4, 4));
    let o = rmi(&[
        "verify",
        "--watermarked",
        &wm,
        "--original",
        &other,
        "--key",
        &key,
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_after_half_crop_is_absent() {
    let d = Dir::new();
    let img = gradient(32, 32);
    let host = d.put_image("h.pgm", &img);
    let mut ratios = Vec::new();
    for seed in 0..10u64 {
        let key = d.put(
            "k.rmik",
            serialize_key(&generate_key(32, 32, seed).unwrap()).as_bytes(),
        );
        assert_eq!(
            code(&rmi(&[
                "embed",
                "--host",
                &host,
                "--key",
                &key,
                "--out",
                &d.s("w.pgm")
            ])),
            0
        );
        let o = rmi(&[
            "attack",
            "--in",
            &d.s("w.pgm"),
            "--out",
            &d.s("a.pgm"),
            "--kind",
            "crop_fill",
            "--rect",
            "0,0,32,16",
            "--fill",
            "0",
        ]);
        assert_eq!(code(&o), 0);
        let o = rmi(&[
            "verify",
            "--watermarked",
            &d.s("a.pgm"),
            "--original",
            &host,
            "--key",
            &key,
        ]);
        assert_eq!(code(&o), 1);
        let ratio: f64 = stdout(&o)
            .lines()
            .find_map(|l| l.strip_prefix("match_ratio="))
            .unwrap()
            .parse()
            .unwrap();
        assert!(ratio < 0.7, "seed {seed}: {ratio}");
        ratios.push(ratio);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 0.5 * (1.0 + 1.0 / 11.0)).abs() < 0.05, "{mean}");
}

#[test]
fn attack_commands() {
    let d = Dir::new();
    let img = gradient(12, 12);
    let input = d.put_image("in.pgm", &img);
    let run = |extra: &[&str], out: &str| {
        rmi(&[&["attack", "--in", &input, "--out", &d.s(out)][..], extra].concat())
    };

    assert_eq!(code(&run(&["--kind", "identity"], "id.pgm")), 0);
    assert_eq!(load(&d.path("id.pgm")), img);
    assert_eq!(
        code(&run(&["--kind", "quantize", "--levels", "256"], "q.pgm")),
        0
    );
    assert_eq!(load(&d.path("q.pgm")), img);

    let noisy = [
        "--kind",
        "uniform_noise",
        "--amplitude",
        "4",
        "--seed",
        "11",
    ];
    assert_eq!(code(&run(&noisy, "n1.pgm")), 0);
    assert_eq!(code(&run(&noisy, "n2.pgm")), 0);
    assert_eq!(
        std::fs::read(d.path("n1.pgm")).unwrap(),
        std::fs::read(d.path("n2.pgm")).unwrap()
    );
    assert_ne!(load(&d.path("n1.pgm")), img);

    let sp = ["--kind", "salt_pepper", "--density", "1", "--seed", "3"];
    assert_eq!(code(&run(&sp, "sp.pgm")), 0);
    assert!(load(&d.path("sp.pgm"))
        .pixels()
        .iter()
        .all(|&p| p == 0 || p == 255));

    // Flag/kind mismatches and invalid parameters.
    assert_eq!(
        code(&run(&["--kind", "identity", "--levels", "4"], "x.pgm")),
        2
    );
    assert_eq!(code(&run(&["--kind", "quantize"], "x.pgm")), 2);
    assert_eq!(
        code(&run(&["--kind", "quantize", "--levels", "1"], "x.pgm")),
        2
    );
    assert_eq!(
        code(&run(&["--kind", "salt_pepper", "--density", "2"], "x.pgm")),
        2
    );
    assert_eq!(
        code(&run(&["--kind", "crop_fill", "--rect", "0,0,2,2"], "x.pgm")),
        2
    );
    assert_eq!(code(&run(&["--kind", "blur"], "x.pgm")), 2);
    assert_eq!(
        code(&run(
            &["--kind", "crop_fill", "--rect", "10,10,4,4", "--fill", "0"],
            "x.pgm"
        )),
        3
    );
}

#[test]
fn metrics_command() {
    let d = Dir::new();
    let host = d.put_image("h.pgm", &golden::host_image());
    let wm = d.put_image("w.pgm", &golden::watermarked_image());

    let o = rmi(&["metrics", "--a", &host, "--b", &host]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "mse=0.000000\npsnr_db=inf\nncc=1.000000\n");

    let o = rmi(&["metrics", "--a", &host, "--b", &wm]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(
        text.starts_with("mse=22.656250\npsnr_db=34.578923\nncc="),
        "{text}"
    );

    let other = d.put_image("o.pgm", &gradient(3, 3));
    assert_eq!(code(&rmi(&["metrics", "--a", &host, "--b", &other])), 3);
}

#[test]
fn malformed_inputs_and_missing_files() {
    let d = Dir::new();
    let host = d.put_image("h.pgm", &golden::host_image());
    let key = d.put("k.rmik", serialize_key(&golden::key()).as_bytes());
    let bad_pgm = d.put("bad.pgm", b"P5\n8 8\n65535\n");
    let bad_key = d.put("bad.rmik", b"RMIK1\n1 1\nexplicit\n11\n");
    let out = d.s("o.pgm");

    assert_eq!(
        code(&rmi(&[
            "embed", "--host", &bad_pgm, "--key", &key, "--out", &out
        ])),
        2
    );
    assert_eq!(
        code(&rmi(&[
            "embed", "--host", &host, "--key", &bad_key, "--out", &out
        ])),
        2
    );
    assert_eq!(
        code(&rmi(&[
            "embed",
            "--host",
            &d.s("missing.pgm"),
            "--key",
            &key,
            "--out",
            &out
        ])),
        4
    );
    assert_eq!(
        code(&rmi(&[
            "embed",
            "--host",
            &host,
            "--key",
            &d.s("missing.rmik"),
            "--out",
            &out
        ])),
        4
    );
}

#[test]
fn demo_paper_command() {
    let o = rmi(&["demo-paper"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("embed: 64/64"));
    assert!(text.trim_end().ends_with("PASS"));
}
