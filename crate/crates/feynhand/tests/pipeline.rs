//! End-to-end driver tests: caching, naming, diagnostics and exit codes.

use feynhand::cli::{run_with, Diagnostic, JobSpec, Severity, CACHE_INDEX_NAME};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

const TWO_BLOCKS: &str = "\
\\begin{feynhand}
\\vertex (a) at (0,0); \\vertex (b) at (2,0);
\\propag [fer] (a) to (b);
\\end{feynhand}
\\begin{feynhand}
\\vertex (c) at (0,0); \\vertex (d) at (2,0);
\\propag [glu] (c) to (d);
\\end{feynhand}
";

fn spec(inputs: Vec<PathBuf>, out_dir: &Path) -> JobSpec {
    JobSpec {
        inputs,
        out_dir: out_dir.to_path_buf(),
        ..JobSpec::default()
    }
}

fn run_quiet(spec: &JobSpec) -> (i32, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut io_msgs = Vec::new();
    let code = run_with(spec, &mut |d| diags.push(d.clone()), &mut |m| {
        io_msgs.push(m.to_string())
    });
    (code, diags)
}

#[test]
fn second_run_writes_nothing_and_force_remake_rewrites() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pair.fh");
    fs::write(&input, TWO_BLOCKS).unwrap();
    let out = dir.path().join("svg");
    let job = spec(vec![input.clone()], &out);

    let (code, diags) = run_quiet(&job);
    assert_eq!(code, 0, "{diags:?}");
    let out1 = out.join("pair-1.svg");
    let out2 = out.join("pair-2.svg");
    let bytes1 = fs::read(&out1).unwrap();
    let bytes2 = fs::read(&out2).unwrap();

    // Corrupt both outputs; a cache hit must leave the sentinel in place.
    fs::write(&out1, b"sentinel-1").unwrap();
    fs::write(&out2, b"sentinel-2").unwrap();
    let (code, _) = run_quiet(&job);
    assert_eq!(code, 0);
    assert_eq!(fs::read(&out1).unwrap(), b"sentinel-1");
    assert_eq!(fs::read(&out2).unwrap(), b"sentinel-2");

    // Forcing regeneration restores byte-identical output.
    let forced = JobSpec {
        force_remake: true,
        ..job.clone()
    };
    let (code, _) = run_quiet(&forced);
    assert_eq!(code, 0);
    assert_eq!(fs::read(&out1).unwrap(), bytes1);
    assert_eq!(fs::read(&out2).unwrap(), bytes2);
}

#[test]
fn editing_one_block_regenerates_exactly_one_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pair.fh");
    fs::write(&input, TWO_BLOCKS).unwrap();
    let out = dir.path().join("svg");
    let job = spec(vec![input.clone()], &out);
    let (code, _) = run_quiet(&job);
    assert_eq!(code, 0);

    let out1 = out.join("pair-1.svg");
    let out2 = out.join("pair-2.svg");
    fs::write(&out1, b"sentinel-1").unwrap();
    fs::write(&out2, b"sentinel-2").unwrap();

    // Change only the second block.
    fs::write(&input, TWO_BLOCKS.replace("[glu]", "[sca]")).unwrap();
    let (code, _) = run_quiet(&job);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read(&out1).unwrap(),
        b"sentinel-1",
        "block one untouched"
    );
    let regenerated = fs::read_to_string(&out2).unwrap();
    assert!(regenerated.starts_with("<svg"), "block two regenerated");
}

#[test]
fn check_mode_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.fh");
    fs::write(
        &input,
        "\\vertex (a) at (0,0); \\vertex (b) at (1,0);\n\\propag (a) to (b);\n",
    )
    .unwrap();
    let out = dir.path().join("svg");
    let job = JobSpec {
        check_only: true,
        ..spec(vec![input], &out)
    };
    let (code, diags) = run_quiet(&job);
    assert_eq!(code, 0);
    assert!(diags.is_empty());
    assert!(!out.exists());
}

#[test]
fn diagnostics_follow_the_fixed_format() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.fh");
    fs::write(&input, "\\vertex (a) at (0,0);\n\\propag (a) to (ghost);\n").unwrap();
    let out = dir.path().join("svg");
    let (code, diags) = run_quiet(&spec(vec![input.clone()], &out));
    assert_eq!(code, 1);
    assert_eq!(diags.len(), 1);
    let d = &diags[0];
    assert_eq!(d.severity, Severity::Error);
    assert_eq!((d.line, d.col), (2, 17));
    assert!(d.message.contains("ghost"));
    let line = d.to_string();
    let expected_prefix = format!("{}:2:17: error: ", input.display());
    assert!(line.starts_with(&expected_prefix), "{line}");
}

#[test]
fn warnings_do_not_fail_the_build() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("warn.fh");
    fs::write(
        &input,
        "\\vertex [dot] (a) at (0,0);\n\\vertex (b) at (1,0);\n\\propag (a) to (b);\n",
    )
    .unwrap();
    let out = dir.path().join("svg");
    let (code, diags) = run_quiet(&spec(vec![input], &out));
    assert_eq!(code, 0);
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].severity, Severity::Warning);
}

#[test]
fn missing_input_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let job = spec(vec![dir.path().join("nope.fh")], &dir.path().join("svg"));
    let (code, _) = run_quiet(&job);
    assert_eq!(code, 2);
}

#[test]
fn set_next_filename_and_name_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.fh");
    fs::write(
        &input,
        "\\fhsetnextfilename{scatter};\n\\begin{feynhand}\n\\vertex (a) at (0,0); \\vertex (b) at (1,0);\n\\propag (a) to (b);\n\\end{feynhand}\n",
    )
    .unwrap();
    let out = dir.path().join("svg");
    let (code, _) = run_quiet(&spec(vec![input.clone()], &out));
    assert_eq!(code, 0);
    assert!(out.join("scatter.svg").exists());

    // Without an explicit name the stem comes from --name, then the file.
    let input2 = dir.path().join("y.fh");
    fs::write(
        &input2,
        "\\vertex (a) at (0,0); \\vertex (b) at (1,0);\n\\propag (a) to (b);\n",
    )
    .unwrap();
    let job = JobSpec {
        name_override: Some("custom".to_string()),
        ..spec(vec![input2], &out)
    };
    let (code, _) = run_quiet(&job);
    assert_eq!(code, 0);
    assert!(out.join("custom.svg").exists());
}

#[test]
fn cache_index_is_written_in_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.fh");
    fs::write(
        &input,
        "\\vertex (a) at (0,0); \\vertex (b) at (1,0);\n\\propag (a) to (b);\n",
    )
    .unwrap();
    let out = dir.path().join("svg");
    let (code, _) = run_quiet(&spec(vec![input], &out));
    assert_eq!(code, 0);
    let index = fs::read_to_string(out.join(CACHE_INDEX_NAME)).unwrap();
    let mut parts = index.trim().split(' ');
    let hash = parts.next().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(parts.next(), Some("a.svg"));
}

#[test]
fn binary_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.fh");
    fs::write(
        &input,
        "\\vertex (a) at (0,0); \\vertex (b) at (1,0);\n\\propag [fer] (a) to (b);\n",
    )
    .unwrap();
    let out = dir.path().join("svg");
    let status = Command::new(env!("CARGO_BIN_EXE_feynhand"))
        .arg(&input)
        .arg("--out")
        .arg(&out)
        .status()
        .expect("binary runs");
    assert!(status.success());
    assert!(out.join("a.svg").exists());

    // An undefined vertex makes the exit code 1.
    fs::write(&input, "\\propag (a) to (b);\n").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_feynhand"))
        .arg(&input)
        .arg("--out")
        .arg(&out)
        .arg("--force-remake")
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error: undefined vertex"), "{stderr}");
}
