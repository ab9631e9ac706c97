use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oap-bench"))
        .args(args)
        .output()
        .unwrap()
}

/// CSV rows with the trailing time column removed.
fn without_time(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect()
}

#[test]
fn identical_invocations_give_identical_csv() {
    let args = ["bench", "--examples", "2,1", "--sizes", "171"];
    let (a, b) = (bench(&args), bench(&args));
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let rows = without_time(&a);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows, without_time(&b));
    assert!(rows[1].starts_with("convdiff2d,171,roap2"));
    assert!(rows[4].starts_with("poisson-lshape,"));
}

#[test]
fn non_convergence_exits_with_two() {
    let out = bench(&[
        "solve",
        "--family",
        "convdiff2d",
        "--n",
        "90",
        "--solver",
        "oap2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(
        bench(&["solve", "--solver", "gmres"]).status.code(),
        Some(1)
    );
    assert_eq!(
        bench(&["solve", "--family", "tridiag-unsym"]).status.code(),
        Some(1)
    );
    assert_eq!(
        bench(&["solve", "--family", "convdiff2d", "--n", "91"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bench(&["bench", "--examples", "5"]).status.code(), Some(1));
    assert_eq!(
        bench(&[
            "solve",
            "--matrix",
            "/nonexistent.mtx",
            "--rhs",
            "/nonexistent.mtx"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn generated_files_solve_like_the_family() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = bench(&[
        "gen",
        "--family",
        "poisson-lshape",
        "--m",
        "5",
        "--constructed",
        "--out",
        d,
    ]);
    assert_eq!(out.status.code(), Some(0));

    let matrix = format!("{d}/matrix.mtx");
    let rhs = format!("{d}/rhs.mtx");
    let solution = format!("{d}/solution.mtx");
    let from_files = bench(&[
        "solve",
        "--matrix",
        &matrix,
        "--rhs",
        &rhs,
        "--solution",
        &solution,
    ]);
    let from_family = bench(&[
        "solve",
        "--family",
        "poisson-lshape",
        "--m",
        "5",
        "--constructed",
    ]);
    assert_eq!(from_files.status.code(), Some(0));
    let (a, b) = (without_time(&from_files), without_time(&from_family));
    assert_eq!(a.len(), 3);
    for (x, y) in a.iter().zip(&b).skip(1) {
        let x = x.split_once(',').unwrap().1;
        let y = y.split_once(',').unwrap().1;
        assert_eq!(x, y);
    }
    let relerr: f64 = a[1].split(',').nth(6).unwrap().parse().unwrap();
    assert!(relerr < 1e-4);
}

#[test]
fn markdown_report_goes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.md");
    let out = bench(&[
        "solve",
        "--family",
        "tridiag-unsym",
        "--n",
        "300",
        "--format",
        "markdown",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("| problem | n | roap2 | roap3 |"));
}
