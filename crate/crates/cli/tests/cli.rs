use std::path::Path;
use std::process::{Command, Output};

fn evadesim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evadesim"))
        .current_dir(dir)
        .env_remove("EVADESIM_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned()
}

#[test]
fn analytic_summary_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = evadesim(
        dir.path(),
        &[
            "analytic", "--tau", "0.3", "--k", "0.4", "--lambda", "1.5", "--p", "0.01",
        ],
    );
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.contains("drift=-0.1 "), "{line}");
    assert!(line.contains("regime=fortune-bound"), "{line}");
    assert!(line.contains("expected_compliance_time=150 "), "{line}");
    assert!(line.contains("optimal_tau=0.266667"), "{line}");

    let out = evadesim(dir.path(), &["analytic", "--tau", "0.45"]);
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.contains("never complies"), "{line}");
}

#[test]
fn csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: [(&[&str], &str, &str); 5] = [
        (
            &["single", "--tau", "0.42", "--horizon", "50"],
            "single.csv",
            "t,evaded,audited,repaid,f,pf,n",
        ),
        (
            &["network", "--horizon", "20"],
            "network.csv",
            "t,node,evaded,audited,repaid,f,pf,n",
        ),
        (
            &["sweep", "--tau-grid", "0.1,0.3", "--horizon", "50"],
            "sweep.csv",
            "tau,avg_evaders",
        ),
        (
            &["table1", "--replicates", "3"],
            "table1.csv",
            "node,mean,sd",
        ),
        (
            &["hetero", "--horizon", "100", "--topology", "torus:4x3"],
            "hetero.csv",
            "node,row,col,k,k_avg,evasions",
        ),
    ];
    for (args, file, want) in cases {
        let out = evadesim(d, args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(header(&d.join(file)), want);
    }
    let table = std::fs::read_to_string(d.join("table1.csv")).unwrap();
    assert_eq!(table.lines().count(), 11);
    let grid = std::fs::read_to_string(d.join("hetero_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 3);
    assert!(grid.lines().all(|l| l.split(',').count() == 4));
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["single", "--tau", "1.5"][..],
        &["single", "--bogus"],
        &[],
        &["network", "--topology", "ring:5"],
    ] {
        let out = evadesim(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_output_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = evadesim(
        dir.path(),
        &["single", "--horizon", "10", "--out", "missing/dir/x.csv"],
    );
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |env: Option<&str>, file: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_evadesim"));
        cmd.current_dir(d).env_remove("EVADESIM_SEED");
        if let Some(v) = env {
            cmd.env("EVADESIM_SEED", v);
        }
        let out = cmd
            .args(["single", "--p", "0.3", "--horizon", "200", "--out", file])
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(d.join(file)).unwrap()
    };
    let bare = run(None, "a.csv");
    assert_eq!(bare, run(Some("1"), "b.csv"));
    assert_ne!(bare, run(Some("2"), "c.csv"));
}

#[test]
fn edge_list_topology() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("path.txt"), "# three in a row\n0 1\n1 2\n").unwrap();
    let out = evadesim(
        d,
        &["network", "--topology", "edges:path.txt", "--horizon", "5"],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(d.join("network.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 5);
}
