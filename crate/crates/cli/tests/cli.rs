use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aklt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aklt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn oracle_on_a_periodic_chain_of_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = aklt(&["oracle", "--lattice", "chain", "--L", "4", "--seed", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dist = read(dir.path(), "distribution.csv");
    assert!(dist.starts_with("instance,config,probability,predicted,log2_weight\n"));
    let mut mixed = 0;
    for line in dist.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let p: f64 = cols[2].parse().unwrap();
        if ["xxxx", "yyyy", "zzzz"].contains(&cols[1]) {
            assert!((p - 1.0 / 42.0).abs() < 1e-12);
        } else {
            assert!((p - 1.0 / 84.0).abs() < 1e-12);
            mixed += 1;
        }
    }
    assert_eq!(mixed, 78);
    let verdicts = read(dir.path(), "verdicts.csv");
    assert!(verdicts.lines().skip(1).all(|l| l.ends_with(",true")), "{verdicts}");
}

#[test]
fn empty_p_grid_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = aklt(&["percolate", "--L", "8", "--seed", "1", "--p-grid", ""], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_seed_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = aklt(&["sample", "--L", "8"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn oversized_oracle_instance_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = aklt(&["oracle", "--lattice", "chain", "--L", "20", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["reduce", "--L", "32", "--seed", "9", "--warmup", "20", "--sweeps", "20", "--interval", "10", "--chains", "2", "--l-const", "1.5"];
    for dir in [&a, &b] {
        assert!(aklt(&args, dir.path()).status.success());
    }
    for name in ["reports.jsonl", "certificates.jsonl", "reduce_summary.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
    let stats = ["stats", "--L", "8,12", "--seed", "4", "--warmup", "10", "--sweeps", "40", "--interval", "2", "--chains", "2"];
    for dir in [&a, &b] {
        assert!(aklt(&stats, dir.path()).status.success());
    }
    for name in ["aggregates.csv", "extrapolations.csv", "largest_domain.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.conf");
    fs::write(&file, "# small run\nL = 6\nseed = 2\nsweeps = 10\ninterval = 5\nformat = jsonl\n").unwrap();
    let config = file.to_str().unwrap();
    let out = aklt(&["sample", "--config", config, "--L", "8", "--format", "csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let samples = read(dir.path(), "samples.csv");
    assert_eq!(samples.lines().count(), 3);
    assert!(samples.lines().skip(1).all(|l| l.starts_with("8,0,")));

    fs::write(&file, "L = 6\nseeed = 2\n").unwrap();
    let out = aklt(&["sample", "--config", config], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_at_small_size_give_plausible_vertex_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = aklt(&["stats", "--L", "20", "--seed", "5", "--warmup", "200", "--sweeps", "400", "--interval", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = read(dir.path(), "aggregates.csv");
    let row = agg.lines().find(|l| l.contains(",vertex_density,")).expect("vertex density row");
    let mean: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((mean - 0.495).abs() < 0.05, "vertex density {mean}");
}

#[test]
fn percolate_writes_curve_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["percolate", "--L", "16", "--seed", "3", "--warmup", "50", "--sweeps", "50", "--interval", "10", "--mode", "bond"];
    let out = aklt(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curve = read(dir.path(), "curve.csv");
    assert_eq!(curve.lines().count(), 22);
    assert!(curve.lines().nth(1).unwrap().starts_with("16,bond,0.0,1.0,"));
    assert!(read(dir.path(), "threshold.csv").starts_with("L,mode,samples,spanning_undiluted,p_delete,err,p_c\n"));
}
