use std::fs;
use std::path::Path;

use permsmc::experiment::{read_runs_csv, read_summary, run_experiment, summarize_runs};
use permsmc::{ExperimentSpec, Format, Method};

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn spec(matrix: &Path, method: Method, out: &Path, threads: usize, format: Format) -> ExperimentSpec {
    ExperimentSpec {
        repeats: 6,
        particles: 400,
        seed: 2024,
        threads: Some(threads),
        out: Some(out.to_owned()),
        format,
        ..ExperimentSpec::new(matrix, method)
    }
}

#[test]
fn outputs_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("toy.txt");
    fs::write(&m, "3\n1 1 0\n0 1 1\n1 1 0\n").unwrap();
    for method in [Method::Adaptive, Method::Ideal, Method::Sa] {
        for format in [Format::Csv, Format::Json] {
            let mut seen = Vec::new();
            for (k, threads) in [1, 1, 4].into_iter().enumerate() {
                let out = dir.path().join(format!("{method:?}-{format:?}-{k}"));
                run_experiment(&spec(&m, method, &out, threads, format)).unwrap();
                seen.push(files(&out));
            }
            assert_eq!(seen[0].len(), 2);
            assert_eq!(seen[0], seen[1], "{method:?} {format:?} rerun");
            assert_eq!(seen[0], seen[2], "{method:?} {format:?} threads");
        }
    }
}

#[test]
fn single_repeat_uses_parallel_particles_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("toy.txt");
    fs::write(&m, "3\n1 1 0\n0 1 1\n1 1 0\n").unwrap();
    let mut seen = Vec::new();
    for threads in [1, 3] {
        let out = dir.path().join(format!("t{threads}"));
        let s = ExperimentSpec {
            repeats: 1,
            ..spec(&m, Method::Adaptive, &out, threads, Format::Json)
        };
        run_experiment(&s).unwrap();
        seen.push(files(&out));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn summary_recomputed_from_csv_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("toy.txt");
    fs::write(&m, "3\n1 1 0\n0 1 1\n1 1 0\n").unwrap();
    let out = dir.path().join("out");
    run_experiment(&spec(&m, Method::Adaptive, &out, 2, Format::Csv)).unwrap();
    let summary = read_summary(&out.join("summary.json")).unwrap();
    let runs = read_runs_csv(&out.join("runs.csv")).unwrap();
    let again = summarize_runs(&summary, &runs).unwrap();
    assert_eq!(again, summary);
    let (a, b) = (again.est1.unwrap(), summary.est1.unwrap());
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(
        a.relative_variance.unwrap().to_bits(),
        b.relative_variance.unwrap().to_bits()
    );
}
