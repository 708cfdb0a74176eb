use std::fs;

use ectkit::io::{load_complex_file, load_directions_csv, save_complex_file};
use ectkit::stability::{trial_params, Check, Instance};
use ectkit::Error;

#[test]
fn complex_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..20 {
        let inst = Instance::generate(trial_params(Check::Select, 4, i)).unwrap();
        let path = dir.path().join(format!("k{i}.json"));
        save_complex_file(&path, &inst.to_loaded()).unwrap();
        let back = load_complex_file(&path).unwrap();
        assert_eq!(back, inst.to_loaded());
    }
}

#[test]
fn off_detected_by_extension_or_header() {
    let dir = tempfile::tempdir().unwrap();
    let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
    for name in ["tri.off", "tri.txt"] {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        let l = load_complex_file(&path).unwrap();
        assert_eq!(l.complex.f_vector(), vec![3, 3, 1]);
        assert!(l.embedding("off").is_ok());
    }
}

#[test]
fn directions_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dirs.csv");
    fs::write(&path, "0,0,1\n0.6,0.8,0\n").unwrap();
    let dirs = load_directions_csv(&path).unwrap();
    assert_eq!(dirs.len(), 2);
    assert_eq!(dirs[1].dim(), 3);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_complex_file(dir.path().join("nope.json")), Err(Error::Io(_))));
}
