use std::time::Instant;

use ectkit::ect::DirectionScheme;
use ectkit::stability::{
    run_batch, trial_params, verify_proof_chain, BatchConfig, Check, Instance,
};

#[test]
fn integrated_wasserstein_batch_holds() {
    let start = Instant::now();
    let reports = run_batch(
        Check::Skraba,
        &BatchConfig {
            trials: 200,
            seed: 5,
            directions: None,
        },
    )
    .unwrap();
    for r in &reports {
        assert!(r.holds, "{}", serde_json::to_string(r).unwrap());
    }
    eprintln!("200 trials in {:.1}s", start.elapsed().as_secs_f64());
}

#[test]
fn proof_chain_is_monotone() {
    for i in 0..30 {
        let inst = Instance::generate(trial_params(Check::Ect, 8, i)).unwrap();
        let scheme = DirectionScheme::with_count(inst.params.ambient_dim, 512).unwrap();
        for r in verify_proof_chain(&inst.complex, &inst.f, &inst.g, &scheme).unwrap() {
            assert!(r.holds, "trial {i}: {r}");
        }
    }
}

#[test]
fn batches_are_reproducible() {
    let cfg = BatchConfig {
        trials: 8,
        seed: 42,
        directions: Some(128),
    };
    let a = serde_json::to_string(&run_batch(Check::All, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_batch(Check::All, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn replay_json_is_exact() {
    let inst = Instance::generate(trial_params(Check::Ect, 3, 1)).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&inst.to_loaded().to_json().unwrap()).unwrap();
    let back = ectkit::LoadedComplex::from_json(&json.to_string()).unwrap();
    assert_eq!(back.complex, inst.complex);
    assert_eq!(back.embedding("g").unwrap(), &inst.g);
}
