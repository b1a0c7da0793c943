use dcolor_bench::calibrate::{calibrate, CalibrationPlan, CALIBRATION_SEED_BASE};
use dcolor_bench::thresholds::Status;

fn small_plan() -> CalibrationPlan {
    CalibrationPlan {
        slack_seeds: 2,
        degred_seeds: 500,
        family_seeds: 4,
        family_draws: 50,
        shatter_seeds: 2,
        shatter_n: 3000,
        clique_reduced_seeds: 100,
        clique_reduced_instance: "planted-acd:n=300,delta=40,sparse=1,sdeg=1,bipartite=1".into(),
    }
}

#[test]
fn identical_plans_give_byte_identical_files() {
    let a = calibrate(&small_plan()).unwrap();
    let b = calibrate(&small_plan()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.status, Status::Calibrated);
    for key in ["sparse-gets-slack.c_slk", "degred.max_decolored", "multi-trial.nu", "shattering.s_max", "clique-reduced.c_f"] {
        let e = a.entry(key).unwrap();
        let start: u64 = e.seeds.as_deref().and_then(|s| s.split("..").next()).and_then(|s| s.parse().ok()).unwrap();
        assert!(start >= CALIBRATION_SEED_BASE, "{key} calibrated on validation seeds");
    }
}

#[test]
fn too_few_samples_are_refused() {
    let plan = CalibrationPlan { degred_seeds: 10, ..small_plan() };
    let err = calibrate(&plan).unwrap_err().to_string();
    assert!(err.contains("insufficient samples"), "{err}");
}
