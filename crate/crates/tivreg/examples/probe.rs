use std::time::Instant;
use tivreg::geometry::*;
use tivreg::harness::degrade::{make_instance, DegradationKind, DegradationSpec};
use tivreg::harness::metrics::rms_error;
use tivreg::harness::shapes;
use tivreg::harness::experiment::Profile;
use tivreg::pipeline::register;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind = args.get(1).map(|s| s.as_str()).unwrap_or("clean");
    let mag: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let reps: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);

    let (profile, dkind) = match kind {
        "outliers" => (Profile::Outliers, DegradationKind::Outliers),
        "missing" => (Profile::Missing, DegradationKind::Missing),
        "noise" => (Profile::Noise, DegradationKind::Noise),
        _ => (Profile::Clean, DegradationKind::Noise),
    };

    for shape in shapes::SHAPE_NAMES {
        for seed in 0..reps {
            let cfg = profile.registration_config(500);
            let base = shapes::generate(shape, 500, seed ^ 0x9e37);
            let spec = DegradationSpec { kind: dkind, magnitude: mag, rng_seed: seed };
            let inst = make_instance(&base, &spec);
            let t = Instant::now();
            let res = register(&inst.model, &inst.scene, &cfg).unwrap();
            let dt = t.elapsed().as_secs_f64();
            let rms = rms_error(&res.transform, &inst.correspondences, &inst.model, &inst.scene).unwrap();
            let ang = angular_error(&res.transform.rotation, &inst.gt.rotation).to_degrees();
            println!(
                "{kind} {mag} {shape} seed {seed}: t={dt:.2}s rot {}/{} ({} it) band {} trans {}/{} ({} it) ang {ang:.3}° rms {rms:.5} {}",
                res.rotation_result.best_count,
                res.moving_tiv_count,
                res.rotation_result.iterations,
                res.fixed_tiv_count,
                res.translation_result.best_count,
                inst.model.len(),
                res.translation_result.iterations,
                if rms <= 2.0 * cfg.epsilon && ang <= 2.0 { "OK" } else { "FAIL" },
            );
        }
    }
}
