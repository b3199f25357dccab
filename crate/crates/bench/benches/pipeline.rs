use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wardsim::sim::SimConfig;
use wardsim::vision::{analyze_frame, GroundRenderer, SceneStyle, ViewKind, VisionParams};
use wardsim::{
    apply_motor, default_map, run_scenario, CameraModel, MotorCommand, NoiseParams, Pose, TemplateSet, VehicleParams,
    VehicleState,
};

fn vision(c: &mut Criterion) {
    let map = default_map();
    let noise = NoiseParams { brightness: 20.0, sigma: 8.0, k1: 0.05 };
    let cam = CameraModel::default().with_k1(noise.k1);
    let renderer = GroundRenderer::new(cam, SceneStyle::default());
    let templates = TemplateSet::default();
    let params = VisionParams::default();
    // Approaching J2, with both placards in view.
    let pose = Pose::new(1.6, 0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    c.bench_function("ink_mask", |b| b.iter(|| renderer.ink_mask(&map, black_box(&pose))));
    c.bench_function("render_noisy", |b| b.iter(|| renderer.render(&map, black_box(&pose), &noise, &mut rng)));
    let frame = renderer.render(&map, &pose, &noise, &mut rng);
    c.bench_function("analyze_frame", |b| {
        b.iter(|| analyze_frame(black_box(&frame), &cam, &templates, &params, ViewKind::Floor).unwrap())
    });
}

fn kinematics(c: &mut Criterion) {
    let p = VehicleParams::default();
    let s = VehicleState::default();
    let cmd = MotorCommand::new(0.6, 0.4);
    c.bench_function("apply_motor", |b| b.iter(|| apply_motor(black_box(&s), cmd, &p, 0.02)));
}

fn scenario(c: &mut Criterion) {
    let map = default_map();
    let config = SimConfig::single(2);
    let mut g = c.benchmark_group("scenario");
    g.sample_size(10);
    g.bench_function("ward2", |b| b.iter(|| run_scenario(&map, black_box(&config)).unwrap()));
    g.finish();
}

criterion_group!(benches, vision, kinematics, scenario);
criterion_main!(benches);
