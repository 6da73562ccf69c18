use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use skinsim_core::analysis::{
    evaluate_configurations, plane_fit, pressure_series, reconstruct, snr, table1, Activity, Cell, Covering,
    EvaluationOptions, PressureVerdict, RingLog, TofMode,
};
use skinsim_core::fixtures;
use skinsim_core::geometry::{primitives, Material};
use skinsim_core::kinematics::{sensor_world_pose, Joint, JointKind, JointTrajectory, KinematicChain, Scene, SensorMount};
use skinsim_core::math::{axis_angle, pose, Point3, Pose, Quat, Vec3};
use skinsim_core::protocol::{calibrate, phase_log, CalibrationInput};
use skinsim_core::sc::MeasurementSpec;
use skinsim_core::simulate::{split_records, Simulation};
use skinsim_core::tof::TofSpec;

/// `n` samples (even) with mean `m` and unbiased standard deviation `s`.
fn stream(m: f64, s: f64, n: usize) -> Vec<f64> {
    let a = s * ((n as f64 - 1.0) / n as f64).sqrt();
    (0..n).map(|i| if i % 2 == 0 { m + a } else { m - a }).collect()
}

#[test]
fn constructed_streams_give_published_table() {
    let mut logs = Vec::new();
    for cell in Cell::ALL {
        let target = table1(cell);
        let rings = (0..3)
            .map(|r| {
                let mu_n = 1600.0 + 10.0 * r as f64;
                let sigma = 4.0 + r as f64;
                RingLog { site_id: r, inactive: stream(mu_n, sigma, 1000), active: vec![mu_n + target * sigma; 1000] }
            })
            .collect();
        logs.push((cell, rings));
    }
    let table = evaluate_configurations(&logs, &EvaluationOptions::default()).unwrap();
    for c in &table.cells {
        assert!((c.snr - table1(c.cell)).abs() / table1(c.cell) < 1e-9);
        for r in &c.rings {
            assert!((r.snr - table1(c.cell)).abs() / table1(c.cell) < 1e-9);
        }
    }
    assert!(table.checks.all_hold());
}

#[test]
fn all_inactive_logs_show_no_contact() {
    let logs: Vec<_> = Cell::ALL
        .into_iter()
        .map(|c| (c, (0..3).map(|r| RingLog { site_id: r, inactive: stream(1600.0, 5.0, 1000), active: stream(1600.0, 5.0, 1000) }).collect()))
        .collect();
    let table = evaluate_configurations(&logs, &EvaluationOptions::default()).unwrap();
    assert!(table.cells.iter().all(|c| c.snr < 1e-9 && !c.contact));
    assert!(!table.checks.all_above_threshold);
}

proptest! {
    #[test]
    fn snr_ignores_positive_affine_maps(a in 0.01f64..100.0, b in -1e4f64..1e4, shift in 1.0f64..200.0) {
        let idle: Vec<f64> = (0..50).map(|i| 1000.0 + ((i * 7919) % 23) as f64).collect();
        let touch: Vec<f64> = (0..30).map(|i| 1000.0 + shift + ((i * 104729) % 17) as f64).collect();
        let base = snr(&idle, &touch, 7.0).unwrap().snr;
        let map = |xs: &[f64]| xs.iter().map(|x| a * x + b).collect::<Vec<_>>();
        let mapped = snr(&map(&idle), &map(&touch), 7.0).unwrap().snr;
        prop_assert!((base - mapped).abs() <= 1e-9 * base.max(1.0));
    }
}

#[test]
fn squeeze_beats_rest_at_table_noise() {
    let cal = calibrate(&CalibrationInput::default(), true).unwrap();
    for tof in TofMode::ALL {
        let e = cal.electrode_for(Covering::Rest, 0);
        let phases = [(Activity::Inactive, 1000), (Activity::ActiveRest, 1000), (Activity::ActiveSqueeze, 1000)];
        let (samples, label) = phase_log(&cal, &e, tof, &phases, 3, 0);
        let r = pressure_series(&samples, &label, 0.99).unwrap();
        assert_eq!(r.verdict, PressureVerdict::Monotone);
        assert!(r.squeeze_mean.unwrap() > r.rest_mean.unwrap());
        assert!(r.squeeze_vs_rest.unwrap().p_value < 0.01);
    }
}

fn mast(sensors: &[(u32, Vec3)]) -> KinematicChain {
    let mounts = sensors
        .iter()
        .map(|&(id, offset)| SensorMount { link: 1, local: pose(offset, Quat::identity()), site_id: id })
        .collect();
    let joint = Joint { axis: Vec3::z(), kind: JointKind::Revolute, origin: Pose::identity() };
    KinematicChain::new(vec!["base".into(), "mast".into()], vec![joint], mounts, Pose::identity()).unwrap()
}

#[test]
fn noiseless_plane_reconstructs_flat() {
    // sensors looking up (+Z) at a ceiling 2 m above, spinning about Z
    let sensors: Vec<(u32, Vec3)> = (0..5).map(|k| (k, Vec3::new(0.1 * k as f64 - 0.2, 0.05, 0.0))).collect();
    let chain = mast(&sensors);
    let trajectory = JointTrajectory::new(vec![(0.0, vec![0.0]), (5.0, vec![1.3])], 1).unwrap();
    let mut scene = Scene::default();
    scene.add_static(fixtures::wall(2.0, 40.0), false);
    let sim = Simulation {
        chain: chain.clone(),
        trajectory: trajectory.clone(),
        scene,
        electrodes: vec![],
        tof_sensors: sensors.iter().map(|s| s.0).collect(),
        tof: TofSpec { range_noise_sigma: 0.0, ..TofSpec::default() },
        measurement: MeasurementSpec::default(),
        tof_enabled: true,
        presses: vec![],
        duration: 1.0,
        seed: 1,
    };
    let (_, frames) = split_records(&sim.run().unwrap());
    let cloud = reconstruct(&frames, &chain, &trajectory, &sim.tof).unwrap();
    assert_eq!(cloud.len(), frames.iter().map(|f| f.valid_count()).sum::<usize>());
    let fit = plane_fit(&cloud.positions()).unwrap();
    assert!(fit.rms < 1e-6, "{}", fit.rms);
    assert!(cloud.points.iter().all(|p| (p.position.z - 2.0).abs() < 1e-9));
    // provenance: each point sits at its logged range from the sensor
    let mut k = 0;
    let mut ordered = frames.clone();
    ordered.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then(a.sensor_id.cmp(&b.sensor_id)));
    for f in &ordered {
        let q = trajectory.at(f.timestamp).unwrap();
        let origin = sensor_world_pose(&chain, &q, chain.mount_for_site(f.sensor_id).unwrap()).unwrap().translation.vector;
        for d in f.distances.iter().flatten() {
            assert!(((cloud.points[k].position.coords - origin).norm() - d).abs() < 1e-9);
            k += 1;
        }
    }
}

/// Distance from `p` to the surface of an axis-aligned box.
fn box_surface_distance(p: &Point3, center: &Point3, half: &Vec3) -> f64 {
    let d = (p - center).abs() - half;
    let outside = d.map(|x| x.max(0.0)).norm();
    let inside = d.max().min(0.0);
    (outside + inside).abs()
}

#[test]
fn orbiting_sensor_sees_more_of_a_box() {
    // sensor on a 1 m arm orbiting a box at the joint axis, looking inward
    let look_in = axis_angle(Vec3::y(), -FRAC_PI_2);
    let mount = SensorMount { link: 1, local: pose(Vec3::new(1.0, 0.0, 0.0), look_in), site_id: 0 };
    let joint = Joint { axis: Vec3::z(), kind: JointKind::Revolute, origin: Pose::identity() };
    let chain = KinematicChain::new(vec!["base".into(), "arm".into()], vec![joint], vec![mount], Pose::identity()).unwrap();
    let trajectory = JointTrajectory::new(vec![(0.0, vec![0.0]), (5.0, vec![FRAC_PI_2])], 1).unwrap();
    let half = Vec3::new(0.15, 0.15, 0.15);
    let mut scene = Scene::default();
    scene.add_static(primitives::box_mesh(half, Material::Structural), false);
    let spec = TofSpec { range_noise_sigma: 0.0, ..TofSpec::default() };
    let sim = Simulation {
        chain: chain.clone(),
        trajectory: trajectory.clone(),
        scene,
        electrodes: vec![],
        tof_sensors: vec![0],
        tof: spec,
        measurement: MeasurementSpec::default(),
        tof_enabled: true,
        presses: vec![],
        duration: 5.0,
        seed: 0,
    };
    let (_, frames) = split_records(&sim.run().unwrap());
    assert_eq!(frames.len(), 60);
    let cloud = reconstruct(&frames, &chain, &trajectory, &spec).unwrap();
    assert!(!cloud.is_empty());
    for p in &cloud.points {
        assert!(box_surface_distance(&p.position, &Point3::origin(), &half) < 0.01);
    }
    let on_face = |p: &Point3, axis: usize| (p[axis] - 0.15).abs() < 1e-6;
    let first = reconstruct(&frames[..1], &chain, &trajectory, &spec).unwrap();
    assert!(first.points.iter().all(|p| !on_face(&p.position, 1)));
    assert!(cloud.points.iter().any(|p| on_face(&p.position, 0)));
    assert!(cloud.points.iter().any(|p| on_face(&p.position, 1)));
}
