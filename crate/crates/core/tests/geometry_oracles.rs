use proptest::prelude::*;
use rand_distr::weighted::WeightedIndex;
use skinsim_core::fixtures;
use skinsim_core::geometry::{
    extrude_covering, generate_supports, offset_surface, point_segment_distance, primitives, Footprint, Material,
    OffsetSpec, SupportParams, TriMesh,
};
use skinsim_core::layout::{sample_face_point, sample_sites};
use skinsim_core::math::{Point3, Vec3};
use skinsim_core::rng::{stream_rng, Stream};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn offset(m: &TriMesh, d: f64) -> TriMesh {
    offset_surface(m, &OffsetSpec::outward(d).unwrap(), true).unwrap().mesh
}

#[test]
fn sphere_offset_lands_on_larger_sphere() {
    let s = primitives::sphere(0.05, 1e-3, Material::Structural);
    let o = offset(&s, 0.005);
    for v in &o.vertices {
        assert!((v.coords.norm() - 0.055).abs() <= 1e-3, "{}", v.coords.norm());
    }
    assert!(o.face_material.iter().all(|&m| m == Material::Structural));
}

#[test]
fn cylinder_covering_radius() {
    let shell = primitives::cylinder_shell(0.04, 0.2, 64, 4, Material::Structural);
    let cov = extrude_covering(&shell, &OffsetSpec::outward(0.006).unwrap(), true).unwrap();
    assert!(cov.warnings.is_empty());
    for v in &cov.mesh.vertices {
        let r = (v.x * v.x + v.y * v.y).sqrt();
        assert!((r - 0.046).abs() <= 1e-3);
    }
    assert_eq!(cov.mesh.faces, shell.faces);
    assert!(cov.mesh.face_material.iter().all(|&m| m == Material::Flexible));
}

#[test]
fn fr3_scale_forty_sites_keep_spacing() {
    let dermis = offset(&fixtures::arm_links(), 0.003);
    let sites = sample_sites(&dermis, 40, 0.03, 2024).unwrap();
    assert_eq!(sites.len(), 40);
    for (i, a) in sites.iter().enumerate() {
        for b in &sites[i + 1..] {
            assert!((a.position - b.position).norm() >= 0.03);
        }
        let [p, q, r] = dermis.triangle(a.face_index);
        let w = a.barycentric;
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9 && w.iter().all(|&x| x >= 0.0));
        let expect = Point3::from(p.coords * w[0] + q.coords * w[1] + r.coords * w[2]);
        assert!((expect - a.position).norm() < 1e-12);
    }
}

#[test]
fn face_choice_is_area_proportional() {
    // two faces with area ratio 3:1
    let m = TriMesh::new(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(3.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(10.0, 0.0, 0.0),
            Point3::new(11.0, 0.0, 0.0),
            Point3::new(10.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2], [3, 4, 5]],
        Material::Structural,
    );
    let areas: Vec<f64> = (0..2).map(|f| m.face_area(f)).collect();
    let w = WeightedIndex::new(&areas).unwrap();
    let mut rng = stream_rng(5, Stream::Sites, 0);
    let n = 100_000;
    let mut counts = [0usize; 2];
    for _ in 0..n {
        let (f, bary) = sample_face_point(&w, &mut rng);
        assert!(bary.iter().all(|&b| b >= 0.0));
        counts[f] += 1;
    }
    let expected = [0.75 * n as f64, 0.25 * n as f64];
    let chi2: f64 = counts.iter().zip(expected).map(|(&o, e)| (o as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(1.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 = {chi2}, p = {p}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn offsets_compose_on_stable_regions(d1 in 0.0f64..0.01, d2 in 0.0f64..0.01) {
        let plane = primitives::plane_patch(0.2, 0.1, 5, 3, Material::Structural);
        let shell = primitives::cylinder_shell(0.04, 0.1, 24, 2, Material::Structural);
        for m in [plane, shell] {
            let twice = offset(&offset(&m, d1), d2);
            let once = offset(&m, d1 + d2);
            for (a, b) in twice.vertices.iter().zip(&once.vertices) {
                prop_assert!((a - b).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn supports_respect_random_keepouts(
        seed in 0u64..1000,
        disks in prop::collection::vec((-0.05f64..0.05, -0.05f64..0.05, 0.002f64..0.02), 0..6),
    ) {
        let dermis = primitives::plane_patch(0.1, 0.1, 4, 4, Material::Structural);
        let covering = offset(&dermis, 0.004);
        let keepouts: Vec<Footprint> = disks
            .iter()
            .map(|&(x, y, r)| Footprint::new(Point3::new(x, y, 0.0), Vec3::z(), r).unwrap())
            .collect();
        let params = SupportParams::default();
        if let Ok(supports) = generate_supports(&dermis, &covering, &keepouts, &params, seed) {
            for s in &supports {
                for k in &keepouts {
                    prop_assert!(point_segment_distance(&k.center, &s.base, &s.tip) >= k.radius + s.radius);
                }
            }
            let again = generate_supports(&dermis, &covering, &keepouts, &params, seed).unwrap();
            prop_assert_eq!(supports, again);
        }
    }
}
