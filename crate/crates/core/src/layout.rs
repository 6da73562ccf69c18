//! Sensor-site distribution on the dermis and instancing of the hybrid
//! nodules: a conductive ring hollowed around each ToF mount.

use alloc::vec::Vec;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedIndex;

use crate::geometry::{
    extrude_covering, generate_supports, offset_surface, point_segment_distance, primitives, validate_mesh, Finding,
    Footprint, GeometryError, Material, OffsetSpec, Support, SupportParams, TriMesh,
};
use crate::math::{frame_from_normal, is_unit, pose, Point3, Pose, Vec3};
use crate::rng::{stream_rng, Stream};
use crate::spatial::PointGrid;

/// Default dart-throwing budget per requested site.
pub const ATTEMPTS_PER_SITE: usize = 10_000;

/// Default radial clearance between a ring's hole and its mount (m).
pub const DEFAULT_COUPLING_GAP: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("placed only {placed} of {requested} sites before the attempt budget ran out")]
    Saturation { placed: usize, requested: usize },
    #[error("ring hole leaves {available} m around the mount, need {required} m")]
    CouplingGap { available: f64, required: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceSite {
    pub site_id: u32,
    pub face_index: usize,
    pub barycentric: [f64; 3],
    pub position: Point3,
    pub normal: Vec3,
}

impl SurfaceSite {
    /// Frame with +Z along the site normal, origin at the site.
    pub fn frame(&self) -> Pose {
        pose(self.position.coords, frame_from_normal(&self.normal))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RingSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub height: f64,
    pub segments: usize,
}

impl RingSpec {
    pub fn new(inner_radius: f64, outer_radius: f64, height: f64, segments: usize) -> Result<Self, LayoutError> {
        let s = Self { inner_radius, outer_radius, height, segments };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<(), LayoutError> {
        if !(self.inner_radius > 0.0 && self.inner_radius < self.outer_radius && self.outer_radius.is_finite()) {
            return Err(LayoutError::InvalidParameter("ring radii must satisfy 0 < inner < outer"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(LayoutError::InvalidParameter("ring height must be > 0"));
        }
        if self.segments < 8 {
            return Err(LayoutError::InvalidParameter("ring needs at least 8 segments"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MountSpec {
    pub footprint_radius: f64,
    pub height: f64,
}

impl MountSpec {
    pub fn new(footprint_radius: f64, height: f64) -> Result<Self, LayoutError> {
        let s = Self { footprint_radius, height };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<(), LayoutError> {
        if !(self.footprint_radius > 0.0 && self.height > 0.0 && self.footprint_radius.is_finite() && self.height.is_finite()) {
            return Err(LayoutError::InvalidParameter("mount radius and height must be > 0"));
        }
        Ok(())
    }
}

/// Facets used for mount cylinders.
const MOUNT_SEGMENTS: usize = 32;

/// Area-uniform dart throwing with a minimum Euclidean spacing.
pub fn sample_sites(dermis: &TriMesh, count: usize, min_dist: f64, seed: u64) -> Result<Vec<SurfaceSite>, LayoutError> {
    sample_sites_with_budget(dermis, count, min_dist, seed, ATTEMPTS_PER_SITE * count)
}

pub fn sample_sites_with_budget(
    dermis: &TriMesh,
    count: usize,
    min_dist: f64,
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<SurfaceSite>, LayoutError> {
    if count == 0 {
        return Err(LayoutError::InvalidParameter("site count must be >= 1"));
    }
    if !(min_dist >= 0.0 && min_dist.is_finite()) {
        return Err(LayoutError::InvalidParameter("min_dist must be >= 0"));
    }
    let report = validate_mesh(dermis);
    if !report.is_valid() {
        return Err(GeometryError::InvalidMesh(report).into());
    }
    let areas: Vec<f64> = (0..dermis.face_count()).map(|f| dermis.face_area(f)).collect();
    let faces = WeightedIndex::new(&areas).map_err(|_| LayoutError::InvalidParameter("dermis has no area"))?;

    let mut rng = stream_rng(seed, Stream::Sites, 0);
    let mut grid = PointGrid::new(min_dist);
    let mut sites = Vec::with_capacity(count);
    let mut attempts = 0;
    while sites.len() < count {
        if attempts >= max_attempts {
            return Err(LayoutError::Saturation { placed: sites.len(), requested: count });
        }
        attempts += 1;
        let (face_index, barycentric) = sample_face_point(&faces, &mut rng);
        let position = dermis.point_at(face_index, barycentric);
        if grid.has_neighbor(&position) {
            continue;
        }
        grid.insert(position);
        let normal = dermis.face_normal(face_index).expect("weighted faces are non-degenerate");
        sites.push(SurfaceSite { site_id: sites.len() as u32, face_index, barycentric, position, normal });
    }
    Ok(sites)
}

/// Face drawn proportional to area, then a uniform point inside it.
pub fn sample_face_point(faces: &WeightedIndex<f64>, rng: &mut impl Rng) -> (usize, [f64; 3]) {
    let f = faces.sample(rng);
    let r1: f64 = rng.random();
    let r2: f64 = rng.random();
    let s = libm::sqrt(r1);
    (f, [1.0 - s, s * (1.0 - r2), s * r2])
}

/// Flat conductive annulus in the site's tangent plane.
pub fn instance_ring(site: &SurfaceSite, spec: &RingSpec) -> Result<TriMesh, LayoutError> {
    spec.check()?;
    if !is_unit(&site.normal) {
        return Err(LayoutError::InvalidParameter("site normal must be unit length"));
    }
    let local = primitives::annulus_prism(spec.inner_radius, spec.outer_radius, spec.height, spec.segments, Material::Conductive);
    Ok(local.transformed(&site.frame()))
}

/// ToF mount body plus the footprint it reserves on the surface.
pub fn instance_mount(site: &SurfaceSite, spec: &MountSpec) -> Result<(TriMesh, Footprint), LayoutError> {
    spec.check()?;
    let footprint = Footprint::new(site.position, site.normal, spec.footprint_radius)?;
    let local = primitives::cylinder(spec.footprint_radius, spec.height, MOUNT_SEGMENTS, Material::Structural);
    Ok((local.transformed(&site.frame()), footprint))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComposeParams {
    pub supports: SupportParams,
    pub coupling_gap: f64,
    pub seed: u64,
}

impl Default for ComposeParams {
    fn default() -> Self {
        Self { supports: SupportParams::default(), coupling_gap: DEFAULT_COUPLING_GAP, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ring {
    pub site_id: u32,
    pub mesh: TriMesh,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mount {
    pub site_id: u32,
    pub mesh: TriMesh,
    pub footprint: Footprint,
}

/// All printed bodies of one skin unit, kept as separate tagged meshes.
#[derive(Clone, Debug, PartialEq)]
pub struct SkinAssembly {
    pub dermis: TriMesh,
    pub covering: TriMesh,
    pub rings: Vec<Ring>,
    pub mounts: Vec<Mount>,
    pub supports: Vec<Support>,
    pub sites: Vec<SurfaceSite>,
    pub ring_spec: RingSpec,
    pub mount_spec: MountSpec,
    pub coupling_gap: f64,
}

/// Surface disks supports must avoid: one per site, sized to the ring rim so
/// both the ring and the mount inside it are protected.
pub fn nodule_keepouts(sites: &[SurfaceSite], ring: &RingSpec, mount: &MountSpec) -> Vec<Footprint> {
    let r = ring.outer_radius.max(mount.footprint_radius);
    sites.iter().map(|s| Footprint { center: s.position, normal: s.normal, radius: r }).collect()
}

pub fn compose_skin(
    dermis: &TriMesh,
    covering: &TriMesh,
    sites: &[SurfaceSite],
    ring_spec: &RingSpec,
    mount_spec: &MountSpec,
    params: &ComposeParams,
) -> Result<SkinAssembly, LayoutError> {
    ring_spec.check()?;
    mount_spec.check()?;
    let available = ring_spec.inner_radius - mount_spec.footprint_radius;
    if !(params.coupling_gap >= 0.0) || available < params.coupling_gap - 1e-12 {
        return Err(LayoutError::CouplingGap { available, required: params.coupling_gap });
    }
    let mut rings = Vec::with_capacity(sites.len());
    let mut mounts = Vec::with_capacity(sites.len());
    for site in sites {
        rings.push(Ring { site_id: site.site_id, mesh: instance_ring(site, ring_spec)? });
        let (mesh, footprint) = instance_mount(site, mount_spec)?;
        mounts.push(Mount { site_id: site.site_id, mesh, footprint });
    }
    let keepouts = nodule_keepouts(sites, ring_spec, mount_spec);
    let supports = generate_supports(dermis, covering, &keepouts, &params.supports, params.seed)?;
    Ok(SkinAssembly {
        dermis: dermis.clone(),
        covering: covering.clone(),
        rings,
        mounts,
        supports,
        sites: sites.to_vec(),
        ring_spec: *ring_spec,
        mount_spec: *mount_spec,
        coupling_gap: params.coupling_gap,
    })
}

/// End-to-end generation parameters: robot shell to finished skin.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkinParams {
    pub dermis_offset: f64,
    pub covering_offset: f64,
    pub site_count: usize,
    pub min_site_distance: f64,
    pub ring: RingSpec,
    pub mount: MountSpec,
    pub supports: SupportParams,
    pub coupling_gap: f64,
}

impl Default for SkinParams {
    fn default() -> Self {
        Self {
            dermis_offset: 0.003,
            covering_offset: 0.005,
            site_count: 4,
            min_site_distance: 0.03,
            ring: RingSpec { inner_radius: 0.008, outer_radius: 0.014, height: 0.0015, segments: 32 },
            mount: MountSpec { footprint_radius: 0.006, height: 0.004 },
            supports: SupportParams::default(),
            coupling_gap: DEFAULT_COUPLING_GAP,
        }
    }
}

/// Skin plus the non-fatal findings raised while building it.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedSkin {
    pub assembly: SkinAssembly,
    pub warnings: Vec<Finding>,
}

/// Offsets the robot shell into a dermis, extrudes the covering, scatters
/// sites and composes the nodules and supports.
pub fn generate_skin(shell: &TriMesh, params: &SkinParams, seed: u64, strict: bool) -> Result<GeneratedSkin, LayoutError> {
    let dermis = offset_surface(shell, &OffsetSpec::outward(params.dermis_offset)?, strict)?;
    let covering = extrude_covering(&dermis.mesh, &OffsetSpec::outward(params.covering_offset)?, strict)?;
    let sites = sample_sites(&dermis.mesh, params.site_count, params.min_site_distance, seed)?;
    let compose = ComposeParams { supports: params.supports, coupling_gap: params.coupling_gap, seed };
    let assembly = compose_skin(&dermis.mesh, &covering.mesh, &sites, &params.ring, &params.mount, &compose)?;
    let mut warnings = dermis.warnings;
    warnings.extend(covering.warnings);
    Ok(GeneratedSkin { assembly, warnings })
}

#[derive(Clone, Debug, PartialEq)]
pub enum AssemblyViolation {
    UnknownSite { site_id: u32 },
    CouplingGap { site_id: u32 },
    RingOverlapsMount { site_id: u32 },
    SupportInKeepout { support: usize, site_id: u32 },
}

impl SkinAssembly {
    /// Re-checks the assembly invariants from the emitted geometry.
    pub fn violations(&self) -> Vec<AssemblyViolation> {
        let mut out = Vec::new();
        let site = |id: u32| self.sites.iter().find(|s| s.site_id == id);
        for ring in &self.rings {
            let Some(s) = site(ring.site_id) else {
                out.push(AssemblyViolation::UnknownSite { site_id: ring.site_id });
                continue;
            };
            // every ring vertex must sit radially outside the mount disk + gap
            let min_radial = ring
                .mesh
                .vertices
                .iter()
                .map(|v| {
                    let d = v - s.position;
                    (d - s.normal * d.dot(&s.normal)).norm()
                })
                .fold(f64::INFINITY, f64::min);
            if min_radial < self.mount_spec.footprint_radius - 1e-9 {
                out.push(AssemblyViolation::RingOverlapsMount { site_id: s.site_id });
            }
            if self.ring_spec.inner_radius - self.mount_spec.footprint_radius < self.coupling_gap - 1e-12 {
                out.push(AssemblyViolation::CouplingGap { site_id: s.site_id });
            }
        }
        for m in &self.mounts {
            if site(m.site_id).is_none() {
                out.push(AssemblyViolation::UnknownSite { site_id: m.site_id });
            }
        }
        let keepouts = nodule_keepouts(&self.sites, &self.ring_spec, &self.mount_spec);
        for (i, sup) in self.supports.iter().enumerate() {
            for (k, s) in keepouts.iter().zip(&self.sites) {
                if point_segment_distance(&k.center, &sup.base, &sup.tip) < k.radius + sup.radius {
                    out.push(AssemblyViolation::SupportInKeepout { support: i, site_id: s.site_id });
                }
            }
        }
        out
    }

    /// One merged mesh per print material.
    pub fn material_meshes(&self) -> [(Material, TriMesh); 3] {
        let mut structural = self.dermis.clone();
        self.mounts.iter().for_each(|m| structural.append(&m.mesh));
        let conductive = TriMesh::merge(self.rings.iter().map(|r| &r.mesh));
        let mut flexible = self.covering.clone();
        self.supports.iter().for_each(|s| flexible.append(&s.mesh));
        [
            (Material::Structural, structural),
            (Material::Conductive, conductive),
            (Material::Flexible, flexible),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{extrude_covering, OffsetSpec};

    fn patch() -> TriMesh {
        primitives::plane_patch(0.1, 0.1, 4, 4, Material::Structural)
    }

    fn site_at(p: Point3) -> SurfaceSite {
        SurfaceSite { site_id: 0, face_index: 0, barycentric: [1.0, 0.0, 0.0], position: p, normal: Vec3::z() }
    }

    #[test]
    fn single_site_always_fits() {
        let s = sample_sites(&patch(), 1, 10.0, 3).unwrap();
        assert_eq!(s.len(), 1);
        let b = s[0].barycentric;
        assert!(b.iter().all(|w| *w >= 0.0));
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let p = patch().point_at(s[0].face_index, b);
        assert!((p - s[0].position).norm() < 1e-15);
    }

    #[test]
    fn impossible_packing_saturates() {
        let tiny = primitives::plane_patch(0.01, 0.01, 1, 1, Material::Structural);
        match sample_sites(&tiny, 1000, 0.01, 1) {
            Err(LayoutError::Saturation { placed, requested: 1000 }) => assert!(placed < 10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ring_vertices_between_radii() {
        let site = SurfaceSite {
            normal: Vec3::new(1.0, 2.0, 2.0).normalize(),
            ..site_at(Point3::new(0.1, 0.2, 0.3))
        };
        let spec = RingSpec::new(0.008, 0.014, 0.002, 64).unwrap();
        let ring = instance_ring(&site, &spec).unwrap();
        assert!(ring.face_material.iter().all(|m| *m == Material::Conductive));
        for v in &ring.vertices {
            let d = v - site.position;
            let radial = (d - site.normal * d.dot(&site.normal)).norm();
            assert!((0.008 - 1e-12..=0.014 + 1e-12).contains(&radial));
        }
    }

    #[test]
    fn ring_spec_rejects_bad_radii() {
        assert!(RingSpec::new(0.014, 0.014, 0.002, 16).is_err());
        assert!(RingSpec::new(0.02, 0.014, 0.002, 16).is_err());
        assert!(RingSpec::new(0.008, 0.014, 0.002, 7).is_err());
        let spec = RingSpec::new(0.008, 0.014, 0.002, 8).unwrap();
        assert_eq!(instance_ring(&site_at(Point3::origin()), &spec).unwrap().vertex_count(), 32);
    }

    #[test]
    fn mount_footprint_passes_through() {
        let (mesh, fp) = instance_mount(&site_at(Point3::origin()), &MountSpec::new(0.007, 0.004).unwrap()).unwrap();
        assert_eq!(fp.center, Point3::origin());
        assert_eq!(fp.normal, Vec3::z());
        assert_eq!(fp.radius, 0.007);
        assert!(mesh.face_material.iter().all(|m| *m == Material::Structural));
        let (_, other) = instance_mount(&site_at(Point3::new(0.05, 0.0, 0.0)), &MountSpec::new(0.007, 0.004).unwrap()).unwrap();
        assert!((other.center - fp.center).norm() > fp.radius + other.radius);
    }

    #[test]
    fn compose_three_sites() {
        let d = patch();
        let c = extrude_covering(&d, &OffsetSpec::outward(0.005).unwrap(), true).unwrap().mesh;
        let mut sites = Vec::new();
        for (i, x) in [-0.03, 0.0, 0.03].into_iter().enumerate() {
            sites.push(SurfaceSite { site_id: i as u32, ..site_at(Point3::new(x, 0.02, 0.0)) });
        }
        let ring = RingSpec::new(0.008, 0.012, 0.002, 32).unwrap();
        let mount = MountSpec::new(0.007, 0.004).unwrap();
        let a = compose_skin(&d, &c, &sites, &ring, &mount, &ComposeParams::default()).unwrap();
        assert_eq!((a.rings.len(), a.mounts.len()), (3, 3));
        assert!(!a.supports.is_empty());
        assert!(a.violations().is_empty(), "{:?}", a.violations());
    }

    #[test]
    fn coupling_gap_enforced() {
        let d = patch();
        let c = extrude_covering(&d, &OffsetSpec::outward(0.005).unwrap(), true).unwrap().mesh;
        let ring = RingSpec::new(0.007, 0.012, 0.002, 32).unwrap();
        let mount = MountSpec::new(0.007, 0.004).unwrap();
        assert!(matches!(
            compose_skin(&d, &c, &[site_at(Point3::origin())], &ring, &mount, &ComposeParams::default()),
            Err(LayoutError::CouplingGap { .. })
        ));
    }

    #[test]
    fn no_sites_still_yields_layers_and_supports() {
        let d = patch();
        let c = extrude_covering(&d, &OffsetSpec::outward(0.005).unwrap(), true).unwrap().mesh;
        let ring = RingSpec::new(0.008, 0.012, 0.002, 32).unwrap();
        let mount = MountSpec::new(0.007, 0.004).unwrap();
        let a = compose_skin(&d, &c, &[], &ring, &mount, &ComposeParams::default()).unwrap();
        assert!(a.rings.is_empty() && a.mounts.is_empty());
        assert!(!a.supports.is_empty());
        let [(_, s), (_, cond), (_, f)] = a.material_meshes();
        assert_eq!(s.face_count(), d.face_count());
        assert!(cond.is_empty());
        assert!(f.face_count() > c.face_count());
    }
}
