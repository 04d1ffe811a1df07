//! Property suites over the public API: randomized inputs, invariants that
//! must hold for every one of them.

use fptarget_core::interop::{baseline_match, tar_far};
use fptarget_core::mesh::{cuboid, open_tube};
use fptarget_core::metrology::expected_spacing_px;
use fptarget_core::pattern::{sine_grating, synth_impression, GratingKind, GrayscaleImage};
use fptarget_core::projection::{make_smooth_finger, map_image_to_surface, Wrap};
use fptarget_core::{Affine, Plane, Vec3};
use proptest::prelude::*;

fn plane_strategy() -> impl Strategy<Value = Plane> {
    (
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("usable normal", |(x, y, z)| (x * x + y * y + z * z).sqrt() > 0.1),
        -20.0f64..20.0,
    )
        .prop_map(|((x, y, z), d)| Plane::new(Vec3::new(x, y, z), d).unwrap())
}

proptest! {
    #[test]
    fn splitting_conserves_surface_area(
        dx in 1.0f64..40.0,
        dy in 1.0f64..40.0,
        dz in 1.0f64..40.0,
        plane in plane_strategy(),
    ) {
        let mesh = cuboid(Vec3::ZERO, Vec3::new(dx, dy, dz));
        let total = mesh.surface_area();
        let (above, below) = mesh.split_by_plane(&plane).unwrap();
        let split_total = above.surface_area() + below.surface_area();
        prop_assert!(
            (split_total - total).abs() <= 1e-6 * total,
            "{} vs {}",
            split_total,
            total
        );
    }

    #[test]
    fn splitting_a_tube_conserves_area_too(
        radius in 1.0f64..15.0,
        height in 1.0f64..30.0,
        segments in 3u32..48,
        plane in plane_strategy(),
    ) {
        let mesh = open_tube(radius, 0.0, height, segments);
        let total = mesh.surface_area();
        let (above, below) = mesh.split_by_plane(&plane).unwrap();
        let split_total = above.surface_area() + below.surface_area();
        prop_assert!((split_total - total).abs() <= 1e-6 * total);
    }

    #[test]
    fn uniform_scaling_cubes_the_volume(
        dx in 1.0f64..20.0,
        dy in 1.0f64..20.0,
        dz in 1.0f64..20.0,
        s in 0.1f64..4.0,
    ) {
        let mesh = cuboid(Vec3::ZERO, Vec3::new(dx, dy, dz));
        let scaled = mesh.transformed(&Affine::uniform_scale(s)).unwrap();
        let expected = mesh.signed_volume() * s * s * s;
        prop_assert!(
            (scaled.signed_volume() - expected).abs() <= 1e-9 * expected.abs(),
            "{} vs {}",
            scaled.signed_volume(),
            expected
        );
    }

    #[test]
    fn inversion_is_an_involution_that_negates_normals(
        dx in 1.0f64..20.0,
        dy in 1.0f64..20.0,
        dz in 1.0f64..20.0,
    ) {
        let mesh = cuboid(Vec3::ZERO, Vec3::new(dx, dy, dz));
        let twice = mesh.inverted().inverted();
        prop_assert_eq!(&mesh.faces, &twice.faces);
        let once = mesh.inverted();
        for f in 0..mesh.face_count() {
            let n = mesh.face_normal(f).unwrap();
            let m = once.face_normal(f).unwrap();
            prop_assert!((n + m).length() < 1e-12);
        }
    }

    #[test]
    fn stitching_rings_always_adds_n_plus_m_faces(
        lower in 3u32..24,
        upper in 3u32..24,
        gap in 0.1f64..5.0,
    ) {
        let mut mesh = open_tube(4.0, 0.0, 2.0, lower);
        mesh.append(&open_tube(4.0, 2.0 + gap, 4.0 + gap, upper));
        let loops = mesh.boundary_loops().unwrap();
        let find = |z: f64| {
            loops
                .iter()
                .find(|l| (mesh.vertices[l.vertices[0] as usize].z - z).abs() < 1e-9)
                .cloned()
                .unwrap()
        };
        let (a, b) = (find(2.0), find(2.0 + gap));
        let added = mesh.stitch_loops(&a, &b).unwrap();
        prop_assert_eq!(added, (lower + upper) as usize);
        prop_assert_eq!(mesh.boundary_loops().unwrap().len(), 2);
    }

    #[test]
    fn impressions_are_seed_deterministic(
        seed in any::<u64>(),
        scale in 0.5f64..2.0,
        noise in 0.0f64..20.0,
    ) {
        let base = sine_grating(GratingKind::Vertical, 8.0, 48, 48, 500.0).unwrap();
        let one = synth_impression(&base, scale, noise, seed).unwrap();
        let two = synth_impression(&base, scale, noise, seed).unwrap();
        prop_assert_eq!(one.pixels(), two.pixels());
    }

    #[test]
    fn unscaled_noiseless_impressions_are_the_identity(
        pixels in proptest::collection::vec(any::<u8>(), 16 * 16),
        seed in any::<u64>(),
    ) {
        let img = GrayscaleImage::from_pixels(16, 16, 500.0, pixels).unwrap();
        let copy = synth_impression(&img, 1.0, 0.0, seed).unwrap();
        prop_assert_eq!(img.pixels(), copy.pixels());
    }

    #[test]
    fn displacement_never_exceeds_ridge_height(
        ridge in 0.05f64..1.0,
        period in 6.0f64..20.0,
    ) {
        let surface = make_smooth_finger(16.0, 22.0, 48, 24).unwrap();
        let img = sine_grating(GratingKind::Vertical, period, 2048, 1600, 500.0).unwrap();
        let displaced =
            map_image_to_surface(&img, &surface, 16.79, ridge, Wrap::Frontal).unwrap();
        for (v, s) in displaced.vertices.iter().zip(&surface.mesh.vertices) {
            let d = v.distance(*s);
            prop_assert!(d <= ridge + 1e-9, "moved {} with ridge height {}", d, ridge);
        }
    }

    #[test]
    fn tar_and_far_are_monotone_in_the_threshold(
        genuine in proptest::collection::vec(0.0f64..1000.0, 1..40),
        imposter in proptest::collection::vec(0.0f64..1000.0, 1..40),
        lo in 0.0f64..500.0,
        hi in 500.0f64..1000.0,
    ) {
        let (tar_lo, far_lo) = tar_far(&genuine, &imposter, lo).unwrap();
        let (tar_hi, far_hi) = tar_far(&genuine, &imposter, hi).unwrap();
        prop_assert!(tar_hi <= tar_lo);
        prop_assert!(far_hi <= far_lo);
        for (t, f) in [(tar_lo, far_lo), (tar_hi, far_hi)] {
            prop_assert!((0.0..=1.0).contains(&t));
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn baseline_scores_stay_on_scale_and_symmetric(
        pa in proptest::collection::vec(any::<u8>(), 12 * 12),
        pb in proptest::collection::vec(any::<u8>(), 12 * 12),
    ) {
        let a = GrayscaleImage::from_pixels(12, 12, 500.0, pa).unwrap();
        let b = GrayscaleImage::from_pixels(12, 12, 500.0, pb).unwrap();
        let ab = baseline_match(&a, &b).unwrap();
        let ba = baseline_match(&b, &a).unwrap();
        prop_assert!((0.0..=1000.0).contains(&ab));
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn expected_spacing_is_linear_in_the_period(
        period in 1.0f64..40.0,
        shrink in 0.0f64..0.2,
    ) {
        let one = expected_spacing_px(period, shrink);
        let two = expected_spacing_px(2.0 * period, shrink);
        prop_assert!((two - 2.0 * one).abs() < 1e-12);
        prop_assert!(one <= period);
    }
}
