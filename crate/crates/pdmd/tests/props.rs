//! Property tests for the storage round trip and the core decompositions.

use ndarray::Array2;
use pdmd::pod::{frobenius_norm, PodBasis};
use pdmd::store::{
    read_archive, write_archive, ParameterPoint, ParametricSnapshotSet, SnapshotMatrix, TimeAxis,
};
use pdmd::C64;
use proptest::prelude::*;

/// Finite f64 including signed zeros, subnormals and extreme magnitudes.
fn any_payload_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(1e-300),
        Just(-1e300),
        -1e6..1e6f64,
    ]
}

fn small_set() -> impl Strategy<Value = ParametricSnapshotSet> {
    (1usize..4, 1usize..5, 2usize..6)
        .prop_flat_map(|(p, m, n)| {
            let values = proptest::collection::vec(
                (any_payload_value(), any_payload_value()),
                p * m * n,
            );
            (Just((p, m, n)), values, -3i64..3, 0.01f64..10.0)
        })
        .prop_map(|((p, m, n), values, origin, dt)| {
            let members = (0..p)
                .map(|i| {
                    let data: Vec<C64> = values[i * m * n..(i + 1) * m * n]
                        .iter()
                        .map(|&(re, im)| C64::new(re, im))
                        .collect();
                    SnapshotMatrix::new(
                        // parameter points distinct by construction
                        ParameterPoint::new(vec![i as f64, 0.5]).unwrap(),
                        Array2::from_shape_vec((m, n), data).unwrap(),
                    )
                })
                .collect();
            ParametricSnapshotSet::new(
                TimeAxis::new(-1.5, dt, n, origin).unwrap(),
                "prop",
                members,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// read(write(set)) is the identity, bit-exact on every payload value.
    #[test]
    fn archive_round_trip_is_bit_exact(set in small_set()) {
        let dir = tempfile::tempdir().unwrap();
        write_archive(&set, dir.path()).unwrap();
        let back = read_archive(dir.path()).unwrap();
        prop_assert_eq!(back.time_axis(), set.time_axis());
        prop_assert_eq!(back.field_name(), set.field_name());
        prop_assert_eq!(back.member_count(), set.member_count());
        for (a, b) in back.members().iter().zip(set.members()) {
            prop_assert_eq!(a.parameter(), b.parameter());
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    /// Columns map to the same physical time across members after reload.
    #[test]
    fn column_time_correspondence_survives_the_round_trip(set in small_set()) {
        let dir = tempfile::tempdir().unwrap();
        write_archive(&set, dir.path()).unwrap();
        let back = read_archive(dir.path()).unwrap();
        for label in back.time_axis().labels() {
            prop_assert_eq!(
                back.time_axis().time_of(label).to_bits(),
                set.time_axis().time_of(label).to_bits()
            );
            prop_assert_eq!(back.time_axis().column_of(label), set.time_axis().column_of(label));
        }
    }

    /// Orthonormality and projector idempotence for every fitted basis.
    #[test]
    fn pod_projection_is_idempotent(
        rows in 2usize..12,
        cols in 2usize..8,
        seed in 0u64..1000,
    ) {
        let rank = rows.min(cols).min(3);
        let a = Array2::from_shape_fn((rows, cols), |(i, j)| {
            let t = (seed as f64).mul_add(0.37, (i * cols + j) as f64);
            C64::new((t * 0.7).sin(), (t * 1.3).cos())
        });
        let basis = PodBasis::fit(a.view(), rank).unwrap();
        // orthonormality
        let gram = basis.project(basis.modes()).unwrap();
        for i in 0..rank {
            for j in 0..rank {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[[i, j]] - C64::new(expected, 0.0)).norm() < 1e-10);
            }
        }
        // project(lift(r)) = r
        let r = Array2::from_shape_fn((rank, 2), |(i, j)| C64::new(i as f64 - j as f64, 0.25));
        let back = basis.project(basis.lift(r.view()).unwrap().view()).unwrap();
        prop_assert!(frobenius_norm((&back - &r).view()) < 1e-10 * frobenius_norm(r.view()).max(1e-10));
    }

    /// Real input sequences keep conjugate-symmetric spectra and real
    /// forecasts.
    #[test]
    fn dmd_conjugate_symmetry_on_real_data(seed in 0u64..200) {
        use pdmd::dmd::{DmdConfig, DmdModel};
        let n = 24;
        let w1 = 0.2 + (seed % 7) as f64 * 0.1;
        let w2 = 0.9 + (seed % 5) as f64 * 0.15;
        let seq = Array2::from_shape_fn((3, n), |(i, k)| {
            let t = k as f64;
            C64::new(
                (w1 * t + i as f64).sin() + 0.4 * (w2 * t).cos(),
                0.0,
            )
        });
        let model = DmdModel::fit(seq.view(), &DmdConfig::default(), 0).unwrap();
        for l in model.eigenvalues() {
            let conj = l.conj();
            prop_assert!(
                model.eigenvalues().iter().any(|m| (m - conj).norm() < 1e-8),
                "eigenvalue {} lacks a conjugate partner", l
            );
        }
        let forecast = model.forecast(n as i64 + 2).unwrap();
        let scale = forecast.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-12);
        for v in &forecast {
            prop_assert!(v.im.abs() < 1e-8 * scale);
        }
    }
}
