mod common;

use nalgebra::Vector3;
use proptest::prelude::*;

use common::{run_hold, short_config, small_scene};
use grade_forge::noise::{corrupt_depth, corrupt_imu, reindex_log, DepthNoiseConfig, ImuNoiseConfig};
use grade_forge::sensors::{DepthImage, ImuSample};
use grade_forge::sim::{ChannelSchedule, FaultConfig, SimConfig};

fn depth_image(w: u32, h: u32, vals: &[f32]) -> DepthImage {
    let mut img = DepthImage::zeros(w, h);
    for (i, z) in img.data.iter_mut().enumerate() {
        *z = vals[i % vals.len()];
    }
    img
}

fn imu_stream(vals: &[[f64; 6]], rate: f64) -> Vec<ImuSample> {
    vals.iter()
        .enumerate()
        .map(|(i, v)| ImuSample {
            angular_velocity: Vector3::new(v[0], v[1], v[2]),
            linear_acceleration: Vector3::new(v[3], v[4], v[5]),
            stamp: 3.0 + i as f64 / rate,
        })
        .collect()
}

fn depth_value() -> impl Strategy<Value = f32> {
    prop_oneof![1 => Just(0.0f32), 6 => 0.01f32..12.0]
}

fn noisy_depth() -> impl Strategy<Value = DepthNoiseConfig> {
    (0.5f64..10.0, 0.0f64..0.05, 0.0f64..0.05, 0.0f64..0.3, any::<u64>()).prop_map(|(max_range, sigma_a, sigma_b, dropout_prob, rng_seed)| {
        DepthNoiseConfig {
            max_range,
            sigma_a,
            sigma_b,
            dropout_prob,
            rng_seed,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_noise_is_the_identity(
        vals in prop::collection::vec(depth_value(), 1..50),
        frame in any::<u64>(),
        imu in prop::collection::vec(prop::array::uniform6(-20.0f64..20.0), 2..60),
        stream in any::<u64>(),
    ) {
        let img = depth_image(17, 11, &vals);
        prop_assert_eq!(corrupt_depth(&img, &DepthNoiseConfig::zero(), frame).unwrap(), img);
        let clean = imu_stream(&imu, 200.0);
        prop_assert_eq!(corrupt_imu(&clean, &ImuNoiseConfig::zero(), stream).unwrap(), clean);
    }

    #[test]
    fn noisy_depth_stays_in_range(vals in prop::collection::vec(depth_value(), 1..50), cfg in noisy_depth(), frame in any::<u64>()) {
        let img = depth_image(23, 13, &vals);
        let out = corrupt_depth(&img, &cfg, frame).unwrap();
        for (&z, &src) in out.data.iter().zip(&img.data) {
            prop_assert!(z == 0.0 || (z >= 1e-6f32 && z as f64 <= cfg.max_range), "{} from {}", z, src);
            if src == 0.0 {
                prop_assert_eq!(z, 0.0);
            }
        }
    }

    #[test]
    fn noise_depends_only_on_seed_and_stream(
        vals in prop::collection::vec(depth_value(), 1..50),
        cfg in noisy_depth(),
        frame in 0u64..1000,
        imu in prop::collection::vec(prop::array::uniform6(-20.0f64..20.0), 2..60),
        seed in any::<u64>(),
    ) {
        let img = depth_image(19, 7, &vals);
        prop_assert_eq!(corrupt_depth(&img, &cfg, frame).unwrap(), corrupt_depth(&img, &cfg, frame).unwrap());
        let clean = imu_stream(&imu, 200.0);
        let icfg = ImuNoiseConfig {
            rng_seed: seed,
            ..ImuNoiseConfig::default()
        };
        let a = corrupt_imu(&clean, &icfg, frame).unwrap();
        prop_assert_eq!(&a, &corrupt_imu(&clean, &icfg, frame).unwrap());
        let other = ImuNoiseConfig {
            rng_seed: seed.wrapping_add(1),
            ..icfg.clone()
        };
        prop_assert_ne!(&a, &corrupt_imu(&clean, &other, frame).unwrap());
        prop_assert!(a.iter().zip(&clean).all(|(n, c)| n.stamp == c.stamp));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reindex_is_idempotent_and_commutes_with_filtering(
        seed in any::<u64>(),
        probability in 0.0f64..0.5,
        delay_steps in 1u32..4,
        keep_mask in any::<u16>(),
    ) {
        let cfg = SimConfig {
            fault: FaultConfig { enabled: true, probability, delay_steps },
            ..short_config(0.5, seed)
        };
        let log = run_hold(&cfg, &ChannelSchedule::default(), &small_scene(1), &["r0"]);
        let fixed = reindex_log(&log).unwrap();
        prop_assert_eq!(&reindex_log(&fixed).unwrap(), &fixed);
        let names: Vec<&str> = log
            .header
            .channels
            .iter()
            .enumerate()
            .filter(|(i, c)| c.rate == 0 || keep_mask & (1 << (i % 16)) != 0)
            .map(|(_, c)| c.name.as_str())
            .collect();
        prop_assert_eq!(reindex_log(&log.filter_channels(&names)).unwrap(), fixed.filter_channels(&names));
    }
}
