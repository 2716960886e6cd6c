use std::f64::consts::{PI, TAU};

use broadbeam::baselines::{phase_taper_weights, PhaseTaperParams};
use broadbeam::cli::files::{Dims, Metadata, WeightFile};
use broadbeam::evaluation::{drop_ues, evaluate_gains, SectorConfig};
use broadbeam::expansion::{asi_double, companion, expand_ula, RippleBound, WeightPair};
use broadbeam::mgda::utility_1d;
use broadbeam::patterns::{power_utilization, ArrayGeometry, ArrayWeights};
use broadbeam::sequences::{aacf, golay_kernel, max_sidelobe, ComplexSequence, KERNEL_LENGTHS};
use num_complex::Complex64;
use proptest::prelude::*;

fn phases(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_len).prop_flat_map(|m| prop::collection::vec(0.0..TAU, m))
}

fn pair(max_len: usize) -> impl Strategy<Value = WeightPair> {
    (1..=max_len)
        .prop_flat_map(|m| (prop::collection::vec(0.0..TAU, m), prop::collection::vec(0.0..TAU, m)))
        .prop_map(|(a, b)| WeightPair::from_phases(&a, &b).unwrap())
}

/// A Golay pair from a kernel, expanded a few times by kernels and rotated
/// by unit scalars.
fn golay(max_len: usize) -> impl Strategy<Value = WeightPair> {
    (prop::collection::vec(0..KERNEL_LENGTHS.len(), 1..4), 0.0..TAU, 0.0..TAU).prop_map(move |(idx, ra, rb)| {
        let kern = |i: usize| {
            let (a, b) = golay_kernel(KERNEL_LENGTHS[i]).unwrap();
            WeightPair::new(a, b).unwrap()
        };
        let mut p = kern(idx[0]);
        for &i in &idx[1..] {
            let e = kern(i);
            if 2 * p.len() * e.len() <= max_len {
                p = expand_ula(&p, e.a(), e.b()).unwrap();
            }
        }
        WeightPair::new(
            p.a().scaled(Complex64::from_polar(1.0, ra)),
            p.b().scaled(Complex64::from_polar(1.0, rb)),
        )
        .unwrap()
    })
}

fn af(w: &WeightPair, psi: f64) -> f64 {
    w.af_power(psi, 0.0)
}

proptest! {
    #[test]
    fn aacf_is_hermitian(p in phases(24)) {
        let r = aacf(&ComplexSequence::from_phases(&p)).unwrap();
        for lag in r.lags() {
            prop_assert!((r.at(-lag) - r.at(lag).conj()).norm() < 1e-12);
        }
        prop_assert!((r.at(0).re - p.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn golay_pairs_are_flat(g in golay(104), psi in -PI..PI) {
        let level = 2.0 * g.len() as f64;
        prop_assert!(g.max_sidelobe() < 1e-9);
        prop_assert!((af(&g, psi) - level).abs() / level < 1e-9);
    }

    #[test]
    fn companion_shares_the_pattern(w in pair(12), psi in -PI..PI) {
        let c = companion(&w);
        prop_assert!((af(&c, psi) - af(&w, psi)).abs() < 1e-9 * af(&w, psi).max(1.0));
        let d = asi_double(&w);
        prop_assert!((af(&d, psi) - 2.0 * af(&w, psi)).abs() < 1e-9 * af(&w, psi).max(1.0));
    }

    #[test]
    fn kernel_expanders_scale_by_twice_their_length(w in pair(12), e in golay(4), psi in -PI..PI) {
        let x = expand_ula(&w, e.a(), e.b()).unwrap();
        let want = 2.0 * e.len() as f64 * af(&w, psi);
        prop_assert!((af(&x, psi) - want).abs() < 1e-9 * want.max(1.0));
    }

    #[test]
    fn pattern_respects_the_sidelobe_band(w in pair(12), psi in -PI..PI) {
        let s = max_sidelobe(w.a(), w.b()).unwrap();
        let band = RippleBound::from_sidelobe_1d(w.len(), s);
        prop_assert!((af(&w, psi) - band.level).abs() <= band.deviation + 1e-9);
    }

    #[test]
    fn utility_is_minus_sidelobe(a in phases(10)) {
        let m = a.len();
        let b: Vec<f64> = a.iter().map(|x| x * 0.7 + 1.0).collect();
        let mut stacked = a.clone();
        stacked.extend(&b);
        let w = WeightPair::from_phases(&a, &b).unwrap();
        prop_assert_eq!(stacked.len(), 2 * m);
        prop_assert!((utility_1d(&stacked).unwrap() + w.max_sidelobe()).abs() < 1e-12);
    }

    #[test]
    fn weight_files_round_trip_bit_exactly(a in phases(30)) {
        let b: Vec<f64> = a.iter().rev().copied().collect();
        let f = WeightFile::from_phases(a.clone(), b, Dims { m: a.len(), n: 1 }, Metadata::new("prop"));
        let g = WeightFile::from_json(&f.to_json()).unwrap();
        for (x, y) in f.phases_a.iter().zip(&g.phases_a) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        prop_assert_eq!(f, g);
    }

    #[test]
    fn phase_taper_is_power_efficient(m in 2usize..32, p in 1u32..6, c in 0.0f64..60.0, phi0 in -1.0f64..1.0) {
        let w = phase_taper_weights(m, phi0, &PhaseTaperParams { p, c }, &ArrayGeometry::ula(m).unwrap()).unwrap();
        prop_assert!(w.is_unimodular(1e-12));
        prop_assert!((power_utilization(&w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_gain_equals_shifting_snr(g in 0.01f64..100.0, seed in any::<u64>()) {
        let cfg = SectorConfig { drops: 50, seed, snr_db: vec![-10.0, 0.0, 20.0], ..Default::default() };
        let drops = drop_ues(&cfg).unwrap();
        let gains: Vec<f64> = drops.iter().map(|d| 1.0 + d.phi.cos()).collect();
        let scaled: Vec<f64> = gains.iter().map(|x| g * x).collect();
        let shifted = SectorConfig {
            snr_db: cfg.snr_db.iter().map(|s| s + 10.0 * g.log10()).collect(),
            ..cfg.clone()
        };
        let a = evaluate_gains("", &scaled, &drops, &cfg, false).unwrap();
        let b = evaluate_gains("", &gains, &drops, &shifted, false).unwrap();
        for (x, y) in a.mean_se.iter().zip(&b.mean_se) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
