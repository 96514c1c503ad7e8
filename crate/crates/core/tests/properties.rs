use num_complex::Complex64;
use proptest::prelude::*;
use vds_core::density::{inverse_adjusted_density, normalize, tsp_adjusted_density};
use vds_core::fourier::Fft2;
use vds_core::recon::{data_residual, measure, reconstruct, Image, ReconConfig, SamplingMask};
use vds_core::sampler::draw_points;
use vds_core::trajectory::{empirical_distribution, parameterize, resample};
use vds_core::tsp::{path_length, solve_exact, solve_heuristic, HeuristicConfig};
use vds_core::wavelet::{Dwt2, Wavelet};
use vds_core::{DensityGrid, PointSet};

fn point_set(dim: usize, max: usize) -> impl Strategy<Value = PointSet> {
    (1..=max).prop_flat_map(move |n| {
        prop::collection::vec(0.0..=1.0f64, n * dim).prop_map(move |c| PointSet::new(dim, c, 0).unwrap())
    })
}

fn grid(dim: usize, r: usize) -> impl Strategy<Value = DensityGrid> {
    prop::collection::vec(0.01..10.0f64, r.pow(dim as u32)).prop_map(move |v| DensityGrid::new(dim, r, v).unwrap())
}

fn is_permutation(order: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    order.len() == n && order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heuristic_is_feasible_and_never_beats_exact(ps in point_set(2, 9), seed in any::<u64>()) {
        let h = solve_heuristic(&ps, &HeuristicConfig { seed, ..Default::default() });
        prop_assert!(is_permutation(&h.order, ps.len()));
        prop_assert!((path_length(&ps, &h.order).unwrap() - h.length).abs() <= 1e-9);
        let e = solve_exact(&ps).unwrap();
        prop_assert!(is_permutation(&e.order, ps.len()));
        prop_assert!(h.length >= e.length - 1e-9);
    }

    #[test]
    fn heuristic_feasible_in_three_dimensions(ps in point_set(3, 200), k in 1usize..20) {
        let h = solve_heuristic(&ps, &HeuristicConfig { neighbor_list_size: k, ..Default::default() });
        prop_assert!(is_permutation(&h.order, ps.len()));
        prop_assert!((path_length(&ps, &h.order).unwrap() - h.length).abs() <= 1e-9);
    }

    #[test]
    fn lengths_scale_with_coordinates(ps in point_set(2, 8), s in 0.05..1.0f64) {
        let scaled = PointSet::new(2, ps.coords().iter().map(|c| c * s).collect(), 0).unwrap();
        let (e, es) = (solve_exact(&ps).unwrap().length, solve_exact(&scaled).unwrap().length);
        prop_assert!((es - s * e).abs() <= 1e-9 * (1.0 + e));
    }

    #[test]
    fn occupation_mass_is_one_and_refines(ps in point_set(2, 40), seed in any::<u64>()) {
        let tour = solve_heuristic(&ps, &HeuristicConfig { seed, ..Default::default() });
        prop_assume!(tour.length > 1e-9);
        let traj = parameterize(&ps, &tour).unwrap();
        let fine = empirical_distribution(&traj, 8).unwrap();
        let coarse = empirical_distribution(&traj, 4).unwrap();
        prop_assert!((fine.masses().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let agg = fine.aggregate(4).unwrap();
        for (a, b) in agg.masses().iter().zip(coarse.masses()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn resample_count_and_endpoints(ps in point_set(2, 30), step in 0.001..0.5f64) {
        let tour = solve_heuristic(&ps, &HeuristicConfig::default());
        prop_assume!(tour.length > 1e-9);
        let traj = parameterize(&ps, &tour).unwrap();
        let samples = resample(&traj, step).unwrap();
        prop_assert_eq!(samples.len(), (traj.total_length() / step).floor() as usize + 1);
        prop_assert_eq!(samples.point(0), ps.point(tour.order[0]));
    }

    #[test]
    fn adjusted_density_round_trips(g in grid(2, 4)) {
        let n = normalize(&g).unwrap();
        let back = inverse_adjusted_density(&tsp_adjusted_density(&n).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(n.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b));
        }
        let sq: Vec<f64> = n.values().iter().map(|v| v * v).collect();
        let expect = normalize(&DensityGrid::new(2, 4, sq).unwrap()).unwrap();
        for (a, b) in tsp_adjusted_density(&n).unwrap().values().iter().zip(expect.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }
    }

    #[test]
    fn draws_stay_in_support(g in grid(3, 2), n in 0usize..300, seed in any::<u64>()) {
        let ps = draw_points(&g, n, seed);
        prop_assert_eq!(ps.len(), n);
        prop_assert!(ps.coords().iter().all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn transforms_are_unitary(values in prop::collection::vec(-1.0..1.0f64, 2 * 16 * 16), levels in 1usize..=4) {
        let x: Vec<Complex64> = values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let n0 = norm(&x);
        let mut f = x.clone();
        let fft = Fft2::new(16);
        fft.forward(&mut f);
        prop_assert!((norm(&f) - n0).abs() <= 1e-9 * (1.0 + n0));
        fft.inverse(&mut f);
        prop_assert!(f.iter().zip(&x).all(|(a, b)| (a - b).norm() <= 1e-10));
        for w in [Wavelet::Haar, Wavelet::Daubechies4] {
            let dwt = Dwt2::new(w, 16, levels).unwrap();
            let mut c = x.clone();
            dwt.forward(&mut c);
            prop_assert!((norm(&c) - n0).abs() <= 1e-9 * (1.0 + n0));
            dwt.inverse(&mut c);
            prop_assert!(c.iter().zip(&x).all(|(a, b)| (a - b).norm() <= 1e-10));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reconstruction_satisfies_data(flags in prop::collection::vec(any::<bool>(), 16 * 16),
                                     values in prop::collection::vec(0.0..1.0f64, 16 * 16)) {
        let mask = SamplingMask::from_flags(16, flags).unwrap();
        prop_assume!(mask.sampled_count() > 0);
        let img = Image::from_real(16, &values).unwrap();
        let y = measure(&img, &mask).unwrap();
        let rec = reconstruct(&y, &mask, &ReconConfig { levels: Some(2), iterations: 30, ..Default::default() }).unwrap();
        prop_assert!(data_residual(&rec.image, &mask, &y).unwrap() <= 1e-9);
    }
}
