//! In-segment laws used by the samplers, against closed forms and fine-grid
//! simulation.

use std::f64::consts::PI;

use bridge_transforms::hitting::sigma_first_argmax;
use bridge_transforms::params::Grid;
use bridge_transforms::path::Path;
use bridge_transforms::rng::{derive_seed, Stream};
use bridge_transforms::samplers::{
    last_passage, local_time_passage, refine_near_max, sample_bm, sample_bm3, sample_bridge, sample_local_time,
    sample_split_time, subdivide_near_zero, with_bridge_extremes, SegmentLaw,
};
use bridge_transforms::stats::{effective_n, ks_one_sample, ks_pvalue, ks_two_sample};

const P_MIN: f64 = 1e-3;

fn grid(n: usize) -> Grid {
    Grid::new(1.0, n).unwrap()
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / 2f64.sqrt())
}

fn one_sample_p(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let d = ks_one_sample(xs, cdf).unwrap();
    ks_pvalue(d, xs.len() as f64)
}

fn two_sample_p(xs: &[f64], ys: &[f64]) -> f64 {
    ks_pvalue(ks_two_sample(xs, ys).unwrap(), effective_n(xs.len(), ys.len()))
}

const LEAF: f64 = 1.0 / (1u64 << 24) as f64;

fn arcsine_cdf(x: f64) -> f64 {
    2.0 / PI * x.clamp(0.0, 1.0).sqrt().asin()
}

#[test]
fn argmax_of_brownian_motion_is_arcsine() {
    let g = grid(2);
    let thetas: Vec<f64> = (0..20_000)
        .map(|i| sigma_first_argmax(&refine_near_max(&sample_bm(&g, derive_seed(1, i)), LEAF, derive_seed(2, i))))
        .collect();
    let p = one_sample_p(&thetas, arcsine_cdf);
    assert!(p >= P_MIN, "p {p}");
}

#[test]
fn last_zero_of_brownian_motion_is_arcsine() {
    let g = grid(4);
    let gammas: Vec<f64> =
        (0..20_000).map(|i| last_passage(&sample_bm(&g, derive_seed(3, i)), 0.0, LEAF, derive_seed(4, i))).collect();
    let p = one_sample_p(&gammas, arcsine_cdf);
    assert!(p >= P_MIN, "p {p}");
}

/// CDF of the last zero of a bridge `0 → x` on `[0, 1]`: `1 − γ` is the first
/// passage to 0 of the reversed bridge `x → 0`, with density
/// `f_|x|(u)·p_{1−u}(0) / p_1(x)`; integrated by Simpson on a fixed mesh.
fn bridge_last_zero_cdf(x: f64) -> impl Fn(f64) -> f64 {
    let a = x.abs();
    let p1 = (-a * a / 2.0).exp() / (2.0 * PI).sqrt();
    // substitute u = 1 − v²: the factor 1/√(2π(1 − u)) = 1/(√(2π)·v) cancels
    // against du = 2v·dv, leaving a bounded integrand
    let g = move |v: f64| {
        let u = 1.0 - v * v;
        if u <= 0.0 {
            return 0.0;
        }
        2.0 * a * (-a * a / (2.0 * u)).exp() / (2.0 * PI * u.powi(3)).sqrt() / (2.0 * PI).sqrt() / p1
    };
    let n = 4000;
    let mut cum = vec![0.0; n + 1];
    let h = 1.0 / n as f64;
    for k in 0..n {
        let (v0, v1) = (k as f64 * h, (k + 1) as f64 * h);
        cum[k + 1] = cum[k] + (g(v0) + 4.0 * g(0.5 * (v0 + v1)) + g(v1)) * h / 6.0;
    }
    // P(γ ≤ s) = P(1 − γ ≥ 1 − s) = P(v ≤ √s)
    move |s: f64| {
        let v = s.clamp(0.0, 1.0).sqrt() * n as f64;
        let k = (v.floor() as usize).min(n - 1);
        (cum[k] + (v - k as f64) * (cum[k + 1] - cum[k])).min(1.0)
    }
}

#[test]
fn last_zero_of_bridge_matches_first_passage_density() {
    let x = -1.3;
    let g = grid(4);
    let cdf = bridge_last_zero_cdf(x);
    assert!((cdf(1.0) - 1.0).abs() < 1e-6, "{}", cdf(1.0));
    let gammas: Vec<f64> = (0..20_000)
        .map(|i| last_passage(&sample_bridge(x, &g, derive_seed(5, i)), 0.0, LEAF, derive_seed(6, i)))
        .collect();
    let p = one_sample_p(&gammas, cdf);
    assert!(p >= P_MIN, "p {p}");
}

#[test]
fn refined_bridge_keeps_breakpoints_and_orders_times() {
    let g = grid(16);
    for i in 0..200 {
        let raw = sample_bridge(-0.5, &g, i);
        let fine = refine_near_max(&raw, LEAF, i + 1000);
        assert!(fine.times().windows(2).all(|w| w[0] < w[1]));
        for (&t, &v) in raw.times().iter().zip(raw.values()) {
            let k = fine.times().iter().position(|&u| u == t).unwrap();
            assert_eq!(fine.values()[k], v);
        }
        let sigma = sigma_first_argmax(&fine);
        let gamma = last_passage(&fine, 0.0, LEAF, i + 2000);
        assert!(sigma <= gamma, "{sigma} {gamma}");
    }
}

#[test]
fn split_time_matches_conditioned_hitting_times() {
    // T_a + T_b conditioned on landing in [h, h + δ], with T_c = c²/Z²
    let (a, b, h) = (0.3, 0.8, 1.0);
    let delta = 0.01;
    let mut s = Stream::new(5);
    let mut oracle = Vec::new();
    while oracle.len() < 4000 {
        let t1 = a * a / s.gaussian().powi(2);
        let t2 = b * b / s.gaussian().powi(2);
        if (h..h + delta).contains(&(t1 + t2)) {
            oracle.push(t1 / (t1 + t2) * h);
        }
    }
    let mut s = Stream::new(6);
    let ours: Vec<f64> = (0..20_000).map(|_| sample_split_time(a, b, h, &mut s)).collect();
    assert!(ours.iter().all(|&t| (0.0..=h).contains(&t)));
    let p = two_sample_p(&ours, &oracle);
    assert!(p >= P_MIN, "p {p}");
}

#[test]
fn split_time_degenerate_levels() {
    let mut s = Stream::new(1);
    assert_eq!(sample_split_time(0.0, 1.0, 2.0, &mut s), 0.0);
    assert_eq!(sample_split_time(1.0, 0.0, 2.0, &mut s), 2.0);
    // extreme ratios stay finite and inside
    for (a, b) in [(1e-8, 1.0), (1.0, 1e-8), (30.0, 1e-3)] {
        for _ in 0..1000 {
            let t = sample_split_time(a, b, 0.5, &mut s);
            assert!(t.is_finite() && (0.0..=0.5).contains(&t), "{a} {b} {t}");
        }
    }
}

#[test]
fn local_time_of_brownian_motion_is_half_normal() {
    // L_1 ≡ |B_1| (Lévy); any grid is exact at the endpoint
    for n in [2, 8] {
        let g = grid(n);
        let ls: Vec<f64> = (0..20_000)
            .map(|i| sample_local_time(&sample_bm(&g, derive_seed(7, i)), derive_seed(8, i)).terminal())
            .collect();
        let p = one_sample_p(&ls, |x| 2.0 * normal_cdf(x) - 1.0);
        assert!(p >= P_MIN, "n {n}: p {p}");
    }
}

#[test]
fn local_time_of_bridge_is_rayleigh() {
    let g = grid(4);
    let ls: Vec<f64> = (0..20_000)
        .map(|i| sample_local_time(&sample_bridge(0.0, &g, derive_seed(9, i)), derive_seed(10, i)).terminal())
        .collect();
    let p = one_sample_p(&ls, |x| 1.0 - (-0.5 * x * x).exp());
    assert!(p >= P_MIN, "p {p}");
}

#[test]
fn local_time_is_nondecreasing_on_the_grid() {
    let g = grid(32);
    let p = sample_bm(&g, 3);
    let l = sample_local_time(&p, 4);
    assert_eq!(l.times(), p.times());
    assert_eq!(l.start(), 0.0);
    assert!(l.values().windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn inverse_local_time_is_a_hitting_time() {
    // τ_ℓ ≡ T_ℓ: P(τ_ℓ ≤ s) = 2(1 − Φ(ℓ/√s)); compare conditionally on τ_ℓ ≤ 1
    let level = 0.4;
    let g = grid(4);
    let taus: Vec<f64> = (0..40_000)
        .filter_map(|i| {
            let p = sample_bm(&g, derive_seed(11, i));
            let l = sample_local_time(&p, derive_seed(12, i));
            local_time_passage(&p, &l, level, derive_seed(13, i))
        })
        .collect();
    let f = |s: f64| if s <= 0.0 { 0.0 } else { 2.0 * (1.0 - normal_cdf(level / s.sqrt())) };
    let p = one_sample_p(&taus, |s| f(s.min(1.0)) / f(1.0));
    assert!(p >= P_MIN, "p {p}");
    let frac = taus.len() as f64 / 40_000.0;
    assert!((frac - f(1.0)).abs() < 4.0 * (f(1.0) * (1.0 - f(1.0)) / 40_000.0).sqrt(), "{frac}");
}

fn fine_radial_extremes(n_fine: usize, seed: u64) -> (f64, f64) {
    let r = sample_bm3(&grid(n_fine), seed).radial();
    let from = n_fine / 4;
    (r.max_value(), r.values()[from..].iter().copied().fold(f64::INFINITY, f64::min))
}

fn coarse_radial_extremes(law: SegmentLaw, seed: u64) -> (f64, f64) {
    let r = with_bridge_extremes(&sample_bm3(&grid(4), seed).radial(), law, derive_seed(seed, 1));
    let from = r.times().iter().position(|&t| t >= 0.25).unwrap();
    (r.max_value(), r.values()[from..].iter().copied().fold(f64::INFINITY, f64::min))
}

#[test]
fn bessel_segment_extremes_match_fine_simulation() {
    // fine grid max/min are biased by ≈ 0.58·√(1/4096) ≈ 0.009, well under
    // the KS resolution at these sizes
    let n = 8000;
    let (fmax, fmin): (Vec<f64>, Vec<f64>) = (0..n).map(|i| fine_radial_extremes(4096, derive_seed(14, i))).unzip();
    let (cmax, cmin): (Vec<f64>, Vec<f64>) =
        (0..n).map(|i| coarse_radial_extremes(SegmentLaw::Bessel3, derive_seed(15, i))).unzip();
    let (pmax, pmin) = (two_sample_p(&cmax, &fmax), two_sample_p(&cmin, &fmin));
    assert!(pmax >= P_MIN && pmin >= P_MIN, "max p {pmax}, min p {pmin}");
}

#[test]
fn bessel_minima_stay_nonnegative_and_below_endpoints() {
    let r = sample_bm3(&grid(64), 21).radial();
    let e = with_bridge_extremes(&r, SegmentLaw::Bessel3, 22);
    for (k, w) in e.values().chunks(3).collect::<Vec<_>>().windows(2).enumerate() {
        let (a, b) = (w[0][0], w[1][0]);
        let inserted = &w[0][1..];
        let (lo, hi) = if b >= a { (inserted[0], inserted[1]) } else { (inserted[1], inserted[0]) };
        assert!(lo >= 0.0 && lo <= a.min(b) && hi >= a.max(b), "segment {k}: {a} {b} {lo} {hi}");
    }
}

#[test]
fn subdivision_reproduces_bessel_bridge_midpoints() {
    // |B3| at 1/4 and 3/4 sampled directly vs by splitting both halves
    let n = 20_000;
    let (d1, d3): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            let r = sample_bm3(&grid(4), derive_seed(16, i)).radial();
            (r.values()[1], r.values()[3])
        })
        .unzip();
    let (s1, s3): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| {
            let r = sample_bm3(&grid(2), derive_seed(17, i)).radial();
            let s = subdivide_near_zero(&r, f64::INFINITY, 2, derive_seed(18, i));
            assert_eq!(s.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
            (s.values()[1], s.values()[3])
        })
        .unzip();
    let (p1, p3) = (two_sample_p(&d1, &s1), two_sample_p(&d3, &s3));
    assert!(p1 >= P_MIN && p3 >= P_MIN, "p {p1} {p3}");
}

#[test]
fn subdivision_leaves_far_segments_alone() {
    let p = Path::new(vec![0.0, 1.0, 2.0], vec![5.0, 6.0, 0.1]).unwrap();
    let s = subdivide_near_zero(&p, 1.0, 4, 1);
    assert_eq!(s.times(), &[0.0, 1.0, 1.25, 1.5, 1.75, 2.0]);
    assert_eq!(s.values()[..2], [5.0, 6.0]);
    assert_eq!(s.terminal(), 0.1);
}
