//! Top-level acceptance checks, one test per criterion. Each prints a
//! single PASS/FAIL line (visible with --nocapture) and asserts.

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;

use qsprep_core::bounds::{
    self, p_s_bound_case1, p_s_bound_case2, SampleCase, SamplingModel,
};
use qsprep_core::cascade::{
    self, binomial_chi_square_pvalue, ScalingExperiment,
};
use qsprep_core::circuit::{
    build_concat_circuit, build_full_network, depth_lower_bound, emit, parse,
    schedule_from_circuit, Gate,
};
use qsprep_core::concat::{compute_p_plus, concatenate};
use qsprep_core::encoding::{label_norm_sq, resize, target_state, uniform_vector};
use qsprep_core::prep::{prepare_amplitude, C0Policy, Mode, PPlusModel, PrepConfig};
use qsprep_core::rng::{derive, mix};
use qsprep_core::{LabelState, PureState, ResizedVector};

fn report(name: &str, pass: bool, detail: &str) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn c1_end_to_end_fidelity() {
    let per_group = 50usize; // x2 cases x2 routes = 200 vectors per n
    let mut worst: f64 = 1.0;
    for n in [2usize, 3, 4] {
        for case in [SampleCase::UniformCase1, SampleCase::GaussianCase2] {
            for positive in [true, false] {
                let model = SamplingModel { case, n: 1 << n, positive };
                let stream = mix(&[0xacc1, n as u64, positive as u64]);
                let min_f = (0..per_group as u64)
                    .into_par_iter()
                    .map(|trial| {
                        let mut rng = derive(11, stream, trial);
                        let u = bounds::sample(&model, &mut rng);
                        let cfg = PrepConfig { seed: mix(&[stream, trial]), ..PrepConfig::default() };
                        let r = prepare_amplitude(&u, &cfg).expect("pipeline");
                        assert_eq!(r.complex_route, !positive || !resize(&u).positive_only());
                        r.state.fidelity(&target_state(&u))
                    })
                    .reduce(|| 1.0, f64::min);
                worst = worst.min(min_f);
            }
        }
    }
    report(
        "end-to-end-fidelity",
        worst >= 1.0 - 1e-9,
        &format!("worst fidelity {worst:.3e} over 600 vectors, n in 2..=4, both cases"),
    );
}

fn random_positive(dim: usize, rng: &mut impl Rng) -> ResizedVector {
    let entries: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen::<f64>(), 0.0)).collect();
    ResizedVector::new(entries).unwrap()
}

fn random_disk(dim: usize, rng: &mut impl Rng) -> ResizedVector {
    let entries: Vec<C64> = (0..dim)
        .map(|_| {
            let r = rng.gen::<f64>().sqrt();
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            C64::from_polar(r, phi)
        })
        .collect();
    ResizedVector::new(entries).unwrap()
}

#[test]
fn c2_p_plus_law() {
    // statevector agreement at 1e-10 on 10^3 instances
    let max_dev = (0..1000u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive(13, 0xacc2, trial);
            let dim = 1usize << (1 + (trial % 3)); // vectors of dim 2, 4, 8
            let (a, b) = if trial % 2 == 0 {
                (random_positive(dim, &mut rng), random_positive(dim, &mut rng))
            } else {
                (random_disk(dim, &mut rng), random_disk(dim, &mut rng))
            };
            let (la, lb) = (LabelState::encode(&a), LabelState::encode(&b));
            let c = build_concat_circuit(a.num_qubits()).unwrap();
            let input = PureState::zero(1).tensor(la.state()).tensor(lb.state());
            let (p_sim, _) = c.apply(&input).unwrap();
            let p_formula = compute_p_plus(la.norm_sq(), lb.norm_sq(), dim).unwrap();
            (p_sim - p_formula).abs()
        })
        .reduce(|| 0.0, f64::max);

    // range checks on 10^4 analytic evaluations each
    let mut rng = derive(13, 0xacc3, 0);
    let mut pos_ok = 0usize;
    let mut disk_ok = 0usize;
    for _ in 0..10_000 {
        let dim = 1usize << rng.gen_range(1..=4);
        let (a, b) = (random_positive(dim, &mut rng), random_positive(dim, &mut rng));
        let p = compute_p_plus(label_norm_sq(a.entries()), label_norm_sq(b.entries()), dim).unwrap();
        if (0.5..=1.0 + 1e-12).contains(&p) {
            pos_ok += 1;
        }
        let (a, b) = (random_disk(dim, &mut rng), random_disk(dim, &mut rng));
        let p = compute_p_plus(label_norm_sq(a.entries()), label_norm_sq(b.entries()), dim).unwrap();
        if (0.1..=1.0 + 1e-12).contains(&p) {
            disk_ok += 1;
        }
    }
    let pass = max_dev <= 1e-10 && pos_ok == 10_000 && disk_ok == 10_000;
    report(
        "p-plus-law",
        pass,
        &format!(
            "max |sim - formula| {max_dev:.2e}; range hits positive {pos_ok}/10000, disk {disk_ok}/10000"
        ),
    );
}

#[test]
fn c3_single_copy_slope() {
    let exp = ScalingExperiment {
        p_plus_model: PPlusModel::WorstCaseHalf,
        c0_policy: C0Policy::Constant(1),
        mode: Mode::Parallel,
        seed: 17,
        ..ScalingExperiment::new((4..=10).collect(), 1000)
    };
    let fit = cascade::run_scaling(&exp).unwrap();
    let pass = (fit.slope - 1.52).abs() <= 0.15;
    report(
        "single-copy-slope",
        pass,
        &format!("fitted slope {:.3} (stderr {:.3}), expected 1.52 +/- 0.15", fit.slope, fit.slope_stderr),
    );
}

#[test]
fn c4_supra_linear_space() {
    let rep = cascade::run_supra((4..=12).collect(), 300, 19).unwrap();
    let sigma = (0.006f64 * (1.0 - 0.006) / rep.total_passes as f64).sqrt();
    let freq_ok = rep.pass_success_freq >= 0.006 - 3.0 * sigma;
    let fit_ok = rep.quadratic.r_squared >= 0.98 && rep.quadratic_ss_res < rep.power_law_ss_res;
    report(
        "supra-linear-space",
        freq_ok && fit_ok,
        &format!(
            "pass success {:.3} (floor {:.3}); quadratic R^2 {:.4}, residual {:.3e} vs power law {:.3e}",
            rep.pass_success_freq,
            0.006 - 3.0 * sigma,
            rep.quadratic.r_squared,
            rep.quadratic_ss_res,
            rep.power_law_ss_res
        ),
    );
}

#[test]
fn c5_tradeoff_monotone() {
    let template = ScalingExperiment {
        p_plus_model: PPlusModel::WorstCaseHalf,
        mode: Mode::Parallel,
        seed: 23,
        ..ScalingExperiment::new((4..=10).collect(), 400)
    };
    let curve = cascade::tradeoff_curve(&[1.0, 1.2, 1.4, 1.6, 1.8], &template).unwrap();
    let mut pass = true;
    let mut desc = String::new();
    for pair in curve.windows(2) {
        let (bq0, f0) = (&pair[0].0, &pair[0].1);
        let (bq1, f1) = (&pair[1].0, &pair[1].1);
        let slack = 3.0 * (f0.slope_stderr.powi(2) + f1.slope_stderr.powi(2)).sqrt();
        if f1.slope > f0.slope + slack {
            pass = false;
        }
        desc.push_str(&format!("bq {bq0}->{bq1}: {:.3}->{:.3}; ", f0.slope, f1.slope));
    }
    report("tradeoff-monotone", pass, desc.trim_end_matches("; "));
}

#[test]
fn c6_bound_suites() {
    let mut pass = true;
    let mut desc = String::new();
    for case in [SampleCase::UniformCase1, SampleCase::GaussianCase2] {
        for n in [64usize, 256] {
            let rep = bounds::verify_result4(case, n, 1000, 0.1, 29).unwrap();
            pass &= rep.pass;
            desc.push_str(&format!(
                "{case:?} N={n}: viol {}+{}; ",
                rep.violations_p_s, rep.violations_p_s_prime
            ));
        }
    }
    for (eps, delta) in [(0.05, 0.1), (0.1, 0.2)] {
        for n in [64usize, 256] {
            let rep = bounds::verify_result5(eps, delta, n, 1000, 31).unwrap();
            let sigma = (delta / 2.0 * (1.0 - delta / 2.0) / rep.trials as f64).sqrt();
            let fid_floor = (1.0 - delta / 2.0 - 3.0 * sigma) * rep.trials as f64;
            pass &= rep.pass && (rep.fidelity_hits as f64) >= fid_floor;
            desc.push_str(&format!(
                "cut eps={eps} d={delta} N={n}: joint {}/{}; ",
                rep.joint_hits, rep.trials
            ));
        }
    }
    // sanity: the checked constants are the explicit closed forms
    assert!(p_s_bound_case1(0.1, 64) > 0.0 && p_s_bound_case2(0.1, 64) > 0.0);
    report("bound-suites", pass, desc.trim_end_matches("; "));
}

#[test]
fn c7_depth_claims() {
    // merge-block depth affine in n
    let depths: Vec<isize> =
        (1..=10).map(|n| build_concat_circuit(n).unwrap().decompose().depth() as isize).collect();
    let diffs: Vec<isize> = depths.windows(2).map(|w| w[1] - w[0]).collect();
    let affine = diffs.iter().all(|d| *d == diffs[0]);

    // full network depth under a quadratic envelope
    let net_depths: Vec<(usize, usize)> = (2..=8)
        .map(|m| (m, build_full_network(&uniform_vector(m), 1).unwrap().decompose().depth()))
        .collect();
    let quadratic = net_depths.iter().all(|(m, d)| *d <= 11 * m * m + 10);

    // light cones of our own networks respect the depth lower bound
    let mut cone_ok = true;
    for m in [3usize, 5] {
        let c = build_full_network(&uniform_vector(m), 1).unwrap().decompose();
        let sched = schedule_from_circuit(&c);
        let cone = sched.light_cone(0).unwrap();
        let dim = 1usize << m;
        cone_ok &= cone.len() >= dim
            && (sched.num_layers() as f64) >= depth_lower_bound(dim, sched.k());
    }
    report(
        "depth-claims",
        affine && quadratic && cone_ok,
        &format!("block depths {depths:?}; network depths {net_depths:?}"),
    );
}

#[test]
fn c8_property_suites() {
    // binomial distribution of batched concatenation successes
    let v = uniform_vector(1);
    let a = LabelState::encode(&v);
    let batch = 8u64;
    let p = compute_p_plus(a.norm_sq(), a.norm_sq(), v.len()).unwrap();
    let samples: Vec<u64> = (0..10_000u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive(37, 0xacc8, trial);
            (0..batch)
                .filter(|_| concatenate(&a, &a, &mut rng).unwrap().sampled_success)
                .count() as u64
        })
        .collect();
    let pvalue = binomial_chi_square_pvalue(&samples, batch, p);

    // residual register disentangles after every concatenation
    let mut purity_ok = true;
    let mut rng = derive(37, 0xacc9, 0);
    for _ in 0..20 {
        let dim = 1usize << rng.gen_range(1..=3);
        let (x, y) = (random_positive(dim, &mut rng), random_disk(dim, &mut rng));
        let (lx, ly) = (LabelState::encode(&x), LabelState::encode(&y));
        let c = build_concat_circuit(x.num_qubits()).unwrap();
        let input = PureState::zero(1).tensor(lx.state()).tensor(ly.state());
        let (_, post) = c.apply(&input).unwrap();
        let leading: Vec<usize> = (0..x.num_qubits() + 2).collect();
        purity_ok &= post.purity(&leading).unwrap() >= 1.0 - 1e-10;
    }

    // decode round-trips
    let mut decode_ok = true;
    for _ in 0..50 {
        let dim = 1usize << rng.gen_range(1..=4);
        let v = random_disk(dim, &mut rng);
        let back = LabelState::encode(&v).decode().unwrap();
        decode_ok &= back.max_entry_dev(&v) < 1e-9;
    }

    // emit/parse round-trips
    let mut emit_ok = true;
    for _ in 0..20 {
        let mut c = qsprep_core::circuit::Circuit::new(6);
        for _ in 0..rng.gen_range(1..=12) {
            let q1 = rng.gen_range(0..6);
            let q2 = (q1 + rng.gen_range(1..6)) % 6;
            let g = if rng.gen_bool(0.5) {
                Gate::Cnot { control: q1, target: q2 }
            } else {
                Gate::Project { q: q1, onto: qsprep_core::circuit::Basis::Plus }
            };
            c.push(g).unwrap();
        }
        emit_ok &= parse(&emit(&c)).unwrap() == c;
    }

    let pass = pvalue > 1e-3 && purity_ok && decode_ok && emit_ok;
    report(
        "property-suites",
        pass,
        &format!(
            "chi-square p {pvalue:.4}; purity {purity_ok}; decode {decode_ok}; emit/parse {emit_ok}"
        ),
    );
}
