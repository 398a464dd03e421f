//! Random data models and empirical verification of the projection
//! probability and cutoff-fidelity guarantees.
//!
//! Two sampling models are covered: entries b·e^{iφ} with b uniform on
//! [−1,1] and φ uniform on [0,π], and entries with independent standard
//! normal real and imaginary parts. For each model the exact projection
//! probabilities are computed per instance and compared against the
//! closed-form lower-bound constants; proven bounds may be slack but must
//! never be violated beyond binomial sampling error.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erf;

use crate::concat::decompose_complex;
use crate::encoding::{resize, AmplitudeVector, ResizedVector};
use crate::error::{Error, Result};
use crate::rng::{derive, mix};
use crate::state::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleCase {
    /// b_i uniform on [−1,1], phase uniform on [0,π].
    UniformCase1,
    /// Real and imaginary parts i.i.d. standard normal.
    GaussianCase2,
}

#[derive(Debug, Clone, Copy)]
pub struct SamplingModel {
    pub case: SampleCase,
    /// Dimension N (power of two).
    pub n: usize,
    /// Replace each entry by its modulus before normalizing.
    pub positive: bool,
}

/// Draw raw (unnormalized) entries for one instance.
pub fn sample_raw(model: &SamplingModel, rng: &mut impl Rng) -> Vec<C64> {
    (0..model.n)
        .map(|_| {
            let a = match model.case {
                SampleCase::UniformCase1 => {
                    let b = rng.gen_range(-1.0..=1.0f64);
                    let phi = rng.gen_range(0.0..=std::f64::consts::PI);
                    C64::from_polar(b.abs(), phi) * b.signum()
                }
                SampleCase::GaussianCase2 => {
                    use rand_distr::{Distribution, StandardNormal};
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im)
                }
            };
            if model.positive { C64::new(a.norm(), 0.0) } else { a }
        })
        .collect()
}

/// Draw one normalized data vector.
pub fn sample(model: &SamplingModel, rng: &mut impl Rng) -> AmplitudeVector {
    AmplitudeVector::from_unnormalized(sample_raw(model, rng))
        .expect("random draw is nonzero almost surely")
}

/// Value-qubit projection probability Σ|v_i|² / Σ(|v_i|² + |1−v_i|²).
pub fn p_s_of(v: &ResizedVector) -> f64 {
    let num: f64 = v.entries().iter().map(|e| e.norm_sqr()).sum();
    num / v.label_norm_sq()
}

/// Four-vector route projection probability
/// (N³/16)·Σ|v_i|² / (4·A_a·A_b·A_c·A_d), evaluated classically.
pub fn p_s_prime_of(v: &ResizedVector) -> f64 {
    let d = decompose_complex(v);
    let prod = d.va.label_norm_sq()
        * d.vb.label_norm_sq()
        * d.vc.label_norm_sq()
        * d.vd.label_norm_sq();
    let num: f64 = v.entries().iter().map(|e| e.norm_sqr()).sum();
    let nf = v.len() as f64;
    nf.powi(3) / 16.0 * num / (4.0 * prod)
}

/// Closed-form p_s lower bound for the uniform sampling model:
/// (1/5)(δ/2)^(2/N) / (1 − (1/5)(δ/2)^(2/N)).
pub fn p_s_bound_case1(delta: f64, n: usize) -> f64 {
    let x = 0.2 * (delta / 2.0).powf(2.0 / n as f64);
    x / (1.0 - x)
}

/// Closed-form p_s lower bound for the Gaussian sampling model:
/// (δ/2)^(1/N) / (4 log(2N/δ)).
pub fn p_s_bound_case2(delta: f64, n: usize) -> f64 {
    (delta / 2.0).powf(1.0 / n as f64) / (4.0 * (2.0 * n as f64 / delta).ln())
}

/// The four-vector route loses exactly a factor 64 against the positive
/// route at fixed Σ|v_i|², so its bounds are the p_s constants over 64.
pub fn p_s_prime_bound(case: SampleCase, delta: f64, n: usize) -> f64 {
    match case {
        SampleCase::UniformCase1 => p_s_bound_case1(delta, n) / 64.0,
        SampleCase::GaussianCase2 => p_s_bound_case2(delta, n) / 64.0,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Result4Report {
    pub trials: usize,
    pub delta: f64,
    pub n: usize,
    pub bound_p_s: f64,
    pub bound_p_s_prime: f64,
    pub violations_p_s: usize,
    pub violations_p_s_prime: usize,
    /// Binomial 3σ radius at rate δ over `trials`.
    pub three_sigma: f64,
    /// Gaussian model only: trials with max|a_i|² ≥ 2 log(2N/δ).
    pub max_tail_hits: Option<usize>,
    pub pass: bool,
}

/// Check the projection probability lower bounds over random instances.
///
/// The p_s guarantee covers data brought to nonnegative form, so each
/// draw is checked through its modulus vector; the four-vector route
/// guarantee covers the complex draw directly.
pub fn verify_result4(
    case: SampleCase,
    n: usize,
    trials: usize,
    delta: f64,
    seed: u64,
) -> Result<Result4Report> {
    if trials < 100 {
        return Err(Error::InvalidConfig("need at least 100 trials".into()));
    }
    let bound_p_s = match case {
        SampleCase::UniformCase1 => p_s_bound_case1(delta, n),
        SampleCase::GaussianCase2 => p_s_bound_case2(delta, n),
    };
    let bound_p_s_prime = p_s_prime_bound(case, delta, n);
    let tail_threshold = 2.0 * (2.0 * n as f64 / delta).ln();
    let rows = result4_trials(case, n, trials, seed);

    let violations_p_s = rows.iter().filter(|r| r.p_s_modulus < bound_p_s).count();
    let violations_p_s_prime =
        rows.iter().filter(|r| r.p_s_prime < bound_p_s_prime).count();
    let max_tail_hits = match case {
        SampleCase::GaussianCase2 => {
            Some(rows.iter().filter(|r| r.max_abs_sq >= tail_threshold).count())
        }
        SampleCase::UniformCase1 => None,
    };
    let tf = trials as f64;
    let three_sigma = 3.0 * (delta * (1.0 - delta) / tf).sqrt();
    let limit = (delta + three_sigma) * tf;
    let mut pass = (violations_p_s as f64) <= limit && (violations_p_s_prime as f64) <= limit;
    if let Some(hits) = max_tail_hits {
        // the tail bound is δ/2; allow its own 3σ slack
        let half_sigma = 3.0 * (delta / 2.0 * (1.0 - delta / 2.0) / tf).sqrt();
        pass &= (hits as f64) <= (delta / 2.0 + half_sigma) * tf;
    }
    Ok(Result4Report {
        trials,
        delta,
        n,
        bound_p_s,
        bound_p_s_prime,
        violations_p_s,
        violations_p_s_prime,
        three_sigma,
        max_tail_hits,
        pass,
    })
}

/// One sampled instance of the projection-probability checks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Result4Trial {
    pub trial: u64,
    /// p_s of the draw brought to nonnegative form.
    pub p_s_modulus: f64,
    /// Four-vector route probability of the complex draw.
    pub p_s_prime: f64,
    pub max_abs_sq: f64,
}

/// The per-trial values behind [`verify_result4`], for external dumps.
pub fn result4_trials(
    case: SampleCase,
    n: usize,
    trials: usize,
    seed: u64,
) -> Vec<Result4Trial> {
    let model = SamplingModel { case, n, positive: false };
    let stream = mix(&[0x72347265, seed]);
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive(seed, stream, trial);
            let raw = sample_raw(&model, &mut rng);
            let max_abs_sq = raw.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
            let moduli: Vec<C64> = raw.iter().map(|a| C64::new(a.norm(), 0.0)).collect();
            let u_pos = AmplitudeVector::from_unnormalized(moduli).expect("nonzero draw");
            let u = AmplitudeVector::from_unnormalized(raw).expect("nonzero draw");
            Result4Trial {
                trial,
                p_s_modulus: p_s_of(&resize(&u_pos)),
                p_s_prime: p_s_prime_of(&resize(&u)),
                max_abs_sq,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffPlan {
    pub u_cut: f64,
    pub epsilon_th: f64,
    pub delta: f64,
}

impl CutoffPlan {
    /// Derive the cutoff from the guarantee parameters:
    /// u_cut² = (8/N)(4/δ)^(1/N) log(12/(ε_th δ)).
    pub fn auto(n: usize, epsilon_th: f64, delta: f64) -> Self {
        let u_cut_sq = 8.0 / n as f64
            * (4.0 / delta).powf(1.0 / n as f64)
            * (12.0 / (epsilon_th * delta)).ln();
        Self { u_cut: u_cut_sq.sqrt(), epsilon_th, delta }
    }
}

/// Clip moduli at the cutoff: ṽ_i = phase(u_i)·min(|u_i|/u_cut, 1), with
/// phase 1 for zero entries.
pub fn cutoff_vector(u: &AmplitudeVector, plan: &CutoffPlan) -> ResizedVector {
    let entries: Vec<C64> = u
        .entries()
        .iter()
        .map(|e| {
            let phase = if e.norm() > 0.0 { e / e.norm() } else { C64::new(1.0, 0.0) };
            phase * (e.norm() / plan.u_cut).min(1.0)
        })
        .collect();
    ResizedVector::new(entries).expect("clipped entries stay in the unit disk")
}

/// F = |⟨φ(ṽ)|φ(u)⟩|² with both vectors normalized.
pub fn fidelity(u: &AmplitudeVector, vtilde: &ResizedVector) -> Result<f64> {
    if u.len() != vtilde.len() {
        return Err(Error::DimensionMismatch("fidelity arguments differ".into()));
    }
    let norm_sq: f64 = vtilde.entries().iter().map(|e| e.norm_sqr()).sum();
    if norm_sq <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let ip: C64 = vtilde
        .entries()
        .iter()
        .zip(u.entries())
        .map(|(t, u)| t.conj() * u)
        .sum();
    Ok(ip.norm_sqr() / norm_sq)
}

/// Projection probability floor of the cutoff guarantee:
/// C_p = (δ/4)^(2/N) / (96 log(12/(ε_th δ)) log(4/δ)).
pub fn c_p(n: usize, epsilon_th: f64, delta: f64) -> f64 {
    (delta / 4.0).powf(2.0 / n as f64)
        / (96.0 * (12.0 / (epsilon_th * delta)).ln() * (4.0 / delta).ln())
}

/// The same floor written in terms of an explicit cutoff:
/// (δ/4)^(1/N) / (12 N u_cut² log(4/δ)).
pub fn c_p_from_cutoff(n: usize, u_cut: f64, delta: f64) -> f64 {
    (delta / 4.0).powf(1.0 / n as f64)
        / (12.0 * n as f64 * u_cut * u_cut * (4.0 / delta).ln())
}

#[derive(Debug, Clone, Serialize)]
pub struct Result5Report {
    pub trials: usize,
    pub n: usize,
    pub epsilon_th: f64,
    pub delta: f64,
    pub plan_u_cut: f64,
    pub c_p: f64,
    /// Trials with F ≥ 1 − ε_th.
    pub fidelity_hits: usize,
    /// Trials with p_s(ṽ) ≥ C_p.
    pub prob_hits: usize,
    /// Trials with both.
    pub joint_hits: usize,
    pub pass: bool,
}

/// Check the joint cutoff guarantee on Gaussian-model data: with
/// probability at least 1 − δ, the clipped vector keeps fidelity at least
/// 1 − ε_th and projection probability at least C_p.
pub fn verify_result5(
    epsilon_th: f64,
    delta: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Result5Report> {
    if !(0.0..1.0).contains(&epsilon_th) || !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidConfig("epsilon_th, delta must sit in (0,1)".into()));
    }
    let plan = CutoffPlan::auto(n, epsilon_th, delta);
    let cp = c_p(n, epsilon_th, delta);
    let rows = result5_trials(epsilon_th, delta, n, trials, seed);
    let fidelity_hits = rows.iter().filter(|r| r.fidelity >= 1.0 - epsilon_th).count();
    let prob_hits = rows.iter().filter(|r| r.p_s >= cp).count();
    let joint_hits = rows
        .iter()
        .filter(|r| r.fidelity >= 1.0 - epsilon_th && r.p_s >= cp)
        .count();
    let tf = trials as f64;
    let sigma = (delta * (1.0 - delta) / tf).sqrt();
    let pass = joint_hits as f64 >= (1.0 - delta - 3.0 * sigma) * tf;
    Ok(Result5Report {
        trials,
        n,
        epsilon_th,
        delta,
        plan_u_cut: plan.u_cut,
        c_p: cp,
        fidelity_hits,
        prob_hits,
        joint_hits,
        pass,
    })
}

/// One sampled instance of the cutoff check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Result5Trial {
    pub trial: u64,
    /// Fidelity of the clipped vector against the raw draw.
    pub fidelity: f64,
    /// Projection probability of the clipped vector.
    pub p_s: f64,
}

/// The per-trial values behind [`verify_result5`], for external dumps.
pub fn result5_trials(
    epsilon_th: f64,
    delta: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Vec<Result5Trial> {
    let plan = CutoffPlan::auto(n, epsilon_th, delta);
    let model = SamplingModel { case: SampleCase::GaussianCase2, n, positive: false };
    let stream = mix(&[0x72357265, seed]);
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive(seed, stream, trial);
            let u = sample(&model, &mut rng);
            let vt = cutoff_vector(&u, &plan);
            let fidelity = fidelity(&u, &vt).expect("cutoff vector is nonzero");
            Result5Trial { trial, fidelity, p_s: p_s_of(&vt) }
        })
        .collect()
}

/// Moment-generating evaluations anchoring the tail-bound derivations.
pub mod mgf {
    use super::erf;

    /// E[e^{−t b²}] for b uniform on [−1,1]: √π·erf(√t)/(2√t).
    pub fn uniform_sq(t: f64) -> f64 {
        assert!(t > 0.0);
        let s = t.sqrt();
        std::f64::consts::PI.sqrt() * erf(s) / (2.0 * s)
    }

    /// E[e^{−t|a|²}] for a with standard normal real and imaginary parts:
    /// 1/(1+2t).
    pub fn normal_abs_sq(t: f64) -> f64 {
        assert!(t >= 0.0);
        1.0 / (1.0 + 2.0 * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn samples_are_unit_norm() {
        let mut rng = ChaCha12Rng::seed_from_u64(61);
        for case in [SampleCase::UniformCase1, SampleCase::GaussianCase2] {
            for positive in [false, true] {
                let model = SamplingModel { case, n: 64, positive };
                let u = sample(&model, &mut rng);
                let norm: f64 = u.entries().iter().map(|e| e.norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12);
                if positive {
                    assert!(u.entries().iter().all(|e| e.im == 0.0 && e.re >= 0.0));
                }
            }
        }
    }

    #[test]
    fn gaussian_mean_modulus_squared_is_two() {
        let mut rng = ChaCha12Rng::seed_from_u64(62);
        let model = SamplingModel { case: SampleCase::GaussianCase2, n: 64, positive: false };
        let draws = 2_000usize;
        let mut total = 0.0;
        let mut count = 0usize;
        for _ in 0..draws {
            for a in sample_raw(&model, &mut rng) {
                total += a.norm_sqr();
                count += 1;
            }
        }
        let mean = total / count as f64;
        // var(|a|²) = 4 for the two-component Gaussian
        let sigma = (4.0f64 / count as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * sigma + 0.01, "mean {mean}");
    }

    #[test]
    fn uniform_mean_square_is_third() {
        let mut rng = ChaCha12Rng::seed_from_u64(63);
        let model = SamplingModel { case: SampleCase::UniformCase1, n: 64, positive: false };
        let draws = 2_000usize;
        let mut total = 0.0;
        let mut count = 0usize;
        for _ in 0..draws {
            for a in sample_raw(&model, &mut rng) {
                total += a.norm_sqr();
                count += 1;
            }
        }
        let mean = total / count as f64;
        let sigma = (0.1f64 / count as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * sigma + 0.005, "mean {mean}");
    }

    #[test]
    fn p_s_matches_statevector_route() {
        use crate::concat::project_value_qubit;
        use crate::encoding::LabelState;
        let mut rng = ChaCha12Rng::seed_from_u64(64);
        for case in [SampleCase::UniformCase1, SampleCase::GaussianCase2] {
            let model = SamplingModel { case, n: 16, positive: true };
            for _ in 0..10 {
                let u = sample(&model, &mut rng);
                let v = resize(&u);
                let ls = LabelState::encode(&v);
                let (p_sim, _) = project_value_qubit(&ls).unwrap();
                assert!((p_sim - p_s_of(&v)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn p_s_prime_matches_statevector_route() {
        use crate::concat::{assemble_complex, decompose_complex};
        use crate::encoding::LabelState;
        let mut rng = ChaCha12Rng::seed_from_u64(65);
        let model = SamplingModel { case: SampleCase::GaussianCase2, n: 8, positive: false };
        for _ in 0..5 {
            let u = sample(&model, &mut rng);
            let v = resize(&u);
            let d = decompose_complex(&v);
            let blocks = [
                LabelState::encode(&d.va),
                LabelState::encode(&d.vb),
                LabelState::encode(&d.vc),
                LabelState::encode(&d.vd),
            ];
            let out = assemble_complex(
                &d,
                [&blocks[0], &blocks[1], &blocks[2], &blocks[3]],
                &mut rng,
            )
            .unwrap();
            assert!((out.p_s_prime - p_s_prime_of(&v)).abs() < 1e-9);
        }
    }

    #[test]
    fn result4_passes_both_cases() {
        for case in [SampleCase::UniformCase1, SampleCase::GaussianCase2] {
            let rep = verify_result4(case, 64, 2_000, 0.1, 7).unwrap();
            assert!(rep.pass, "{case:?}: {rep:?}");
            assert_eq!(rep.violations_p_s + rep.violations_p_s_prime, 0, "{rep:?}");
        }
    }

    #[test]
    fn result4_needs_enough_trials() {
        assert!(verify_result4(SampleCase::UniformCase1, 64, 10, 0.1, 0).is_err());
    }

    #[test]
    fn cutoff_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(66);
        let model = SamplingModel { case: SampleCase::GaussianCase2, n: 16, positive: false };
        let u = sample(&model, &mut rng);
        // cutoff at the maximum modulus reproduces resize exactly
        let max = u.entries().iter().map(|e| e.norm()).fold(0.0, f64::max);
        let plan = CutoffPlan { u_cut: max, epsilon_th: 0.05, delta: 0.1 };
        let vt = cutoff_vector(&u, &plan);
        assert!(vt.max_entry_dev(&resize(&u)) < 1e-12);
        assert!((fidelity(&u, &vt).unwrap() - 1.0).abs() < 1e-12);
        // vanishing cutoff saturates every modulus
        let plan = CutoffPlan { u_cut: 1e-12, epsilon_th: 0.05, delta: 0.1 };
        let vt = cutoff_vector(&u, &plan);
        for e in vt.entries() {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_monotone_in_u_cut() {
        let mut rng = ChaCha12Rng::seed_from_u64(67);
        let model = SamplingModel { case: SampleCase::GaussianCase2, n: 32, positive: false };
        let u = sample(&model, &mut rng);
        let mean_sq = |v: &ResizedVector| -> f64 {
            v.entries().iter().map(|e| e.norm_sqr()).sum::<f64>() / v.len() as f64
        };
        let mut prev = f64::INFINITY;
        for u_cut in [0.01, 0.05, 0.1, 0.2, 0.5] {
            let plan = CutoffPlan { u_cut, epsilon_th: 0.05, delta: 0.1 };
            let cur = mean_sq(&cutoff_vector(&u, &plan));
            assert!(cur <= prev + 1e-12);
            prev = cur;
        }
    }

    #[test]
    fn fidelity_properties() {
        let u = AmplitudeVector::from_unnormalized(vec![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
        ])
        .unwrap();
        // proportional vector: F = 1
        let vt = resize(&u);
        assert!((fidelity(&u, &vt).unwrap() - 1.0).abs() < 1e-12);
        // orthogonal supports: F = 0
        let w = ResizedVector::new(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(w.is_ok());
        let vt = ResizedVector::new(vec![C64::new(0.8, 0.0), C64::new(0.0, -0.6)]).unwrap();
        let u2 = AmplitudeVector::from_unnormalized(vec![
            C64::new(0.0, 0.6),
            C64::new(0.8, 0.0),
        ])
        .unwrap();
        let orth = ResizedVector::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let u3 =
            AmplitudeVector::from_unnormalized(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
                .unwrap();
        assert!(fidelity(&u3, &orth).unwrap() < 1e-15);
        // global phase insensitivity
        let f1 = fidelity(&u2, &vt).unwrap();
        let phased: Vec<C64> = vt.entries().iter().map(|e| e * C64::from_polar(1.0, 1.3)).collect();
        let f2 = fidelity(&u2, &ResizedVector::new(phased).unwrap()).unwrap();
        assert!((f1 - f2).abs() < 1e-12);
    }

    #[test]
    fn c_p_self_consistency() {
        for (eps, delta, n) in [(0.05, 0.1, 128usize), (0.1, 0.2, 256), (0.02, 0.05, 64)] {
            let plan = CutoffPlan::auto(n, eps, delta);
            let via_cutoff = c_p_from_cutoff(n, plan.u_cut, delta);
            let closed = c_p(n, eps, delta);
            assert!(
                (via_cutoff - closed).abs() <= 1e-12 * closed,
                "{via_cutoff} vs {closed}"
            );
        }
    }

    #[test]
    fn result5_passes() {
        for (eps, delta) in [(0.05, 0.1), (0.1, 0.2)] {
            for n in [128usize, 256] {
                let rep = verify_result5(eps, delta, n, 1_000, 11).unwrap();
                assert!(rep.pass, "eps={eps} delta={delta} n={n}: {rep:?}");
            }
        }
    }

    #[test]
    fn result5_degenerate_delta() {
        let rep = verify_result5(0.05, 0.999, 64, 200, 3).unwrap();
        assert!(rep.pass);
        assert!(rep.c_p.is_finite());
    }

    #[test]
    fn mgf_against_quadrature() {
        // trapezoid quadrature oracles for both moment evaluations
        for t in [0.25f64, 1.0, 4.0] {
            let steps = 400_000;
            let mut acc = 0.0;
            for k in 0..=steps {
                let b = -1.0 + 2.0 * k as f64 / steps as f64;
                let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
                acc += w * (-t * b * b).exp();
            }
            let numeric = acc * (2.0 / steps as f64) / 2.0; // average over [−1,1]
            assert!((mgf::uniform_sq(t) - numeric).abs() < 1e-8, "t={t}");
        }
        for t in [0.25f64, 1.0, 4.0] {
            // |a|²/2 is Exp(1) distributed: integrate e^{−2ts} e^{−s} ds
            let steps = 400_000;
            let hi = 40.0;
            let mut acc = 0.0;
            for k in 0..=steps {
                let s = hi * k as f64 / steps as f64;
                let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
                acc += w * (-2.0 * t * s - s).exp();
            }
            let numeric = acc * hi / steps as f64;
            assert!((mgf::normal_abs_sq(t) - numeric).abs() < 1e-6, "t={t}");
        }
    }
}
