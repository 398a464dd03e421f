//! The concatenation step and its projections.
//!
//! `concatenate` merges the label states of two N-dimensional vectors into
//! the label state of their 2N-dimensional concatenation, succeeding with
//! probability p₊ = N(A_a+A_b)/(4 A_a A_b). `project_value_qubit` turns a
//! label state into the amplitude encoding with probability
//! p_s = Σ|v_i|²/A. Complex data goes through the four-positive-vector
//! route: `decompose_complex` splits v into va - vb + i·vc - i·vd and
//! `assemble_complex` recombines the four prepared label states with
//! doubly controlled swaps and five |+⟩ projections.

use num_complex::Complex64;
use rand::Rng;

use crate::encoding::{LabelState, ResizedVector};
use crate::error::{Error, Result};
use crate::state::{ket_minus, ket_plus, ket_zero, C64, PureState};

/// p₊ = N(A_a + A_b) / (4 A_a A_b) for inputs of dimension N.
pub fn compute_p_plus(a_a: f64, a_b: f64, dim: usize) -> Result<f64> {
    if a_a <= 0.0 || a_b <= 0.0 {
        return Err(Error::NonpositiveNorm);
    }
    Ok(dim as f64 * (a_a + a_b) / (4.0 * a_a * a_b))
}

/// Result of one concatenation attempt.
pub struct ConcatOutcome {
    /// Analytic success probability of the |+⟩ projection.
    pub p_plus: f64,
    /// Bernoulli(p₊) draw from the caller's RNG.
    pub sampled_success: bool,
    /// The 2N-dimensional label state (success only).
    pub output: Option<LabelState>,
    /// The disentangled trailing factor, |+⟩^(n+1) (success only).
    pub residue: Option<PureState>,
    /// The orthogonal-outcome state; callers discard it and restart.
    pub failure_state: Option<PureState>,
}

/// Merge two label states of equal dimension.
///
/// Builds |+⟩ ⊗ a ⊗ b, applies one controlled swap per qubit pair, and
/// projects the trailing value qubit onto |+⟩. The simulator's projection
/// probability is checked against the closed form at 1e-10.
pub fn concatenate(a: &LabelState, b: &LabelState, rng: &mut impl Rng) -> Result<ConcatOutcome> {
    let (p_plus, full, output, residue) = concat_circuit(a, b)?;
    let sampled_success = rng.gen_bool(p_plus.min(1.0));
    if !sampled_success {
        let value_b = full.num_qubits() - 1;
        let failure = match full.project(value_b, &ket_minus()) {
            Ok((_, s)) => Some(s),
            // p₊ = 1: the failure branch has zero norm
            Err(Error::ImpossibleOutcome) => None,
            Err(e) => return Err(e),
        };
        return Ok(ConcatOutcome {
            p_plus,
            sampled_success: false,
            output: None,
            residue: None,
            failure_state: failure,
        });
    }
    Ok(ConcatOutcome {
        p_plus,
        sampled_success: true,
        output: Some(output),
        residue: Some(residue),
        failure_state: None,
    })
}

/// Concatenation with the |+⟩ outcome post-selected: returns the success
/// probability together with the merged label state and the disentangled
/// residue. Callers sample successes themselves (e.g. binomially over a
/// batch of identical copies).
pub fn concatenate_postselected(
    a: &LabelState,
    b: &LabelState,
) -> Result<(f64, LabelState, PureState)> {
    let (p_plus, _, output, residue) = concat_circuit(a, b)?;
    Ok((p_plus, output, residue))
}

fn concat_circuit(
    a: &LabelState,
    b: &LabelState,
) -> Result<(f64, PureState, LabelState, PureState)> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "cannot concatenate dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let a_a = a.norm_sq();
    let a_b = b.norm_sq();
    let p_plus = compute_p_plus(a_a, a_b, a.dim())?;

    let mut plus = PureState::zero(1);
    plus.apply_1q(0, &crate::state::gates::h())?;
    let mut full = plus.tensor(a.state()).tensor(b.state());
    let block = n + 1;
    for i in 0..block {
        full.apply_cswap(0, 1 + i, 1 + block + i)?;
    }
    let value_b = 2 * block; // last qubit of the register
    let (prob, post) = full.project(value_b, &ket_plus())?;
    assert!(
        (prob - p_plus).abs() <= 1e-10 * p_plus.max(1.0),
        "projection probability {prob} disagrees with closed form {p_plus}"
    );

    // trailing block must disentangle into |+⟩^(n+1)
    let trailing: Vec<usize> = (1 + block..=2 * block).collect();
    let (is_product, residue) = post.factor_check(&trailing)?;
    if !is_product {
        return Err(Error::NotALabelState(
            "trailing block did not disentangle after projection".into(),
        ));
    }
    let leading: Vec<usize> = (0..1 + block).collect();
    let (is_product, head) = post.factor_check(&leading)?;
    if !is_product {
        return Err(Error::NotALabelState(
            "leading block entangled with residue".into(),
        ));
    }
    let output = LabelState::from_state(head.unwrap().with_norm_sq(a_a + a_b))?;
    Ok((p_plus, full, output, residue.unwrap()))
}

/// Project the value qubit onto |0⟩, turning the label state into the
/// amplitude encoding of its vector.
pub fn project_value_qubit(ls: &LabelState) -> Result<(f64, PureState)> {
    let n = ls.n();
    let (p_s, post) = match ls.state().project(n, &ket_zero()) {
        Ok(r) => r,
        Err(Error::ImpossibleOutcome) => return Err(Error::ZeroSuccessProbability),
        Err(e) => return Err(e),
    };
    // the label qubits carry the amplitude encoding; peel off the |0⟩ value qubit
    let amps: Vec<C64> = (0..ls.dim()).map(|i| post.amps()[2 * i]).collect();
    let mut psi = PureState::from_unnormalized(n, amps)?;
    psi.canonicalize_phase();
    Ok((p_s, psi))
}

/// v split into four positive vectors: v = va - vb + i·vc - i·vd.
#[derive(Debug, Clone)]
pub struct ComplexDecomposition {
    pub va: ResizedVector,
    pub vb: ResizedVector,
    pub vc: ResizedVector,
    pub vd: ResizedVector,
}

impl ComplexDecomposition {
    pub fn reconstruct(&self) -> Vec<C64> {
        let i = C64::new(0.0, 1.0);
        self.va
            .entries()
            .iter()
            .zip(self.vb.entries())
            .zip(self.vc.entries())
            .zip(self.vd.entries())
            .map(|(((a, b), c), d)| a - b + i * c - i * d)
            .collect()
    }
}

/// Elementwise split by sign of real and imaginary parts.
pub fn decompose_complex(v: &ResizedVector) -> ComplexDecomposition {
    let part = |f: fn(&Complex64) -> f64| -> ResizedVector {
        let entries: Vec<C64> = v.entries().iter().map(|e| C64::new(f(e).max(0.0), 0.0)).collect();
        ResizedVector::new(entries).expect("parts stay in the unit disk")
    };
    ComplexDecomposition {
        va: part(|e| e.re),
        vb: part(|e| -e.re),
        vc: part(|e| e.im),
        vd: part(|e| -e.im),
    }
}

/// Result of the four-vector recombination.
pub struct ComplexAssembly {
    /// Analytic overall success probability of the five projections.
    pub p_s_prime: f64,
    pub sampled_success: bool,
    /// Amplitude encoding |ψ(v)⟩ on n qubits (success only).
    pub state: Option<PureState>,
}

/// Combine four prepared label states into the amplitude encoding of
/// v = va - vb + i·vc - i·vd.
///
/// Register layout: two ancillas, then blocks a, b, c, d of n+1 qubits each.
/// Ancillas start in (|0⟩+i|1⟩)/√2 and (|0⟩−|1⟩)/√2; three groups of
/// doubly controlled swaps exchange block a with b, c, d on ancilla
/// patterns 01, 10, 11; then both ancillas and the value qubits of blocks
/// b, c, d are projected onto |+⟩.
pub fn assemble_complex(
    d: &ComplexDecomposition,
    states: [&LabelState; 4],
    rng: &mut impl Rng,
) -> Result<ComplexAssembly> {
    let (p_s_prime, state) = assemble_complex_postselected(d, states)?;
    let sampled_success = rng.gen_bool(p_s_prime.min(1.0));
    Ok(ComplexAssembly {
        p_s_prime,
        sampled_success,
        state: if sampled_success { Some(state) } else { None },
    })
}

/// Recombination with all five projections post-selected: returns the
/// joint success probability and the output amplitude encoding. Callers
/// sample successes themselves (the outcome state is deterministic, so
/// repeated attempts need not re-simulate).
pub fn assemble_complex_postselected(
    d: &ComplexDecomposition,
    states: [&LabelState; 4],
) -> Result<(f64, PureState)> {
    let n = d.va.num_qubits();
    let dim = d.va.len();
    for (ls, v) in states.iter().zip([&d.va, &d.vb, &d.vc, &d.vd]) {
        if ls.n() != n {
            return Err(Error::DimensionMismatch("block dimension mismatch".into()));
        }
        let dec = ls.decode()?;
        if dec.max_entry_dev(v) > 1e-8 {
            return Err(Error::NotALabelState(
                "supplied state does not decode to its decomposition vector".into(),
            ));
        }
    }

    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let anc1 = PureState::from_unnormalized(
        1,
        vec![C64::new(inv_sqrt2, 0.0), C64::new(0.0, inv_sqrt2)],
    )?;
    let anc2 = PureState::from_unnormalized(
        1,
        vec![C64::new(inv_sqrt2, 0.0), C64::new(-inv_sqrt2, 0.0)],
    )?;
    let mut full = anc1
        .tensor(&anc2)
        .tensor(states[0].state())
        .tensor(states[1].state())
        .tensor(states[2].state())
        .tensor(states[3].state());

    let block = n + 1;
    let base = |slot: usize| 2 + slot * block;
    // ancilla pattern 01 swaps a and b, 10 swaps a and c, 11 swaps a and d
    for (slot, (p1, p2)) in [(1, (false, true)), (2, (true, false)), (3, (true, true))] {
        for i in 0..block {
            full.apply_ccswap(0, 1, p1, p2, base(0) + i, base(slot) + i)?;
        }
    }

    let mut prob_product = 1.0;
    let mut cur = full;
    let proj_targets = [
        0,
        1,
        base(1) + block - 1,
        base(2) + block - 1,
        base(3) + block - 1,
    ];
    for q in proj_targets {
        let (p, post) = match cur.project(q, &ket_plus()) {
            Ok(r) => r,
            Err(Error::ImpossibleOutcome) => return Err(Error::ZeroSuccessProbability),
            Err(e) => return Err(e),
        };
        prob_product *= p;
        cur = post;
    }

    // closed form: the joint success probability is
    // (N³/16)·Σ|v_i|² / (4·A_a·A_b·A_c·A_d)
    let sum_v_sq: f64 = d.reconstruct().iter().map(|e| e.norm_sqr()).sum();
    if sum_v_sq <= 0.0 {
        return Err(Error::ZeroSuccessProbability);
    }
    let norm_product: f64 = states.iter().map(|s| s.norm_sq()).product();
    let nf = dim as f64;
    let p_s_prime = nf.powi(3) / 16.0 * sum_v_sq / (4.0 * norm_product);
    assert!(
        (prob_product - p_s_prime).abs() <= 1e-10 * p_s_prime.max(1.0),
        "projection product {prob_product} disagrees with closed form {p_s_prime}"
    );

    // block a's label qubits now carry |ψ(v)⟩; everything else is product
    let label_a: Vec<usize> = (base(0)..base(0) + n).collect();
    let (is_product, factor) = cur.factor_check(&label_a)?;
    if !is_product {
        return Err(Error::NotALabelState(
            "output register entangled after assembly projections".into(),
        ));
    }
    Ok((p_s_prime, factor.unwrap()))
}
