//! Preparation strategy drivers.
//!
//! All strategies build a label state bottom-up from 2-dimensional leaves
//! through a binary tree of concatenations. A tree with L concatenation
//! levels has 2^L leaves and produces a 2^(L+1)-dimensional vector; the
//! batch that merges two 2^l-dimensional halves (level l) charges l steps.
//! Time is wall-clock: parallel children cost the max of their times,
//! sequential children the sum, and retries accumulate.
//!
//! Two engines share the control flow. The exact engine carries real
//! statevectors through the concatenation circuit; the classical engine
//! tracks only the norms A that the success probability depends on, which
//! makes runtime statistics exact at sizes where states are unaffordable.

use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::Binomial;

use crate::concat::{
    assemble_complex_postselected, compute_p_plus, concatenate, concatenate_postselected, decompose_complex,
    project_value_qubit,
};
use crate::encoding::{label_norm_sq, resize, AmplitudeVector, LabelState, ResizedVector};
use crate::error::{Error, Result};
use crate::rng::{derive, mix};
use crate::state::{C64, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One attempt at a time, children prepared one after the other;
    /// any failure rebuilds both children.
    Sequential,
    /// c₀ copies at the leaves, batched concatenations, subtree retry on
    /// zero surviving copies.
    Parallel,
    /// Batched run of the whole tree with no internal retries, repeated
    /// until at least one copy survives.
    BatchedWholeTree,
    /// Parallel with 2^n_u-dimensional leaves built directly.
    Tradeoff,
}

/// Leaf copy count as a function of the leaf count N = 2^levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C0Policy {
    Constant(u64),
    /// ⌈N^(β_q − 1)⌉.
    Power(f64),
    /// ⌈N + N^(3/4)⌉.
    Supra,
}

impl C0Policy {
    pub fn value(&self, leaf_count: usize) -> u64 {
        let nf = leaf_count as f64;
        match self {
            C0Policy::Constant(k) => *k,
            C0Policy::Power(beta_q) => nf.powf(beta_q - 1.0).ceil() as u64,
            C0Policy::Supra => (nf + nf.powf(0.75)).ceil() as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    ExactStatevector,
    ClassicalCascade,
}

/// Where each node's success probability comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PPlusModel {
    /// p₊ = 1/2 at every node, the positive-data worst case.
    WorstCaseHalf,
    /// Computed from the tracked norms of the actual vector.
    Analytic,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct PrepConfig {
    pub mode: Mode,
    pub c0_policy: C0Policy,
    /// Tradeoff leaf size in qubits; 1 reduces to plain parallel.
    pub n_u: usize,
    pub engine: Engine,
    pub seed: u64,
    pub p_plus_model: PPlusModel,
    /// Abort once any subtree's accumulated charged steps exceed this.
    pub retry_cap: u64,
    /// Charged steps per tradeoff leaf; default 2^n_u − 2 (zero at n_u = 1).
    pub tradeoff_leaf_cost: Option<u64>,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Sequential,
            c0_policy: C0Policy::Constant(1),
            n_u: 1,
            engine: Engine::ExactStatevector,
            seed: 0,
            p_plus_model: PPlusModel::Analytic,
            retry_cap: 1_000_000_000,
            tradeoff_leaf_cost: None,
        }
    }
}

impl PrepConfig {
    fn leaf_qubits(&self) -> usize {
        match self.mode {
            Mode::Tradeoff => self.n_u,
            _ => 1,
        }
    }

    fn leaf_cost(&self) -> u64 {
        match self.mode {
            Mode::Tradeoff => self
                .tradeoff_leaf_cost
                .unwrap_or_else(|| (1u64 << self.n_u) - 2),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrepResult {
    /// Exact engine only.
    pub label_state: Option<LabelState>,
    /// The vector the output encodes (decoded for the exact engine).
    pub decoded: ResizedVector,
    /// Accumulated charged steps (wall-clock over parallel work).
    pub t_stp: u64,
    /// Number of failed batches that forced a rebuild.
    pub restarts: u64,
    /// Leaf copies alive at the start: c₀ × leaf count (1 for sequential).
    pub peak_parallel_copies: u64,
    /// Σ over batches of register size × batch size.
    pub total_qubit_touches: u64,
    /// Max of register size × simultaneous copies over all batches.
    pub peak_qubits: u64,
    /// Copy counts that survived each whole-tree pass (batched mode only).
    pub pass_copies: Vec<u64>,
}

struct Counters {
    restarts: u64,
    touches: u64,
    peak_qubits: u64,
    cap: u64,
}

impl Counters {
    fn new(cap: u64) -> Self {
        Self { restarts: 0, touches: 0, peak_qubits: 0, cap }
    }

    fn batch(&mut self, register: u64, copies: u64) {
        self.touches += register * copies;
        self.peak_qubits = self.peak_qubits.max(register * copies);
    }

    fn check(&self, t: u64) -> Result<()> {
        if t > self.cap {
            return Err(Error::RetryCapExceeded { cap: self.cap, t_stp: t });
        }
        Ok(())
    }
}

fn charge_of(half_qubits: usize) -> u64 {
    half_qubits as u64
}

// ---------------------------------------------------------------------------
// exact engine
// ---------------------------------------------------------------------------

struct ExactRun<'a> {
    cfg: &'a PrepConfig,
    counters: Counters,
}

impl ExactRun<'_> {
    /// Sequential strategy: one copy, failures rebuild both halves.
    fn seq(&mut self, entries: &[C64], stream: u64) -> Result<(LabelState, u64)> {
        if entries.len() == 1 << self.cfg.leaf_qubits() {
            let v = ResizedVector::new(entries.to_vec())?;
            return Ok((LabelState::encode(&v), self.cfg.leaf_cost()));
        }
        let half = entries.len() / 2;
        let half_qubits = half.trailing_zeros() as usize;
        let register = 2 * (half_qubits + 1) as u64 + 1;
        let mut t = 0u64;
        for attempt in 0u64.. {
            let (a, ta) = self.seq(&entries[..half], mix(&[stream, 1, attempt]))?;
            let (b, tb) = self.seq(&entries[half..], mix(&[stream, 2, attempt]))?;
            t = t
                .saturating_add(ta)
                .saturating_add(tb)
                .saturating_add(charge_of(half_qubits));
            self.counters.check(t)?;
            self.counters.batch(register, 1);
            let mut rng = derive(self.cfg.seed, stream, attempt);
            let out = concatenate(&a, &b, &mut rng)?;
            if out.sampled_success {
                return Ok((out.output.unwrap(), t));
            }
            self.counters.restarts += 1;
        }
        unreachable!()
    }

    /// Parallel strategy: returns the surviving copy count alongside the
    /// state; zero survivors trigger a subtree rebuild here (never at the
    /// caller).
    fn para(&mut self, entries: &[C64], c0: u64, stream: u64) -> Result<(LabelState, u64, u64)> {
        if entries.len() == 1 << self.cfg.leaf_qubits() {
            let v = ResizedVector::new(entries.to_vec())?;
            return Ok((LabelState::encode(&v), c0, self.cfg.leaf_cost()));
        }
        let half = entries.len() / 2;
        let half_qubits = half.trailing_zeros() as usize;
        let register = 2 * (half_qubits + 1) as u64 + 1;
        let mut t = 0u64;
        for attempt in 0u64.. {
            let (a, ca, ta) = self.para(&entries[..half], c0, mix(&[stream, 1, attempt]))?;
            let (b, cb, tb) = self.para(&entries[half..], c0, mix(&[stream, 2, attempt]))?;
            let c_min = ca.min(cb);
            let (p_plus, out, _residue) = concatenate_postselected(&a, &b)?;
            t = t
                .saturating_add(ta.max(tb))
                .saturating_add(charge_of(half_qubits));
            self.counters.check(t)?;
            self.counters.batch(register, c_min);
            let mut rng = derive(self.cfg.seed, stream, attempt);
            let c = sample_binomial(c_min, p_plus, &mut rng);
            if c > 0 {
                return Ok((out, c, t));
            }
            self.counters.restarts += 1;
        }
        unreachable!()
    }

    /// One whole-tree pass without retries; zero survivors propagate up.
    fn batched_pass(
        &mut self,
        entries: &[C64],
        c0: u64,
        stream: u64,
        attempt: u64,
    ) -> Result<(Option<LabelState>, u64, u64)> {
        if entries.len() == 1 << self.cfg.leaf_qubits() {
            let v = ResizedVector::new(entries.to_vec())?;
            return Ok((Some(LabelState::encode(&v)), c0, self.cfg.leaf_cost()));
        }
        let half = entries.len() / 2;
        let half_qubits = half.trailing_zeros() as usize;
        let register = 2 * (half_qubits + 1) as u64 + 1;
        let (a, ca, ta) =
            self.batched_pass(&entries[..half], c0, mix(&[stream, 1]), attempt)?;
        let (b, cb, tb) =
            self.batched_pass(&entries[half..], c0, mix(&[stream, 2]), attempt)?;
        let t = ta.max(tb);
        let c_min = ca.min(cb);
        if c_min == 0 {
            return Ok((None, 0, t));
        }
        let (a, b) = (a.unwrap(), b.unwrap());
        let (p_plus, out, _residue) = concatenate_postselected(&a, &b)?;
        let t = t.saturating_add(charge_of(half_qubits));
        self.counters.check(t)?;
        self.counters.batch(register, c_min);
        let mut rng = derive(self.cfg.seed, stream, attempt);
        let c = sample_binomial(c_min, p_plus, &mut rng);
        Ok(((c > 0).then_some(out), c, t))
    }
}

// ---------------------------------------------------------------------------
// classical engine
// ---------------------------------------------------------------------------

/// Per-node norms A, indexed as norms[level][node]; level 0 = leaves.
struct NormTable {
    norms: Vec<Vec<f64>>,
}

impl NormTable {
    fn build(entries: &[C64], leaf_qubits: usize) -> Self {
        let mut norms = Vec::new();
        let mut size = 1 << leaf_qubits;
        while size <= entries.len() {
            let level: Vec<f64> =
                entries.chunks(size).map(label_norm_sq).collect();
            norms.push(level);
            size *= 2;
        }
        Self { norms }
    }
}

struct ClassicalRun<'a> {
    cfg: &'a PrepConfig,
    counters: Counters,
    norms: Option<NormTable>,
    /// Node dimension at tree level 0 (leaves).
    leaf_dim: usize,
}

impl ClassicalRun<'_> {
    /// p₊ at a node whose children sit at tree level `child_level` with
    /// node indices 2·idx and 2·idx+1.
    fn p_plus(&self, child_level: usize, idx: usize) -> Result<f64> {
        match self.cfg.p_plus_model {
            PPlusModel::WorstCaseHalf => Ok(0.5),
            PPlusModel::Fixed(p) => Ok(p),
            PPlusModel::Analytic => {
                let table = self
                    .norms
                    .as_ref()
                    .expect("analytic model needs a vector");
                let a = table.norms[child_level][2 * idx];
                let b = table.norms[child_level][2 * idx + 1];
                let dim = self.leaf_dim << child_level;
                compute_p_plus(a, b, dim)
            }
        }
    }

    fn charge(&self, child_level: usize) -> u64 {
        charge_of((self.leaf_dim << child_level).trailing_zeros() as usize)
    }

    fn register(&self, child_level: usize) -> u64 {
        let half_qubits = (self.leaf_dim << child_level).trailing_zeros() as u64;
        2 * (half_qubits + 1) + 1
    }

    fn seq(&mut self, level: usize, idx: usize, stream: u64) -> Result<u64> {
        if level == 0 {
            return Ok(self.cfg.leaf_cost());
        }
        let mut t = 0u64;
        for attempt in 0u64.. {
            let ta = self.seq(level - 1, 2 * idx, mix(&[stream, 1, attempt]))?;
            let tb = self.seq(level - 1, 2 * idx + 1, mix(&[stream, 2, attempt]))?;
            t = t
                .saturating_add(ta)
                .saturating_add(tb)
                .saturating_add(self.charge(level - 1));
            self.counters.check(t)?;
            self.counters.batch(self.register(level - 1), 1);
            let p = self.p_plus(level - 1, idx)?;
            let mut rng = derive(self.cfg.seed, stream, attempt);
            if rng.gen_bool(p.min(1.0)) {
                return Ok(t);
            }
            self.counters.restarts += 1;
        }
        unreachable!()
    }

    fn para(&mut self, level: usize, idx: usize, c0: u64, stream: u64) -> Result<(u64, u64)> {
        if level == 0 {
            return Ok((c0, self.cfg.leaf_cost()));
        }
        let mut t = 0u64;
        for attempt in 0u64.. {
            let (ca, ta) = self.para(level - 1, 2 * idx, c0, mix(&[stream, 1, attempt]))?;
            let (cb, tb) = self.para(level - 1, 2 * idx + 1, c0, mix(&[stream, 2, attempt]))?;
            let c_min = ca.min(cb);
            t = t
                .saturating_add(ta.max(tb))
                .saturating_add(self.charge(level - 1));
            self.counters.check(t)?;
            self.counters.batch(self.register(level - 1), c_min);
            let p = self.p_plus(level - 1, idx)?;
            let mut rng = derive(self.cfg.seed, stream, attempt);
            let c = sample_binomial(c_min, p, &mut rng);
            if c > 0 {
                return Ok((c, t));
            }
            self.counters.restarts += 1;
        }
        unreachable!()
    }

    fn batched_pass(
        &mut self,
        level: usize,
        idx: usize,
        c0: u64,
        stream: u64,
        attempt: u64,
    ) -> Result<(u64, u64)> {
        if level == 0 {
            return Ok((c0, self.cfg.leaf_cost()));
        }
        let (ca, ta) = self.batched_pass(level - 1, 2 * idx, c0, mix(&[stream, 1]), attempt)?;
        let (cb, tb) =
            self.batched_pass(level - 1, 2 * idx + 1, c0, mix(&[stream, 2]), attempt)?;
        let t = ta.max(tb);
        let c_min = ca.min(cb);
        if c_min == 0 {
            return Ok((0, t));
        }
        let t = t.saturating_add(self.charge(level - 1));
        self.counters.check(t)?;
        self.counters.batch(self.register(level - 1), c_min);
        let p = self.p_plus(level - 1, idx)?;
        let mut rng = derive(self.cfg.seed, stream, attempt);
        Ok((sample_binomial(c_min, p, &mut rng), t))
    }
}

fn sample_binomial(n: u64, p: f64, rng: &mut impl Rng) -> u64 {
    if n == 0 {
        return 0;
    }
    let p = p.clamp(0.0, 1.0);
    Binomial::new(n, p).expect("p clamped to [0,1]").sample(rng)
}

// ---------------------------------------------------------------------------
// public drivers
// ---------------------------------------------------------------------------

fn validate(v: &ResizedVector, cfg: &PrepConfig) -> Result<()> {
    let n = v.num_qubits();
    if cfg.n_u < 1 {
        return Err(Error::InvalidConfig("n_u must be >= 1".into()));
    }
    if cfg.mode == Mode::Tradeoff && cfg.n_u > n {
        return Err(Error::InvalidConfig(format!(
            "n_u = {} exceeds log2(N) = {}",
            cfg.n_u, n
        )));
    }
    Ok(())
}

/// Run the configured strategy on a positive (or component) vector.
pub fn prepare(v: &ResizedVector, cfg: &PrepConfig) -> Result<PrepResult> {
    validate(v, cfg)?;
    let levels = v.num_qubits() - cfg.leaf_qubits();
    let leaf_count = 1usize << levels;
    let c0 = match cfg.mode {
        Mode::Sequential => 1,
        _ => cfg.c0_policy.value(leaf_count),
    };
    if c0 < 1 {
        return Err(Error::InvalidConfig("c0 must be >= 1".into()));
    }
    let root_stream = mix(&[0x70726570, cfg.seed]);

    match cfg.engine {
        Engine::ExactStatevector => {
            let mut run = ExactRun { cfg, counters: Counters::new(cfg.retry_cap) };
            let (label_state, t_stp, pass_copies) = match cfg.mode {
                Mode::Sequential => {
                    let (ls, t) = run.seq(v.entries(), root_stream)?;
                    (ls, t, Vec::new())
                }
                Mode::Parallel | Mode::Tradeoff => {
                    let (ls, _c, t) = run.para(v.entries(), c0, root_stream)?;
                    (ls, t, Vec::new())
                }
                Mode::BatchedWholeTree => {
                    let mut t = 0u64;
                    let mut passes = Vec::new();
                    let mut attempt = 0u64;
                    loop {
                        let (ls, c, tp) =
                            run.batched_pass(v.entries(), c0, root_stream, attempt)?;
                        t = t.saturating_add(tp);
                        run.counters.check(t)?;
                        passes.push(c);
                        if let Some(ls) = ls {
                            break (ls, t, passes);
                        }
                        run.counters.restarts += 1;
                        attempt += 1;
                    }
                }
            };
            let decoded = label_state.decode()?;
            if decoded.max_entry_dev(v) > 1e-9 {
                return Err(Error::NotALabelState(
                    "prepared state does not decode to its input".into(),
                ));
            }
            Ok(PrepResult {
                label_state: Some(label_state),
                decoded,
                t_stp,
                restarts: run.counters.restarts,
                peak_parallel_copies: if cfg.mode == Mode::Sequential { 1 } else { c0 * leaf_count as u64 },
                total_qubit_touches: run.counters.touches,
                peak_qubits: run.counters.peak_qubits,
                pass_copies,
            })
        }
        Engine::ClassicalCascade => {
            let norms = match cfg.p_plus_model {
                PPlusModel::Analytic => {
                    Some(NormTable::build(v.entries(), cfg.leaf_qubits()))
                }
                _ => None,
            };
            let mut run = ClassicalRun {
                cfg,
                counters: Counters::new(cfg.retry_cap),
                norms,
                leaf_dim: 1 << cfg.leaf_qubits(),
            };
            let (t_stp, pass_copies) = match cfg.mode {
                Mode::Sequential => (run.seq(levels, 0, root_stream)?, Vec::new()),
                Mode::Parallel | Mode::Tradeoff => {
                    let (_c, t) = run.para(levels, 0, c0, root_stream)?;
                    (t, Vec::new())
                }
                Mode::BatchedWholeTree => {
                    let mut t = 0u64;
                    let mut passes = Vec::new();
                    let mut attempt = 0u64;
                    loop {
                        let (c, tp) = run.batched_pass(levels, 0, c0, root_stream, attempt)?;
                        t = t.saturating_add(tp);
                        run.counters.check(t)?;
                        passes.push(c);
                        if c > 0 {
                            break (t, passes);
                        }
                        run.counters.restarts += 1;
                        attempt += 1;
                    }
                }
            };
            Ok(PrepResult {
                label_state: None,
                decoded: v.clone(),
                t_stp,
                restarts: run.counters.restarts,
                peak_parallel_copies: if cfg.mode == Mode::Sequential { 1 } else { c0 * leaf_count as u64 },
                total_qubit_touches: run.counters.touches,
                peak_qubits: run.counters.peak_qubits,
                pass_copies,
            })
        }
    }
}

/// Sequential strategy.
pub fn f_seq(v: &ResizedVector, cfg: &PrepConfig) -> Result<PrepResult> {
    prepare(v, &PrepConfig { mode: Mode::Sequential, ..cfg.clone() })
}

/// Parallel strategy with explicit leaf copy count.
pub fn f_para(v: &ResizedVector, c0: u64, cfg: &PrepConfig) -> Result<PrepResult> {
    prepare(
        v,
        &PrepConfig {
            mode: Mode::Parallel,
            c0_policy: C0Policy::Constant(c0),
            ..cfg.clone()
        },
    )
}

/// Whole-tree batched strategy (retry only at the root).
pub fn g_para(v: &ResizedVector, c0: u64, cfg: &PrepConfig) -> Result<PrepResult> {
    prepare(
        v,
        &PrepConfig {
            mode: Mode::BatchedWholeTree,
            c0_policy: C0Policy::Constant(c0),
            ..cfg.clone()
        },
    )
}

/// Parallel strategy with 2^n_u-dimensional directly built leaves.
pub fn f_tradeoff(v: &ResizedVector, c0: u64, n_u: usize, cfg: &PrepConfig) -> Result<PrepResult> {
    prepare(
        v,
        &PrepConfig {
            mode: Mode::Tradeoff,
            c0_policy: C0Policy::Constant(c0),
            n_u,
            ..cfg.clone()
        },
    )
}

/// Full pipeline result: amplitude encoding of the input data.
#[derive(Debug, Clone)]
pub struct FullPrepResult {
    pub state: PureState,
    pub t_stp: u64,
    pub restarts: u64,
    /// Success probability of the final projection round that succeeded.
    pub final_projection_prob: f64,
    /// Whether the four-vector complex route was taken.
    pub complex_route: bool,
}

/// Prepare the amplitude encoding of u end to end (exact engine).
///
/// Positive data: build the label state, then project the value qubit to
/// |0⟩, rebuilding from scratch on failure. Complex data: prepare the four
/// positive component label states and recombine them, rebuilding all four
/// on failure.
pub fn prepare_amplitude(u: &AmplitudeVector, cfg: &PrepConfig) -> Result<FullPrepResult> {
    if cfg.engine != Engine::ExactStatevector {
        return Err(Error::InvalidConfig(
            "full pipeline needs the exact engine".into(),
        ));
    }
    let v = resize(u);
    let mut t_stp = 0u64;
    let mut restarts = 0u64;

    if v.positive_only() {
        for round in 0u64.. {
            let sub = PrepConfig { seed: mix(&[cfg.seed, 0xabe1, round]), ..cfg.clone() };
            let r = prepare(&v, &sub)?;
            t_stp = t_stp.saturating_add(r.t_stp);
            restarts += r.restarts;
            let (p_s, psi) = project_value_qubit(&r.label_state.unwrap())?;
            let mut rng = derive(cfg.seed, 0x76616c, round);
            if rng.gen_bool(p_s.min(1.0)) {
                return Ok(FullPrepResult {
                    state: psi,
                    t_stp,
                    restarts,
                    final_projection_prob: p_s,
                    complex_route: false,
                });
            }
            restarts += 1;
            if t_stp > cfg.retry_cap {
                return Err(Error::RetryCapExceeded { cap: cfg.retry_cap, t_stp });
            }
        }
        unreachable!()
    }

    let d = decompose_complex(&v);
    let parts = [&d.va, &d.vb, &d.vc, &d.vd];
    // the assembly outcome state and its probability are the same every
    // round, so the expensive recombination is simulated only once
    let mut assembled: Option<(f64, PureState)> = None;
    for round in 0u64.. {
        let mut blocks = Vec::with_capacity(4);
        let mut t_round = 0u64;
        for (slot, part) in parts.iter().enumerate() {
            let sub = PrepConfig {
                seed: mix(&[cfg.seed, 0xb10c, slot as u64, round]),
                ..cfg.clone()
            };
            let r = prepare(part, &sub)?;
            t_round = t_round.max(r.t_stp); // four blocks in parallel
            restarts += r.restarts;
            blocks.push(r.label_state.unwrap());
        }
        // the recombination applies one doubly controlled swap chain per
        // block pair; charge it like a concatenation batch at the top level
        t_stp = t_stp
            .saturating_add(t_round)
            .saturating_add(v.num_qubits() as u64);
        if assembled.is_none() {
            assembled = Some(assemble_complex_postselected(
                &d,
                [&blocks[0], &blocks[1], &blocks[2], &blocks[3]],
            )?);
        }
        let (p_s_prime, state) = assembled.as_ref().unwrap();
        let mut rng = derive(cfg.seed, 0x61736d, round);
        if rng.gen_bool(p_s_prime.min(1.0)) {
            return Ok(FullPrepResult {
                state: state.clone(),
                t_stp,
                restarts,
                final_projection_prob: *p_s_prime,
                complex_route: true,
            });
        }
        restarts += 1;
        if t_stp > cfg.retry_cap {
            return Err(Error::RetryCapExceeded { cap: cfg.retry_cap, t_stp });
        }
    }
    unreachable!()
}
