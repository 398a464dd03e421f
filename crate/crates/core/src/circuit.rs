//! Layered circuit representation, decomposition to one- and two-qubit
//! gates, text emission, and the grouped-layer light-cone analyzer.
//!
//! Circuits are lists of layers; gates within a layer act on pairwise
//! disjoint qubits. `decompose` rewrites the swap-family gates into a
//! fixed block of u1q + cnot gates (2 cnots around a multi-controlled X,
//! the latter expanded with the square-root-of-U ladder), then repacks
//! greedily, so depth constants are stable and reported as-is.

use std::collections::BTreeSet;

use rand::Rng;

use crate::encoding::ResizedVector;
use crate::error::{Error, Result};
use crate::state::{
    gates::{self, matmul},
    ket_minus, ket_one, ket_plus, ket_zero, C64, Mat2, PureState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Plus,
    Minus,
    Zero,
    One,
}

impl Basis {
    pub fn ket(&self) -> [C64; 2] {
        match self {
            Basis::Plus => ket_plus(),
            Basis::Minus => ket_minus(),
            Basis::Zero => ket_zero(),
            Basis::One => ket_one(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Basis::Plus => "plus",
            Basis::Minus => "minus",
            Basis::Zero => "zero",
            Basis::One => "one",
        }
    }

    pub fn from_name(s: &str) -> Option<Basis> {
        match s {
            "plus" => Some(Basis::Plus),
            "minus" => Some(Basis::Minus),
            "zero" => Some(Basis::Zero),
            "one" => Some(Basis::One),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    U1q { q: usize, m: Mat2 },
    Cnot { control: usize, target: usize },
    Cswap { control: usize, a: usize, b: usize },
    Ccswap { c1: usize, c2: usize, pol1: bool, pol2: bool, a: usize, b: usize },
    Project { q: usize, onto: Basis },
}

impl Gate {
    pub fn support(&self) -> Vec<usize> {
        match self {
            Gate::U1q { q, .. } | Gate::Project { q, .. } => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cswap { control, a, b } => vec![*control, *a, *b],
            Gate::Ccswap { c1, c2, a, b, .. } => vec![*c1, *c2, *a, *b],
        }
    }
}

/// Layered circuit; within a layer gate supports are pairwise disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    layers: Vec<Vec<Gate>>,
    /// Free-text annotations carried through emit/parse.
    pub notes: Vec<String>,
    // earliest free layer per qubit, for greedy packing
    frontier: Vec<usize>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, layers: Vec::new(), notes: Vec::new(), frontier: vec![0; num_qubits] }
    }

    pub fn from_gates(num_qubits: usize, gate_seq: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits);
        for g in gate_seq {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    fn validate(&self, g: &Gate) -> Result<()> {
        let support = g.support();
        for &q in &support {
            if q >= self.num_qubits {
                return Err(Error::IndexOutOfRange { index: q, num_qubits: self.num_qubits });
            }
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(Error::DuplicateIndices);
        }
        Ok(())
    }

    /// Append a gate at the earliest layer where its whole support is free.
    pub fn push(&mut self, g: Gate) -> Result<()> {
        self.validate(&g)?;
        let layer = g.support().iter().map(|&q| self.frontier[q]).max().unwrap();
        if layer == self.layers.len() {
            self.layers.push(Vec::new());
        }
        for &q in &g.support() {
            self.frontier[q] = layer + 1;
        }
        self.layers[layer].push(g);
        Ok(())
    }

    /// Apply the circuit to `input`, postselecting every projection.
    ///
    /// Returns the joint success probability of all projections and the
    /// final state.
    pub fn apply(&self, input: &PureState) -> Result<(f64, PureState)> {
        if input.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch("state size differs from circuit".into()));
        }
        let mut state = input.clone();
        let mut prob = 1.0;
        for layer in &self.layers {
            for g in layer {
                match g {
                    Gate::U1q { q, m } => state.apply_1q(*q, m)?,
                    Gate::Cnot { control, target } => state.apply_cnot(*control, *target)?,
                    Gate::Cswap { control, a, b } => state.apply_cswap(*control, *a, *b)?,
                    Gate::Ccswap { c1, c2, pol1, pol2, a, b } => {
                        state.apply_ccswap(*c1, *c2, *pol1, *pol2, *a, *b)?
                    }
                    Gate::Project { q, onto } => {
                        let (p, post) = state.project(*q, &onto.ket())?;
                        prob *= p;
                        state = post;
                    }
                }
            }
        }
        Ok((prob, state))
    }

    /// Rewrite swap-family gates into u1q + cnot blocks and repack.
    pub fn decompose(&self) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        out.notes = self.notes.clone();
        for layer in &self.layers {
            for g in layer {
                for expanded in expand_gate(g) {
                    out.push(expanded).expect("expansion stays in range");
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// gate decomposition

/// ZYZ angles (alpha, beta, gamma, delta) with
/// U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).
fn zyz(u: &Mat2) -> (f64, f64, f64, f64) {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let alpha = det.arg() / 2.0;
    let scale = C64::from_polar(1.0, -alpha);
    let v = [[u[0][0] * scale, u[0][1] * scale], [u[1][0] * scale, u[1][1] * scale]];
    let gamma = 2.0 * v[1][0].norm().atan2(v[0][0].norm());
    let (beta, delta) = if v[1][0].norm() < 1e-12 {
        (2.0 * v[1][1].arg(), 0.0)
    } else if v[0][0].norm() < 1e-12 {
        (2.0 * v[1][0].arg(), 0.0)
    } else {
        (v[1][1].arg() + v[1][0].arg(), v[1][1].arg() - v[1][0].arg())
    };
    (alpha, beta, gamma, delta)
}

/// Controlled-U as 4 u1q + 2 cnot (ABC construction plus a control phase).
fn controlled_u(control: usize, target: usize, u: &Mat2) -> Vec<Gate> {
    let (alpha, beta, gamma, delta) = zyz(u);
    let a = matmul(&gates::rz(beta), &gates::ry(gamma / 2.0));
    let b = matmul(&gates::ry(-gamma / 2.0), &gates::rz(-(delta + beta) / 2.0));
    let c = gates::rz((delta - beta) / 2.0);
    let ctrl_phase =
        [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::from_polar(1.0, alpha)]];
    vec![
        Gate::U1q { q: target, m: c },
        Gate::Cnot { control, target },
        Gate::U1q { q: target, m: b },
        Gate::Cnot { control, target },
        Gate::U1q { q: target, m: a },
        Gate::U1q { q: control, m: ctrl_phase },
    ]
}

/// Multi-controlled U via the recursive square-root ladder: with V^2 = U,
/// C^k(U) = CV(c_last, t) C^{k-1}X CV'(c_last, t) C^{k-1}X C^{k-1}V(t).
fn multi_controlled(controls: &[usize], target: usize, u: &Mat2) -> Vec<Gate> {
    match controls {
        [] => vec![Gate::U1q { q: target, m: *u }],
        [c] => controlled_u(*c, target, u),
        [rest @ .., last] => {
            let v = gates::sqrt_unitary(u);
            let mut out = controlled_u(*last, target, &v);
            out.extend(multi_controlled(rest, *last, &gates::x()));
            out.extend(controlled_u(*last, target, &gates::dagger(&v)));
            out.extend(multi_controlled(rest, *last, &gates::x()));
            out.extend(multi_controlled(rest, target, &v));
            out
        }
    }
}

fn expand_gate(g: &Gate) -> Vec<Gate> {
    match g {
        Gate::U1q { .. } | Gate::Cnot { .. } | Gate::Project { .. } => vec![g.clone()],
        Gate::Cswap { control, a, b } => {
            // swap with the middle cnot promoted to a Toffoli
            let mut out = vec![Gate::Cnot { control: *b, target: *a }];
            out.extend(multi_controlled(&[*control, *a], *b, &gates::x()));
            out.push(Gate::Cnot { control: *b, target: *a });
            out
        }
        Gate::Ccswap { c1, c2, pol1, pol2, a, b } => {
            let mut out = Vec::new();
            // conjugate polarity-0 controls with X
            for (q, pol) in [(*c1, *pol1), (*c2, *pol2)] {
                if !pol {
                    out.push(Gate::U1q { q, m: gates::x() });
                }
            }
            out.push(Gate::Cnot { control: *b, target: *a });
            out.extend(multi_controlled(&[*c1, *c2, *a], *b, &gates::x()));
            out.push(Gate::Cnot { control: *b, target: *a });
            for (q, pol) in [(*c1, *pol1), (*c2, *pol2)] {
                if !pol {
                    out.push(Gate::U1q { q, m: gates::x() });
                }
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// circuit builders

/// Merge circuit for two label states with `n` label qubits each.
///
/// Register layout: ancilla, block a (n+1 qubits), block b (n+1 qubits).
/// The ancilla is brought to |+>, each pair of corresponding block qubits
/// is conditionally swapped, and block b's value qubit is projected onto
/// |+> (the rest of block b disentangles into |+> automatically).
pub fn build_concat_circuit(n: usize) -> Result<Circuit> {
    if n < 1 {
        return Err(Error::InvalidConfig("need at least one label qubit".into()));
    }
    let block = n + 1;
    let mut c = Circuit::new(1 + 2 * block);
    c.push(Gate::U1q { q: 0, m: gates::h() })?;
    for i in 0..block {
        c.push(Gate::Cswap { control: 0, a: 1 + i, b: 1 + block + i })?;
    }
    c.push(Gate::Project { q: 2 * block, onto: Basis::Plus })?;
    Ok(c)
}

/// Four-block assembly circuit for complex data: register
/// [anc1, anc2, blocks a..d of n+1 qubits]. Ancilla-controlled swaps move
/// blocks b, c, d into a with the polarity patterns 01, 10, 11; the two
/// ancillas and the value qubits of b, c, d are projected onto |+>.
pub fn build_complex_circuit(n: usize) -> Result<Circuit> {
    if n < 1 {
        return Err(Error::InvalidConfig("need at least one label qubit".into()));
    }
    let block = n + 1;
    let mut c = Circuit::new(2 + 4 * block);
    // anc1 = (|0> + i|1>)/sqrt(2), anc2 = (|0> - |1>)/sqrt(2)
    c.push(Gate::U1q { q: 0, m: gates::h() })?;
    c.push(Gate::U1q { q: 0, m: gates::s() })?;
    c.push(Gate::U1q { q: 1, m: gates::x() })?;
    c.push(Gate::U1q { q: 1, m: gates::h() })?;
    let base_a = 2;
    for (slot, pols) in [(1, (false, true)), (2, (true, false)), (3, (true, true))] {
        let base = 2 + slot * block;
        for i in 0..block {
            c.push(Gate::Ccswap {
                c1: 0,
                c2: 1,
                pol1: pols.0,
                pol2: pols.1,
                a: base_a + i,
                b: base + i,
            })?;
        }
    }
    c.push(Gate::Project { q: 0, onto: Basis::Plus })?;
    c.push(Gate::Project { q: 1, onto: Basis::Plus })?;
    for slot in 1..4usize {
        c.push(Gate::Project { q: 2 + slot * block + n, onto: Basis::Plus })?;
    }
    Ok(c)
}

fn normalize2(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Singular value decomposition m = u diag(s) v^dagger of a 2x2 matrix;
/// returned matrices hold the singular vectors as columns.
fn svd2(m: &Mat2) -> (Mat2, [f64; 2], Mat2) {
    let p = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let q = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let r = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let mid = (p + q) / 2.0;
    let half = (((p - q) / 2.0).powi(2) + r.norm_sqr()).sqrt();
    let l0 = mid + half;
    let l1 = (mid - half).max(0.0);
    let v0 = if r.norm() > 1e-15 {
        normalize2([r, C64::new(l0 - p, 0.0)])
    } else if p >= q {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    } else {
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
    };
    let v1 = [-v0[1].conj(), v0[0].conj()];
    let s = [l0.sqrt(), l1.sqrt()];
    let mul = |v: &[C64; 2]| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
    let u0 = if s[0] > 1e-12 {
        let w = mul(&v0);
        [w[0] / s[0], w[1] / s[0]]
    } else {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    };
    let u1 = if s[1] > 1e-12 {
        let w = mul(&v1);
        [w[0] / s[1], w[1] / s[1]]
    } else {
        [-u0[1].conj(), u0[0].conj()]
    };
    let umat = [[u0[0], u1[0]], [u0[1], u1[1]]];
    let vmat = [[v0[0], v1[0]], [v0[1], v1[1]]];
    (umat, s, vmat)
}

/// Gates preparing the two-qubit base label state of the pair (v0, v1)
/// from |00>: Schmidt form via the SVD of the coefficient matrix.
fn leaf_gates(v0: C64, v1: C64, w0: usize, w1: usize) -> Vec<Gate> {
    let one = C64::new(1.0, 0.0);
    let norm = (v0.norm_sqr() + (one - v0).norm_sqr() + v1.norm_sqr() + (one - v1).norm_sqr())
        .sqrt();
    let m = [[v0 / norm, (one - v0) / norm], [v1 / norm, (one - v1) / norm]];
    let (u, s, v) = svd2(&m);
    let theta = 2.0 * s[1].atan2(s[0]);
    let w = [[v[0][0].conj(), v[0][1].conj()], [v[1][0].conj(), v[1][1].conj()]];
    vec![
        Gate::U1q { q: w0, m: gates::ry(theta) },
        Gate::Cnot { control: w0, target: w1 },
        Gate::U1q { q: w0, m: u },
        Gate::U1q { q: w1, m: w },
    ]
}

/// One-pass merge network preparing the label state of `v` (all
/// projections postselected). The finished state sits on qubits
/// 0..log2(len)+1; every merge consumes one ancilla that becomes the new
/// top label qubit, and the discarded halves end in |+>. With `copies` > 1
/// the whole tree is replicated side by side.
pub fn build_full_network(v: &ResizedVector, copies: usize) -> Result<Circuit> {
    if copies == 0 {
        return Err(Error::InvalidConfig("need at least one copy".into()));
    }
    let leaves = v.len() / 2;
    let wires_per_copy = v.len() + leaves - 1;

    // recursion returning the output wires of each subtree
    fn build(
        v: &ResizedVector,
        lo: usize,
        hi: usize,
        next: &mut usize,
        gate_seq: &mut Vec<Gate>,
    ) -> Vec<usize> {
        if hi - lo == 2 {
            let ws = [*next, *next + 1];
            *next += 2;
            gate_seq.extend(leaf_gates(v.entries()[lo], v.entries()[lo + 1], ws[0], ws[1]));
            return ws.to_vec();
        }
        let mid = (lo + hi) / 2;
        let left = build(v, lo, mid, next, gate_seq);
        let right = build(v, mid, hi, next, gate_seq);
        let anc = *next;
        *next += 1;
        gate_seq.push(Gate::U1q { q: anc, m: gates::h() });
        for (x, y) in left.iter().zip(&right) {
            gate_seq.push(Gate::Cswap { control: anc, a: *x, b: *y });
        }
        gate_seq.push(Gate::Project { q: *right.last().unwrap(), onto: Basis::Plus });
        let mut out = vec![anc];
        out.extend(left);
        out
    }

    let mut gate_seq: Vec<Gate> = Vec::new();
    for copy in 0..copies {
        let base = copy * wires_per_copy;
        let copy_start = gate_seq.len();
        let mut next = base;
        let out = build(v, 0, v.len(), &mut next, &mut gate_seq);
        debug_assert_eq!(next, base + wires_per_copy);
        // remap so the finished state occupies the leading wires of the copy
        let mut map = vec![usize::MAX; wires_per_copy];
        for (pos, &w) in out.iter().enumerate() {
            map[w - base] = base + pos;
        }
        let mut cursor = base + out.len();
        for slot in map.iter_mut() {
            if *slot == usize::MAX {
                *slot = cursor;
                cursor += 1;
            }
        }
        for g in gate_seq[copy_start..].iter_mut() {
            remap_gate(g, |q| map[q - base]);
        }
    }
    Circuit::from_gates(copies * wires_per_copy, gate_seq)
}

fn remap_gate(g: &mut Gate, f: impl Fn(usize) -> usize) {
    match g {
        Gate::U1q { q, .. } | Gate::Project { q, .. } => *q = f(*q),
        Gate::Cnot { control, target } => {
            *control = f(*control);
            *target = f(*target);
        }
        Gate::Cswap { control, a, b } => {
            *control = f(*control);
            *a = f(*a);
            *b = f(*b);
        }
        Gate::Ccswap { c1, c2, a, b, .. } => {
            *c1 = f(*c1);
            *c2 = f(*c2);
            *a = f(*a);
            *b = f(*b);
        }
    }
}

// ---------------------------------------------------------------------------
// text format

fn fmt_c(x: C64) -> String {
    format!("{:e} {:e}", x.re, x.im)
}

/// Serialize a circuit: `qubits k` / `depth d` header, optional `# note`
/// lines, one gate per line, layers separated by `---`.
pub fn emit(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(&format!("qubits {}\n", c.num_qubits()));
    out.push_str(&format!("depth {}\n", c.depth()));
    for note in &c.notes {
        out.push_str(&format!("# {note}\n"));
    }
    for (i, layer) in c.layers().iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        for g in layer {
            match g {
                Gate::U1q { q, m } => {
                    out.push_str(&format!(
                        "u {} {} {} {} {}\n",
                        q,
                        fmt_c(m[0][0]),
                        fmt_c(m[0][1]),
                        fmt_c(m[1][0]),
                        fmt_c(m[1][1])
                    ));
                }
                Gate::Cnot { control, target } => {
                    out.push_str(&format!("cx {control} {target}\n"));
                }
                Gate::Cswap { control, a, b } => {
                    out.push_str(&format!("cswap {control} {a} {b}\n"));
                }
                Gate::Ccswap { c1, c2, pol1, pol2, a, b } => {
                    out.push_str(&format!(
                        "ccswap {} {} {} {} {} {}\n",
                        c1, c2, *pol1 as u8, *pol2 as u8, a, b
                    ));
                }
                Gate::Project { q, onto } => {
                    out.push_str(&format!("proj {} {}\n", q, onto.name()));
                }
            }
        }
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut lines = text.lines().enumerate();
    let mut header = |key: &str| -> Result<usize> {
        match lines.next() {
            Some((i, line)) => {
                let mut it = line.split_whitespace();
                if it.next() != Some(key) {
                    return Err(perr(i + 1, format!("expected `{key}`")));
                }
                let val = it
                    .next()
                    .ok_or_else(|| perr(i + 1, "missing value"))?
                    .parse::<usize>()
                    .map_err(|_| perr(i + 1, "bad integer"))?;
                if it.next().is_some() {
                    return Err(perr(i + 1, "trailing tokens"));
                }
                Ok(val)
            }
            None => Err(perr(0, format!("missing `{key}` header"))),
        }
    };
    let num_qubits = header("qubits")?;
    let depth = header("depth")?;
    let mut c = Circuit::new(num_qubits);
    let mut layers: Vec<Vec<Gate>> = vec![Vec::new()];
    for (i, raw) in lines {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            c.notes.push(rest.trim().to_string());
            continue;
        }
        if line == "---" {
            layers.push(Vec::new());
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let int = |s: &str| s.parse::<usize>().map_err(|_| perr(lineno, "bad qubit index"));
        let flt = |s: &str| s.parse::<f64>().map_err(|_| perr(lineno, "bad float"));
        let gate = match toks[0] {
            "u" => {
                if toks.len() != 10 {
                    return Err(perr(lineno, "u needs a qubit and 8 floats"));
                }
                let q = int(toks[1])?;
                let mut vals = [0.0f64; 8];
                for (slot, tok) in vals.iter_mut().zip(&toks[2..]) {
                    *slot = flt(tok)?;
                }
                let m = [
                    [C64::new(vals[0], vals[1]), C64::new(vals[2], vals[3])],
                    [C64::new(vals[4], vals[5]), C64::new(vals[6], vals[7])],
                ];
                Gate::U1q { q, m }
            }
            "cx" => {
                if toks.len() != 3 {
                    return Err(perr(lineno, "cx needs 2 qubits"));
                }
                Gate::Cnot { control: int(toks[1])?, target: int(toks[2])? }
            }
            "cswap" => {
                if toks.len() != 4 {
                    return Err(perr(lineno, "cswap needs 3 qubits"));
                }
                Gate::Cswap { control: int(toks[1])?, a: int(toks[2])?, b: int(toks[3])? }
            }
            "ccswap" => {
                if toks.len() != 7 {
                    return Err(perr(lineno, "ccswap needs 2 controls, 2 polarities, 2 targets"));
                }
                let pol = |s: &str| match s {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(perr(lineno, "polarity must be 0 or 1")),
                };
                Gate::Ccswap {
                    c1: int(toks[1])?,
                    c2: int(toks[2])?,
                    pol1: pol(toks[3])?,
                    pol2: pol(toks[4])?,
                    a: int(toks[5])?,
                    b: int(toks[6])?,
                }
            }
            "proj" => {
                if toks.len() != 3 {
                    return Err(perr(lineno, "proj needs a qubit and a basis name"));
                }
                let onto = Basis::from_name(toks[2])
                    .ok_or_else(|| perr(lineno, "unknown projection basis"))?;
                Gate::Project { q: int(toks[1])?, onto }
            }
            other => return Err(perr(lineno, format!("unknown gate `{other}`"))),
        };
        layers.last_mut().unwrap().push(gate);
    }
    if layers.len() == 1 && layers[0].is_empty() {
        layers.clear();
    }
    if layers.len() != depth {
        return Err(perr(0, format!("depth header says {depth}, found {} layers", layers.len())));
    }
    // rebuild with explicit layers, revalidating disjointness
    let mut used: Vec<usize> = Vec::new();
    for (li, layer) in layers.iter().enumerate() {
        used.clear();
        for g in layer {
            c.validate(g)?;
            for q in g.support() {
                if used.contains(&q) {
                    return Err(perr(0, format!("layer {} reuses qubit {q}", li + 1)));
                }
                used.push(q);
            }
        }
    }
    c.layers = layers;
    for (q, slot) in c.frontier.iter_mut().enumerate() {
        *slot = c
            .layers
            .iter()
            .rposition(|l| l.iter().any(|g| g.support().contains(&q)))
            .map_or(0, |i| i + 1);
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// grouping schedules and light cones

/// Layered partition of the qubit set into interaction groups; within a
/// layer each qubit belongs to exactly one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingSchedule {
    num_qubits: usize,
    layers: Vec<Vec<Vec<usize>>>,
}

impl GroupingSchedule {
    pub fn new(num_qubits: usize, layers: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        for (li, layer) in layers.iter().enumerate() {
            let mut seen = vec![false; num_qubits];
            let mut count = 0usize;
            for group in layer {
                for &q in group {
                    if q >= num_qubits {
                        return Err(Error::IndexOutOfRange { index: q, num_qubits });
                    }
                    if seen[q] {
                        return Err(Error::InvalidConfig(format!(
                            "qubit {q} appears twice in layer {}",
                            li + 1
                        )));
                    }
                    seen[q] = true;
                    count += 1;
                }
            }
            if count != num_qubits {
                return Err(Error::InvalidConfig(format!(
                    "layer {} does not cover all qubits",
                    li + 1
                )));
            }
        }
        Ok(GroupingSchedule { num_qubits, layers })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Vec<usize>>] {
        &self.layers
    }

    /// Largest group size across all layers (at least 1).
    pub fn k(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.iter().map(|g| g.len()))
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Input qubits that can influence output qubit `j`: walk the layers
    /// backwards, replacing the set by the union of the groups it touches.
    pub fn light_cone(&self, j: usize) -> Result<BTreeSet<usize>> {
        if j >= self.num_qubits {
            return Err(Error::IndexOutOfRange { index: j, num_qubits: self.num_qubits });
        }
        let mut set: BTreeSet<usize> = BTreeSet::from([j]);
        for layer in self.layers.iter().rev() {
            let mut next = BTreeSet::new();
            for group in layer {
                if group.iter().any(|q| set.contains(q)) {
                    next.extend(group.iter().copied());
                }
            }
            set = next;
        }
        Ok(set)
    }

    /// One layer per line; groups separated by `;`, qubits by `,`.
    pub fn emit(&self) -> String {
        self.layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|g| {
                        g.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
                    })
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut layers = Vec::new();
        let mut max_q = 0usize;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut layer = Vec::new();
            for group in line.split(';') {
                let mut qs = Vec::new();
                for tok in group.split(',') {
                    let tok = tok.trim();
                    if tok.is_empty() {
                        continue;
                    }
                    let q = tok
                        .parse::<usize>()
                        .map_err(|_| perr(i + 1, "bad qubit index"))?;
                    max_q = max_q.max(q);
                    qs.push(q);
                }
                if !qs.is_empty() {
                    layer.push(qs);
                }
            }
            if !layer.is_empty() {
                layers.push(layer);
            }
        }
        if layers.is_empty() {
            return Err(perr(0, "empty schedule"));
        }
        GroupingSchedule::new(max_q + 1, layers)
    }
}

/// Interaction schedule induced by a circuit: one group per gate support,
/// untouched qubits as singletons.
pub fn schedule_from_circuit(c: &Circuit) -> GroupingSchedule {
    let layers = c
        .layers()
        .iter()
        .map(|layer| {
            let mut groups: Vec<Vec<usize>> = layer.iter().map(|g| g.support()).collect();
            let covered: BTreeSet<usize> = groups.iter().flatten().copied().collect();
            for q in 0..c.num_qubits() {
                if !covered.contains(&q) {
                    groups.push(vec![q]);
                }
            }
            groups
        })
        .collect();
    GroupingSchedule::new(c.num_qubits(), layers).expect("layer supports are disjoint")
}

/// Minimum number of grouped layers needed to grow a light cone over N
/// slots with groups of size at most k: log2(N) * log 2 / log k.
pub fn depth_lower_bound(big_n: usize, k: usize) -> f64 {
    assert!(k >= 2, "group size must be at least 2");
    (big_n as f64).log2() * std::f64::consts::LN_2 / (k as f64).ln()
}

/// Random schedule generator for property tests.
pub fn random_schedule(num_qubits: usize, num_layers: usize, max_group: usize, rng: &mut impl Rng)
-> GroupingSchedule {
    let mut layers = Vec::new();
    for _ in 0..num_layers {
        let mut order: Vec<usize> = (0..num_qubits).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut layer = Vec::new();
        let mut pos = 0;
        while pos < order.len() {
            let take = rng.gen_range(1..=max_group.min(order.len() - pos));
            layer.push(order[pos..pos + take].to_vec());
            pos += take;
        }
        layers.push(layer);
    }
    GroupingSchedule::new(num_qubits, layers).expect("constructed as a partition")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concat::{assemble_complex, concatenate_postselected, decompose_complex};
    use crate::encoding::{label_norm_sq, resize, AmplitudeVector, LabelState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_unitary(rng: &mut ChaCha12Rng) -> Mat2 {
        let g = |r: &mut ChaCha12Rng| r.gen_range(-3.0..3.0);
        matmul(
            &gates::phase(g(rng)),
            &matmul(&gates::rz(g(rng)), &matmul(&gates::ry(g(rng)), &gates::rz(g(rng)))),
        )
    }

    fn random_state(n: usize, rng: &mut ChaCha12Rng) -> PureState {
        let amps: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        PureState::from_unnormalized(n, amps).unwrap()
    }

    fn apply_seq(gate_seq: &[Gate], state: &PureState) -> PureState {
        let n = state.num_qubits();
        let c = Circuit::from_gates(n, gate_seq.iter().cloned()).unwrap();
        c.apply(state).unwrap().1
    }

    #[test]
    fn controlled_u_matches_direct() {
        let mut rng = ChaCha12Rng::seed_from_u64(81);
        for _ in 0..20 {
            let u = random_unitary(&mut rng);
            let state = random_state(2, &mut rng);
            let got = apply_seq(&controlled_u(0, 1, &u), &state);
            let mut want = state.clone();
            // direct controlled action on the |1x> half
            let mut amps = want.amps().to_vec();
            let (a10, a11) = (amps[2], amps[3]);
            amps[2] = u[0][0] * a10 + u[0][1] * a11;
            amps[3] = u[1][0] * a10 + u[1][1] * a11;
            want = PureState::from_unnormalized(2, amps).unwrap();
            assert!(got.distance(&want) < 1e-10);
        }
    }

    #[test]
    fn multi_controlled_x_matches_permutation() {
        let mut rng = ChaCha12Rng::seed_from_u64(82);
        for controls in [2usize, 3] {
            let n = controls + 1;
            let state = random_state(n, &mut rng);
            let ctrl_list: Vec<usize> = (0..controls).collect();
            let got = apply_seq(&multi_controlled(&ctrl_list, controls, &gates::x()), &state);
            // expected: flip the last qubit on the all-ones control pattern
            let mut amps = state.amps().to_vec();
            let top = (1usize << n) - 2;
            amps.swap(top, top + 1);
            let want = PureState::from_unnormalized(n, amps).unwrap();
            assert!(got.distance(&want) < 1e-10, "controls={controls}");
        }
    }

    #[test]
    fn decompose_preserves_cswap() {
        let mut rng = ChaCha12Rng::seed_from_u64(83);
        let mut c = Circuit::new(3);
        c.push(Gate::Cswap { control: 0, a: 1, b: 2 }).unwrap();
        let d = c.decompose();
        for layer in d.layers() {
            for g in layer {
                assert!(matches!(g, Gate::U1q { .. } | Gate::Cnot { .. }));
            }
        }
        for _ in 0..10 {
            let state = random_state(3, &mut rng);
            let (_, want) = c.apply(&state).unwrap();
            let (_, got) = d.apply(&state).unwrap();
            assert!(got.distance(&want) < 1e-10);
        }
    }

    #[test]
    fn decompose_preserves_ccswap_all_polarities() {
        let mut rng = ChaCha12Rng::seed_from_u64(84);
        for pol1 in [false, true] {
            for pol2 in [false, true] {
                let mut c = Circuit::new(4);
                c.push(Gate::Ccswap { c1: 0, c2: 1, pol1, pol2, a: 2, b: 3 }).unwrap();
                let d = c.decompose();
                for _ in 0..5 {
                    let state = random_state(4, &mut rng);
                    let (_, want) = c.apply(&state).unwrap();
                    let (_, got) = d.apply(&state).unwrap();
                    assert!(got.distance(&want) < 1e-10, "pols {pol1} {pol2}");
                }
            }
        }
    }

    #[test]
    fn decompose_depth_constants() {
        let mut c = Circuit::new(3);
        c.push(Gate::Cswap { control: 0, a: 1, b: 2 }).unwrap();
        let d_cswap = c.decompose().depth();
        let mut c = Circuit::new(4);
        c.push(Gate::Ccswap { c1: 0, c2: 1, pol1: true, pol2: true, a: 2, b: 3 }).unwrap();
        let d_ccswap = c.decompose().depth();
        // frozen constants of the fixed decomposition table
        assert_eq!(d_cswap, CSWAP_DEPTH);
        assert_eq!(d_ccswap, CCSWAP_DEPTH);
    }

    #[test]
    fn decompose_identity_is_identity() {
        let c = Circuit::new(5);
        let d = c.decompose();
        assert_eq!(d.depth(), 0);
        assert_eq!(d.gate_count(), 0);
    }

    #[test]
    fn concat_circuit_matches_statevector_protocol() {
        let mut rng = ChaCha12Rng::seed_from_u64(85);
        for n in [1usize, 2] {
            let dim = 1usize << n;
            let draw = |rng: &mut ChaCha12Rng| {
                let entries: Vec<C64> = (0..dim)
                    .map(|_| C64::new(rng.gen_range(0.05..1.0), 0.0))
                    .collect();
                let mut e = entries;
                e[0] = C64::new(1.0, 0.0);
                LabelState::encode(&ResizedVector::new(e).unwrap())
            };
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let (p_want, merged, residue) = concatenate_postselected(&a, &b).unwrap();
            let c = build_concat_circuit(n).unwrap();
            let input = PureState::zero(1).tensor(a.state()).tensor(b.state());
            let (p_got, final_state) = c.apply(&input).unwrap();
            assert!((p_got - p_want).abs() < 1e-10);
            let want = merged.state().tensor(&residue);
            assert!(final_state.fidelity(&want) > 1.0 - 1e-10);
            // decomposed version agrees too
            let (p_dec, dec_state) = c.decompose().apply(&input).unwrap();
            assert!((p_dec - p_want).abs() < 1e-10);
            assert!(dec_state.fidelity(&want) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn concat_depth_affine_in_n() {
        let depths: Vec<isize> = (1..=10)
            .map(|n| build_concat_circuit(n).unwrap().decompose().depth() as isize)
            .collect();
        let diffs: Vec<isize> = depths.windows(2).map(|w| w[1] - w[0]).collect();
        for d in &diffs[1..] {
            assert_eq!(*d, diffs[0], "depths {depths:?}");
        }
    }

    #[test]
    fn full_network_prepares_label_state() {
        let mut rng = ChaCha12Rng::seed_from_u64(86);
        for m in [2usize, 3] {
            let dim = 1usize << m;
            let entries: Vec<C64> = (0..dim)
                .map(|_| C64::new(rng.gen_range(0.05..=1.0), 0.0))
                .collect();
            let v = ResizedVector::new(entries).unwrap();
            let c = build_full_network(&v, 1).unwrap();
            let input = PureState::zero(c.num_qubits());
            let (p, final_state) = c.apply(&input).unwrap();
            // analytic success probability: product of merge probabilities
            let mut p_want = 1.0;
            let mut size = 2usize;
            while size <= dim {
                if size > 2 {
                    for chunk in v.entries().chunks(size) {
                        let a = label_norm_sq(&chunk[..size / 2]);
                        let b = label_norm_sq(&chunk[size / 2..]);
                        p_want *= (size / 2) as f64 * (a + b) / (4.0 * a * b);
                    }
                }
                size *= 2;
            }
            assert!((p - p_want).abs() < 1e-9, "m={m} p={p} want={p_want}");
            let mut want = LabelState::encode(&v).into_state();
            for _ in 0..c.num_qubits() - (m + 1) {
                want = want.tensor(&PureState::from_unnormalized(1, ket_plus().to_vec()).unwrap());
            }
            assert!(final_state.fidelity(&want) > 1.0 - 1e-10, "m={m}");
        }
    }

    #[test]
    fn full_network_copies_are_independent() {
        let v = ResizedVector::new(vec![
            C64::new(1.0, 0.0),
            C64::new(0.4, 0.0),
            C64::new(0.7, 0.0),
            C64::new(0.2, 0.0),
        ])
        .unwrap();
        let single = build_full_network(&v, 1).unwrap();
        let double = build_full_network(&v, 2).unwrap();
        assert_eq!(double.num_qubits(), 2 * single.num_qubits());
        assert_eq!(double.gate_count(), 2 * single.gate_count());
        let (p1, s1) = single.apply(&PureState::zero(single.num_qubits())).unwrap();
        let (p2, s2) = double.apply(&PureState::zero(double.num_qubits())).unwrap();
        assert!((p2 - p1 * p1).abs() < 1e-10);
        assert!(s2.fidelity(&s1.tensor(&s1)) > 1.0 - 1e-10);
    }

    #[test]
    fn full_network_depth_quadratic_window() {
        // one-pass network: per-level blocks serialize, giving depth
        // bounded by a quadratic in the number of levels
        let xs: Vec<f64> = (2..=8).map(|m| m as f64).collect();
        let ys: Vec<f64> = (2..=8)
            .map(|m| {
                let v = crate::encoding::uniform_vector(m);
                build_full_network(&v, 1).unwrap().decompose().depth() as f64
            })
            .collect();
        // constant positive second differences: exactly quadratic growth
        let d2: Vec<f64> = ys.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
        for d in &d2 {
            assert!((d - d2[0]).abs() < 1e-9 && *d > 0.0, "ys={ys:?}");
        }
        // and bounded by an explicit quadratic envelope
        for (x, y) in xs.iter().zip(&ys) {
            assert!(*y <= 11.0 * x * x + 10.0, "ys={ys:?}");
        }
    }

    #[test]
    fn complex_circuit_matches_assembly() {
        let mut rng = ChaCha12Rng::seed_from_u64(87);
        let dim = 4usize;
        let entries: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let u = AmplitudeVector::from_unnormalized(entries).unwrap();
        let v = resize(&u);
        let d = decompose_complex(&v);
        let blocks = [
            LabelState::encode(&d.va),
            LabelState::encode(&d.vb),
            LabelState::encode(&d.vc),
            LabelState::encode(&d.vd),
        ];
        let want = assemble_complex(&d, [&blocks[0], &blocks[1], &blocks[2], &blocks[3]], &mut rng)
            .unwrap();
        let c = build_complex_circuit(2).unwrap();
        let mut input = PureState::zero(1).tensor(&PureState::zero(1));
        for b in &blocks {
            input = input.tensor(b.state());
        }
        let (p, _final_state) = c.apply(&input).unwrap();
        assert!((p - want.p_s_prime).abs() < 1e-10, "p={p} want={}", want.p_s_prime);
    }

    #[test]
    fn emit_parse_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(88);
        let mut c = Circuit::new(6);
        c.notes.push("fixture".into());
        c.push(Gate::U1q { q: 0, m: random_unitary(&mut rng) }).unwrap();
        c.push(Gate::Cnot { control: 1, target: 2 }).unwrap();
        c.push(Gate::Cswap { control: 0, a: 3, b: 4 }).unwrap();
        c.push(Gate::Ccswap { c1: 1, c2: 2, pol1: false, pol2: true, a: 0, b: 5 }).unwrap();
        c.push(Gate::Project { q: 5, onto: Basis::Plus }).unwrap();
        let text = emit(&c);
        let back = parse(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn emit_empty_is_header_only() {
        let c = Circuit::new(3);
        assert_eq!(emit(&c), "qubits 3\ndepth 0\n");
        assert_eq!(parse("qubits 3\ndepth 0\n").unwrap(), c);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse("").is_err());
        assert!(parse("qubits 2\n").is_err());
        assert!(parse("qubits 2\ndepth 1\nfoo 0\n").is_err());
        assert!(parse("qubits 2\ndepth 0\ncx 0 1\n").is_err()); // depth mismatch
        assert!(parse("qubits 2\ndepth 1\ncx 0 5\n").is_err()); // out of range
        assert!(parse("qubits 3\ndepth 1\ncx 0 1\ncx 1 2\n").is_err()); // overlap
        assert!(parse("qubits 2\ndepth 1\nproj 0 sideways\n").is_err());
        assert!(parse("qubits 2\ndepth 1\nu 0 1 0\n").is_err());
    }

    #[test]
    fn golden_concat_n2() {
        let text = emit(&build_concat_circuit(2).unwrap());
        let golden = include_str!("../tests/golden/concat_n2.txt");
        assert_eq!(text, golden);
    }

    #[test]
    fn light_cone_worked_example() {
        // one layer with groups {1,4} and {2,3}: qubit 1's cone is {1,4}
        let s = GroupingSchedule::new(
            5,
            vec![vec![vec![0], vec![1, 4], vec![2, 3]]],
        )
        .unwrap();
        let cone = s.light_cone(1).unwrap();
        assert_eq!(cone, BTreeSet::from([1, 4]));
    }

    #[test]
    fn light_cone_singletons_stay_put() {
        let layers = vec![vec![vec![0], vec![1], vec![2]]; 3];
        let s = GroupingSchedule::new(3, layers).unwrap();
        for j in 0..3 {
            assert_eq!(s.light_cone(j).unwrap(), BTreeSet::from([j]));
        }
    }

    #[test]
    fn light_cone_bounded_by_k_pow_l() {
        let mut rng = ChaCha12Rng::seed_from_u64(89);
        for _ in 0..20 {
            let nq = rng.gen_range(2..=12);
            let nl = rng.gen_range(1..=4);
            let mg = rng.gen_range(2..=4);
            let s = random_schedule(nq, nl, mg, &mut rng);
            let bound = (s.k() as f64).powi(s.num_layers() as i32);
            for j in 0..nq {
                let cone = s.light_cone(j).unwrap();
                assert!(cone.len() as f64 <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn light_cone_monotone_under_group_split() {
        let mut rng = ChaCha12Rng::seed_from_u64(90);
        for _ in 0..10 {
            let s = random_schedule(8, 3, 4, &mut rng);
            // split the first splittable group of the first layer
            let mut layers = s.layers().to_vec();
            let li = 0;
            if let Some(gi) = layers[li].iter().position(|g| g.len() >= 2) {
                let half = layers[li][gi].len() / 2;
                let moved = layers[li][gi].split_off(half);
                layers[li].push(moved);
                let refined = GroupingSchedule::new(8, layers).unwrap();
                for j in 0..8 {
                    let before = s.light_cone(j).unwrap();
                    let after = refined.light_cone(j).unwrap();
                    assert!(after.is_subset(&before), "j={j}");
                }
            }
        }
    }

    #[test]
    fn depth_lower_bound_extremes() {
        assert!((depth_lower_bound(256, 2) - 8.0).abs() < 1e-12);
        assert!((depth_lower_bound(256, 256) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn network_depth_respects_lower_bound() {
        for m in [3usize, 5] {
            let v = crate::encoding::uniform_vector(m);
            let c = build_full_network(&v, 1).unwrap().decompose();
            let sched = schedule_from_circuit(&c);
            // data enters through the leaf wires; the top label qubit's
            // cone must reach all of them
            let cone = sched.light_cone(0).unwrap();
            let dim = 1usize << m;
            assert!(cone.len() >= dim, "cone {} < {dim}", cone.len());
            let bound = depth_lower_bound(dim, sched.k());
            assert!(sched.num_layers() as f64 >= bound);
        }
    }

    #[test]
    fn schedule_round_trip_and_validation() {
        let s = GroupingSchedule::new(4, vec![vec![vec![0, 1], vec![2, 3]], vec![
            vec![0, 3],
            vec![1],
            vec![2],
        ]])
        .unwrap();
        let text = s.emit();
        assert_eq!(GroupingSchedule::parse(&text).unwrap(), s);
        assert!(GroupingSchedule::parse("0,1;1,2\n").is_err()); // repeat
        assert!(GroupingSchedule::parse("\n").is_err());
        assert!(GroupingSchedule::new(3, vec![vec![vec![0, 1]]]).is_err()); // misses 2
    }
}

/// Layer count of the fixed cswap decomposition.
pub const CSWAP_DEPTH: usize = 25;
/// Layer count of the fixed ccswap (positive polarities) decomposition.
pub const CCSWAP_DEPTH: usize = 75;

