//! Classical data vectors and their label-encoding states.
//!
//! An `AmplitudeVector` u is unit-norm classical data. Dividing by its
//! largest modulus gives a `ResizedVector` v with entries in the unit disk.
//! A `LabelState` stores v in n+1 qubits: each basis label |n,i⟩ is paired
//! with a value qubit v_i|0⟩ + (1-v_i)|1⟩, with the unnormalized squared
//! norm A = Σ(|v_i|² + |1-v_i|²) tracked on the side.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{PureState, C64};

fn check_power_of_two(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Unit-norm classical data of power-of-two dimension.
#[derive(Debug, Clone)]
pub struct AmplitudeVector {
    entries: Vec<C64>,
}

impl AmplitudeVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        check_power_of_two(entries.len())?;
        let norm_sq: f64 = entries.iter().map(|e| e.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized((norm_sq - 1.0).abs()));
        }
        Ok(Self { entries })
    }

    /// Normalize arbitrary nonzero data.
    pub fn from_unnormalized(entries: Vec<C64>) -> Result<Self> {
        check_power_of_two(entries.len())?;
        let norm_sq: f64 = entries.iter().map(|e| e.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::ZeroVector);
        }
        let inv = 1.0 / norm_sq.sqrt();
        Ok(Self { entries: entries.into_iter().map(|e| e * inv).collect() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_qubits(&self) -> usize {
        self.entries.len().trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }
}

/// Data scaled so every entry sits in the unit disk.
///
/// `resize` additionally guarantees max |v_i| = 1; intermediate states
/// (halves of a resized vector) may have a smaller maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ResizedVector {
    entries: Vec<C64>,
    positive_only: bool,
}

impl ResizedVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        check_power_of_two(entries.len())?;
        for e in &entries {
            if e.norm() > 1.0 + 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "entry modulus {} exceeds 1",
                    e.norm()
                )));
            }
        }
        // the all-zero vector is allowed: it still label-encodes (every value
        // qubit is |1⟩) and shows up as a component of complex decompositions
        let positive_only = entries
            .iter()
            .all(|e| e.im.abs() <= 1e-12 && e.re >= -1e-12);
        Ok(Self { entries, positive_only })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_qubits(&self) -> usize {
        self.entries.len().trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn positive_only(&self) -> bool {
        self.positive_only
    }

    /// True when the largest modulus is 1, i.e. this is a `resize` output.
    pub fn is_canonical(&self) -> bool {
        let max = self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max);
        (max - 1.0).abs() <= 1e-12
    }

    /// Split into first and second halves.
    pub fn halves(&self) -> (Vec<C64>, Vec<C64>) {
        let half = self.entries.len() / 2;
        (self.entries[..half].to_vec(), self.entries[half..].to_vec())
    }

    /// Σ(|v_i|² + |1-v_i|²), the squared norm of the label encoding.
    pub fn label_norm_sq(&self) -> f64 {
        label_norm_sq(&self.entries)
    }

    pub fn max_entry_dev(&self, other: &ResizedVector) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Σ(|v_i|² + |1-v_i|²) over raw entries.
pub fn label_norm_sq(entries: &[C64]) -> f64 {
    entries
        .iter()
        .map(|v| v.norm_sqr() + (C64::new(1.0, 0.0) - v).norm_sqr())
        .sum()
}

/// v := u / max|u_i|.
pub fn resize(u: &AmplitudeVector) -> ResizedVector {
    let max = u.entries.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let entries: Vec<C64> = u.entries.iter().map(|e| e / max).collect();
    ResizedVector::new(entries).expect("unit-norm input always resizes")
}

/// The uniform vector [1/2, ..., 1/2] of dimension 2^n.
pub fn uniform_vector(n: usize) -> ResizedVector {
    // not canonical (max = 1/2), but it is exactly the disentangled residue
    // of a successful concatenation, so it gets its own constructor
    ResizedVector::new(vec![C64::new(0.5, 0.0); 1 << n]).unwrap()
}

/// The n-qubit state with amplitudes u_i.
pub fn target_state(u: &AmplitudeVector) -> PureState {
    PureState::from_unnormalized(u.num_qubits(), u.entries.clone())
        .expect("unit-norm input")
}

/// Label-encoding state: n label qubits followed by one value qubit.
#[derive(Debug, Clone)]
pub struct LabelState {
    state: PureState,
}

impl LabelState {
    /// Direct construction from entries in the unit disk.
    pub fn encode(v: &ResizedVector) -> Self {
        let n = v.num_qubits();
        let mut amps = Vec::with_capacity(1 << (n + 1));
        for e in v.entries() {
            amps.push(*e);
            amps.push(C64::new(1.0, 0.0) - e);
        }
        let state = PureState::from_unnormalized(n + 1, amps).expect("nonzero by construction");
        Self { state }
    }

    /// Wrap an existing (n+1)-qubit state claimed to be of label form.
    /// Structure is not validated here; `decode` is the validator.
    pub fn from_state(state: PureState) -> Result<Self> {
        if state.num_qubits() < 2 {
            return Err(Error::NotALabelState(
                "need at least one label qubit plus the value qubit".into(),
            ));
        }
        Ok(Self { state })
    }

    /// Number of label qubits.
    pub fn n(&self) -> usize {
        self.state.num_qubits() - 1
    }

    /// Encoded dimension N = 2^n.
    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    /// Squared norm A of the unnormalized encoding.
    pub fn norm_sq(&self) -> f64 {
        self.state.norm_sq()
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn into_state(self) -> PureState {
        self.state
    }

    /// Read the encoded vector back out.
    ///
    /// For every label i the amplitudes of |n,i⟩|0⟩ and |n,i⟩|1⟩ must sum to
    /// one common constant (a global phase over √A); v_i is the |0⟩ amplitude
    /// divided by that constant.
    pub fn decode(&self) -> Result<ResizedVector> {
        let dim = self.dim();
        let amps = self.state.amps();
        let mut sums = Vec::with_capacity(dim);
        for i in 0..dim {
            sums.push(amps[2 * i] + amps[2 * i + 1]);
        }
        let mean: C64 = sums.iter().sum::<C64>() / dim as f64;
        let scale = mean.norm().max(1e-300);
        for (i, s) in sums.iter().enumerate() {
            if (s - mean).norm() > 1e-8 * scale.max(1.0) {
                return Err(Error::NotALabelState(format!(
                    "row {} sum {:.3e} deviates from common constant {:.3e}",
                    i,
                    s,
                    mean
                )));
            }
        }
        if mean.norm() < 1e-12 {
            return Err(Error::NotALabelState("vanishing row sums".into()));
        }
        let entries: Vec<C64> = (0..dim).map(|i| amps[2 * i] / mean).collect();
        // clamp float dust so the unit-disk constructor accepts exact-boundary entries
        let entries = entries
            .into_iter()
            .map(|e| if e.norm() > 1.0 && e.norm() < 1.0 + 1e-9 { e / e.norm() } else { e })
            .collect();
        ResizedVector::new(entries)
    }
}

/// Base-case label state for a 2-dimensional vector.
pub fn build_base(v: &ResizedVector) -> Result<LabelState> {
    if v.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "base case needs dimension 2, got {}",
            v.len()
        )));
    }
    Ok(LabelState::encode(v))
}

/// Parse a vector file: one `re im` pair per line, blank lines and `#`
/// comments ignored.
pub fn parse_vector_file(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let re: f64 = it
            .next()
            .ok_or(Error::Parse { line: idx + 1, msg: "missing real part".into() })?
            .parse()
            .map_err(|e| Error::Parse { line: idx + 1, msg: format!("bad real part: {e}") })?;
        let im: f64 = match it.next() {
            Some(tok) => tok
                .parse()
                .map_err(|e| Error::Parse { line: idx + 1, msg: format!("bad imag part: {e}") })?,
            None => 0.0,
        };
        if it.next().is_some() {
            return Err(Error::Parse { line: idx + 1, msg: "trailing tokens".into() });
        }
        out.push(Complex64::new(re, im));
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty vector file".into() });
    }
    Ok(out)
}

/// Render a vector in the `re im` line format.
pub fn format_vector(entries: &[Complex64]) -> String {
    let mut s = String::new();
    for e in entries {
        s.push_str(&format!("{:.17e} {:.17e}\n", e.re, e.im));
    }
    s
}
