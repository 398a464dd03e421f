//! Dense statevector engine.
//!
//! Qubit 0 is the most significant bit of the basis label, so a basis index
//! read as a binary string matches the ket written left to right
//! (|110⟩ has qubit 0 = 1, qubit 1 = 1, qubit 2 = 0).
//!
//! States are stored as a normalized amplitude array plus a separately
//! tracked `norm_sq`, the squared norm of the unnormalized ket the state
//! stands for. Probability formulas work on `norm_sq` ratios.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// |+⟩ as a projection target.
pub fn ket_plus() -> [C64; 2] {
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]
}

/// |−⟩ as a projection target.
pub fn ket_minus() -> [C64; 2] {
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]
}

pub fn ket_zero() -> [C64; 2] {
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
}

pub fn ket_one() -> [C64; 2] {
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
}

/// Dense pure state over `num_qubits` qubits.
#[derive(Debug, Clone)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<C64>,
    norm_sq: f64,
}

fn is_unitary(u: &Mat2, tol: f64) -> bool {
    // U† U = I
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..2 {
                s += u[k][i].conj() * u[k][j];
            }
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            dev = dev.max((s - target).norm());
        }
    }
    dev <= tol
}

impl PureState {
    /// |0...0⟩ on `num_qubits` qubits, norm_sq = 1.
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "num_qubits must be >= 1");
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Self { num_qubits, amps, norm_sq: 1.0 }
    }

    /// Basis state |num_qubits, index⟩.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(index < (1 << num_qubits));
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { num_qubits, amps, norm_sq: 1.0 }
    }

    /// Build from an unnormalized amplitude array; `norm_sq` records the
    /// squared norm of the input.
    pub fn from_unnormalized(num_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                1usize << num_qubits,
                amps.len()
            )));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::ZeroVector);
        }
        let inv = 1.0 / norm_sq.sqrt();
        for a in amps.iter_mut() {
            *a *= inv;
        }
        Ok(Self { num_qubits, amps, norm_sq })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Normalized amplitudes.
    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// Squared norm of the unnormalized ket this state stands for.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn with_norm_sq(mut self, norm_sq: f64) -> Self {
        self.norm_sq = norm_sq;
        self
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    fn check_index(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::IndexOutOfRange { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    fn check_distinct(qs: &[usize]) -> Result<()> {
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(Error::DuplicateIndices);
            }
        }
        Ok(())
    }

    /// Kronecker product self ⊗ other; norm_sq multiplies.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let n = self.num_qubits + other.num_qubits;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState { num_qubits: n, amps, norm_sq: self.norm_sq * other.norm_sq }
    }

    pub fn apply_1q(&mut self, q: usize, u: &Mat2) -> Result<()> {
        self.check_index(q)?;
        if !is_unitary(u, 1e-10) {
            let mut dev: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = C64::new(0.0, 0.0);
                    for k in 0..2 {
                        s += u[k][i].conj() * u[k][j];
                    }
                    let t = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((s - t).norm());
                }
            }
            return Err(Error::NonUnitary(dev));
        }
        let m = self.mask(q);
        for k in 0..self.amps.len() {
            if k & m == 0 {
                let a0 = self.amps[k];
                let a1 = self.amps[k | m];
                self.amps[k] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[k | m] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_index(control)?;
        self.check_index(target)?;
        Self::check_distinct(&[control, target])?;
        let mc = self.mask(control);
        let mt = self.mask(target);
        for k in 0..self.amps.len() {
            if k & mc != 0 && k & mt == 0 {
                self.amps.swap(k, k | mt);
            }
        }
        Ok(())
    }

    /// Fredkin gate: swap qubits `a`, `b` where `control` is 1.
    pub fn apply_cswap(&mut self, control: usize, a: usize, b: usize) -> Result<()> {
        self.check_index(control)?;
        self.check_index(a)?;
        self.check_index(b)?;
        Self::check_distinct(&[control, a, b])?;
        let mc = self.mask(control);
        let ma = self.mask(a);
        let mb = self.mask(b);
        for k in 0..self.amps.len() {
            // visit each swapped pair once: a-bit set, b-bit clear
            if k & mc != 0 && k & ma != 0 && k & mb == 0 {
                self.amps.swap(k, (k & !ma) | mb);
            }
        }
        Ok(())
    }

    /// Doubly controlled swap with per-control polarities: the swap fires on
    /// basis states where bit(c1) == pol1 and bit(c2) == pol2.
    pub fn apply_ccswap(
        &mut self,
        c1: usize,
        c2: usize,
        pol1: bool,
        pol2: bool,
        a: usize,
        b: usize,
    ) -> Result<()> {
        for q in [c1, c2, a, b] {
            self.check_index(q)?;
        }
        Self::check_distinct(&[c1, c2, a, b])?;
        let m1 = self.mask(c1);
        let m2 = self.mask(c2);
        let ma = self.mask(a);
        let mb = self.mask(b);
        for k in 0..self.amps.len() {
            let c1_on = (k & m1 != 0) == pol1;
            let c2_on = (k & m2 != 0) == pol2;
            if c1_on && c2_on && k & ma != 0 && k & mb == 0 {
                self.amps.swap(k, (k & !ma) | mb);
            }
        }
        Ok(())
    }

    /// Project qubit `q` onto the single-qubit state `onto`.
    ///
    /// Returns the exact success probability ⟨Ψ|M†M|Ψ⟩ and the renormalized
    /// post-projection state (with `norm_sq` scaled by the probability).
    pub fn project(&self, q: usize, onto: &[C64; 2]) -> Result<(f64, PureState)> {
        self.check_index(q)?;
        let onto_norm: f64 = onto[0].norm_sqr() + onto[1].norm_sqr();
        if (onto_norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized((onto_norm - 1.0).abs()));
        }
        let m = self.mask(q);
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        let mut prob = 0.0;
        for k in 0..self.amps.len() {
            if k & m == 0 {
                let overlap = onto[0].conj() * self.amps[k] + onto[1].conj() * self.amps[k | m];
                prob += overlap.norm_sqr();
                amps[k] = overlap * onto[0];
                amps[k | m] = overlap * onto[1];
            }
        }
        if prob <= 1e-300 {
            return Err(Error::ImpossibleOutcome);
        }
        let inv = 1.0 / prob.sqrt();
        for a in amps.iter_mut() {
            *a *= inv;
        }
        Ok((prob, PureState { num_qubits: self.num_qubits, amps, norm_sq: self.norm_sq * prob }))
    }

    /// Reshape amplitudes into a (subset, complement) matrix. Row index runs
    /// over the subset qubits in the order given; column index keeps the
    /// remaining qubits in ascending order.
    fn reshape(&self, subset: &[usize]) -> (Vec<C64>, usize, usize) {
        let rest: Vec<usize> =
            (0..self.num_qubits).filter(|q| !subset.contains(q)).collect();
        let rows = 1usize << subset.len();
        let cols = 1usize << rest.len();
        let mut mat = vec![C64::new(0.0, 0.0); rows * cols];
        for k in 0..self.amps.len() {
            let mut r = 0usize;
            for (pos, &q) in subset.iter().enumerate() {
                if k & self.mask(q) != 0 {
                    r |= 1 << (subset.len() - 1 - pos);
                }
            }
            let mut c = 0usize;
            for (pos, &q) in rest.iter().enumerate() {
                if k & self.mask(q) != 0 {
                    c |= 1 << (rest.len() - 1 - pos);
                }
            }
            mat[r * cols + c] = self.amps[k];
        }
        (mat, rows, cols)
    }

    /// Purity of the reduced state on `subset`.
    pub fn purity(&self, subset: &[usize]) -> Result<f64> {
        for &q in subset {
            self.check_index(q)?;
        }
        Self::check_distinct(subset)?;
        if subset.is_empty() || subset.len() >= self.num_qubits {
            return Err(Error::DimensionMismatch(
                "subset must be nonempty and proper".into(),
            ));
        }
        // purity of the subset equals purity of its complement for a pure
        // global state; compute the Gram matrix on the smaller side
        let complement: Vec<usize> =
            (0..self.num_qubits).filter(|q| !subset.contains(q)).collect();
        let side = if subset.len() <= complement.len() { subset } else { &complement[..] };
        let (mat, rows, cols) = self.reshape(side);
        let mut purity = 0.0;
        for i in 0..rows {
            for j in 0..rows {
                let mut g = C64::new(0.0, 0.0);
                for c in 0..cols {
                    g += mat[i * cols + c] * mat[j * cols + c].conj();
                }
                purity += g.norm_sqr();
            }
        }
        Ok(purity)
    }

    /// Check whether `subset` is disentangled from the rest; if so, return
    /// the factor state on the subset (phase-canonical).
    pub fn factor_check(&self, subset: &[usize]) -> Result<(bool, Option<PureState>)> {
        let purity = self.purity(subset)?;
        if purity < 1.0 - 1e-10 {
            return Ok((false, None));
        }
        let (mat, rows, cols) = self.reshape(subset);
        // the factor is proportional to the strongest column
        let mut best = 0usize;
        let mut best_norm = -1.0f64;
        for c in 0..cols {
            let nrm: f64 = (0..rows).map(|r| mat[r * cols + c].norm_sqr()).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = c;
            }
        }
        let col: Vec<C64> = (0..rows).map(|r| mat[r * cols + best]).collect();
        let mut factor = PureState::from_unnormalized(subset.len(), col)?;
        factor.norm_sq = 1.0;
        factor.canonicalize_phase();
        Ok((true, Some(factor)))
    }

    /// Multiply by a global phase so the first amplitude with magnitude
    /// above 1e-12 is real and positive.
    pub fn canonicalize_phase(&mut self) {
        if let Some(a) = self.amps.iter().find(|a| a.norm() > 1e-12) {
            let phase = a.conj() / a.norm();
            for x in self.amps.iter_mut() {
                *x *= phase;
            }
        }
    }

    /// |⟨self|other⟩|² on normalized amplitudes (phase-insensitive).
    pub fn fidelity(&self, other: &PureState) -> f64 {
        assert_eq!(self.num_qubits, other.num_qubits);
        let ip: C64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        ip.norm_sqr()
    }

    /// Max elementwise amplitude deviation after phase canonicalization.
    pub fn distance(&self, other: &PureState) -> f64 {
        let mut a = self.clone();
        let mut b = other.clone();
        a.canonicalize_phase();
        b.canonicalize_phase();
        a.amps
            .iter()
            .zip(&b.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

pub mod gates {
    use super::{C64, Mat2, FRAC_1_SQRT_2};

    pub fn x() -> Mat2 {
        [
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ]
    }

    pub fn h() -> Mat2 {
        [
            [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
            [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)],
        ]
    }

    pub fn s() -> Mat2 {
        [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
        ]
    }

    pub fn rz(theta: f64) -> Mat2 {
        let e0 = C64::from_polar(1.0, -theta / 2.0);
        let e1 = C64::from_polar(1.0, theta / 2.0);
        [[e0, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), e1]]
    }

    pub fn ry(theta: f64) -> Mat2 {
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        [
            [C64::new(c, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(c, 0.0)],
        ]
    }

    pub fn phase(alpha: f64) -> Mat2 {
        let e = C64::from_polar(1.0, alpha);
        [[e, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), e]]
    }

    pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    pub fn dagger(a: &Mat2) -> Mat2 {
        [
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ]
    }

    /// Principal square root of a 2x2 unitary via eigendecomposition.
    pub fn sqrt_unitary(u: &Mat2) -> Mat2 {
        // eigenvalues of a 2x2 matrix
        let tr = u[0][0] + u[1][1];
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l0 = (tr + disc) / 2.0;
        let l1 = (tr - disc) / 2.0;
        let sqrt_eig = |l: C64| C64::from_polar(l.norm().sqrt(), l.arg() / 2.0);
        if (l0 - l1).norm() < 1e-14 {
            let s = sqrt_eig(l0);
            return [
                [s, C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), s],
            ];
        }
        // eigenvector for l: (u - l1 I) has columns proportional to v0, etc.
        let ev = |l: C64, other: C64| -> [C64; 2] {
            // column of (u - other*I) with the larger norm
            let c0 = [u[0][0] - other, u[1][0]];
            let c1 = [u[0][1], u[1][1] - other];
            let n0 = c0[0].norm_sqr() + c0[1].norm_sqr();
            let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
            let v = if n0 >= n1 { c0 } else { c1 };
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            let _ = l;
            [v[0] / n, v[1] / n]
        };
        let v0 = ev(l0, l1);
        let v1 = ev(l1, l0);
        let s0 = sqrt_eig(l0);
        let s1 = sqrt_eig(l1);
        // sqrt(U) = s0 v0 v0† + s1 v1 v1† (eigenvectors of a unitary are orthogonal)
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = s0 * v0[i] * v0[j].conj() + s1 * v1[i] * v1[j].conj();
            }
        }
        out
    }
}
