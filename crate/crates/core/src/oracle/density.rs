use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::gates::matmul;
use super::OracleError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense `2^n × 2^n` density matrix, row-major. Qubit `k` is bit `k` of the
/// basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

fn check_unit(name: &str, v: f64) -> Result<(), OracleError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(OracleError::Domain(format!("{name} = {v} outside [0, 1]")))
    }
}

/// Basis indices obtained by writing every local pattern `m` into the bits
/// `qubits` of `base`. `qubits[0]` is the most significant local bit.
fn scatter(base: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|m| {
            qubits.iter().enumerate().fold(base, |idx, (j, &q)| {
                if (m >> (k - 1 - j)) & 1 == 1 {
                    idx | (1 << q)
                } else {
                    idx
                }
            })
        })
        .collect()
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Self { n, data }
    }

    pub fn from_pure(psi: &[Complex64]) -> Result<Self, OracleError> {
        let dim = psi.len();
        if !dim.is_power_of_two() {
            return Err(OracleError::DimensionMismatch(format!(
                "state length {dim} is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = psi[r] * psi[c].conj();
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_data(n: usize, data: Vec<Complex64>) -> Result<Self, OracleError> {
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(OracleError::DimensionMismatch(format!(
                "{} entries for {n} qubits",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_bloch(r: BlochVector) -> Self {
        let data = vec![
            Complex64::new((1.0 + r.z) / 2.0, 0.0),
            Complex64::new(r.x / 2.0, -r.y / 2.0),
            Complex64::new(r.x / 2.0, r.y / 2.0),
            Complex64::new((1.0 - r.z) / 2.0, 0.0),
        ];
        Self { n: 1, data }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_rc|² for Hermitian ρ
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<(), OracleError> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n || qubits[..i].contains(&q) {
                return Err(OracleError::DimensionMismatch(format!(
                    "qubits {qubits:?} invalid for a {}-qubit state",
                    self.n
                )));
            }
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim(), self.dim(), &self.data)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.to_nalgebra())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    /// Hermitian, unit trace and eigenvalues ≥ −1e-9.
    pub fn is_valid(&self, tol: f64) -> bool {
        let d = self.dim();
        let hermitian =
            (0..d).all(|r| (0..d).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol));
        hermitian
            && (self.trace() - 1.0).norm() <= tol
            && self.eigenvalues().iter().all(|&l| l >= -1e-9)
    }

    // -----------------------------------------------------------------------
    // Channels
    // -----------------------------------------------------------------------

    /// `M ρ M†` for an operator `m` on `qubits`; `m` need not be unitary.
    fn conjugated(&self, m: &[Complex64], qubits: &[usize]) -> Self {
        let d = self.dim();
        let k = qubits.len();
        let local = 1usize << k;
        let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
        let groups: Vec<Vec<usize>> = (0..d)
            .filter(|i| i & mask == 0)
            .map(|base| scatter(base, qubits))
            .collect();
        let mut out = self.data.clone();
        let mut buf = vec![ZERO; local];

        // left multiply: columns
        for c in 0..d {
            for idx in &groups {
                for a in 0..local {
                    buf[a] = (0..local)
                        .map(|b| m[a * local + b] * out[idx[b] * d + c])
                        .sum();
                }
                for (a, &ra) in idx.iter().enumerate() {
                    out[ra * d + c] = buf[a];
                }
            }
        }
        // right multiply by M†: rows
        for r in 0..d {
            for idx in &groups {
                for a in 0..local {
                    buf[a] = (0..local)
                        .map(|b| out[r * d + idx[b]] * m[a * local + b].conj())
                        .sum();
                }
                for (a, &ca) in idx.iter().enumerate() {
                    out[r * d + ca] = buf[a];
                }
            }
        }
        Self {
            n: self.n,
            data: out,
        }
    }

    pub fn apply_unitary(&self, u: &[Complex64], qubits: &[usize]) -> Result<Self, OracleError> {
        self.check_qubits(qubits)?;
        if u.len() != 1 << (2 * qubits.len()) {
            return Err(OracleError::DimensionMismatch(format!(
                "{}-entry matrix on {} qubits",
                u.len(),
                qubits.len()
            )));
        }
        Ok(self.conjugated(u, qubits))
    }

    /// `Σ_k K_k ρ K_k†`.
    pub fn apply_kraus(
        &self,
        ops: &[Vec<Complex64>],
        qubits: &[usize],
    ) -> Result<Self, OracleError> {
        self.check_qubits(qubits)?;
        let mut acc = vec![ZERO; self.data.len()];
        for k in ops {
            if k.len() != 1 << (2 * qubits.len()) {
                return Err(OracleError::DimensionMismatch("Kraus operator size".into()));
            }
            let term = self.conjugated(k, qubits);
            for (a, t) in acc.iter_mut().zip(&term.data) {
                *a += t;
            }
        }
        Ok(Self {
            n: self.n,
            data: acc,
        })
    }

    /// `(1−p)ρ + p·(I/d ⊗ Tr_qubits ρ)` on the listed qubits.
    pub fn apply_depolarizing(&self, qubits: &[usize], p: f64) -> Result<Self, OracleError> {
        check_unit("p", p)?;
        self.check_qubits(qubits)?;
        if p == 0.0 {
            return Ok(self.clone());
        }
        let d = self.dim();
        let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
        let local = 1usize << qubits.len();
        let patterns: Vec<usize> = scatter(0, qubits);
        let weight = p / local as f64;
        let mut out: Vec<Complex64> = self.data.iter().map(|z| z * (1.0 - p)).collect();
        for r in 0..d {
            for c in 0..d {
                if r & mask != c & mask {
                    continue;
                }
                let (rb, cb) = (r & !mask, c & !mask);
                let s: Complex64 = patterns
                    .iter()
                    .map(|&pat| self.data[(rb | pat) * d + (cb | pat)])
                    .sum();
                out[r * d + c] += weight * s;
            }
        }
        Ok(Self {
            n: self.n,
            data: out,
        })
    }

    /// Amplitude damping toward `|0⟩` with `γ = 1 − e^{−t/T1}` followed by
    /// pure dephasing, so coherences decay as `e^{−t/T2}` overall.
    pub fn apply_thermal(
        &self,
        qubit: usize,
        t: f64,
        t1: f64,
        t2: f64,
    ) -> Result<Self, OracleError> {
        check_thermal(t, t1, t2)?;
        self.check_qubits(&[qubit])?;
        let d = self.dim();
        let b = 1usize << qubit;
        let gamma = 1.0 - (-t / t1).exp();
        let coherence = (-t / t2).exp();
        let mut out = self.data.clone();
        for r in 0..d {
            for c in 0..d {
                let v = &mut out[r * d + c];
                match (r & b != 0, c & b != 0) {
                    (false, false) => *v += gamma * self.data[(r | b) * d + (c | b)],
                    (true, true) => *v *= 1.0 - gamma,
                    _ => *v *= coherence,
                }
            }
        }
        Ok(Self {
            n: self.n,
            data: out,
        })
    }

    // -----------------------------------------------------------------------
    // Subsystems
    // -----------------------------------------------------------------------

    /// Reduced state on `keep`; qubit `keep[i]` becomes qubit `i`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, OracleError> {
        if keep.is_empty() {
            return Err(OracleError::DimensionMismatch(
                "partial trace must keep at least one qubit".into(),
            ));
        }
        self.check_qubits(keep)?;
        let d = self.dim();
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let kd = 1usize << keep.len();
        let embed = |m: usize| -> usize {
            keep.iter().enumerate().fold(0, |idx, (i, &q)| {
                if (m >> i) & 1 == 1 {
                    idx | (1 << q)
                } else {
                    idx
                }
            })
        };
        let env: Vec<usize> = (0..1usize << traced.len())
            .map(|e| {
                traced.iter().enumerate().fold(0, |idx, (i, &q)| {
                    if (e >> i) & 1 == 1 {
                        idx | (1 << q)
                    } else {
                        idx
                    }
                })
            })
            .collect();
        let mut out = vec![ZERO; kd * kd];
        for r in 0..kd {
            let re = embed(r);
            for c in 0..kd {
                let ce = embed(c);
                out[r * kd + c] = env
                    .iter()
                    .map(|&e| self.data[(re | e) * d + (ce | e)])
                    .sum();
            }
        }
        Ok(Self {
            n: keep.len(),
            data: out,
        })
    }

    /// Transpose of the listed qubits' indices.
    pub fn partial_transpose(&self, qubits: &[usize]) -> Result<Self, OracleError> {
        self.check_qubits(qubits)?;
        let d = self.dim();
        let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                let r2 = (r & !mask) | (c & mask);
                let c2 = (c & !mask) | (r & mask);
                out[r2 * d + c2] = self.data[r * d + c];
            }
        }
        Ok(Self {
            n: self.n,
            data: out,
        })
    }

    pub fn bloch_vector(&self) -> Result<BlochVector, OracleError> {
        if self.n != 1 {
            return Err(OracleError::DimensionMismatch(
                "Bloch vector needs a single qubit".into(),
            ));
        }
        let off = self.data[1];
        Ok(BlochVector {
            x: 2.0 * off.re,
            y: -2.0 * off.im,
            z: (self.data[0] - self.data[3]).re,
        })
    }

    /// Row-major interleaved `(re, im)` little-endian `f64` pairs.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * 16);
        for z in &self.data {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }
}

pub(crate) fn check_thermal(t: f64, t1: f64, t2: f64) -> Result<(), OracleError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(OracleError::Domain(format!(
            "duration {t} must be finite and non-negative"
        )));
    }
    if !(t1 > 0.0 && t2 > 0.0 && t1.is_finite() && t2.is_finite()) {
        return Err(OracleError::Domain(format!(
            "t1 = {t1}, t2 = {t2} must be finite and positive"
        )));
    }
    if t2 > 2.0 * t1 * (1.0 + 1e-12) {
        return Err(OracleError::Domain(format!(
            "t2 = {t2} exceeds 2·t1 = {}",
            2.0 * t1
        )));
    }
    Ok(())
}

/// Kraus operators of the thermal channel used by
/// [`DensityMatrix::apply_thermal`]: amplitude damping composed with phase
/// damping.
pub fn thermal_kraus(t: f64, t1: f64, t2: f64) -> Result<Vec<Vec<Complex64>>, OracleError> {
    check_thermal(t, t1, t2)?;
    let r = |x: f64| Complex64::new(x, 0.0);
    let gamma = 1.0 - (-t / t1).exp();
    // remaining coherence factor after amplitude damping's e^{−t/2T1}
    let lambda = ((-t / t2).exp() / (-t / (2.0 * t1)).exp()).min(1.0);
    let mu = 1.0 - lambda * lambda;
    let damping = [
        vec![r(1.0), r(0.0), r(0.0), r((1.0 - gamma).sqrt())],
        vec![r(0.0), r(gamma.sqrt()), r(0.0), r(0.0)],
    ];
    let dephasing = [
        vec![r(1.0), r(0.0), r(0.0), r((1.0 - mu).sqrt())],
        vec![r(0.0), r(0.0), r(0.0), r(mu.sqrt())],
    ];
    Ok(dephasing
        .iter()
        .flat_map(|e| damping.iter().map(move |k| matmul(e, k, 2)))
        .collect())
}

/// Depolarizing channel on `num_qubits` qubits as `4^num_qubits` Pauli Kraus
/// operators.
pub fn depolarizing_kraus(p: f64, num_qubits: usize) -> Vec<Vec<Complex64>> {
    let paulis: [Vec<Complex64>; 4] = [
        vec![1.0.into(), ZERO, ZERO, 1.0.into()],
        vec![ZERO, 1.0.into(), 1.0.into(), ZERO],
        vec![
            ZERO,
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            ZERO,
        ],
        vec![1.0.into(), ZERO, ZERO, (-1.0).into()],
    ];
    let d2 = 1usize << (2 * num_qubits);
    let mut ops: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]];
    for _ in 0..num_qubits {
        ops = ops
            .iter()
            .flat_map(|a| paulis.iter().map(move |b| kron(a, b)))
            .collect();
    }
    ops.into_iter()
        .enumerate()
        .map(|(i, op)| {
            let w = if i == 0 {
                1.0 - p + p / d2 as f64
            } else {
                p / d2 as f64
            };
            op.into_iter().map(|z| z * w.sqrt()).collect()
        })
        .collect()
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let da = (a.len() as f64).sqrt() as usize;
    let db = (b.len() as f64).sqrt() as usize;
    let d = da * db;
    let mut out = vec![ZERO; d * d];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k) * d + (j * db + l)] = a[i * da + j] * b[k * db + l];
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Comparisons between states
// ---------------------------------------------------------------------------

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<(), OracleError> {
    if a.n != b.n {
        return Err(OracleError::DimensionMismatch(format!(
            "{} vs {} qubits",
            a.n, b.n
        )));
    }
    Ok(())
}

/// `Re Tr(ρσ)`.
pub fn trace_inner(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, OracleError> {
    same_dim(rho, sigma)?;
    let d = rho.dim();
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            acc += (rho.data[r * d + c] * sigma.data[c * d + r]).re;
        }
    }
    Ok(acc)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &[Complex64]) -> Result<f64, OracleError> {
    let d = rho.dim();
    if psi.len() != d {
        return Err(OracleError::DimensionMismatch(format!(
            "state length {} vs dim {d}",
            psi.len()
        )));
    }
    let mut acc = ZERO;
    for r in 0..d {
        if psi[r] == ZERO {
            continue;
        }
        let row: Complex64 = (0..d).map(|c| rho.data[r * d + c] * psi[c]).sum();
        acc += psi[r].conj() * row;
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`. Falls back to `Tr(ρσ)` when either
/// argument is pure.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, OracleError> {
    same_dim(rho, sigma)?;
    const PURE: f64 = 1.0 - 1e-12;
    if rho.purity() >= PURE || sigma.purity() >= PURE {
        return Ok(trace_inner(rho, sigma)?.clamp(0.0, 1.0));
    }
    let eig = SymmetricEigen::new(rho.to_nalgebra());
    let sqrt_vals = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
    );
    let v = &eig.eigenvectors;
    let sqrt_rho = v * sqrt_vals * v.adjoint();
    let m = &sqrt_rho * sigma.to_nalgebra() * &sqrt_rho;
    // symmetrize against round-off before the Hermitian solver
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let s: f64 = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// `(‖ρ^{T_A}‖₁ − 1)/2` with `A` = `partition`.
pub fn negativity(rho: &DensityMatrix, partition: &[usize]) -> Result<f64, OracleError> {
    if rho.n < 2 || partition.is_empty() || partition.len() >= rho.n {
        return Err(OracleError::DimensionMismatch(
            "negativity needs a nonempty proper subset of at least two qubits".into(),
        ));
    }
    let pt = rho.partial_transpose(partition)?;
    let trace_norm: f64 = pt.eigenvalues().iter().map(|l| l.abs()).sum();
    Ok(((trace_norm - 1.0) / 2.0).max(0.0))
}

/// Single-qubit fidelity via `Tr(ρσ) + 2√(det ρ det σ)`.
pub fn qubit_state_fidelity(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<f64, OracleError> {
    if rho.n != 1 || sigma.n != 1 {
        return Err(OracleError::DimensionMismatch(
            "single-qubit states required".into(),
        ));
    }
    let det = |m: &DensityMatrix| (m.data[0] * m.data[3] - m.data[1] * m.data[2]).re.max(0.0);
    Ok((trace_inner(rho, sigma)? + 2.0 * (det(rho) * det(sigma)).sqrt()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::gates::unitary;
    use crate::oracle::random::{random_density_matrix, random_pure_state};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

    fn u(name: &str, params: &[f64]) -> Vec<Complex64> {
        unitary(name, params).unwrap()
    }

    fn close(a: &DensityMatrix, b: &DensityMatrix, tol: f64) -> bool {
        a.data
            .iter()
            .zip(&b.data)
            .all(|(x, y)| (x - y).norm() < tol)
    }

    fn ry_cnot(theta: f64) -> DensityMatrix {
        DensityMatrix::zero_state(2)
            .apply_unitary(&u("ry", &[theta]), &[0])
            .unwrap()
            .apply_unitary(&u("cx", &[]), &[0, 1])
            .unwrap()
    }

    #[test]
    fn x_flips_ground_state() {
        let rho = DensityMatrix::zero_state(1)
            .apply_unitary(&u("x", &[]), &[0])
            .unwrap();
        assert_relative_eq!(rho.get(1, 1).re, 1.0);
        assert_relative_eq!(rho.get(0, 0).re, 0.0);
    }

    #[test]
    fn hadamard_twice_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density_matrix(3, &mut rng);
        let h = u("h", &[]);
        let back = rho
            .apply_unitary(&h, &[1])
            .unwrap()
            .apply_unitary(&h, &[1])
            .unwrap();
        assert!(close(&rho, &back, 1e-12));
    }

    #[test]
    fn entangled_negativities() {
        assert_relative_eq!(
            negativity(&ry_cnot(FRAC_PI_2), &[0]).unwrap(),
            0.5,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            negativity(&ry_cnot(FRAC_PI_8), &[0]).unwrap(),
            0.19,
            epsilon = 0.005
        );
        assert_relative_eq!(
            negativity(&ry_cnot(PI / 4.0), &[0]).unwrap(),
            0.35,
            epsilon = 0.005
        );
        assert_relative_eq!(
            negativity(&DensityMatrix::zero_state(2), &[1]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn depolarizing_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_density_matrix(2, &mut rng);
        assert!(close(
            &rho.apply_depolarizing(&[0, 1], 0.0).unwrap(),
            &rho,
            0.0 + 1e-15
        ));
        let mixed = rho.apply_depolarizing(&[0, 1], 1.0).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 0.25 } else { 0.0 };
                assert!((mixed.get(r, c) - expect).norm() < 1e-12);
            }
        }
        for p in [0.0, 0.1, 0.37, 1.0] {
            let psi = DensityMatrix::from_pure(&random_pure_state(1, &mut rng)).unwrap();
            let out = psi.apply_depolarizing(&[0], p).unwrap();
            assert_relative_eq!(
                trace_inner(&psi, &out).unwrap(),
                1.0 - p / 2.0,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                state_fidelity(&psi, &out).unwrap(),
                1.0 - p / 2.0,
                epsilon = 1e-12
            );
        }
        assert!(rho.apply_depolarizing(&[0], 1.5).is_err());
    }

    #[test]
    fn depolarizing_matches_pauli_kraus() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = random_density_matrix(3, &mut rng);
        for p in [0.05, 0.5, 1.0] {
            let direct = rho.apply_depolarizing(&[2, 0], p).unwrap();
            let kraus = rho.apply_kraus(&depolarizing_kraus(p, 2), &[2, 0]).unwrap();
            assert!(close(&direct, &kraus, 1e-12));
        }
    }

    #[test]
    fn thermal_examples() {
        let one = DensityMatrix::zero_state(1)
            .apply_unitary(&u("x", &[]), &[0])
            .unwrap();
        let t1 = 1e-4;
        assert!(close(
            &one.apply_thermal(0, 0.0, t1, t1).unwrap(),
            &one,
            1e-15
        ));
        let half = one.apply_thermal(0, t1 * 2f64.ln(), t1, t1).unwrap();
        assert_relative_eq!(half.get(0, 0).re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(half.get(1, 1).re, 0.5, epsilon = 1e-12);
        let plus = DensityMatrix::zero_state(1)
            .apply_unitary(&u("h", &[]), &[0])
            .unwrap();
        let t2 = 8e-5;
        let out = plus.apply_thermal(0, t2, t1, t2).unwrap();
        assert_relative_eq!(out.get(0, 1).norm(), (-1.0f64).exp() / 2.0, epsilon = 1e-12);
        assert!(plus.apply_thermal(0, 1e-6, t1, 3e-4).is_err());
    }

    #[test]
    fn thermal_matches_kraus_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density_matrix(3, &mut rng);
        let (t, t1, t2) = (3e-5, 1.2e-4, 9e-5);
        let direct = rho.apply_thermal(1, t, t1, t2).unwrap();
        let kraus = rho
            .apply_kraus(&thermal_kraus(t, t1, t2).unwrap(), &[1])
            .unwrap();
        assert!(close(&direct, &kraus, 1e-12));
    }

    #[test]
    fn partial_trace_examples() {
        let bell = ry_cnot(FRAC_PI_2);
        let half = bell.partial_trace(&[0]).unwrap();
        assert!((half.get(0, 0) - 0.5).norm() < 1e-12 && half.get(0, 1).norm() < 1e-12);
        let prod = DensityMatrix::zero_state(2)
            .apply_unitary(&u("x", &[]), &[1])
            .unwrap();
        let kept = prod.partial_trace(&[1]).unwrap();
        assert_relative_eq!(kept.get(1, 1).re, 1.0);
        assert!(prod.partial_trace(&[]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let z = DensityMatrix::zero_state(1);
        let one = z.apply_unitary(&u("x", &[]), &[0]).unwrap();
        assert_relative_eq!(state_fidelity(&z, &z).unwrap(), 1.0);
        assert_relative_eq!(state_fidelity(&z, &one).unwrap(), 0.0);
        assert!(state_fidelity(&z, &DensityMatrix::zero_state(2)).is_err());
    }

    #[test]
    fn mixed_fidelity_agrees_with_qubit_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let a = random_density_matrix(1, &mut rng);
            let b = random_density_matrix(1, &mut rng);
            assert_relative_eq!(
                state_fidelity(&a, &b).unwrap(),
                qubit_state_fidelity(&a, &b).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn byte_export_length() {
        assert_eq!(DensityMatrix::zero_state(2).to_le_bytes().len(), 16 * 16);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn channels_keep_states_valid(seed in any::<u64>(), p in 0.0f64..=1.0, t in 0.0f64..3e-4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix(3, &mut rng);
            let out = rho
                .apply_unitary(&u("cx", &[]), &[2, 0]).unwrap()
                .apply_depolarizing(&[0, 1], p).unwrap()
                .apply_thermal(1, t, 1e-4, 1.5e-4).unwrap();
            prop_assert!(out.is_valid(1e-10));
        }

        #[test]
        fn bloch_maps_are_exact(seed in any::<u64>(), p in 0.0f64..=1.0, t in 0.0f64..3e-4,
                                t1 in 2e-5f64..3e-4, ratio in 0.05f64..=2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix(1, &mut rng);
            let r = rho.bloch_vector().unwrap();
            let back = DensityMatrix::from_bloch(r);
            prop_assert!(close(&rho, &back, 1e-12));

            let d = rho.apply_depolarizing(&[0], p).unwrap().bloch_vector().unwrap();
            prop_assert!((d.x - (1.0 - p) * r.x).abs() < 1e-12);
            prop_assert!((d.y - (1.0 - p) * r.y).abs() < 1e-12);
            prop_assert!((d.z - (1.0 - p) * r.z).abs() < 1e-12);

            let t2 = ratio * t1;
            let th = rho.apply_thermal(0, t, t1, t2).unwrap().bloch_vector().unwrap();
            let (e1, e2) = ((-t / t1).exp(), (-t / t2).exp());
            prop_assert!((th.x - e2 * r.x).abs() < 1e-12);
            prop_assert!((th.y - e2 * r.y).abs() < 1e-12);
            prop_assert!((th.z - (e1 * r.z + 1.0 - e1)).abs() < 1e-12);
            prop_assert!(th.norm() <= 1.0 + 1e-10);
        }

        #[test]
        fn negativity_is_symmetric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density_matrix(2, &mut rng);
            let a = negativity(&rho, &[0]).unwrap();
            let b = negativity(&rho, &[1]).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn two_qubit_depolarizing_decomposes_per_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let rho = random_density_matrix(2, &mut rng);
            for k in 0..=10 {
                let p = k as f64 / 10.0;
                let lhs = rho
                    .apply_depolarizing(&[0, 1], p)
                    .unwrap()
                    .partial_trace(&[0])
                    .unwrap();
                let rhs = rho
                    .partial_trace(&[0])
                    .unwrap()
                    .apply_depolarizing(&[0], p)
                    .unwrap();
                assert!(close(&lhs, &rhs, 1e-12));
            }
        }
    }
}
