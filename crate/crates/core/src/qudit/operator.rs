use super::{check_targets, omega_pow, split_offsets, StateRegister, C64, TOL};
use crate::{Error, Result};

/// Square matrix acting on `arity` qudits of dimension `dim`, stored
/// row-major with side `dim^arity`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    arity: usize,
    matrix: Vec<C64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::domain(format!("qudit dimension {dim} < 2")));
    }
    Ok(())
}

impl Operator {
    pub fn from_matrix(dim: usize, arity: usize, matrix: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if arity == 0 {
            return Err(Error::domain("operator arity must be positive"));
        }
        let side = dim.pow(arity as u32);
        if matrix.len() != side * side {
            return Err(Error::domain(format!("matrix of {} entries is not {side}x{side}", matrix.len())));
        }
        Ok(Operator { dim, arity, matrix })
    }

    fn from_fn(dim: usize, arity: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let side = dim.pow(arity as u32);
        let matrix = (0..side * side).map(|i| f(i / side, i % side)).collect();
        Operator { dim, arity, matrix }
    }

    pub fn identity(dim: usize, arity: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_fn(dim, arity, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
    }

    /// Shift `X_N |j> = |j+1 mod N>`.
    pub fn shift(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_fn(dim, 1, |r, c| if r == (c + 1) % dim { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
    }

    /// Clock `Z_N |j> = w^j |j>`, `w = exp(2 pi i / N)`.
    pub fn clock(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_fn(dim, 1, |r, c| if r == c { omega_pow(dim, r) } else { C64::new(0.0, 0.0) }))
    }

    /// Discrete Fourier transform `F_N |j> = N^{-1/2} sum_k w^{jk} |k>`.
    pub fn fourier(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let norm = 1.0 / (dim as f64).sqrt();
        Ok(Self::from_fn(dim, 1, |r, c| omega_pow(dim, r * c) * norm))
    }

    /// Bell-state transformation `U_(x,y) = sum_j w^{xj} |j+y><j|`, i.e. `X^y Z^x`.
    pub fn bell_xform(dim: usize, x: usize, y: usize) -> Result<Self> {
        check_dim(dim)?;
        if x >= dim || y >= dim {
            return Err(Error::domain(format!("label ({x},{y}) out of range for dimension {dim}")));
        }
        Ok(Self::from_fn(dim, 1, |r, c| {
            if r == (c + y) % dim {
                omega_pow(dim, x * c)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Diagonal cubic phase `|k> -> exp(i pi k^3 / (2N)) |k>`.
    pub fn cubic_phase(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let phase = |k: usize| {
            let k = k as f64;
            C64::from_polar(1.0, std::f64::consts::PI * k * k * k / (2.0 * dim as f64))
        };
        Ok(Self::from_fn(dim, 1, |r, c| if r == c { phase(r) } else { C64::new(0.0, 0.0) }))
    }

    /// Basis change used for block identities: cubic phase after `F_N`.
    ///
    /// Its columns are flat in the computational basis like the Fourier
    /// columns, but none of them is an eigenvector of a nontrivial
    /// `U_(x,y)`.
    pub fn identity_basis(dim: usize) -> Result<Self> {
        Self::cubic_phase(dim)?.compose(&Self::fourier(dim)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn side(&self) -> usize {
        self.dim.pow(self.arity as u32)
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.side() + col]
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn column(&self, col: usize) -> Vec<C64> {
        (0..self.side()).map(|r| self.entry(r, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.side()).map(|c| self.column(c)).collect()
    }

    pub fn adjoint(&self) -> Operator {
        let side = self.side();
        Self::from_fn(self.dim, self.arity, |r, c| self.matrix[c * side + r].conj())
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dim != other.dim || self.arity != other.arity {
            return Err(Error::domain("operators differ in shape"));
        }
        let side = self.side();
        Ok(Self::from_fn(self.dim, self.arity, |r, c| {
            (0..side).map(|k| self.matrix[r * side + k] * other.matrix[k * side + c]).sum()
        }))
    }

    pub fn pow(&self, exp: u32) -> Operator {
        let mut acc = Self::identity(self.dim, self.arity).expect("dimension already validated");
        for _ in 0..exp {
            acc = acc.compose(self).expect("same shape");
        }
        acc
    }

    pub fn scaled(&self, factor: C64) -> Operator {
        Operator { dim: self.dim, arity: self.arity, matrix: self.matrix.iter().map(|a| a * factor).collect() }
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_deviation(&self, other: &Operator) -> f64 {
        self.matrix.iter().zip(&other.matrix).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.dim == other.dim && self.arity == other.arity && self.max_deviation(other) <= tol
    }

    /// `U†U = I` entrywise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let gram = self.adjoint().compose(self).expect("same shape");
        gram.approx_eq(&Self::identity(self.dim, self.arity).expect("valid dim"), tol)
    }

    /// Applies the operator to `targets` (in order) and identity elsewhere.
    pub fn apply(&self, state: &StateRegister, targets: &[usize]) -> Result<StateRegister> {
        if state.dim() != self.dim {
            return Err(Error::domain(format!("operator dimension {} vs state dimension {}", self.dim, state.dim())));
        }
        if targets.len() != self.arity {
            return Err(Error::domain(format!("operator arity {} with {} targets", self.arity, targets.len())));
        }
        check_targets(state.num_qudits(), targets)?;
        let (rest, sub) = split_offsets(self.dim, state.num_qudits(), targets);
        let side = self.side();
        let src = state.amplitudes();
        let mut out = vec![C64::new(0.0, 0.0); src.len()];
        let mut gathered = vec![C64::new(0.0, 0.0); side];
        for &r in &rest {
            for (g, &s) in gathered.iter_mut().zip(&sub) {
                *g = src[r + s];
            }
            for (row, &s) in sub.iter().enumerate() {
                let line = &self.matrix[row * side..(row + 1) * side];
                out[r + s] = line.iter().zip(&gathered).map(|(m, v)| m * v).sum();
            }
        }
        let norm = out.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::domain(format!("operator is not norm preserving on this state (norm {norm})")));
        }
        Ok(StateRegister::from_parts_unchecked(self.dim, out, state.tags().to_vec()))
    }
}

/// Free-function form of [`Operator::apply`].
pub fn apply(op: &Operator, state: &StateRegister, targets: &[usize]) -> Result<StateRegister> {
    op.apply(state, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn small_cases() {
        let x = Operator::shift(2).unwrap();
        assert!(x.approx_eq(&Operator::from_matrix(2, 1, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap(), 0.0));
        let z = Operator::clock(2).unwrap();
        assert!(z.approx_eq(&Operator::from_matrix(2, 1, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap(), 1e-15));
        assert!((Operator::clock(4).unwrap().entry(2, 2) - c(-1.0, 0.0)).norm() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let hadamard = Operator::from_matrix(2, 1, vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]).unwrap();
        assert!(Operator::fourier(2).unwrap().approx_eq(&hadamard, 1e-15));
        assert!(Operator::bell_xform(2, 0, 0).unwrap().approx_eq(&Operator::identity(2, 1).unwrap(), 0.0));
        let xz = Operator::from_matrix(2, 1, vec![c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        assert!(Operator::bell_xform(2, 1, 1).unwrap().approx_eq(&xz, 1e-15));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Operator::shift(1).is_err());
        assert!(Operator::clock(0).is_err());
        assert!(Operator::fourier(1).is_err());
        assert!(Operator::bell_xform(3, 3, 0).is_err());
        assert!(Operator::bell_xform(3, 0, 5).is_err());
    }

    #[test]
    fn shift_wraps_around() {
        let s = Operator::shift(3).unwrap().apply(&StateRegister::ket(3, 2).unwrap(), &[0]).unwrap();
        assert_eq!(s, StateRegister::ket(3, 0).unwrap());
    }

    #[test]
    fn cyclic_orders() {
        for n in [2, 3, 5] {
            let id = Operator::identity(n, 1).unwrap();
            assert!(Operator::shift(n).unwrap().pow(n as u32).approx_eq(&id, 1e-12));
            assert!(Operator::clock(n).unwrap().pow(n as u32).approx_eq(&id, 1e-12));
        }
    }

    #[test]
    fn apply_on_second_qudit() {
        let s00 = StateRegister::ket(2, 0).unwrap().tensor(&StateRegister::ket(2, 0).unwrap()).unwrap();
        let out = Operator::shift(2).unwrap().apply(&s00, &[1]).unwrap();
        let s01 = StateRegister::ket(2, 0).unwrap().tensor(&StateRegister::ket(2, 1).unwrap()).unwrap();
        assert_eq!(out, s01);
    }

    #[test]
    fn apply_rejects_misuse() {
        let s = StateRegister::ket(3, 0).unwrap().tensor(&StateRegister::ket(3, 0).unwrap()).unwrap();
        let x = Operator::shift(3).unwrap();
        assert!(x.apply(&s, &[0, 1]).is_err());
        assert!(x.apply(&s, &[2]).is_err());
        assert!(Operator::shift(2).unwrap().apply(&s, &[0]).is_err());
        let two = Operator::identity(3, 2).unwrap();
        assert!(two.apply(&s, &[1, 1]).is_err());
    }

    #[test]
    fn identity_basis_is_flat_and_unitary() {
        for n in 2..=9 {
            let m = Operator::identity_basis(n).unwrap();
            assert!(m.is_unitary(TOL));
            for r in 0..n {
                for col in 0..n {
                    assert!((m.entry(r, col).norm_sqr() - 1.0 / n as f64).abs() < 1e-12);
                }
            }
        }
    }
}
