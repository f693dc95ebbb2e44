use nalgebra::DMatrix;
use num_complex::Complex64;

use super::WavefunctionError;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A set of Dirac matrices `γ^0, …, γ^d` for signature (+, −, …, −).
///
/// Every representation remembers the unitary `U` relating it to the
/// standard (Dirac) representation, `γ^μ = U γ_std^μ U†`, so spinors solved in
/// the standard representation can be carried over consistently.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracRepresentation<const D: usize> {
    name: String,
    gammas: Vec<CMatrix>,
    from_standard: CMatrix,
    sparse: Vec<Vec<(usize, usize, Complex64)>>,
}

fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

fn block(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

impl DiracRepresentation<1> {
    /// `γ^0 = σ_z`, `γ^1 = iσ_y`.
    pub fn dirac() -> Self {
        let [_, sy, sz] = pauli();
        Self::from_parts("dirac", vec![sz, sy * I], CMatrix::identity(2, 2))
    }

    /// Off-diagonal `γ^0 = σ_x`, obtained from the Dirac form by a Hadamard rotation.
    pub fn chiral() -> Self {
        let h = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, -ONE]) / Complex64::new(2f64.sqrt(), 0.0);
        Self::dirac().transformed("chiral", &h).expect("Hadamard is unitary")
    }
}

impl DiracRepresentation<3> {
    /// `γ^0 = diag(I, −I)`, `γ^i = [[0, σ_i], [−σ_i, 0]]`.
    pub fn dirac() -> Self {
        let id = CMatrix::identity(2, 2);
        let z = CMatrix::zeros(2, 2);
        let mut gammas = vec![block(&id, &z, &z, &(-id.clone()))];
        for s in pauli() {
            gammas.push(block(&z, &s, &(-s.clone()), &z));
        }
        Self::from_parts("dirac", gammas, CMatrix::identity(4, 4))
    }

    /// Weyl representation with `γ^0 = [[0, I], [I, 0]]`.
    pub fn chiral() -> Self {
        let id = CMatrix::identity(2, 2);
        let r = Complex64::new(0.5f64.sqrt(), 0.0);
        let u = block(&(id.clone() * r), &(-id.clone() * r), &(id.clone() * r), &(id * r));
        Self::dirac().transformed("chiral", &u).expect("block rotation is unitary")
    }
}

impl<const D: usize> DiracRepresentation<D>
where
    Self: StandardRepresentation,
{
    /// Looks up a representation by name (`dirac` or `chiral`).
    pub fn by_name(name: &str) -> Result<Self, WavefunctionError> {
        match name {
            "dirac" | "standard" => Ok(<Self as StandardRepresentation>::standard()),
            "chiral" | "weyl" => Ok(<Self as StandardRepresentation>::alternative()),
            other => Err(WavefunctionError::UnknownRepresentation(other.to_string())),
        }
    }
}

/// Dimension-specific constructors used by generic code.
pub trait StandardRepresentation: Sized {
    fn standard() -> Self;
    fn alternative() -> Self;
}

impl StandardRepresentation for DiracRepresentation<1> {
    fn standard() -> Self {
        Self::dirac()
    }
    fn alternative() -> Self {
        Self::chiral()
    }
}

impl StandardRepresentation for DiracRepresentation<3> {
    fn standard() -> Self {
        Self::dirac()
    }
    fn alternative() -> Self {
        Self::chiral()
    }
}

impl<const D: usize> DiracRepresentation<D> {
    fn from_parts(name: &str, gammas: Vec<CMatrix>, from_standard: CMatrix) -> Self {
        assert_eq!(gammas.len(), D + 1);
        let sparse = gammas
            .iter()
            .map(|g| {
                let mut nz = Vec::new();
                for r in 0..g.nrows() {
                    for c in 0..g.ncols() {
                        if g[(r, c)].norm() > 1e-15 {
                            nz.push((r, c, g[(r, c)]));
                        }
                    }
                }
                nz
            })
            .collect();
        Self {
            name: name.to_string(),
            gammas,
            from_standard,
            sparse,
        }
    }

    /// The representation `U γ^μ U†` for a unitary `U`.
    pub fn transformed(&self, name: &str, u: &CMatrix) -> Result<Self, WavefunctionError> {
        let n = self.spinor_dim();
        if u.nrows() != n || u.ncols() != n {
            return Err(WavefunctionError::NotUnitary);
        }
        let defect = (u * u.adjoint() - CMatrix::identity(n, n)).camax();
        if defect > 1e-12 {
            return Err(WavefunctionError::NotUnitary);
        }
        let gammas = self.gammas.iter().map(|g| u * g * u.adjoint()).collect();
        Ok(Self::from_parts(name, gammas, u * &self.from_standard))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spinor_dim(&self) -> usize {
        self.gammas[0].nrows()
    }

    pub fn gamma(&self, mu: usize) -> &CMatrix {
        &self.gammas[mu]
    }

    pub fn gammas(&self) -> &[CMatrix] {
        &self.gammas
    }

    /// Nonzero entries `(row, col, value)` of `γ^μ`.
    pub fn gamma_entries(&self, mu: usize) -> &[(usize, usize, Complex64)] {
        &self.sparse[mu]
    }

    /// Unitary taking standard-representation spinors to this representation.
    pub fn from_standard(&self) -> &CMatrix {
        &self.from_standard
    }

    /// Largest deviation from `{γ^μ, γ^ν} = 2η^{μν}`, `γ^0† = γ^0` and
    /// `γ^0 γ^μ γ^0 = γ^μ†`.
    pub fn clifford_defect(&self) -> f64 {
        let n = self.spinor_dim();
        let id = CMatrix::identity(n, n);
        let mut worst = 0.0_f64;
        for (mu, a) in self.gammas.iter().enumerate() {
            for (nu, b) in self.gammas.iter().enumerate() {
                let eta = match (mu, nu) {
                    (0, 0) => 2.0,
                    _ if mu == nu => -2.0,
                    _ => 0.0,
                };
                let d = (a * b + b * a - &id * Complex64::new(eta, 0.0)).camax();
                worst = worst.max(d);
            }
            let g0 = &self.gammas[0];
            worst = worst.max((g0 * a * g0 - a.adjoint()).camax());
        }
        worst.max((self.gammas[0].adjoint() - &self.gammas[0]).camax())
    }
}
