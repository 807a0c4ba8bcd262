use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Skew-symmetric bivector `Omega^{jk} = (1/2) eps^{jki} J_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonMatrix(pub Matrix3<f64>);

impl PoissonMatrix {
    pub fn from_vector(j: &Vector3<f64>) -> Self {
        let h = 0.5;
        PoissonMatrix(Matrix3::new(
            0.0,
            h * j[2],
            -h * j[1],
            -h * j[2],
            0.0,
            h * j[0],
            h * j[1],
            -h * j[0],
            0.0,
        ))
    }

    /// `J_i = eps_ijk Omega^{jk}`.
    pub fn to_vector(&self) -> Vector3<f64> {
        let m = &self.0;
        Vector3::new(
            m[(1, 2)] - m[(2, 1)],
            m[(2, 0)] - m[(0, 2)],
            m[(0, 1)] - m[(1, 0)],
        )
    }

    /// `Omega^{jm} dH_j - Omega^{mk} dH_k`, which equals `J x grad H`.
    pub fn apply(&self, grad_h: &Vector3<f64>) -> Vector3<f64> {
        self.0.transpose() * grad_h - self.0 * grad_h
    }

    /// Largest deviation from antisymmetry; zero by construction.
    pub fn antisymmetry_defect(&self) -> f64 {
        (self.0 + self.0.transpose()).amax()
    }

    /// Numerical rank; 0 for `J = 0` and 2 otherwise.
    pub fn rank(&self, eps: f64) -> usize {
        self.0.rank(eps)
    }
}

/// The matrix of `j` together with the vector recovered from it.
pub fn poisson_matrix_roundtrip(j: &Vector3<f64>) -> (PoissonMatrix, Vector3<f64>) {
    let m = PoissonMatrix::from_vector(j);
    let back = m.to_vector();
    (m, back)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_z() {
        let (m, back) = poisson_matrix_roundtrip(&Vector3::z());
        assert_eq!(
            m.0,
            Matrix3::new(0.0, 0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(back, Vector3::z());
        let g = Vector3::new(0.3, -1.2, 2.0);
        assert_eq!(m.apply(&g), Vector3::z().cross(&g));
    }

    #[test]
    fn zero_vector() {
        let (m, back) = poisson_matrix_roundtrip(&Vector3::zeros());
        assert_eq!(m.0, Matrix3::zeros());
        assert_eq!(back, Vector3::zeros());
        assert_eq!(m.rank(1e-12), 0);
    }

    #[test]
    fn rank_two() {
        let m = PoissonMatrix::from_vector(&Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(m.rank(1e-12), 2);
        assert_eq!(m.antisymmetry_defect(), 0.0);
    }
}
