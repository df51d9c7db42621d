use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Full augmented state `(q, p, ω)` stored contiguously.
///
/// `q` holds the displacement unknowns of all fields (the shared interface
/// value once), `p` the matching velocities, and `ω` one row of `N_ξ`
/// diffusive values per damped quadrature point, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    n_points: usize,
    n_xi: usize,
    data: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n: usize, n_points: usize, n_xi: usize) -> Self {
        Self {
            n,
            n_points,
            n_xi,
            data: vec![0.0; 2 * n + n_points * n_xi],
        }
    }

    pub fn from_parts(displacement: &[f64], velocity: &[f64], n_points: usize, n_xi: usize) -> Result<Self> {
        if displacement.len() != velocity.len() {
            return Err(Error::domain(format!(
                "displacement has {} entries but velocity has {}",
                displacement.len(),
                velocity.len()
            )));
        }
        let mut s = Self::zeros(displacement.len(), n_points, n_xi);
        s.displacement_mut().copy_from_slice(displacement);
        s.velocity_mut().copy_from_slice(velocity);
        Ok(s)
    }

    pub fn from_flat(n: usize, n_points: usize, n_xi: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != 2 * n + n_points * n_xi {
            return Err(Error::domain(format!(
                "flat state has {} entries, expected {}",
                data.len(),
                2 * n + n_points * n_xi
            )));
        }
        Ok(Self {
            n,
            n_points,
            n_xi,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n, self.n_points, self.n_xi)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn displacement(&self) -> &[f64] {
        &self.data[..self.n]
    }

    pub fn displacement_mut(&mut self) -> &mut [f64] {
        &mut self.data[..self.n]
    }

    pub fn velocity(&self) -> &[f64] {
        &self.data[self.n..2 * self.n]
    }

    pub fn velocity_mut(&mut self) -> &mut [f64] {
        let n = self.n;
        &mut self.data[n..2 * n]
    }

    pub fn omega(&self) -> &[f64] {
        &self.data[2 * self.n..]
    }

    pub fn omega_mut(&mut self) -> &mut [f64] {
        let n = self.n;
        &mut self.data[2 * n..]
    }

    /// `ω` at damped point `j`, node `k`.
    pub fn omega_at(&self, j: usize, k: usize) -> f64 {
        self.omega()[j * self.n_xi + k]
    }

    pub fn set_omega(&mut self, j: usize, k: usize, v: f64) {
        let n_xi = self.n_xi;
        self.omega_mut()[j * n_xi + k] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `field,index,value` rows. `labels` names each displacement unknown;
    /// velocities get a `_t` suffix and `ω` rows are labelled `omega` with the
    /// flat index `j * N_ξ + k`.
    pub fn to_csv(&self, labels: &[(String, usize)]) -> String {
        let mut out = String::from("field,index,value\n");
        for (i, v) in self.displacement().iter().enumerate() {
            let (name, idx) = labels.get(i).cloned().unwrap_or_else(|| ("q".into(), i));
            let _ = writeln!(out, "{name},{idx},{v:.17e}");
        }
        for (i, v) in self.velocity().iter().enumerate() {
            let (name, idx) = labels.get(i).cloned().unwrap_or_else(|| ("q".into(), i));
            let _ = writeln!(out, "{name}_t,{idx},{v:.17e}");
        }
        for (i, v) in self.omega().iter().enumerate() {
            let _ = writeln!(out, "omega,{i},{v:.17e}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn views_partition_the_storage() {
        let mut s = StateVector::zeros(3, 2, 4);
        assert_eq!(s.len(), 14);
        s.displacement_mut()[2] = 1.0;
        s.velocity_mut()[0] = 2.0;
        s.set_omega(1, 3, 3.0);
        assert_eq!(s.as_slice()[2], 1.0);
        assert_eq!(s.as_slice()[3], 2.0);
        assert_eq!(s.as_slice()[13], 3.0);
        assert_eq!(s.omega_at(1, 3), 3.0);
    }

    #[test]
    fn csv_rows() {
        let s = StateVector::from_parts(&[1.0, 2.0], &[0.0, 0.5], 1, 2).unwrap();
        let labels = vec![("u".to_string(), 1), ("u_x".to_string(), 1)];
        let csv = s.to_csv(&labels);
        assert_eq!(csv.lines().count(), 1 + 2 + 2 + 2);
        assert!(csv.contains("\nu_x_t,1,5.0"));
        assert!(csv.contains("\nomega,1,0.0"));
    }

    #[test]
    fn size_mismatch() {
        assert!(StateVector::from_parts(&[1.0], &[1.0, 2.0], 0, 0).is_err());
        assert!(StateVector::from_flat(1, 1, 1, vec![0.0; 2]).is_err());
    }
}
