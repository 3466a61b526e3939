use crate::cone::Cone;
use crate::error::ConicError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// `minimize cᵀx subject to b − A x ∈ K`, with `K` the product of `cones`
/// taken in row order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub cones: Vec<Cone>,
}

impl ConicProblem {
    pub fn new(
        c: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        cones: Vec<Cone>,
    ) -> Result<Self, ConicError> {
        let p = ConicProblem { c, a, b, cones };
        p.validate()?;
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Checks that shapes agree with the cone list and all data is finite.
    pub fn validate(&self) -> Result<(), ConicError> {
        let rows: usize = self.cones.iter().map(Cone::rows).sum();
        if rows != self.a.nrows() || rows != self.b.len() {
            return Err(ConicError::Shape(format!(
                "cone rows {rows}, A has {} rows, b has {}",
                self.a.nrows(),
                self.b.len()
            )));
        }
        if self.a.ncols() != self.c.len() {
            return Err(ConicError::Shape(format!(
                "A has {} columns but c has {}",
                self.a.ncols(),
                self.c.len()
            )));
        }
        if self
            .a
            .iter()
            .chain(self.b.iter())
            .chain(self.c.iter())
            .any(|x| !x.is_finite())
        {
            return Err(ConicError::NonFinite);
        }
        Ok(())
    }

    /// Serializable dense form, see [`ProblemDump`].
    pub fn to_dump(&self) -> ProblemDump {
        ProblemDump {
            n: self.num_vars(),
            m: self.num_rows(),
            c: self.c.iter().cloned().collect(),
            a: (0..self.a.nrows())
                .flat_map(|i| (0..self.a.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| self.a[(i, j)])
                .collect(),
            b: self.b.iter().cloned().collect(),
            cones: self.cones.clone(),
            psd_vectorization: "svec-lower-colmajor-sqrt2".to_string(),
        }
    }

    pub fn from_dump(d: &ProblemDump) -> Result<Self, ConicError> {
        if d.a.len() != d.n * d.m {
            return Err(ConicError::Shape(format!(
                "dump A has {} entries, expected {}×{}",
                d.a.len(),
                d.m,
                d.n
            )));
        }
        ConicProblem::new(
            DVector::from_vec(d.c.clone()),
            DMatrix::from_row_slice(d.m, d.n, &d.a),
            DVector::from_vec(d.b.clone()),
            d.cones.clone(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("dump is plain data")
    }

    pub fn from_json(s: &str) -> Result<Self, ConicError> {
        let d: ProblemDump =
            serde_json::from_str(s).map_err(|e| ConicError::Dump(e.to_string()))?;
        Self::from_dump(&d)
    }
}

/// JSON debug dump of a [`ConicProblem`].
///
/// `a` is the `m×n` constraint matrix flattened row-major. Cones are listed
/// in row order as `{"type": "zero"|"nonneg"|"soc"|"psd", "dim": k}`, where
/// `dim` is the matrix side for PSD blocks. PSD rows hold the lower triangle
/// column by column, off-diagonals scaled by √2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemDump {
    pub n: usize,
    pub m: usize,
    pub c: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
    pub psd_vectorization: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
    NumericalFailure,
}

/// Scale-normalized KKT residuals, see [`crate::kkt_residuals`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Result of [`crate::solve`].
///
/// On `Optimal`, `x`, `s` and `y` are the primal point, slack `b − A x` and
/// dual multipliers. On `PrimalInfeasible`, `y` is a certificate with
/// `bᵀy = −1`, `Aᵀy ≈ 0`, `y ∈ K*`. On `DualInfeasible`, `x` is an improving
/// ray with `cᵀx = −1`, `−A x ∈ K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicSolution {
    pub status: Status,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub s: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    /// Residual of the infeasibility certificate when one is returned.
    pub certificate_residual: Option<f64>,
    /// Per-iteration diagnostics, filled when requested in the settings.
    pub history: Vec<crate::IterateInfo>,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}
