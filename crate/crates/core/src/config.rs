//! JSON model and boundary-condition files, and JSON encodings of results.
//!
//! Model file:
//!
//! ```json
//! { "m": 2, "top_orders": [1, 1],
//!   "coeffs": { "0": [[[0,0],[1,0]], [[1,0],[0,0]]],
//!               "1": [[[1,0],[0,0]], [[0,0],[-1,0]]] } }
//! ```
//!
//! `coeffs` maps the momentum order to a row-major matrix of `[re, im]`
//! pairs; orders that are left out are zero. Boundary files are tagged by
//! `type`: `{"type":"unitary","u":[[[re,im],...],...]}`,
//! `{"type":"u1_angle","nu":1.0}` or
//! `{"type":"raw","c_plus":[...],"c_minus":[...]}` for relations
//! `C_+ Psi~_+ = C_- Psi~_-` in mover coordinates.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boundary::{classify_relations, standard_bc, u1_bc_from_angle, BoundaryClassification, BoundaryCondition};
use crate::current::CurrentDiagonalization;
use crate::error::{Error, Result};
use crate::hamiltonian::PolyMatrixHamiltonian;
use crate::linalg::{c, CMatrix, CVector, C64};
use crate::spectra::{BoundStateResult, ParticularSolution, SegmentBoundary, SegmentState};

pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub m: usize,
    pub top_orders: Vec<usize>,
    #[serde(default)]
    pub coeffs: BTreeMap<usize, ComplexRows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BcFile {
    Unitary { u: ComplexRows },
    U1Angle { nu: f64 },
    Raw { c_plus: ComplexRows, c_minus: ComplexRows },
}

/// A boundary file resolved against a diagonalization.
#[derive(Debug, Clone)]
pub enum ResolvedBc {
    Admissible(BoundaryCondition),
    /// Raw relations that are not admissible, with their verdict and the
    /// equivalent trace-vector rows.
    Other {
        verdict: BoundaryClassification,
        rows: CMatrix,
    },
}

impl ResolvedBc {
    pub fn admissible(self) -> Result<BoundaryCondition> {
        match self {
            ResolvedBc::Admissible(bc) => Ok(bc),
            ResolvedBc::Other { verdict, .. } => Err(Error::InvalidParameter(format!(
                "boundary relations are not admissible: {}",
                verdict_name(&verdict)
            ))),
        }
    }

    pub fn into_segment_boundary(self, diag: &CurrentDiagonalization) -> SegmentBoundary {
        match self {
            ResolvedBc::Admissible(bc) => SegmentBoundary::Admissible(bc),
            ResolvedBc::Other { rows, .. } => SegmentBoundary::Raw {
                rows,
                diag: diag.clone(),
            },
        }
    }
}

pub fn verdict_name(v: &BoundaryClassification) -> &'static str {
    match v {
        BoundaryClassification::Insufficient { .. } => "insufficient",
        BoundaryClassification::NotCurrentConserving { .. } => "not_current_conserving",
        BoundaryClassification::SymmetricOnly { .. } => "symmetric_only",
        BoundaryClassification::Admissible { .. } => "admissible",
    }
}

fn field_matrix(rows: &ComplexRows, field: &str) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{field}: rows have different lengths")));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn matrix_rows(m: &CMatrix) -> ComplexRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl ModelFile {
    pub fn from_hamiltonian(h: &PolyMatrixHamiltonian) -> Self {
        let coeffs = h
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, m)| m.iter().any(|z| z.re != 0.0 || z.im != 0.0))
            .map(|(n, m)| (n, matrix_rows(m)))
            .collect();
        Self {
            m: h.m(),
            top_orders: h.top_orders().to_vec(),
            coeffs,
        }
    }

    pub fn to_hamiltonian(&self) -> Result<PolyMatrixHamiltonian> {
        let big_n = self.top_orders.iter().copied().max().unwrap_or(0);
        if let Some(&n) = self.coeffs.keys().find(|&&n| n > big_n) {
            return Err(Error::Config(format!(
                "coeffs.{n}: order exceeds the largest top order {big_n}"
            )));
        }
        let mut coeffs = vec![CMatrix::zeros(self.m, self.m); big_n + 1];
        for (&n, rows) in &self.coeffs {
            let field = format!("coeffs.{n}");
            let mat = field_matrix(rows, &field)?;
            if mat.nrows() != self.m || mat.ncols() != self.m {
                return Err(Error::Config(format!(
                    "{field}: expected a {m}x{m} matrix, found {}x{}",
                    mat.nrows(),
                    mat.ncols(),
                    m = self.m
                )));
            }
            coeffs[n] = mat;
        }
        PolyMatrixHamiltonian::new(self.m, self.top_orders.clone(), coeffs)
    }
}

impl BcFile {
    pub fn resolve(&self, diag: &CurrentDiagonalization) -> Result<ResolvedBc> {
        match self {
            BcFile::Unitary { u } => Ok(ResolvedBc::Admissible(standard_bc(diag, field_matrix(u, "u")?)?)),
            BcFile::U1Angle { nu } => Ok(ResolvedBc::Admissible(u1_bc_from_angle(diag, *nu)?)),
            BcFile::Raw { c_plus, c_minus } => {
                let cp = field_matrix(c_plus, "c_plus")?;
                let cm = field_matrix(c_minus, "c_minus")?;
                let verdict = classify_relations(diag, &cp, &cm)?;
                if let BoundaryClassification::Admissible { u } = &verdict {
                    return Ok(ResolvedBc::Admissible(standard_bc(diag, u.clone())?));
                }
                let rows = cp * &diag.t_plus - cm * &diag.t_minus;
                Ok(ResolvedBc::Other { verdict, rows })
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("model: {e}")))
}

pub fn parse_bc(text: &str) -> Result<BcFile> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("boundary condition: {e}")))
}

pub fn load_model(path: &Path) -> Result<PolyMatrixHamiltonian> {
    let file = parse_model(&read(path)?).map_err(|e| prefix(path, e))?;
    file.to_hamiltonian().map_err(|e| prefix(path, e))
}

pub fn load_bc(path: &Path) -> Result<BcFile> {
    parse_bc(&read(path)?).map_err(|e| prefix(path, e))
}

fn prefix(path: &Path, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn model_to_json(h: &PolyMatrixHamiltonian) -> String {
    serde_json::to_string_pretty(&ModelFile::from_hamiltonian(h)).expect("serializable")
}

pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_json(m: &CMatrix) -> Value {
    json!(matrix_rows(m))
}

pub fn vector_json(v: &CVector) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

/// `null` for non-finite values, so documents stay valid JSON.
pub fn real_json(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn solution_json(s: &ParticularSolution) -> Value {
    json!({
        "p": complex_json(s.p),
        "chi": vector_json(&s.chi),
        "residual": s.residual,
    })
}

pub fn bound_state_json(r: &BoundStateResult) -> Value {
    json!({
        "energy": r.energy,
        "momenta": r.solutions.iter().map(|s| complex_json(s.p)).collect::<Vec<_>>(),
        "solutions": r.solutions.iter().map(solution_json).collect::<Vec<_>>(),
        "coeffs": vector_json(&r.coeffs),
        "norm_constant": r.norm_constant,
        "residuals": {
            "sigma_min": r.sigma_min,
            "det": r.det_residual,
            "bc": r.bc_residual,
            "current": r.current_residual,
            "schrodinger": r.schrodinger_residual,
        },
    })
}

pub fn segment_state_json(s: &SegmentState) -> Value {
    json!({
        "energy": s.energy,
        "momenta": s.solutions.iter().map(|x| complex_json(x.p)).collect::<Vec<_>>(),
        "solutions": s.solutions.iter().map(solution_json).collect::<Vec<_>>(),
        "anchors": s.anchors,
        "coeffs": vector_json(&s.coeffs),
        "norm_constant": s.norm_constant,
        "residuals": {
            "sigma_min": s.sigma_min,
            "bc_left": s.bc_residual_left,
            "bc_right": s.bc_residual_right,
            "current_left": s.current_left,
            "current_right": s.current_right,
            "schrodinger": s.schrodinger_residual,
        },
    })
}
