//! JSON documents for quivers, solutions and reports.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major nested arrays
//! of them, and every float is written with 17 significant digits.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::moment::ResidualReport;
use crate::quiver::CometQuiver;
use crate::rep::{ArmRep, EdgeRep, LoopRep, Representation};
use crate::solver::{DimensionReport, Solution, SolveOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiverDoc {
    pub arms: Vec<Vec<usize>>,
    #[serde(default)]
    pub loops: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<Vec<usize>>>,
    /// Central rank; required only when there are no arms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

impl QuiverDoc {
    pub fn from_quiver(q: &CometQuiver) -> Self {
        Self {
            arms: q.arms().iter().map(|f| f.entries().to_vec()).collect(),
            loops: q.loops(),
            multiplicities: (!q.is_tame()).then(|| q.multiplicities().to_vec()),
            rank: (q.n_arms() == 0).then_some(q.central_rank()),
        }
    }

    pub fn to_quiver(&self) -> Result<CometQuiver> {
        match self.rank {
            Some(r) => CometQuiver::with_rank(r, self.arms.clone(), self.loops, self.multiplicities.clone()),
            None => CometQuiver::new(self.arms.clone(), self.loops, self.multiplicities.clone()),
        }
    }
}

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_doc(m: &CMat) -> MatrixDoc {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_doc(doc: &MatrixDoc, rows: usize, cols: usize) -> Result<CMat> {
    if doc.len() != rows || doc.iter().any(|r| r.len() != cols) {
        return Err(Error::ShapeMismatch(format!("expected a {rows}x{cols} matrix")));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| Complex64::new(doc[i][j][0], doc[i][j][1])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub x: Vec<MatrixDoc>,
    pub y: Vec<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopDoc {
    pub a: MatrixDoc,
    pub b: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationDoc {
    /// Per arm, per edge (outer to inner).
    pub arms: Vec<Vec<EdgeDoc>>,
    pub loops: Vec<LoopDoc>,
}

impl RepresentationDoc {
    pub fn from_rep(rep: &Representation) -> Self {
        Self {
            arms: rep
                .arms
                .iter()
                .map(|a| {
                    a.edges
                        .iter()
                        .map(|e| EdgeDoc {
                            x: e.x.iter().map(matrix_to_doc).collect(),
                            y: e.y.iter().map(matrix_to_doc).collect(),
                        })
                        .collect()
                })
                .collect(),
            loops: rep.loops.iter().map(|l| LoopDoc { a: matrix_to_doc(&l.a), b: matrix_to_doc(&l.b) }).collect(),
        }
    }

    pub fn to_rep(&self, q: &CometQuiver) -> Result<Representation> {
        if self.arms.len() != q.n_arms() || self.loops.len() != q.loops() {
            return Err(Error::ShapeMismatch("arm or loop count differs from the quiver".into()));
        }
        let mut arms = Vec::with_capacity(self.arms.len());
        for (i, (edges, flag)) in self.arms.iter().zip(q.arms()).enumerate() {
            let r = flag.entries();
            if edges.len() != flag.len() - 1 {
                return Err(Error::ShapeMismatch(format!("arm {i}: wrong edge count")));
            }
            let edges = edges
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    Ok(EdgeRep {
                        x: e.x.iter().map(|m| matrix_from_doc(m, r[k + 1], r[k])).collect::<Result<_>>()?,
                        y: e.y.iter().map(|m| matrix_from_doc(m, r[k], r[k + 1])).collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<_>>()?;
            arms.push(ArmRep { edges });
        }
        let r = q.central_rank();
        let loops = self
            .loops
            .iter()
            .map(|l| Ok(LoopRep { a: matrix_from_doc(&l.a, r, r)?, b: matrix_from_doc(&l.b, r, r)? }))
            .collect::<Result<_>>()?;
        let rep = Representation { arms, loops };
        rep.check_shape(q)?;
        Ok(rep)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stamp {
    pub seed: Option<u64>,
    pub version: String,
    pub quiver_hash: String,
}

/// SHA-256 of the compact quiver document.
pub fn quiver_hash(q: &CometQuiver) -> String {
    let json = serde_json::to_string(&QuiverDoc::from_quiver(q)).expect("quiver documents serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

pub fn stamp(q: &CometQuiver, seed: Option<u64>) -> Stamp {
    Stamp { seed, version: env!("CARGO_PKG_VERSION").to_string(), quiver_hash: quiver_hash(q) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverInfo {
    pub mode: String,
    pub start_index: usize,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub options: SolveOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDoc {
    pub quiver: QuiverDoc,
    /// Level the representation solves.
    pub alpha: Vec<f64>,
    /// Level originally asked for, when a jittered level was used instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_alpha: Option<Vec<f64>>,
    pub representation: RepresentationDoc,
    pub residual: ResidualReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<PolygonSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverInfo>,
    pub stamp: Stamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonSummary {
    pub arm_lengths: Vec<f64>,
    pub loop_lengths: Vec<f64>,
    /// `alpha_i sqrt((r - 1) / r)` per arm.
    pub expected_arm_lengths: Vec<f64>,
    pub closure_defect: f64,
}

impl SolutionDoc {
    pub fn new(q: &CometQuiver, alpha: &[f64], solution: &Solution, mode: &str, opts: &SolveOptions) -> Self {
        Self {
            quiver: QuiverDoc::from_quiver(q),
            alpha: alpha.to_vec(),
            requested_alpha: None,
            representation: RepresentationDoc::from_rep(&solution.representation),
            residual: solution.residual.clone(),
            dimension: None,
            polygon: None,
            solver: Some(SolverInfo {
                mode: mode.to_string(),
                start_index: solution.start_index,
                iterations: solution.iterations,
                converged: solution.converged,
                warnings: solution.warnings.clone(),
                options: opts.clone(),
            }),
            stamp: stamp(q, Some(opts.seed)),
        }
    }

    /// Quiver and representation, validated against each other.
    pub fn parts(&self) -> Result<(CometQuiver, Representation)> {
        let q = self.quiver.to_quiver()?;
        let rep = self.representation.to_rep(&q)?;
        Ok((q, rep))
    }
}

/// Writes floats as `{:.16e}` (17 significant digits); non-finite values as `null`.
#[derive(Debug, Clone, Default)]
pub struct SeventeenDigits {
    pretty: Option<serde_json::ser::PrettyFormatter<'static>>,
}

impl SeventeenDigits {
    pub fn pretty() -> Self {
        Self { pretty: Some(serde_json::ser::PrettyFormatter::new()) }
    }
}

macro_rules! delegate {
    ($($name:ident ( $($arg:ident : $ty:ty),* );)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
                match &mut self.pretty {
                    Some(p) => serde_json::ser::Formatter::$name(p, writer $(, $arg)*),
                    None => serde_json::ser::Formatter::$name(&mut serde_json::ser::CompactFormatter, writer $(, $arg)*),
                }
            }
        )*
    };
}

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json_string<T: Serialize>(value: &T, pretty: bool) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = if pretty { SeventeenDigits::pretty() } else { SeventeenDigits::default() };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_quiver(path: &Path) -> Result<CometQuiver> {
    read_json::<QuiverDoc>(path)?.to_quiver()
}

pub fn load_solution(path: &Path) -> Result<SolutionDoc> {
    read_json(path)
}
