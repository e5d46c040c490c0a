//! TOML problem files.
//!
//! ```toml
//! diffusion = 1.0
//! [m]
//! breakpoints = [0.0, 0.5, 1.0]
//! pieces = [[0.0, 1.0], [0.5, 1.0]]   # local coordinate t = x - x_k
//! signs = ["+", "+"]                  # optional; inferred when absent
//! [v]
//! breakpoints = [0.0, 1.0]
//! pieces = [[5.0]]
//! [bc.left]
//! h = 1.0
//! l = 0.0
//! [bc.right]
//! h = 0.0
//! l = 1.0
//! ```
//!
//! 2D problems use their own layout:
//!
//! ```toml
//! domain = "torus"            # or "rectangle"
//! lx = 1.0
//! ly = 1.0
//! maxima = [[0.0, 0.0], [0.5, 0.5]]
//! [beta]                      # rectangle only; absent sides are Neumann
//! left = 0.0
//! [m]
//! terms = [{ c = 1.0, x = "cos", fx = 1.0, y = "cos", fy = 1.0 }]
//! [v]
//! file = "v.bin"              # resolved relative to the problem file
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eig2d::{Beta, Domain, Field2D, Spec2D, Table2D, Trig, TrigTerm};
use crate::model::{End, PiecewiseTable, ProblemSpec1D, RobinSide};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    #[serde(default = "unit")]
    diffusion: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    m: PiecewiseTable,
    v: PiecewiseTable,
    bc: BcFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BcFile {
    left: SideFile,
    right: SideFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SideFile {
    h: f64,
    l: f64,
}

fn unit() -> f64 {
    1.0
}

/// Parses a problem from TOML text. Structural errors are reported; the
/// semantic checks of [`crate::model::validate`] are left to the caller.
pub fn parse_problem(text: &str) -> Result<ProblemSpec1D> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let m = file.m.into_profile()?;
    let v = file.v.into_potential()?;
    let left = RobinSide::new(End::Left, file.bc.left.h, file.bc.left.l);
    let right = RobinSide::new(End::Right, file.bc.right.h, file.bc.right.l);
    Ok(ProblemSpec1D::new(m, v, left, right).with_diffusion(file.diffusion))
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<ProblemSpec1D> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

pub fn problem_to_toml(spec: &ProblemSpec1D) -> String {
    let file = ProblemFile {
        diffusion: spec.diffusion,
        name: None,
        m: PiecewiseTable::from_profile(&spec.m),
        v: PiecewiseTable::from_potential(&spec.v),
        bc: BcFile {
            left: SideFile { h: spec.left.hbar, l: spec.left.ell },
            right: SideFile { h: spec.right.hbar, l: spec.right.ell },
        },
    };
    toml::to_string(&file).expect("problem tables always serialize")
}

pub fn write_problem(spec: &ProblemSpec1D, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, problem_to_toml(spec))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Problem2DFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    domain: DomainKind,
    lx: f64,
    ly: f64,
    maxima: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<BetaFile>,
    m: FieldFile,
    v: FieldFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DomainKind {
    Torus,
    Rectangle,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaFile {
    #[serde(default)]
    left: f64,
    #[serde(default)]
    right: f64,
    #[serde(default)]
    bottom: f64,
    #[serde(default)]
    top: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<TermFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    c: f64,
    #[serde(default = "cos")]
    x: Trig,
    #[serde(default)]
    fx: f64,
    #[serde(default = "cos")]
    y: Trig,
    #[serde(default)]
    fy: f64,
}

fn cos() -> Trig {
    Trig::Cos
}

fn field_from_file(f: FieldFile, which: &str, base: &Path) -> Result<Field2D> {
    match (f.terms, f.file) {
        (Some(terms), None) => Ok(Field2D::Trig(
            terms.into_iter().map(|t| TrigTerm::new(t.c, t.x, t.fx, t.y, t.fy)).collect(),
        )),
        (None, Some(path)) => {
            let full = if path.is_relative() { base.join(&path) } else { path.clone() };
            let mut table = Table2D::read(&full)
                .map_err(|e| Error::Parse(format!("[{which}] file {}: {e}", full.display())))?;
            table.source = Some(path);
            Ok(Field2D::Table(table))
        }
        _ => Err(Error::Parse(format!("[{which}] needs exactly one of `terms` or `file`"))),
    }
}

fn field_to_file(f: &Field2D) -> FieldFile {
    match f {
        Field2D::Trig(terms) => FieldFile {
            terms: Some(
                terms.iter().map(|t| TermFile { c: t.c, x: t.x, fx: t.fx, y: t.y, fy: t.fy }).collect(),
            ),
            file: None,
        },
        Field2D::Table(t) => FieldFile { terms: None, file: t.source.clone() },
    }
}

/// Parses a 2D problem; relative table paths are resolved against `base`.
pub fn parse_spec2d(text: &str, base: &Path) -> Result<Spec2D> {
    let file: Problem2DFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let domain = match (file.domain, file.beta) {
        (DomainKind::Torus, None) => Domain::Torus { lx: file.lx, ly: file.ly },
        (DomainKind::Torus, Some(_)) => return Err(Error::Parse("`beta` is only meaningful for a rectangle".into())),
        (DomainKind::Rectangle, beta) => {
            let b = beta.unwrap_or_default();
            Domain::Rectangle {
                lx: file.lx,
                ly: file.ly,
                beta: Beta { left: b.left, right: b.right, bottom: b.bottom, top: b.top },
            }
        }
    };
    let spec = Spec2D {
        domain,
        m: field_from_file(file.m, "m", base)?,
        v: field_from_file(file.v, "v", base)?,
        maxima: file.maxima.into_iter().map(|[x, y]| (x, y)).collect(),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn read_spec2d(path: impl AsRef<Path>) -> Result<Spec2D> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_spec2d(&text, path.as_ref().parent().unwrap_or(Path::new(".")))
}

/// Tabulated fields are written as their `file` reference and must have been
/// read from disk.
pub fn spec2d_to_toml(spec: &Spec2D) -> String {
    let (kind, lx, ly, beta) = match spec.domain {
        Domain::Torus { lx, ly } => (DomainKind::Torus, lx, ly, None),
        Domain::Rectangle { lx, ly, beta } => (
            DomainKind::Rectangle,
            lx,
            ly,
            Some(BetaFile { left: beta.left, right: beta.right, bottom: beta.bottom, top: beta.top }),
        ),
    };
    let file = Problem2DFile {
        name: None,
        domain: kind,
        lx,
        ly,
        maxima: spec.maxima.iter().map(|&(x, y)| [x, y]).collect(),
        beta,
        m: field_to_file(&spec.m),
        v: field_to_file(&spec.v),
    };
    toml::to_string(&file).expect("2D problems always serialize")
}

/// Distinguishes 2D files by their top-level `domain` key.
pub fn is_2d_problem(text: &str) -> bool {
    text.parse::<toml::Table>().map(|t| t.contains_key("domain")).unwrap_or(false)
}
