//! JSON data formats. Rationals travel as exact "p/q" strings so the
//! exactness-critical outputs never pass through floats; key order is
//! the struct declaration order, which keeps reruns byte-identical.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use tropma_core::green::GreenData;
use tropma_core::{Lattice, Rat};

use crate::AppError;

pub fn parse_rat(s: &str) -> Result<Rat, AppError> {
    let s = s.trim();
    let bad = || AppError::input(format!("invalid rational '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| bad())?;
        let den: BigInt = q.trim().parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(bad());
        }
        Ok(Rat::new(num, den))
    } else {
        let num: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rat::from_integer(num))
    }
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat_vec(v: &[String]) -> Result<Vec<Rat>, AppError> {
    v.iter().map(|s| parse_rat(s)).collect()
}

pub fn parse_rat_mat(m: &[Vec<String>]) -> Result<Vec<Vec<Rat>>, AppError> {
    m.iter().map(|row| parse_rat_vec(row)).collect()
}

pub fn format_rat_vec(v: &[Rat]) -> Vec<String> {
    v.iter().map(format_rat).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeDto {
    pub dim: usize,
    pub basis: Vec<Vec<String>>,
}

impl LatticeDto {
    pub fn to_lattice(&self) -> Result<Lattice, AppError> {
        if self.basis.len() != self.dim {
            return Err(AppError::input("basis row count does not match dim".into()));
        }
        let basis = parse_rat_mat(&self.basis)?;
        Lattice::new(basis).map_err(|e| AppError::input(format!("{e}")))
    }

    pub fn from_lattice(l: &Lattice) -> Self {
        LatticeDto {
            dim: l.dim(),
            basis: l.basis().iter().map(|row| format_rat_vec(row)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenDataDto {
    pub lattice: LatticeDto,
    pub b: Vec<Vec<String>>,
    pub c: Vec<String>,
}

impl GreenDataDto {
    pub fn to_green_data(&self) -> Result<GreenData, AppError> {
        let lattice = self.lattice.to_lattice()?;
        let b = parse_rat_mat(&self.b)?;
        let c = parse_rat_vec(&self.c)?;
        GreenData::new(lattice, b, c).map_err(|e| AppError::input(format!("{e}")))
    }

    pub fn from_green_data(d: &GreenData) -> Self {
        GreenDataDto {
            lattice: LatticeDto::from_lattice(d.lattice()),
            b: d.b().iter().map(|row| format_rat_vec(row)).collect(),
            c: format_rat_vec(d.c()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomDto {
    pub x: Vec<String>,
    pub w: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureDto {
    pub atoms: Vec<AtomDto>,
}

impl MeasureDto {
    pub fn from_measure(m: &tropma_core::clmeasure::DiscreteMeasure) -> Self {
        MeasureDto {
            atoms: m
                .atoms
                .iter()
                .map(|(x, w)| AtomDto { x: format_rat_vec(x), w: format_rat(w) })
                .collect(),
        }
    }

    pub fn to_measure(&self) -> Result<tropma_core::clmeasure::DiscreteMeasure, AppError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok((parse_rat_vec(&a.x)?, parse_rat(&a.w)?)))
            .collect::<Result<_, AppError>>()?;
        Ok(tropma_core::clmeasure::DiscreteMeasure { atoms })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDto {
    pub green_data: GreenDataDto,
    pub grid_n: usize,
    /// "expr:<harmonic expression>" or "csv:<path to grid samples>".
    pub f: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveMetaDto {
    pub residual: f64,
    pub iters: usize,
    pub min_eig: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceDto {
    pub anchor: Vec<String>,
    pub slope: Vec<String>,
    pub intercept: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlDto {
    pub n: usize,
    pub pieces: Vec<PieceDto>,
}

impl PlDto {
    pub fn from_pl(f: &tropma_core::plapprox::PLGreenFunction) -> Self {
        PlDto {
            n: f.n(),
            pieces: f
                .pieces()
                .iter()
                .map(|p| PieceDto {
                    anchor: format_rat_vec(&p.anchor),
                    slope: format_rat_vec(&p.slope),
                    intercept: format_rat(&p.intercept),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellDto {
    pub vertices: Vec<Vec<String>>,
    pub slope: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexDto {
    pub point: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionDto {
    pub cells: Vec<CellDto>,
    pub vertices: Vec<VertexDto>,
}

impl DecompositionDto {
    pub fn from_decomposition(d: &tropma_core::plapprox::PeriodicDecomposition) -> Self {
        DecompositionDto {
            cells: d
                .cells()
                .iter()
                .map(|c| CellDto {
                    vertices: c.cell.vertices().iter().map(|v| format_rat_vec(v)).collect(),
                    slope: format_rat_vec(&c.piece.slope),
                })
                .collect(),
            vertices: d
                .vertices()
                .iter()
                .map(|v| VertexDto { point: format_rat_vec(&v.point) })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tropma_core::rat::{rat, rat_i};

    #[test]
    fn rational_round_trip() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-7").unwrap(), rat_i(-7));
        assert_eq!(format_rat(&rat(-3, 6)), "-1/2");
        assert_eq!(format_rat(&rat_i(5)), "5");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn green_data_round_trip() {
        let json = r#"{"lattice":{"dim":2,"basis":[["1","0"],["0","2"]]},"b":[["1","0"],["0","1"]],"c":["1/2","0"]}"#;
        let dto: GreenDataDto = serde_json::from_str(json).unwrap();
        let gd = dto.to_green_data().unwrap();
        assert_eq!(gd.degree().unwrap(), rat_i(4));
        let back = serde_json::to_string(&GreenDataDto::from_green_data(&gd)).unwrap();
        assert_eq!(back, json);
    }
}
