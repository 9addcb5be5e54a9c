//! Reader for the CVRP subset of the TSPLIB format.
//!
//! Supported: `EDGE_WEIGHT_TYPE` `EUC_2D` (evaluated exactly, without the
//! TSPLIB integer rounding) and `EXPLICIT` with `FULL_MATRIX`, `LOWER_ROW`,
//! `UPPER_ROW`, `LOWER_DIAG_ROW` or `UPPER_DIAG_ROW` weights. The depot is
//! renumbered to vertex 0 and the other nodes keep their relative order.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum WeightFormat {
    Full,
    LowerRow,
    UpperRow,
    LowerDiagRow,
    UpperDiagRow,
}

#[derive(Default)]
struct Raw {
    name: String,
    dimension: Option<usize>,
    capacity: Option<f64>,
    euclidean: Option<bool>,
    format: Option<WeightFormat>,
    coords: HashMap<usize, [f64; 2]>,
    demands: HashMap<usize, f64>,
    depots: Vec<usize>,
    weights: Vec<(usize, f64)>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn num<N: std::str::FromStr>(tok: &str, line: usize) -> Result<N> {
    tok.parse().map_err(|_| perr(line, format!("expected a number, found `{tok}`")))
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Coords,
    Demands,
    Depots,
    Weights,
}

pub fn parse_tsplib<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let mut raw = Raw::default();
    let mut section = Section::Header;
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let head = line.split(|c: char| c == ':' || c.is_whitespace()).next().unwrap_or("");
        let next_section = match head {
            "NODE_COORD_SECTION" => Some(Section::Coords),
            "DEMAND_SECTION" => Some(Section::Demands),
            "DEPOT_SECTION" => Some(Section::Depots),
            "EDGE_WEIGHT_SECTION" => Some(Section::Weights),
            _ => None,
        };
        if let Some(s) = next_section {
            section = s;
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            if head.chars().all(|c| c.is_ascii_uppercase() || c == '_') && !head.is_empty() {
                header(&mut raw, key.trim(), value.trim(), ln)?;
                section = Section::Header;
                continue;
            }
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Header => return Err(perr(ln, format!("unexpected line `{line}`"))),
            Section::Coords => {
                if toks.len() < 3 {
                    return Err(perr(ln, "coordinate line needs `id x y`"));
                }
                raw.coords.insert(num(toks[0], ln)?, [num(toks[1], ln)?, num(toks[2], ln)?]);
            }
            Section::Demands => {
                if toks.len() != 2 {
                    return Err(perr(ln, "demand line needs `id demand`"));
                }
                raw.demands.insert(num(toks[0], ln)?, num(toks[1], ln)?);
            }
            Section::Depots => {
                for tok in toks {
                    let id: i64 = num(tok, ln)?;
                    if id >= 0 {
                        raw.depots.push(id as usize);
                    }
                }
            }
            Section::Weights => {
                for tok in toks {
                    raw.weights.push((ln, num(tok, ln)?));
                }
            }
        }
    }
    assemble(raw, last_line)
}

fn header(raw: &mut Raw, key: &str, value: &str, ln: usize) -> Result<()> {
    match key {
        "NAME" => raw.name = value.to_string(),
        "TYPE" => {
            if value != "CVRP" {
                return Err(perr(ln, format!("unsupported TYPE `{value}`")));
            }
        }
        "DIMENSION" => raw.dimension = Some(num(value, ln)?),
        "CAPACITY" => raw.capacity = Some(num(value, ln)?),
        "EDGE_WEIGHT_TYPE" => {
            raw.euclidean = Some(match value {
                "EUC_2D" => true,
                "EXPLICIT" => false,
                other => return Err(perr(ln, format!("unsupported EDGE_WEIGHT_TYPE `{other}`"))),
            })
        }
        "EDGE_WEIGHT_FORMAT" => {
            raw.format = Some(match value {
                "FULL_MATRIX" => WeightFormat::Full,
                "LOWER_ROW" => WeightFormat::LowerRow,
                "UPPER_ROW" => WeightFormat::UpperRow,
                "LOWER_DIAG_ROW" => WeightFormat::LowerDiagRow,
                "UPPER_DIAG_ROW" => WeightFormat::UpperDiagRow,
                other => return Err(perr(ln, format!("unsupported EDGE_WEIGHT_FORMAT `{other}`"))),
            })
        }
        // Informational keys.
        "COMMENT" | "DISPLAY_DATA_TYPE" | "NODE_COORD_TYPE" => {}
        other => return Err(perr(ln, format!("unknown keyword `{other}`"))),
    }
    Ok(())
}

fn assemble<T: Scalar>(raw: Raw, last_line: usize) -> Result<Instance<T>> {
    let dim = raw.dimension.ok_or_else(|| perr(last_line, "missing DIMENSION"))?;
    let capacity = raw.capacity.ok_or_else(|| perr(last_line, "missing CAPACITY"))?;
    if !(capacity > 0.0) {
        return Err(Error::Validation(format!("CAPACITY must be positive, got {capacity}")));
    }
    let euclidean = raw.euclidean.ok_or_else(|| perr(last_line, "missing EDGE_WEIGHT_TYPE"))?;
    let depot = match raw.depots.as_slice() {
        [] => 1,
        [d] => *d,
        _ => return Err(Error::Validation("multiple depots are not supported".into())),
    };
    if depot == 0 || depot > dim {
        return Err(Error::Validation(format!("depot id {depot} outside 1..={dim}")));
    }
    // File node ids in internal order: depot first, then ascending ids.
    let ids: Vec<usize> = std::iter::once(depot).chain((1..=dim).filter(|&i| i != depot)).collect();

    let mut demands = Vec::with_capacity(dim - 1);
    for &id in &ids[1..] {
        let q = *raw.demands.get(&id).ok_or_else(|| perr(last_line, format!("no demand for node {id}")))?;
        if q > capacity {
            return Err(Error::Validation(format!("node {id} demand {q} exceeds capacity {capacity}")));
        }
        demands.push(T::of(q / capacity));
    }

    let inst = if euclidean {
        let mut pts = Vec::with_capacity(dim);
        for &id in &ids {
            let p = raw.coords.get(&id).ok_or_else(|| perr(last_line, format!("no coordinates for node {id}")))?;
            pts.push([T::of(p[0]), T::of(p[1])]);
        }
        let depot_pt = pts[0];
        Instance::euclidean(depot_pt, pts.split_off(1), demands)?
    } else {
        let format = raw.format.ok_or_else(|| perr(last_line, "missing EDGE_WEIGHT_FORMAT"))?;
        let full = weight_matrix(&raw.weights, dim, format, last_line)?;
        let matrix = ids.iter().map(|&a| ids.iter().map(|&b| T::of(full[a - 1][b - 1])).collect()).collect();
        Instance::from_matrix(matrix, demands)?
    };
    Ok(inst.with_name(raw.name))
}

fn weight_matrix(weights: &[(usize, f64)], dim: usize, format: WeightFormat, last_line: usize) -> Result<Vec<Vec<f64>>> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let keep = match format {
                WeightFormat::Full => true,
                WeightFormat::LowerRow => j < i,
                WeightFormat::UpperRow => j > i,
                WeightFormat::LowerDiagRow => j <= i,
                WeightFormat::UpperDiagRow => j >= i,
            };
            if keep {
                cells.push((i, j));
            }
        }
    }
    if weights.len() != cells.len() {
        let line = weights.get(cells.len()).map_or(last_line, |w| w.0);
        return Err(perr(line, format!("expected {} edge weights, found {}", cells.len(), weights.len())));
    }
    let mut m = vec![vec![0.0; dim]; dim];
    for (&(i, j), &(_, w)) in cells.iter().zip(weights) {
        m[i][j] = w;
        if format != WeightFormat::Full {
            m[j][i] = w;
        }
    }
    Ok(m)
}
