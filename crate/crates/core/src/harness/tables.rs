//! Run grids behind the `table` command.

use std::str::FromStr;

use crate::error::{HnsError, Result};
use crate::hermite::Degree;
use crate::solver::{InverseConfig, ProblemId};

/// `desk` truncates the time-node lists and test clouds; `full` uses the
/// reference grids (LHS test clouds stay capped).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

impl FromStr for Scale {
    type Err = HnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(HnsError::Config(format!("scale must be `desk` or `full`, got {s:?}"))),
        }
    }
}

/// One solve of a table sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub problem: ProblemId,
    pub alpha: f64,
    pub degree: Degree,
    pub mt: usize,
    pub mx: usize,
    pub test_points: Option<usize>,
    pub unknowns: Option<InverseConfig>,
}

const DESK_TEST_POINTS: usize = 20_000;

fn degrees(ps: &[usize]) -> Vec<Degree> {
    ps.iter().map(|&p| Degree::try_from(p).expect("table degrees are valid")).collect()
}

fn grid(problem: ProblemId, alphas: &[f64], mts: &[usize], ps: &[usize], mx: usize, test: Option<usize>) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &alpha in alphas {
        for &mt in mts {
            for degree in degrees(ps) {
                cells.push(Cell { problem, alpha, degree, mt, mx, test_points: test, unknowns: None });
            }
        }
    }
    cells
}

/// Cells of reference table `table` (1–7).
pub fn table_cells(table: usize, scale: Scale) -> Result<Vec<Cell>> {
    let desk = scale == Scale::Desk;
    let test = desk.then_some(DESK_TEST_POINTS);
    let ps: &[usize] = if desk { &[1, 3] } else { &[1, 3, 5] };
    let cells = match table {
        1 => {
            let mts: &[usize] = if desk { &[6, 11, 21] } else { &[6, 11, 21, 41, 81, 101] };
            grid(ProblemId::Fde, &[0.3, 0.5, 0.7], mts, ps, 0, None)
        }
        2 => {
            let mts: &[usize] = if desk { &[6, 11, 21] } else { &[6, 11, 21, 41, 61, 81, 101] };
            grid(ProblemId::Tfde, &[0.45, 0.65, 0.85], mts, ps, 11, None)
        }
        3 => {
            let mts: &[usize] = if desk { &[6, 11] } else { &[6, 11, 21, 41, 81] };
            grid(ProblemId::Tfade2d, &[0.7, 0.8, 0.9], mts, ps, 11, None)
        }
        4 => {
            let mts: &[usize] = if desk { &[3, 6] } else { &[3, 6, 11, 21] };
            grid(ProblemId::Fpde3d, &[0.5], mts, ps, 11, test)
        }
        5 => {
            let (mts, mx): (&[usize], usize) = if desk { (&[6], 500) } else { (&[6, 11, 21], 5000) };
            grid(ProblemId::Advection10d, &[0.5], mts, &[1, 3], mx, test)
        }
        6 | 7 => {
            let unknowns = if table == 6 {
                InverseConfig { alpha: Some(0.2), ..Default::default() }
            } else {
                InverseConfig { alpha: Some(0.2), beta: Some(0.2), gamma: Some(0.2) }
            };
            let mx = if desk { 500 } else { 1000 };
            degrees(&[1, 3])
                .into_iter()
                .map(|degree| Cell {
                    problem: ProblemId::Inverse3d,
                    alpha: 0.5,
                    degree,
                    mt: 6,
                    mx,
                    test_points: test,
                    unknowns: Some(unknowns),
                })
                .collect()
        }
        _ => return Err(HnsError::Config(format!("table must be 1–7, got {table}"))),
    };
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_shapes() {
        let t1 = table_cells(1, Scale::Desk).unwrap();
        assert_eq!(t1.len(), 3 * 3 * 2);
        let t4 = table_cells(4, Scale::Desk).unwrap();
        assert!(t4.iter().all(|c| c.alpha == 0.5 && [3, 6].contains(&c.mt)));
        let t6 = table_cells(6, Scale::Desk).unwrap();
        assert!(t6.iter().all(|c| c.unknowns.unwrap().beta.is_none()));
        assert_eq!(table_cells(7, Scale::Full).unwrap()[0].mx, 1000);
        assert!(table_cells(8, Scale::Desk).is_err());
        assert!("huge".parse::<Scale>().is_err());
    }
}
