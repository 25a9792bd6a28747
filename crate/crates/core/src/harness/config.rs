//! Line-oriented scenario files.
//!
//! ```text
//! # global keys first
//! pilots = 2
//! sweep = 2 5 10 20
//!
//! [cell]
//! bs = 0 0
//! user = 500 0
//! user_polar = 500 115      # distance (m) and bearing (deg) from this BS
//!
//! [cell]
//! bs = 0 1732.05
//! user = 634 1359
//! neighbors = 1             # 1-based cell indices
//! ```
//!
//! Distances are in meters and angles in degrees. `#` starts a comment.

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use crate::assignment::Method;
use crate::geometry::{Cell, Position, Scenario, SystemParams};
use crate::{Error, Result};

use super::Formulation;

/// A parsed scenario file: the scenario plus optional run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub sweep: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// 0-based.
    pub target_cell: Option<usize>,
    pub method: Option<Method>,
    pub formulation: Option<Formulation>,
}

pub fn load(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, &path.display().to_string())
}

/// Parses scenario text; `origin` labels error messages.
pub fn parse(text: &str, origin: &str) -> Result<ScenarioFile> {
    let mut params = SystemParams::default();
    let mut sweep = None;
    let mut trials = None;
    let mut seed = None;
    let mut target_cell = None;
    let mut method = None;
    let mut formulation = None;
    let mut cells: Vec<(Option<Position>, Vec<Position>, Option<Vec<usize>>, usize)> = Vec::new();
    let mut seen = HashSet::new();

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let err = |msg: String| Error::Config {
            path: origin.to_string(),
            line: line_no,
            msg,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line == "[cell]" {
            cells.push((None, Vec::new(), None, line_no));
            continue;
        }
        if line.starts_with('[') {
            return Err(err(format!("unknown section {line}")));
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        if value.is_empty() {
            return Err(err(format!("'{key}' has no value")));
        }

        if let Some(cell) = cells.last_mut() {
            match key {
                "bs" => {
                    if cell.0.is_some() {
                        return Err(err("cell has two 'bs' lines".into()));
                    }
                    let [x, y] = numbers::<2>(value).map_err(err)?;
                    cell.0 = Some(Position::new(x, y));
                }
                "user" => {
                    let [x, y] = numbers::<2>(value).map_err(err)?;
                    cell.1.push(Position::new(x, y));
                }
                "user_polar" => {
                    let bs = cell
                        .0
                        .ok_or_else(|| err("'user_polar' before the cell's 'bs'".into()))?;
                    let [d, bearing] = numbers::<2>(value).map_err(err)?;
                    cell.1.push(Position::polar(bs, d, bearing.to_radians()));
                }
                "neighbors" => {
                    let list: Vec<usize> = list(value).map_err(err)?;
                    if list.contains(&0) {
                        return Err(err("cell indices start at 1".into()));
                    }
                    cell.2 = Some(list.into_iter().map(|c| c - 1).collect());
                }
                other => {
                    return Err(err(format!(
                        "unknown cell key '{other}' (global keys go before the first [cell])"
                    )))
                }
            }
            continue;
        }

        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        match key {
            "antennas" => params.num_antennas = scalar(value).map_err(err)?,
            "cell_radius" => params.cell_radius = scalar(value).map_err(err)?,
            "scatter_radius" => params.scatter_radius = scalar(value).map_err(err)?,
            "pathloss_exponent" => params.pathloss_exponent = scalar(value).map_err(err)?,
            "wavelength" => params.wavelength = scalar(value).map_err(err)?,
            "spacing" => params.antenna_spacing = scalar(value).map_err(err)?,
            "noise_variance" => params.noise_variance = scalar(value).map_err(err)?,
            "snr_db" => params.cell_edge_snr_db = scalar(value).map_err(err)?,
            "paths" => params.num_paths = scalar(value).map_err(err)?,
            "pilot_length" => params.pilot_length = scalar(value).map_err(err)?,
            "pilots" => params.num_pilots = scalar(value).map_err(err)?,
            "sweep" => sweep = Some(list(value).map_err(err)?),
            "trials" => trials = Some(scalar(value).map_err(err)?),
            "seed" => seed = Some(scalar(value).map_err(err)?),
            "target_cell" => {
                let c: usize = scalar(value).map_err(err)?;
                if c == 0 {
                    return Err(err("cell indices start at 1".into()));
                }
                target_cell = Some(c - 1);
            }
            "method" => method = Some(value.parse::<Method>().map_err(|e| err(e.to_string()))?),
            "formulation" => {
                formulation = Some(
                    value
                        .parse::<Formulation>()
                        .map_err(|e| err(e.to_string()))?,
                )
            }
            other => return Err(err(format!("unknown key '{other}'"))),
        }
    }

    let mut built = Vec::with_capacity(cells.len());
    for (k, (bs, users, neighbors, line)) in cells.into_iter().enumerate() {
        let bs = bs.ok_or_else(|| Error::Config {
            path: origin.to_string(),
            line,
            msg: format!("cell {} has no 'bs' line", k + 1),
        })?;
        let mut cell = Cell::new(bs, users);
        cell.neighbors = neighbors;
        built.push(cell);
    }
    if built.is_empty() {
        return Err(Error::Config {
            path: origin.to_string(),
            line: text.lines().count(),
            msg: "no [cell] blocks".into(),
        });
    }
    if let Some(t) = target_cell {
        if t >= built.len() {
            return Err(Error::InvalidScenario(format!(
                "target cell {} does not exist",
                t + 1
            )));
        }
    }
    Ok(ScenarioFile {
        scenario: Scenario::new(built, params)?,
        sweep,
        trials,
        seed,
        target_cell,
        method,
        formulation,
    })
}

fn scalar<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse '{value}'"))
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(scalar)
        .collect()
}

fn numbers<const N: usize>(value: &str) -> std::result::Result<[f64; N], String> {
    let v: Vec<f64> = list(value)?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} numbers, got {}", v.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const SAMPLE: &str = "\
# two cells
pilots = 2
scatter_radius = 50
sweep = 2, 5 10
seed = 9
method = bnb
formulation = single
target_cell = 1

[cell]
bs = 0 0
user = 500 0
user_polar = 500 90   # straight up

[cell]
bs = 0 1732.05
user = 634 1359
neighbors = 1
";

    #[test]
    fn parses_sample() {
        let f = parse(SAMPLE, "sample").unwrap();
        let s = &f.scenario;
        assert_eq!(s.cells.len(), 2);
        assert_eq!(s.params.num_pilots, 2);
        assert_eq!(f.sweep, Some(vec![2, 5, 10]));
        assert_eq!(f.seed, Some(9));
        assert_eq!(f.target_cell, Some(0));
        assert_eq!(f.method, Some(Method::BranchAndBound));
        assert_eq!(f.formulation, Some(Formulation::SingleCell));
        assert_abs_diff_eq!(s.cells[0].users[1].x, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.cells[0].users[1].y, 500.0, epsilon = 1e-9);
        assert_eq!(s.cells[1].neighbors, Some(vec![0]));
        assert_eq!(s.cells[0].neighbors, None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("pilots = two\n[cell]\nbs = 0 0\n", 1),
            ("[cell]\nbs = 0 0\nuser = 1\n", 3),
            ("pilots = 1\npilots = 2\n", 2),
            ("[cell]\nuser = 5 5\n", 1),
            ("[cell]\nbs = 0 0\npilots = 2\n", 3),
            ("volume = 11\n", 1),
            ("[cell]\nuser_polar = 100 0\n", 2),
            ("[antenna]\n", 1),
        ];
        for (text, line) in cases {
            match parse(text, "f.cfg") {
                Err(Error::Config {
                    line: got, path, ..
                }) => {
                    assert_eq!(got, line, "{text}");
                    assert_eq!(path, "f.cfg");
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        let text = "scatter_radius = 50\n[cell]\nbs = 0 0\nuser = 10 0\n";
        assert!(matches!(parse(text, "x"), Err(Error::InvalidScenario(_))));
        assert!(parse("target_cell = 3\n[cell]\nbs = 0 0\n", "x").is_err());
        assert!(parse("# nothing\n", "x").is_err());
    }

    #[test]
    fn loads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.cfg");
        std::fs::write(&path, SAMPLE).unwrap();
        assert_eq!(load(&path).unwrap(), parse(SAMPLE, "other").unwrap());
        assert!(matches!(
            load(&dir.path().join("missing.cfg")),
            Err(Error::Io { .. })
        ));
    }
}
