//! Intrinsic-reward landscapes over two-dimensional slices of state space.
//!
//! Cell `(i, j)` covers `[lo + i w, lo + (i + 1) w)` along `axis_i` (and the
//! same along `axis_j`) and is evaluated at its center. Cells whose spectrum
//! blows up hold NaN, are skipped by [`LandscapeGrid::argmax`] and are
//! counted in `blow_ups`.

use crate::dynamics::{StateVector, SystemModel};
use crate::error::{Error, Result};
use crate::lyapunov::{spectrum_batch, ControlSource, SpectrumSettings};
use crate::rewards::{maxle, suple, RewardKind};
use crate::scalar::Scalar;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec<F> {
    pub axis_i: usize,
    pub axis_j: usize,
    pub range_i: (F, F),
    pub range_j: (F, F),
    pub resolution: usize,
    /// Full state; the two varied coordinates are overwritten per cell.
    pub fixed_values: Vec<F>,
}

impl<F: Scalar> GridSpec<F> {
    pub fn validate(&self, n: usize) -> Result<()> {
        let err = |m: String| Err(Error::GridSpec(m));
        if self.resolution < 2 {
            return err(format!("resolution must be at least 2, got {}", self.resolution));
        }
        if self.axis_i == self.axis_j {
            return err("axes must differ".into());
        }
        if self.axis_i >= n || self.axis_j >= n {
            return err(format!("axes must be below the state dimension {n}"));
        }
        if !(self.range_i.0 < self.range_i.1) || !(self.range_j.0 < self.range_j.1) {
            return err("each range needs lo < hi".into());
        }
        if self.fixed_values.len() != n {
            return Err(Error::Dimension {
                what: "grid fixed values",
                expected: n,
                got: self.fixed_values.len(),
            });
        }
        Ok(())
    }

    fn center(&self, (lo, hi): (F, F), k: usize) -> F {
        let w = (hi - lo) / F::from_usize_lossy(self.resolution);
        lo + (F::from_usize_lossy(k) + F::lit(0.5)) * w
    }

    pub fn coord_i(&self, i: usize) -> F {
        self.center(self.range_i, i)
    }

    pub fn coord_j(&self, j: usize) -> F {
        self.center(self.range_j, j)
    }

    /// State evaluated in cell `(i, j)`.
    pub fn state(&self, i: usize, j: usize) -> StateVector<F> {
        let mut s = self.fixed_values.clone();
        s[self.axis_i] = self.coord_i(i);
        s[self.axis_j] = self.coord_j(j);
        StateVector(s)
    }

    /// Index of the cell along an axis that contains `x`, if any.
    pub fn cell_of(&self, (lo, hi): (F, F), x: F) -> Option<usize> {
        if x < lo || x >= hi {
            return None;
        }
        let w = (hi - lo) / F::from_usize_lossy(self.resolution);
        ((x - lo) / w).floor().to_usize().map(|k| k.min(self.resolution - 1))
    }
}

#[derive(Clone, Debug)]
pub struct LandscapeGrid<F> {
    pub system: String,
    pub spec: GridSpec<F>,
    /// Row-major, `values[i * resolution + j]`.
    pub values: Vec<F>,
    pub reward_kind: RewardKind,
    pub horizon: usize,
    pub blow_ups: usize,
}

impl<F: Scalar> LandscapeGrid<F> {
    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    pub fn value(&self, i: usize, j: usize) -> F {
        self.values[i * self.spec.resolution + j]
    }

    /// Cell with the largest finite value; ties go to the first in row-major order.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let res = self.spec.resolution;
        let mut best: Option<(usize, F)> = None;
        for (k, &v) in self.values.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((k, v));
            }
        }
        best.map(|(k, _)| (k / res, k % res))
    }

    fn finite_range(&self) -> Option<(F, F)> {
        let mut it = self.values.iter().copied().filter(|v| !v.is_nan());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Bitwise equality that treats NaN cells as equal.
    pub fn same_values(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

/// Evaluates an intrinsic reward at every cell of `spec`.
pub fn evaluate_grid<F: Scalar>(
    system: &SystemModel<F>,
    spec: &GridSpec<F>,
    reward_kind: RewardKind,
    horizon: usize,
    parallel: bool,
) -> Result<LandscapeGrid<F>> {
    if !reward_kind.is_intrinsic() {
        return Err(Error::RewardSpec(format!(
            "landscapes need an intrinsic reward, got {reward_kind}"
        )));
    }
    spec.validate(system.state_dim())?;
    let res = spec.resolution;
    let states: Vec<StateVector<F>> = (0..res * res).map(|k| spec.state(k / res, k % res)).collect();
    let settings = SpectrumSettings::new(horizon);
    let spectra = spectrum_batch(system, &states, &settings, &ControlSource::Zero, parallel);
    let mut blow_ups = 0;
    let mut values = Vec::with_capacity(spectra.len());
    for r in spectra {
        match r {
            Ok(sp) => values.push(if reward_kind == RewardKind::Suple {
                suple(&sp)
            } else {
                maxle(&sp)
            }),
            Err(Error::TrajectoryBlowUp { .. }) | Err(Error::DegenerateFrame { .. }) => {
                blow_ups += 1;
                values.push(F::nan());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(LandscapeGrid {
        system: system.name().to_string(),
        spec: spec.clone(),
        values,
        reward_kind,
        horizon,
        blow_ups,
    })
}

/// Slice range used for coordinate `k` in pairwise panels: one full turn
/// centred on the goal for angles, +-8 for velocities, +-2 for positions.
pub fn slice_range<F: Scalar>(system: &SystemModel<F>, k: usize) -> (F, F) {
    let g = system.goal()[k];
    if system.angular_mask()[k] {
        (g - F::PI(), g + F::PI())
    } else if k % 2 == 1 {
        (g - F::lit(8.0), g + F::lit(8.0))
    } else {
        (g - F::lit(2.0), g + F::lit(2.0))
    }
}

/// One panel per unordered coordinate pair `(a, b)`, `a < b`, with the
/// remaining coordinates held at the goal.
pub fn pairwise_slices<F: Scalar>(
    system: &SystemModel<F>,
    resolution: usize,
    horizon: usize,
    reward_kind: RewardKind,
    parallel: bool,
) -> Result<Vec<LandscapeGrid<F>>> {
    let n = system.state_dim();
    if n < 2 {
        return Err(Error::GridSpec("pairwise slices need at least two coordinates".into()));
    }
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let spec = GridSpec {
                axis_i: a,
                axis_j: b,
                range_i: slice_range(system, a),
                range_j: slice_range(system, b),
                resolution,
                fixed_values: system.goal().to_vec(),
            };
            out.push(evaluate_grid(system, &spec, reward_kind, horizon, parallel)?);
        }
    }
    Ok(out)
}

fn join<F: Scalar>(v: &[F]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Renders the CSV described in `docs/FORMATS.md`.
pub fn to_csv<F: Scalar>(grid: &LandscapeGrid<F>) -> String {
    let s = &grid.spec;
    let mut out = String::new();
    let _ = writeln!(out, "# system={}", grid.system);
    let _ = writeln!(out, "# reward_kind={}", grid.reward_kind);
    let _ = writeln!(out, "# horizon={}", grid.horizon);
    let _ = writeln!(out, "# axis_i={}", s.axis_i);
    let _ = writeln!(out, "# axis_j={}", s.axis_j);
    let _ = writeln!(out, "# range_i={},{}", s.range_i.0, s.range_i.1);
    let _ = writeln!(out, "# range_j={},{}", s.range_j.0, s.range_j.1);
    let _ = writeln!(out, "# resolution={}", s.resolution);
    let _ = writeln!(out, "# fixed_values={}", join(&s.fixed_values));
    let _ = writeln!(out, "# blow_ups={}", grid.blow_ups);
    out.push_str("i,j,coord_i,coord_j,value\n");
    for i in 0..s.resolution {
        for j in 0..s.resolution {
            let v = grid.value(i, j);
            let v = if v.is_nan() { String::new() } else { v.to_string() };
            let _ = writeln!(out, "{i},{j},{},{},{v}", s.coord_i(i), s.coord_j(j));
        }
    }
    out
}

fn csv_err(reason: impl Into<String>) -> Error {
    Error::Io {
        context: "parsing landscape csv".into(),
        message: reason.into(),
    }
}

/// Parses the output of [`to_csv`].
pub fn from_csv<F: Scalar>(text: &str) -> Result<LandscapeGrid<F>> {
    let mut header = std::collections::BTreeMap::new();
    let mut lines = text.lines();
    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| csv_err(format!("bad header `{line}`")))?;
            header.insert(k.to_string(), v.to_string());
        } else if line == "i,j,coord_i,coord_j,value" {
            break;
        } else {
            return Err(csv_err(format!("unexpected line `{line}`")));
        }
    }
    let get = |k: &str| header.get(k).ok_or_else(|| csv_err(format!("missing header {k}")));
    let num = |s: &str| {
        s.parse::<f64>()
            .map(F::lit)
            .map_err(|_| csv_err(format!("bad number `{s}`")))
    };
    let pair = |k: &str| -> Result<(F, F)> {
        let v = get(k)?;
        let (a, b) = v.split_once(',').ok_or_else(|| csv_err(format!("bad range `{v}`")))?;
        Ok((num(a)?, num(b)?))
    };
    let resolution: usize = get("resolution")?.parse().map_err(|_| csv_err("bad resolution"))?;
    let spec = GridSpec {
        axis_i: get("axis_i")?.parse().map_err(|_| csv_err("bad axis_i"))?,
        axis_j: get("axis_j")?.parse().map_err(|_| csv_err("bad axis_j"))?,
        range_i: pair("range_i")?,
        range_j: pair("range_j")?,
        resolution,
        fixed_values: get("fixed_values")?.split(',').map(num).collect::<Result<_>>()?,
    };
    let mut values = vec![F::nan(); resolution * resolution];
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(csv_err(format!("expected 5 fields in `{line}`")));
        }
        let i: usize = fields[0].parse().map_err(|_| csv_err("bad i"))?;
        let j: usize = fields[1].parse().map_err(|_| csv_err("bad j"))?;
        if i >= resolution || j >= resolution {
            return Err(csv_err("cell index out of range"));
        }
        values[i * resolution + j] = if fields[4].is_empty() {
            F::nan()
        } else {
            num(fields[4])?
        };
        rows += 1;
    }
    if rows != resolution * resolution {
        return Err(csv_err(format!(
            "expected {} rows, found {rows}",
            resolution * resolution
        )));
    }
    Ok(LandscapeGrid {
        system: get("system")?.clone(),
        spec,
        values,
        reward_kind: get("reward_kind")?.parse()?,
        horizon: get("horizon")?.parse().map_err(|_| csv_err("bad horizon"))?,
        blow_ups: get("blow_ups")?.parse().map_err(|_| csv_err("bad blow_ups"))?,
    })
}

/// Linear blue-green-red ramp over `t` in `[0, 1]`.
pub fn color_map(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let c = |x: f64| (255.0 * x).round() as u8;
    [c(t), c(1.0 - (2.0 * t - 1.0).abs()), c(1.0 - t)]
}

/// Binary P6 heatmap: column `i` left to right, `j` bottom to top, NaN cells
/// black and the argmax cell white.
pub fn to_ppm<F: Scalar>(grid: &LandscapeGrid<F>) -> Vec<u8> {
    let res = grid.resolution();
    let mut out = format!("P6\n{res} {res}\n255\n").into_bytes();
    let (lo, hi) = grid
        .finite_range()
        .map_or((0.0, 0.0), |(a, b)| (a.to_f64_lossy(), b.to_f64_lossy()));
    let span = hi - lo;
    let best = grid.argmax();
    for row in 0..res {
        let j = res - 1 - row;
        for i in 0..res {
            let v = grid.value(i, j);
            let px = if Some((i, j)) == best {
                [255, 255, 255]
            } else if v.is_nan() {
                [0, 0, 0]
            } else if span > 0.0 {
                color_map((v.to_f64_lossy() - lo) / span)
            } else {
                color_map(0.0)
            };
            out.extend_from_slice(&px);
        }
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.ppm`, returning both paths.
pub fn export<F: Scalar>(grid: &LandscapeGrid<F>, stem: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let stem = stem.as_ref();
    if let Some(parent) = stem.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    }
    let csv = stem.with_extension("csv");
    let ppm = stem.with_extension("ppm");
    std::fs::write(&csv, to_csv(grid)).map_err(|e| Error::io(format!("writing {}", csv.display()), e))?;
    std::fs::write(&ppm, to_ppm(grid)).map_err(|e| Error::io(format!("writing {}", ppm.display()), e))?;
    Ok((csv, ppm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{make_system, Overrides};

    fn pendulum() -> SystemModel<f64> {
        make_system("pendulum", &Overrides::new()).unwrap()
    }

    fn small_spec() -> GridSpec<f64> {
        GridSpec {
            axis_i: 0,
            axis_j: 1,
            range_i: (0.0, std::f64::consts::TAU),
            range_j: (-8.0, 8.0),
            resolution: 2,
            fixed_values: vec![0.0, 0.0],
        }
    }

    #[test]
    fn invalid_specs() {
        let mut s = small_spec();
        s.resolution = 1;
        assert!(s.validate(2).is_err());
        let mut s = small_spec();
        s.axis_j = 0;
        assert!(s.validate(2).is_err());
        let mut s = small_spec();
        s.range_j = (1.0, 1.0);
        assert!(s.validate(2).is_err());
        assert!(evaluate_grid(&pendulum(), &small_spec(), RewardKind::Sparse, 10, false).is_err());
    }

    #[test]
    fn cell_lookup() {
        let s = GridSpec {
            resolution: 101,
            ..small_spec()
        };
        assert_eq!(s.cell_of(s.range_i, std::f64::consts::PI), Some(50));
        assert_eq!(s.cell_of(s.range_j, 0.0), Some(50));
        assert_eq!(s.cell_of(s.range_j, 9.0), None);
        assert!((s.coord_i(50) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let g = evaluate_grid(&pendulum(), &small_spec(), RewardKind::Suple, 10, false).unwrap();
        let csv = to_csv(&g);
        let data_rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
        assert_eq!(data_rows, 4);
    }

    #[test]
    fn nan_cells_round_trip_as_empty() {
        let mut g = evaluate_grid(&pendulum(), &small_spec(), RewardKind::MaxLe, 10, false).unwrap();
        g.values[1] = f64::NAN;
        let text = to_csv(&g);
        assert!(text.contains(",\n"));
        let back: LandscapeGrid<f64> = from_csv(&text).unwrap();
        assert!(back.same_values(&g));
        assert_eq!(back.argmax(), g.argmax());
        let ppm = to_ppm(&g);
        assert!(ppm.starts_with(b"P6\n2 2\n255\n"));
        assert_eq!(ppm.len(), 11 + 12);
    }

    #[test]
    fn color_map_endpoints() {
        assert_eq!(color_map(0.0), [0, 0, 255]);
        assert_eq!(color_map(0.5), [128, 255, 128]);
        assert_eq!(color_map(1.0), [255, 0, 0]);
    }
}
