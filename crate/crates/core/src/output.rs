//! Delimited text outputs with provenance headers.
//!
//! Every file starts with `#` lines carrying the crate version, the SHA-256
//! of the canonical configuration and the quadrature settings. Numbers are
//! written with 17 significant digits so they round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::SimConfig;
use crate::curve::p2_dof_alpha;
use crate::error::{Error, Result};
use crate::fem::eval_p1;
use crate::solver::{SeriesRow, SystemState, Trajectory};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SNAPSHOT_COLUMNS: [&str; 10] = ["alpha", "xr", "xz", "ur", "uz", "p", "h", "g", "xi_r", "xi_z"];

#[inline]
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Provenance header shared by all files of a run.
pub fn header(cfg: &SimConfig) -> String {
    let sl = &cfg.disc.single_layer;
    format!(
        "# membrane {VERSION}\n# config_sha256 {}\n# quadrature gauss_points={} bem_gauss_points={} alpert_order={} alpert_panels={} separation={}\n# scenario {}\n",
        cfg.hash(),
        cfg.disc.gauss_points,
        sl.gauss_points,
        sl.alpert_order,
        sl.alpert_panels,
        sl.separation,
        cfg.scenario,
    )
}

/// Snapshot table: one row per P2 dof.
pub fn format_snapshot(state: &SystemState, cfg: &SimConfig) -> String {
    let mut s = header(cfg);
    let _ = writeln!(s, "# t {}", num(state.t));
    let _ = writeln!(s, "# {}", SNAPSHOT_COLUMNS.join(" "));
    let curve = &state.curve;
    let mesh = curve.mesh();
    let n = mesh.n_cells();
    for i in 0..curve.n_dofs() {
        let (c, u) = if i == 2 * n { (n - 1, 1.0) } else { (i / 2, 0.5 * (i % 2) as f64) };
        let row = [
            p2_dof_alpha(mesh, i),
            curve.xr()[i],
            curve.xz()[i],
            state.u[2 * i],
            state.u[2 * i + 1],
            eval_p1(&state.p, c, u),
            state.h[i],
            state.g[i],
            state.xi[2 * i],
            state.xi[2 * i + 1],
        ];
        let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

/// Time series table: `t E E_bend E_gauss E_line A` and one hole radius per open edge.
pub fn format_series(series: &[SeriesRow], cfg: &SimConfig, stop: Option<&str>) -> String {
    let mut s = header(cfg);
    if let Some(r) = stop {
        let _ = writeln!(s, "# stop {r}");
    }
    let holes = series.first().map(|r| r.hole_radii.len()).unwrap_or(0);
    let mut cols = vec!["t".to_string(), "E".into(), "E_bend".into(), "E_gauss".into(), "E_line".into(), "A".into()];
    cols.extend((0..holes).map(|k| format!("hole_radius_{k}")));
    let _ = writeln!(s, "# {}", cols.join(" "));
    for r in series {
        let mut v = vec![r.t, r.energy.total, r.energy.bend, r.energy.gauss, r.energy.line, r.area];
        v.extend(&r.hole_radii);
        let line: Vec<String> = v.iter().map(|&x| num(x)).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_snapshot(state: &SystemState, cfg: &SimConfig, path: &Path) -> Result<()> {
    write(path, &format_snapshot(state, cfg))
}

pub fn write_series(series: &[SeriesRow], cfg: &SimConfig, stop: Option<&str>, path: &Path) -> Result<()> {
    write(path, &format_series(series, cfg, stop))
}

/// Write `config.toml`, `series.dat` and `snapshot_NNNNN.dat` files into `dir`.
pub fn write_trajectory(traj: &Trajectory, cfg: &SimConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    let cfg_path = dir.join("config.toml");
    write(&cfg_path, &cfg.to_toml())?;
    out.push(cfg_path);
    let series = dir.join("series.dat");
    write_series(&traj.series, cfg, Some(&traj.stop.to_string()), &series)?;
    out.push(series);
    for (k, st) in traj.snapshots.iter().enumerate() {
        let p = dir.join(format!("snapshot_{k:05}.dat"));
        write_snapshot(st, cfg, &p)?;
        out.push(p);
    }
    Ok(out)
}

/// Write a study table with the common header.
pub fn write_table(path: &Path, cfg: &SimConfig, title: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = header(cfg);
    let _ = writeln!(s, "# {title}");
    let _ = writeln!(s, "# {}", columns.join(" "));
    for r in rows {
        let _ = writeln!(s, "{}", r.join(" "));
    }
    write(path, &s)
}

/// Parsed snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub meta: Vec<String>,
    pub rows: Vec<[f64; 10]>,
}

impl Snapshot {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = SNAPSHOT_COLUMNS.iter().position(|&c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut t = None;
    let mut meta = Vec::new();
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let bad = |m: String| Error::Parse {
            line: ln + 1,
            key: String::new(),
            message: m,
        };
        if let Some(h) = line.strip_prefix('#') {
            let h = h.trim();
            if let Some(v) = h.strip_prefix("t ") {
                t = Some(v.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?);
            } else {
                meta.push(h.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?;
        let row: [f64; 10] = vals
            .try_into()
            .map_err(|v: Vec<f64>| bad(format!("expected 10 columns, found {}", v.len())))?;
        rows.push(row);
    }
    let t = t.ok_or_else(|| Error::Parse {
        line: 0,
        key: "t".into(),
        message: "snapshot has no time header".into(),
    })?;
    Ok(Snapshot { t, meta, rows })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use crate::diagnostics::area;

    #[test]
    fn annulus_snapshot_and_series_start() {
        let cfg = parse_config_str("scenario = \"annulus\"\nn = 8\n").unwrap();
        let st = SystemState::initial(cfg.initial_curve().unwrap());
        let snap = parse_snapshot(&format_snapshot(&st, &cfg)).unwrap();
        assert_eq!(snap.t, 0.0);
        assert_eq!(&snap.rows[0][..3], &[0.0, 1.0, 0.0]);
        assert_eq!(snap.rows.len(), 17);
        assert!(snap.meta.iter().any(|m| m.starts_with("config_sha256 ")));
        let row = SeriesRow::of(&st, &cfg.params, cfg.disc.gauss_points).unwrap();
        let text = format_series(&[row], &cfg, None);
        let first = text.lines().find(|l| !l.starts_with('#')).unwrap();
        let v: Vec<f64> = first.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert_eq!(v[0], 0.0);
        assert!((v[5] - 3.0 * std::f64::consts::PI).abs() < 1e-13);
        assert_eq!(v[5], area(&st.curve, cfg.disc.gauss_points));
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
