//! CSV formats: closed-loop trajectories, plot exports, via-points and demonstrations.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::quaternion::{align_sequence, hemisphere_align, log_map, TangentVector, UnitQuaternion};
use crate::sampling::ViaPointSequence;
use crate::sim::TrajectorySample;

pub const TRAJECTORY_HEADER: [&str; 16] = [
    "t",
    "qw",
    "qx",
    "qy",
    "qz",
    "wx",
    "wy",
    "wz",
    "tvx",
    "tvy",
    "tvz",
    "tx",
    "ty",
    "tz",
    "spring_idx",
    "dist_goal",
];

pub const PLOT_HEADER: [&str; 8] = ["t", "nu", "ux", "uy", "uz", "zeta_x", "zeta_y", "zeta_z"];

/// Nine significant digits.
fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    }
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish<W: Write>(mut w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory_csv(samples: &[TrajectorySample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(TRAJECTORY_HEADER)
        .map_err(|e| csv_err(path, e))?;
    for s in samples {
        let mut row: Vec<String> = Vec::with_capacity(16);
        row.push(num(s.t));
        row.extend(s.q.to_array().iter().map(|x| num(*x)));
        row.extend(s.omega.iter().map(|x| num(*x)));
        row.extend(s.tau_vs.iter().map(|x| num(*x)));
        row.extend(s.tau.iter().map(|x| num(*x)));
        row.push(s.spring_idx.to_string());
        row.push(num(s.dist_goal));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    finish(w, path)
}

/// Column name → index, failing on missing required columns.
struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        Self {
            index: headers
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().to_string(), i))
                .collect(),
        }
    }

    fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    fn require(&self, path: &Path, names: &[&str]) -> Result<()> {
        match names.iter().find(|n| !self.has(n)) {
            Some(n) => Err(Error::Parse {
                context: path.display().to_string(),
                message: format!("missing column `{n}`"),
            }),
            None => Ok(()),
        }
    }

    fn get<T: std::str::FromStr>(
        &self,
        rec: &csv::StringRecord,
        name: &str,
        path: &Path,
        line: usize,
    ) -> Result<T> {
        let raw = rec.get(self.index[name]).unwrap_or("").trim();
        raw.parse().map_err(|_| Error::Parse {
            context: format!("{} (line {line})", path.display()),
            message: format!("column `{name}`: cannot parse {raw:?}"),
        })
    }

    fn vec3(
        &self,
        rec: &csv::StringRecord,
        names: [&str; 3],
        path: &Path,
        line: usize,
    ) -> Result<[f64; 3]> {
        Ok([
            self.get(rec, names[0], path, line)?,
            self.get(rec, names[1], path, line)?,
            self.get(rec, names[2], path, line)?,
        ])
    }

    fn quat(&self, rec: &csv::StringRecord, path: &Path, line: usize) -> Result<UnitQuaternion> {
        let q = [
            self.get(rec, "qw", path, line)?,
            self.get(rec, "qx", path, line)?,
            self.get(rec, "qy", path, line)?,
            self.get(rec, "qz", path, line)?,
        ];
        UnitQuaternion::from_array(q).map_err(|e| Error::Parse {
            context: format!("{} (line {line})", path.display()),
            message: e.to_string(),
        })
    }
}

fn open(path: &Path) -> Result<(csv::Reader<File>, Columns)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let cols = Columns::new(r.headers().map_err(|e| csv_err(path, e))?);
    Ok((r, cols))
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<Vec<TrajectorySample>> {
    let path = path.as_ref();
    let (mut r, cols) = open(path)?;
    cols.require(path, &TRAJECTORY_HEADER)?;
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = k + 2;
        out.push(TrajectorySample {
            t: cols.get(&rec, "t", path, line)?,
            q: cols.quat(&rec, path, line)?,
            omega: cols.vec3(&rec, ["wx", "wy", "wz"], path, line)?,
            tau_vs: cols.vec3(&rec, ["tvx", "tvy", "tvz"], path, line)?,
            tau: cols.vec3(&rec, ["tx", "ty", "tz"], path, line)?,
            spring_idx: cols.get(&rec, "spring_idx", path, line)?,
            dist_goal: cols.get(&rec, "dist_goal", path, line)?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyTrajectory { min: 1, got: 0 });
    }
    Ok(out)
}

/// Quaternion components and tangent coordinates `Log_{q*}(q)` against time.
pub fn write_plot_csv(
    samples: &[TrajectorySample],
    goal: &UnitQuaternion,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    w.write_record(PLOT_HEADER).map_err(|e| csv_err(path, e))?;
    for s in samples {
        let zeta = log_map(goal, &hemisphere_align(goal, &s.q))?;
        let mut row = vec![num(s.t)];
        row.extend(s.q.to_array().iter().map(|x| num(*x)));
        row.extend(zeta.iter().map(|x| num(*x)));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    finish(w, path)
}

/// Via-points as `i,qw,qx,qy,qz,zeta_x,zeta_y,zeta_z,spacing`; `spacing` is the distance
/// to the previous point (0 for the start).
pub fn write_via_csv<W: Write>(via: &ViaPointSequence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let stdout = Path::new("<output>");
    w.write_record([
        "i", "qw", "qx", "qy", "qz", "zeta_x", "zeta_y", "zeta_z", "spacing",
    ])
    .map_err(|e| csv_err(stdout, e))?;
    for (i, (q, z)) in via.points.iter().zip(&via.zetas).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(q.to_array().iter().map(|x| num(*x)));
        row.extend(z.iter().map(|x| num(*x)));
        row.push(num(if i == 0 { 0.0 } else { via.spacings[i - 1] }));
        w.write_record(&row).map_err(|e| csv_err(stdout, e))?;
    }
    finish(w, stdout)
}

/// Loads a demonstrated orientation trajectory.
///
/// Columns are matched by name: `qw,qx,qy,qz` are required; world-frame velocities
/// `wx,wy,wz` are optional and, when absent, are reconstructed from `t` by forward
/// differences `ω_k = 2 Log_{q_k}(q_{k+1}) / (t_{k+1} − t_k)`. The sequence is
/// hemisphere-aligned and the final velocity is set to zero (the demonstration ends at rest
/// on the goal).
pub fn load_demo_csv(path: impl AsRef<Path>) -> Result<Vec<(UnitQuaternion, TangentVector)>> {
    let path = path.as_ref();
    let (mut r, cols) = open(path)?;
    cols.require(path, &["qw", "qx", "qy", "qz"])?;
    let with_omega = ["wx", "wy", "wz"].iter().all(|c| cols.has(c));
    if !with_omega {
        cols.require(path, &["t"])?;
    }
    let mut ts = Vec::new();
    let mut qs = Vec::new();
    let mut ws = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = k + 2;
        qs.push(cols.quat(&rec, path, line)?);
        if with_omega {
            ws.push(Vector3::from(cols.vec3(
                &rec,
                ["wx", "wy", "wz"],
                path,
                line,
            )?));
        } else {
            ts.push(cols.get::<f64>(&rec, "t", path, line)?);
        }
    }
    if qs.len() < 2 {
        return Err(Error::EmptyTrajectory {
            min: 2,
            got: qs.len(),
        });
    }
    align_sequence(&mut qs);
    if !with_omega {
        for k in 0..qs.len() - 1 {
            let h = ts[k + 1] - ts[k];
            if !(h > 0.0) {
                return Err(Error::Parse {
                    context: format!("{} (line {})", path.display(), k + 3),
                    message: "time stamps must be strictly increasing".into(),
                });
            }
            ws.push(log_map(&qs[k], &qs[k + 1])? * (2.0 / h));
        }
        ws.push(Vector3::zeros());
    }
    *ws.last_mut().unwrap() = Vector3::zeros();
    Ok(qs.into_iter().zip(ws).collect())
}
