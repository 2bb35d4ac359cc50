use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{SimError, SimState, TrajectoryRecord};
use crate::collision::DistanceFields;
use crate::fem::DofMap;

pub const CSV_HEADER: &str = "t,body,xc,yc,theta,lx,ly,omega,fex,fey,te,dmin";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io { path: path.to_path_buf(), source }
}

/// Appends trajectory records, one line per body per step.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    /// Starts a new file with the header.
    pub fn create(path: &Path) -> Result<Self, SimError> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = CsvWriter { path: path.to_path_buf(), out: BufWriter::new(file) };
        writeln!(w.out, "{CSV_HEADER}").map_err(io_err(path))?;
        Ok(w)
    }

    /// Reopens an existing file keeping the header and the first `rows`
    /// records; later lines (written after the checkpoint) are dropped.
    pub fn resume(path: &Path, rows: usize) -> Result<Self, SimError> {
        let kept: Vec<String> = match File::open(path) {
            Ok(f) => BufReader::new(f).lines().take(rows + 1).collect::<Result<_, _>>().map_err(io_err(path))?,
            Err(_) => Vec::new(),
        };
        if kept.len() != rows + 1 {
            return Err(SimError::Checkpoint(format!(
                "{} holds {} records, checkpoint expects {rows}",
                path.display(),
                kept.len().saturating_sub(1)
            )));
        }
        let file = OpenOptions::new().write(true).truncate(true).open(path).map_err(io_err(path))?;
        let mut out = BufWriter::new(file);
        for line in kept {
            writeln!(out, "{line}").map_err(io_err(path))?;
        }
        Ok(CsvWriter { path: path.to_path_buf(), out })
    }

    pub fn write(&mut self, records: &[TrajectoryRecord]) -> Result<(), SimError> {
        for r in records {
            writeln!(
                self.out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t, r.body, r.x_cm[0], r.x_cm[1], r.theta, r.ell[0], r.ell[1], r.omega, r.force[0], r.force[1],
                r.torque, r.d_min
            )
            .map_err(io_err(&self.path))?;
        }
        self.out.flush().map_err(io_err(&self.path))
    }
}

/// Collection file listing snapshots with their times.
pub struct PvdWriter {
    path: PathBuf,
    pub entries: Vec<(f64, String)>,
}

impl PvdWriter {
    pub fn new(path: &Path, entries: Vec<(f64, String)>) -> Self {
        PvdWriter { path: path.to_path_buf(), entries }
    }

    pub fn add(&mut self, t: f64, file: String) -> Result<(), SimError> {
        self.entries.push((t, file));
        let mut s = String::from("<?xml version=\"1.0\"?>\n<VTKFile type=\"Collection\" version=\"0.1\">\n<Collection>\n");
        for (t, f) in &self.entries {
            let _ = writeln!(s, "<DataSet timestep=\"{t}\" part=\"0\" file=\"{f}\"/>");
        }
        s.push_str("</Collection>\n</VTKFile>\n");
        fs::write(&self.path, s).map_err(io_err(&self.path))
    }
}

fn data_array(s: &mut String, name: &str, components: usize, values: impl Iterator<Item = f64>) {
    let _ = writeln!(s, "<DataArray type=\"Float64\" Name=\"{name}\" NumberOfComponents=\"{components}\" format=\"ascii\">");
    for (i, v) in values.enumerate() {
        if i > 0 {
            s.push(if i % components == 0 { '\n' } else { ' ' });
        }
        let _ = write!(s, "{v}");
    }
    s.push_str("\n</DataArray>\n");
}

/// Writes an ASCII unstructured-grid file with quadratic triangles and the
/// point fields `u`, `p`, `phi` and, if given, one distance field per body
/// and the wall.
pub fn write_vtu(path: &Path, state: &SimState, fields: Option<&DistanceFields>) -> Result<(), SimError> {
    let mesh = &state.mesh;
    let dofmap = DofMap::new(mesh);
    let nv = mesh.n_vertices();
    let edges = &dofmap.topology().edges;
    let nodes = dofmap.node_coords();
    // Vertex fields extended to edge midpoints by averaging.
    let lift = |vals: &dyn Fn(usize) -> f64| -> Vec<f64> {
        (0..nv).map(vals).chain(edges.iter().map(|e| 0.5 * (vals(e[0]) + vals(e[1])))).collect()
    };

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str("<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n<UnstructuredGrid>\n");
    let _ = writeln!(s, "<Piece NumberOfPoints=\"{}\" NumberOfCells=\"{}\">", nodes.len(), mesh.n_cells());
    s.push_str("<PointData Vectors=\"u\" Scalars=\"p\">\n");
    data_array(
        &mut s,
        "u",
        3,
        (0..nodes.len()).flat_map(|n| [state.velocity[2 * n], state.velocity[2 * n + 1], 0.0]),
    );
    data_array(&mut s, "p", 1, lift(&|v| state.pressure[v]).into_iter());
    let phi_x = lift(&|v| state.ale.phi[v][0]);
    let phi_y = lift(&|v| state.ale.phi[v][1]);
    data_array(&mut s, "phi", 3, phi_x.iter().zip(&phi_y).flat_map(|(&x, &y)| [x, y, 0.0]));
    if let Some(f) = fields {
        for (b, field) in f.bodies.iter().enumerate() {
            data_array(&mut s, &format!("distance_body{b}"), 1, lift(&|v| field.values[v]).into_iter());
        }
        if let Some(w) = &f.wall {
            data_array(&mut s, "distance_wall", 1, lift(&|v| w.values[v]).into_iter());
        }
    }
    s.push_str("</PointData>\n<Points>\n");
    data_array(&mut s, "Points", 3, nodes.iter().flat_map(|x| [x[0], x[1], 0.0]));
    s.push_str("</Points>\n<Cells>\n");
    s.push_str("<DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n");
    for c in 0..mesh.n_cells() {
        let n = dofmap.cell_nodes(c);
        let _ = writeln!(s, "{} {} {} {} {} {}", n[0], n[1], n[2], n[3], n[4], n[5]);
    }
    s.push_str("</DataArray>\n<DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n");
    for c in 0..mesh.n_cells() {
        let _ = write!(s, "{}{}", if c > 0 { " " } else { "" }, 6 * (c + 1));
    }
    s.push_str("\n</DataArray>\n<DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n");
    for c in 0..mesh.n_cells() {
        let _ = write!(s, "{}22", if c > 0 { " " } else { "" });
    }
    s.push_str("\n</DataArray>\n</Cells>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n");
    fs::write(path, s).map_err(io_err(path))
}
