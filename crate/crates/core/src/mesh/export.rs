//! Snapshot writers: legacy VTK polydata and a standalone SVG picture.

use std::collections::HashMap;
use std::io::{self, Write};

use super::Mesh;
use crate::geometry::Point2;

/// Write active cells as VTK legacy ASCII `POLYDATA`. Each field holds one
/// value per active cell, in ascending cell id order.
pub fn write_vtk<W: Write>(mut w: W, mesh: &Mesh, fields: &[(&str, &[f64])]) -> io::Result<()> {
    let cells: Vec<usize> = mesh.active_cells().collect();
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut used = Vec::new();
    for &c in &cells {
        for &v in &mesh.cells[c].vertices {
            index.entry(v).or_insert_with(|| {
                used.push(v);
                used.len() - 1
            });
        }
    }
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "polyvem mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {} double", used.len())?;
    for &v in &used {
        let p = mesh.vertices[v].pos;
        writeln!(w, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    let size: usize = cells.iter().map(|&c| mesh.cells[c].vertices.len() + 1).sum();
    writeln!(w, "POLYGONS {} {}", cells.len(), size)?;
    for &c in &cells {
        let vs = &mesh.cells[c].vertices;
        write!(w, "{}", vs.len())?;
        for v in vs {
            write!(w, " {}", index[v])?;
        }
        writeln!(w)?;
    }
    if !fields.is_empty() {
        writeln!(w, "CELL_DATA {}", cells.len())?;
        for (name, values) in fields {
            if values.len() != cells.len() {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidInput,
                    format!("field {name} has {} values for {} cells", values.len(), cells.len()),
                ));
            }
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in values.iter() {
                writeln!(w, "{v:.16e}")?;
            }
        }
    }
    Ok(())
}

const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn colormap(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let c = |u: f64, v: f64| (u + f * (v - u)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

/// Planar drawing coordinates: fracture-local for a single fracture,
/// an axonometric view of the 3D positions otherwise.
fn draw_point(mesh: &Mesh, v: usize, fracture: usize) -> Point2 {
    if mesh.n_fractures() <= 1 {
        return mesh.local(v, fracture);
    }
    let p = mesh.vertices[v].pos;
    let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
    Point2::new((p.x - p.y) * c, p.z + (p.x + p.y) * s)
}

/// Render active cells filled by `log10(values)` (one value per active cell,
/// ascending id order) with a colour legend. Without values cells are drawn
/// unfilled.
pub fn write_svg<W: Write>(
    mut w: W,
    mesh: &Mesh,
    values: Option<&[f64]>,
    label: &str,
) -> io::Result<()> {
    const SIZE: f64 = 800.0;
    const MARGIN: f64 = 20.0;
    const LEGEND: f64 = 120.0;
    let cells: Vec<usize> = mesh.active_cells().collect();
    let shapes: Vec<Vec<Point2>> = cells
        .iter()
        .map(|&c| {
            let f = mesh.cells[c].fracture;
            mesh.cells[c].vertices.iter().map(|&v| draw_point(mesh, v, f)).collect()
        })
        .collect();
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in shapes.iter().flatten() {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let to_px = |p: Point2| (MARGIN + (p.x - lo.x) * scale, SIZE - MARGIN - (p.y - lo.y) * scale);

    let logs: Option<Vec<f64>> = values.map(|v| v.iter().map(|x| x.max(f64::MIN_POSITIVE).log10()).collect());
    let (vmin, vmax) = logs
        .as_ref()
        .map(|l| {
            l.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
        })
        .unwrap_or((0.0, 1.0));
    let range = if vmax > vmin { vmax - vmin } else { 1.0 };

    let width = SIZE + if logs.is_some() { LEGEND } else { 0.0 };
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SIZE}" viewBox="0 0 {width} {SIZE}">"#
    )?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    for (k, shape) in shapes.iter().enumerate() {
        let pts: Vec<String> = shape
            .iter()
            .map(|&p| {
                let (x, y) = to_px(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let fill = match &logs {
            Some(l) => colormap((l[k] - vmin) / range),
            None => "none".to_string(),
        };
        writeln!(
            w,
            r#"<polygon points="{}" fill="{fill}" stroke="black" stroke-width="0.4"/>"#,
            pts.join(" ")
        )?;
    }
    if logs.is_some() {
        let x0 = SIZE + 20.0;
        let (top, bottom) = (MARGIN + 20.0, SIZE - MARGIN - 20.0);
        writeln!(w, r#"<defs><linearGradient id="cmap" x1="0" y1="1" x2="0" y2="0">"#)?;
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            writeln!(w, r#"<stop offset="{t}" stop-color="{}"/>"#, colormap(t))?;
        }
        writeln!(w, "</linearGradient></defs>")?;
        writeln!(
            w,
            r#"<rect x="{x0}" y="{top}" width="20" height="{}" fill="url(#cmap)" stroke="black" stroke-width="0.5"/>"#,
            bottom - top
        )?;
        writeln!(w, r#"<text x="{x0}" y="{}" font-size="12">{}</text>"#, top - 6.0, escape(label))?;
        writeln!(w, r#"<text x="{}" y="{top}" font-size="11">{vmax:.2}</text>"#, x0 + 24.0)?;
        writeln!(w, r#"<text x="{}" y="{bottom}" font-size="11">{vmin:.2}</text>"#, x0 + 24.0)?;
    }
    writeln!(w, "</svg>")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
