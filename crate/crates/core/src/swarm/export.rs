use std::io::Write;
use std::path::Path;

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::swarm::archive::ParetoArchive;

/// Writes `o1,o2,w_1..w_d'` rows with shortest round-trip float formatting.
pub fn write_archive_csv<T: Scalar, W: Write>(out: W, archive: &ParetoArchive<T>) -> Result<()> {
    let dim = archive.entries.first().map_or(0, |e| e.w.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["o1".to_string(), "o2".to_string()];
    header.extend((1..=dim).map(|i| format!("w_{i}")));
    w.write_record(&header)?;
    for e in &archive.entries {
        let mut row = vec![e.o1.to_string(), e.o2.to_string()];
        row.extend(e.w.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<archive>", e))
}

/// Scatter plot of one or more fronts in the (o1, o2) plane.
pub fn write_pareto_svg(path: &Path, fronts: &[(&str, Vec<(f64, f64)>)]) -> Result<()> {
    let pts: Vec<(f64, f64)> = fronts.iter().flat_map(|(_, f)| f.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |a: f64, b: f64| {
        let p = ((b - a) * 0.05).max(1e-6);
        (a - p, b + p)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let plot_err = |e: String| Error::io(path, std::io::Error::other(e));
    {
        let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
        let mut chart = ChartBuilder::on(&root)
            .caption("Pareto front", ("sans-serif", 20))
            .margin(10)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(|e| plot_err(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc("o1 (symmetry)")
            .y_desc("o2 (SW/SB)")
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
        let palette = [RED, BLUE, GREEN, MAGENTA];
        for (i, (name, front)) in fronts.iter().enumerate() {
            let color = palette[i % palette.len()];
            chart
                .draw_series(front.iter().map(|&(x, y)| Circle::new((x, y), 3, color.filled())))
                .map_err(|e| plot_err(e.to_string()))?
                .label(*name)
                .legend(move |(x, y)| Circle::new((x, y), 3, color.filled()));
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.8))
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
        root.present().map_err(|e| plot_err(e.to_string()))?;
    }
    Ok(())
}
