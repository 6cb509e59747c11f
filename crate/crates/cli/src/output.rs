use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Writes `rows` as CSV preceded by a `# ...` parameter comment.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, comment: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut file = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
    writeln!(file, "# {comment}")?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

const PRELUDE: &str = "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n";

/// Surface plot of a 2D solution CSV (`x,y,value`).
pub fn surface_script(data: &str, title: &str, png: &str) -> String {
    format!(
        "{PRELUDE}set terminal pngcairo size 800,640\nset output '{png}'\nset title '{title}'\n\
         set dgrid3d 81,81\nset hidden3d\nset xlabel 'x'\nset ylabel 'y'\n\
         splot '{data}' using 1:2:3 with lines notitle\n"
    )
}

/// Midline profiles `x,pg_exact,galerkin` on one plot.
pub fn profiles_script(data: &str, png: &str) -> String {
    format!(
        "{PRELUDE}set terminal pngcairo size 900,500\nset output '{png}'\nset xlabel 'x'\nset ylabel 'u'\n\
         plot '{data}' using 1:2 with linespoints title 'pg-exact', \\\n     '' using 1:3 with linespoints title 'galerkin'\n"
    )
}

/// Heatmap of `alpha,sigma,value` on log axes.
pub fn heatmap_script(data: &str, value: &str, png: &str) -> String {
    format!(
        "{PRELUDE}set terminal pngcairo size 800,640\nset output '{png}'\nset logscale xy\nset xlabel 'alpha'\n\
         set ylabel 'sigma'\nset title '{value}'\nset view map\nset dgrid3d 40,40\n\
         splot '{data}' using 1:2:3 with pm3d notitle\n"
    )
}

/// Log-x line plot of columns `y` against column 1.
pub fn lines_script(data: &str, ylabel: &str, columns: &[usize], png: &str) -> String {
    let plots: Vec<String> = columns
        .iter()
        .map(|c| format!("'{data}' using 1:{c} with linespoints"))
        .collect();
    format!(
        "{PRELUDE}set terminal pngcairo size 800,500\nset output '{png}'\nset logscale x\nset xlabel 'alpha'\n\
         set ylabel '{ylabel}'\nplot {}\n",
        plots.join(", ")
    )
}
