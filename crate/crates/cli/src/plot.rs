//! gnuplot scripts for time-series and dephasing CSVs: populations on the
//! upper (y2) scale, energies below, time averages as dashed lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

struct Table {
    path: PathBuf,
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn mean(&self, k: usize) -> f64 {
        self.columns[k].iter().sum::<f64>() / self.columns[k].len() as f64
    }
}

fn read(path: &Path) -> Result<Table, CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let file = fs::File::open(path).map_err(CliError::io(path))?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    if header.first().map(String::as_str) != Some("t_au") {
        return Err(bad("not a time series (first column must be t_au)".into()));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        for (k, field) in rec.iter().enumerate() {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: `{field}` is not a number", line + 2)))?;
            columns[k].push(x);
        }
    }
    if columns[0].is_empty() {
        return Err(bad("empty time series".into()));
    }
    Ok(Table {
        path: path.to_path_buf(),
        header,
        columns,
    })
}

fn quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', "''"))
}

fn title(s: &str) -> String {
    s.replace('_', "\\_")
}

fn timeseries_panel(t: &Table, out: &mut String) {
    let file = quote(&t.path);
    let mut series = Vec::new();
    let mut averages = Vec::new();
    for (k, name) in t.header.iter().enumerate().skip(1) {
        if name == "E_total" {
            continue;
        }
        let axes = if name.starts_with("N_") { "x1y2" } else { "x1y1" };
        series.push(format!("{file} using 1:{} axes {axes} with lines lw 1.5 title '{}'", k + 1, title(name)));
        averages.push(format!("{:.10e} axes {axes} with lines dt 2 lc rgb 'gray40' notitle", t.mean(k)));
    }
    out.push_str("set ylabel 'site energy (hartree)'\nset y2label 'population'\nset ytics nomirror\nset y2tics\n");
    let _ = writeln!(out, "plot {}", series.into_iter().chain(averages).collect::<Vec<_>>().join(", \\\n     "));
}

fn decoherence_panel(t: &Table, region: &str, out: &mut String) {
    let file = quote(&t.path);
    let c = |suffix: &str| t.col(&format!("E_{region}_{suffix}")).map(|k| k + 1);
    let mut series = Vec::new();
    for (suffix, style) in [
        ("avg_analytic", "lw 1.5"),
        ("avg_mc", "lw 1 dt 3"),
        ("env_upper", "lc rgb 'black' dt 2"),
        ("env_lower", "lc rgb 'black' dt 2"),
    ] {
        if let Some(k) = c(suffix) {
            series.push(format!("{file} using 1:{k} with lines {style} title '{}'", title(&format!("E_{region} {suffix}"))));
        }
    }
    out.push_str("set ylabel 'ensemble-averaged site energy (hartree)'\nunset y2label\nunset y2tics\nset ytics mirror\n");
    let _ = writeln!(out, "plot {}", series.join(", \\\n     "));
}

/// Writes the script and returns its path. One panel per time-series file
/// (2×2 layout for up to four), one per region for dephasing outputs.
pub fn emit(csvs: &[PathBuf], output: Option<&Path>) -> Result<PathBuf, CliError> {
    let tables = csvs.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
    let mut panels: Vec<(String, Box<dyn Fn(&mut String) + '_>)> = Vec::new();
    for t in &tables {
        let name = t.path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let dir = t.path.parent().and_then(|p| p.file_name()).map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let label = if dir.is_empty() { name } else { format!("{dir}/{name}") };
        if t.col("cos_avg_analytic").is_some() {
            let regions: Vec<String> = t
                .header
                .iter()
                .filter_map(|h| h.strip_prefix("E_").and_then(|r| r.strip_suffix("_avg_analytic")).map(String::from))
                .collect();
            for r in regions {
                panels.push((format!("{label} (region {r})"), Box::new(move |o: &mut String| decoherence_panel(t, &r, o))));
            }
        } else if t.header.iter().any(|h| h.starts_with("E_")) {
            panels.push((label, Box::new(move |o: &mut String| timeseries_panel(t, o))));
        } else {
            return Err(CliError::Config(format!("{}: no energy columns to plot", t.path.display())));
        }
    }
    let n = panels.len();
    let (rows, cols) = match n {
        1 => (1, 1),
        2 => (1, 2),
        _ => (n.div_ceil(2), 2),
    };
    let script = output.map_or_else(
        || csvs[0].parent().unwrap_or(Path::new(".")).join("plot.gp"),
        Path::to_path_buf,
    );
    let png = script.with_extension("png");
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot {}", quote(&script));
    let _ = writeln!(s, "set terminal pngcairo size {},{} enhanced", 640 * cols, 480 * rows);
    let _ = writeln!(s, "set output {}", quote(&png));
    s.push_str("set datafile separator ','\nset key outside right top\nset xlabel 't (a.u.)'\nset grid\n");
    let _ = writeln!(s, "set multiplot layout {rows},{cols}");
    for (name, draw) in &panels {
        let _ = writeln!(s, "set title '{}'", title(name));
        draw(&mut s);
    }
    s.push_str("unset multiplot\n");
    fs::write(&script, s).map_err(CliError::io(&script))?;
    Ok(script)
}
