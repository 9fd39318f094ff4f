//! CSV output. Every file starts with a header row.

use std::path::Path;

use crate::diagnostics::TrajectorySeries;
use crate::error::{CboError, Result};

use super::experiment::RunRecord;
use super::sweep::{SweepCell, SweepTable};

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is utf-8")
}

fn row<I, T>(w: &mut csv::Writer<Vec<u8>>, fields: I)
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(fields).expect("in-memory writer");
}

/// Columns `[particles,]delta,kappa,rate,runs,divergences`; the particles
/// column appears only when the table has a particle axis.
pub fn sweep_csv(table: &SweepTable) -> String {
    let with_n = table.has_particles();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["delta", "kappa", "rate", "runs", "divergences"];
    if with_n {
        header.insert(0, "particles");
    }
    row(&mut w, header);
    for c in &table.cells {
        let mut fields = vec![
            c.delta.to_string(),
            c.kappa.to_string(),
            c.rate().to_string(),
            c.runs.to_string(),
            c.divergences.to_string(),
        ];
        if with_n {
            fields.insert(0, c.particles.map(|n| n.to_string()).unwrap_or_default());
        }
        row(&mut w, fields);
    }
    finish(w)
}

/// Inverse of [`sweep_csv`].
pub fn parse_sweep_csv(text: &str) -> Result<SweepTable> {
    let bad = |m: String| CboError::Input(format!("sweep csv: {m}"));
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| bad(format!("missing column '{name}'")));
    let (i_delta, i_kappa, i_rate, i_runs, i_div) =
        (need("delta")?, need("kappa")?, need("rate")?, need("runs")?, need("divergences")?);
    let i_n = col("particles");
    let mut cells = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let float = |i: usize| field(i).parse::<f64>().map_err(|e| bad(format!("row {}: {e}", line + 1)));
        let int = |i: usize| field(i).parse::<usize>().map_err(|e| bad(format!("row {}: {e}", line + 1)));
        let runs = int(i_runs)?;
        let rate = float(i_rate)?;
        cells.push(SweepCell {
            particles: match i_n {
                Some(i) if !field(i).is_empty() => Some(int(i)?),
                _ => None,
            },
            delta: float(i_delta)?,
            kappa: float(i_kappa)?,
            runs,
            successes: (rate * runs as f64).round() as usize,
            divergences: int(i_div)?,
        });
    }
    Ok(SweepTable { cells })
}

/// `time,value` for scalar series; `time,value,axis` (one row per axis)
/// otherwise. An empty series gives the scalar header alone.
pub fn series_csv(series: &TrajectorySeries) -> String {
    let vector = series.values.iter().any(|v| v.len() != 1);
    let mut w = csv::Writer::from_writer(Vec::new());
    if vector {
        row(&mut w, ["time", "value", "axis"]);
    } else {
        row(&mut w, ["time", "value"]);
    }
    for (t, v) in series.times.iter().zip(&series.values) {
        if vector {
            for (j, x) in v.iter().enumerate() {
                row(&mut w, [t.to_string(), x.to_string(), j.to_string()]);
            }
        } else {
            row(&mut w, [t.to_string(), v[0].to_string()]);
        }
    }
    finish(w)
}

/// One row per run; consensus coordinates are `m0, m1, ...`, empty for
/// diverged runs.
pub fn runs_csv(records: &[RunRecord], dim: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["run", "seed", "config_hash", "success", "diverged_at", "final_distance"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..dim).map(|j| format!("m{j}")));
    header.push("wall_time".into());
    row(&mut w, &header);
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in records {
        let mut fields = vec![
            r.run.to_string(),
            r.seed.to_string(),
            r.config_hash.clone(),
            r.success.to_string(),
            opt(r.diverged_at.map(|s| s.to_string())),
            opt(r.final_distance.map(|d| d.to_string())),
        ];
        match &r.final_consensus {
            Some(m) => fields.extend(m.iter().map(|x| x.to_string())),
            None => fields.extend((0..dim).map(|_| String::new())),
        }
        fields.push(r.wall_time.to_string());
        row(&mut w, &fields);
    }
    finish(w)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CboError::io(path, e))
}

pub fn emit_sweep_csv(table: &SweepTable, path: &Path) -> Result<()> {
    write_file(path, &sweep_csv(table))
}

pub fn emit_series_csv(series: &TrajectorySeries, path: &Path) -> Result<()> {
    write_file(path, &series_csv(series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cell(delta: f64, kappa: f64, runs: usize, successes: usize) -> SweepCell {
        SweepCell {
            particles: None,
            delta,
            kappa,
            runs,
            successes,
            divergences: runs - successes,
        }
    }

    #[test]
    fn two_by_two_table_has_four_rows() {
        let t = SweepTable {
            cells: vec![cell(0.0, 0.1, 30, 0), cell(0.0, 0.9, 30, 3), cell(0.5, 0.1, 30, 1), cell(0.5, 0.9, 30, 30)],
        };
        let text = sweep_csv(&t);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "delta,kappa,rate,runs,divergences");
        assert_eq!(lines[2], "0,0.9,0.1,30,27");
        assert_eq!(parse_sweep_csv(&text).unwrap(), t);
    }

    #[test]
    fn empty_series_is_header_only() {
        assert_eq!(series_csv(&TrajectorySeries::new("x")), "time,value\n");
    }

    #[test]
    fn vector_series_has_axis_column() {
        let mut s = TrajectorySeries::new("consensus");
        s.push(0.0, vec![1.0, 2.0]);
        s.push(0.5, vec![3.0, 4.0]);
        assert_eq!(series_csv(&s), "time,value,axis\n0,1,0\n0,2,1\n0.5,3,0\n0.5,4,1\n");
    }

    #[test]
    fn write_errors_carry_the_path() {
        let err = emit_series_csv(&TrajectorySeries::new("x"), Path::new("/no/such/dir/out.csv")).unwrap_err();
        assert!(matches!(err, CboError::Io { .. }));
        assert!(err.to_string().contains("/no/such/dir/out.csv"));
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = SweepTable {
            cells: vec![cell(1.0, 0.5, 30, 18)],
        };
        emit_sweep_csv(&t, &path).unwrap();
        assert_eq!(parse_sweep_csv(&std::fs::read_to_string(&path).unwrap()).unwrap(), t);
    }

    proptest! {
        #[test]
        fn sweep_csv_round_trips(
            raw in prop::collection::vec((0.0f64..10.0, 0.0f64..=1.0, 1usize..200, 0.0f64..=1.0, any::<bool>()), 1..12),
            with_n in any::<bool>(),
        ) {
            let cells: Vec<SweepCell> = raw
                .into_iter()
                .enumerate()
                .map(|(i, (delta, kappa, runs, frac, div))| {
                    let successes = (frac * runs as f64) as usize;
                    SweepCell {
                        particles: with_n.then_some(10 * (i + 1)),
                        delta,
                        kappa,
                        runs,
                        successes,
                        divergences: if div { runs - successes } else { 0 },
                    }
                })
                .collect();
            let t = SweepTable { cells };
            prop_assert_eq!(parse_sweep_csv(&sweep_csv(&t)).unwrap(), t);
        }
    }
}
