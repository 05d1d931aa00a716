//! CSV emission and history parsing.

use std::io::{Read, Write};

use coxshot_core::cox_process::CoxRealization;
use coxshot_core::random_measure::MeasurePath;
use coxshot_core::shot_noise::ShotNoisePath;
use serde::Deserialize;

/// `time,mass_increment` per breakpoint of the path.
pub fn write_measure_path<W: Write>(path: &MeasurePath, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "mass_increment"])?;
    for (time, inc) in path.increments() {
        w.write_record([time.to_string(), inc.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `arrival_time,multiplicity`.
pub fn write_arrivals<W: Write>(cox: &CoxRealization, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["arrival_time", "multiplicity"])?;
    for (time, k) in cox.multiplicities() {
        w.write_record([time.to_string(), k.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `time,M` on the path's grid.
pub fn write_shot_noise<W: Write>(path: &ShotNoisePath, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "M"])?;
    for (u, m) in path.grid().iter().zip(path.values()) {
        w.write_record([u.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per arrival: `T_j` followed by the absolute times of the jumps of
/// `L_j(· − T_j)` within the horizon. Rows have varying length.
pub fn write_arrival_streams<W: Write>(path: &ShotNoisePath, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["T_j", "payment_jump_times"])?;
    for (&t, l) in path.arrivals().iter().zip(path.payments()) {
        let mut row = vec![t.to_string()];
        row.extend(
            l.jump_times
                .iter()
                .map(|x| t + x)
                .filter(|&x| x <= path.horizon())
                .map(|x| x.to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct HistoryRow {
    #[serde(rename = "T_j")]
    t: f64,
}

/// Arrival times from a CSV with a `T_j` column, sorted.
pub fn read_history<R: Read>(input: R) -> csv::Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = r
        .deserialize::<HistoryRow>()
        .map(|row| row.map(|h| h.t))
        .collect::<csv::Result<Vec<_>>>()?;
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coxshot_core::random_measure::Atom;

    #[test]
    fn path_csv() {
        let path = MeasurePath::new(
            2.0,
            0.0,
            None,
            vec![Atom { time: 0.5, mass: 1.0 }, Atom { time: 1.5, mass: 2.0 }],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_measure_path(&path, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "time,mass_increment\n0.5,1\n1.5,2\n2,0\n");
    }

    #[test]
    fn history_csv() {
        let text = "T_j\n0.7\n0.2\n0.2\n";
        assert_eq!(read_history(text.as_bytes()).unwrap(), vec![0.2, 0.2, 0.7]);
        assert!(read_history("x\n1\n".as_bytes()).is_err());
    }

    #[test]
    fn arrivals_csv() {
        let path = MeasurePath::deterministic(1.0, 1.0).unwrap();
        let cox = CoxRealization::new(path, vec![0.25, 0.25, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_arrivals(&cox, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "arrival_time,multiplicity\n0.25,2\n0.5,1\n"
        );
    }
}
