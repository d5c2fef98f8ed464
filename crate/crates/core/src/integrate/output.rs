use std::io::Write;

use super::{IntegrateError, Trajectory};

pub const CSV_HEADER: [&str; 8] = ["t", "re_q", "im_q", "re_p", "im_p", "re_H", "im_H", "drift"];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per sample, 17 significant digits, CRLF line endings.
pub fn write_csv<W: Write>(traj: &Trajectory, out: W) -> Result<(), IntegrateError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    let err = |e: csv::Error| IntegrateError::Csv(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for k in 0..traj.len() {
        let (q, p, h) = (traj.q[k], traj.p[k], traj.h_values[k]);
        let row = [traj.times[k], q.re, q.im, p.re, p.im, h.re, h.im, traj.drift_series[k]];
        w.write_record(row.map(num)).map_err(err)?;
    }
    w.flush().map_err(|e| IntegrateError::Csv(e.to_string()))
}
