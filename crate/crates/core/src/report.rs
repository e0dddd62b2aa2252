//! CSV export and plain-text summaries.
//!
//! Reals are written with Rust's shortest round-trip formatting, which is
//! locale-independent, so identical runs serialize to identical bytes.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::blocks::BlockSample;
use crate::epr::{EprOutcome, CHANNEL_LABELS};
use crate::fokker_planck::FpGrid;
use crate::reduction::{BornStatistics, TrajectoryOutcome, TrajectoryRecord};

fn outcome_code(outcome: TrajectoryOutcome) -> i64 {
    match outcome {
        TrajectoryOutcome::Absorbed(j) => j as i64,
        TrajectoryOutcome::Unabsorbed => -1,
    }
}

/// `t,p1,p2,herm_defect,trace_defect` per sample.
pub fn write_block_series_csv<W: Write>(w: &mut W, series: &[BlockSample]) -> io::Result<()> {
    writeln!(w, "t,p1,p2,herm_defect,trace_defect")?;
    for s in series {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.time,
            s.p1(),
            s.p2(),
            s.herm_defect(),
            s.trace_defect()
        )?;
    }
    Ok(())
}

/// `xi,overlap,amp_re,amp_im` per sweep point.
pub fn write_proximity_sweep_csv<W: Write>(
    w: &mut W,
    sweep: &[(f64, f64, num_complex::Complex64)],
) -> io::Result<()> {
    writeln!(w, "xi,overlap,amp_re,amp_im")?;
    for (xi, ov, amp) in sweep {
        writeln!(w, "{},{},{},{}", xi, ov, amp.re, amp.im)?;
    }
    Ok(())
}

/// `seed,outcome,absorption_time,steps` per trajectory; unabsorbed runs are
/// coded as outcome `-1`.
pub fn write_trajectories_csv<W: Write>(
    w: &mut W,
    records: &[TrajectoryRecord],
) -> io::Result<()> {
    writeln!(w, "seed,outcome,absorption_time,steps")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{}",
            r.seed,
            outcome_code(r.outcome),
            r.absorption_time,
            r.steps
        )?;
    }
    Ok(())
}

/// `p1_center,density` rows followed by `absorbed_0`, `absorbed_1`, and
/// `time` footer rows.
pub fn write_fp_snapshot_csv<W: Write>(w: &mut W, grid: &FpGrid) -> io::Result<()> {
    writeln!(w, "p1_center,density")?;
    for (x, d) in grid.cell_centers().iter().zip(grid.density()) {
        writeln!(w, "{},{}", x, d)?;
    }
    let [a0, a1] = grid.absorbed_mass();
    writeln!(w, "absorbed_0,{}", a0)?;
    writeln!(w, "absorbed_1,{}", a1)?;
    writeln!(w, "time,{}", grid.time())?;
    Ok(())
}

/// `run,outcome_channel,absorption_time` per completed joint measurement.
pub fn write_epr_runs_csv<W: Write>(w: &mut W, outcome: &EprOutcome) -> io::Result<()> {
    writeln!(w, "run,outcome_channel,absorption_time")?;
    for r in &outcome.records {
        writeln!(
            w,
            "{},{},{}",
            r.run,
            outcome_code(r.outcome),
            r.absorption_time
        )?;
    }
    Ok(())
}

/// Per-channel `channel, frequency, stderr, expected` table.
pub fn born_summary(stats: &BornStatistics) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "channel, frequency, stderr, expected");
    for j in 0..stats.frequencies.len() {
        let _ = writeln!(
            out,
            "{}, {}, {}, {}",
            j, stats.frequencies[j], stats.standard_errors[j], stats.expected[j]
        );
    }
    let _ = writeln!(out, "runs: {}", stats.num_runs);
    let _ = writeln!(out, "unabsorbed: {}", stats.unabsorbed);
    let _ = writeln!(out, "mean absorption time: {}", stats.mean_absorption_time);
    out
}

/// Per-channel table plus the 2x2 outcome contingency table.
pub fn epr_summary(outcome: &EprOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "channel, label, frequency, stderr, expected");
    for (j, label) in CHANNEL_LABELS.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}, {}, {}, {}, {}",
            j, label, outcome.frequencies[j], outcome.standard_errors[j], outcome.expected[j]
        );
    }
    let _ = writeln!(out, "unabsorbed: {}", outcome.unabsorbed);
    let _ = writeln!(out, "contingency (rows A' = H',V'; cols A\" = H\",V\"):");
    let _ = writeln!(
        out,
        "        H\"        V\"\n  H'  {:>8}  {:>8}\n  V'  {:>8}  {:>8}",
        outcome.contingency[0][0],
        outcome.contingency[0][1],
        outcome.contingency[1][0],
        outcome.contingency[1][1]
    );
    let _ = writeln!(out, "marginal f(H') = {}", outcome.marginal_h_prime());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelState, DiffusionSpec};
    use crate::reduction::born_statistics;

    #[test]
    fn trajectory_csv_shape() {
        let p0 = ChannelState::new(&[0.5, 0.5]).unwrap();
        let spec = DiffusionSpec::new(1.0, 1, 1e-3).unwrap();
        let stats = born_statistics(&p0, &spec, 100_000, 120, 3).unwrap();
        let mut buf = Vec::new();
        write_trajectories_csv(&mut buf, &stats.records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "seed,outcome,absorption_time,steps");
        assert_eq!(lines.len(), 121);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 4);
        }
    }

    #[test]
    fn fp_snapshot_has_footer() {
        let grid = FpGrid::delta_at(0.5, 128).unwrap();
        let mut buf = Vec::new();
        write_fp_snapshot_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p1_center,density");
        assert_eq!(lines.len(), 1 + 127 + 3);
        assert!(lines[lines.len() - 3].starts_with("absorbed_0,"));
        assert!(lines[lines.len() - 2].starts_with("absorbed_1,"));
        assert!(lines[lines.len() - 1].starts_with("time,"));
    }

    #[test]
    fn born_summary_lists_every_channel() {
        let p0 = ChannelState::new(&[0.25, 0.25, 0.5]).unwrap();
        let spec = DiffusionSpec::new(1.0, 1, 1e-3).unwrap();
        let stats = born_statistics(&p0, &spec, 50_000, 150, 5).unwrap();
        let text = born_summary(&stats);
        assert!(text.contains("channel, frequency, stderr, expected"));
        assert!(text.lines().count() >= 4 + 3);
        assert!(text.contains("runs: 150"));
    }
}
