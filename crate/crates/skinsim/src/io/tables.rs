//! CSV inputs and reports: joint trajectories, activity labels, SNR tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use skinsim_core::analysis::{table1, Activity, ActivityLabel, Cell, ConfigurationTable, Interval, SnrReport, TofMode, Covering};
use skinsim_core::kinematics::JointTrajectory;

use crate::error::{Error, Result};

fn csv_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::format(format!("{what}: {e}"))
}

/// Header `t,q1..qn`, one row per sample.
pub fn parse_trajectory(text: &str) -> Result<JointTrajectory> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| csv_err("trajectory", e))?.clone();
    if headers.get(0) != Some("t") {
        return Err(Error::format("trajectory: first column must be 't'"));
    }
    for (k, h) in headers.iter().enumerate().skip(1) {
        if h != format!("q{k}") {
            return Err(Error::format(format!("trajectory: column {} must be 'q{k}'", k + 1)));
        }
    }
    let dof = headers.len() - 1;
    let mut samples = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_err("trajectory", e))?;
        let vals: Vec<f64> = row.iter().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|e| csv_err("trajectory", e))?;
        samples.push((vals[0], vals[1..].to_vec()));
    }
    Ok(JointTrajectory::new(samples, dof)?)
}

pub fn trajectory_csv(traj: &JointTrajectory) -> String {
    let mut out = String::from("t");
    for k in 1..=traj.dof() {
        let _ = write!(out, ",q{k}");
    }
    out.push('\n');
    for (t, q) in traj.samples() {
        let _ = write!(out, "{t}");
        for v in q {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Labels keyed by configuration (`None`: applies to every log).
pub type LabelSet = BTreeMap<Option<Cell>, Vec<ActivityLabel>>;

#[derive(serde::Deserialize)]
struct LabelRow {
    #[serde(default)]
    config: Option<String>,
    site_id: u32,
    t_start: f64,
    t_end: f64,
    state: String,
}

/// Columns `site_id,t_start,t_end,state` with an optional leading `config`
/// column naming the configuration a row belongs to.
pub fn parse_labels(text: &str) -> Result<LabelSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut grouped: BTreeMap<(Option<Cell>, u32), Vec<Interval>> = BTreeMap::new();
    for row in rdr.deserialize::<LabelRow>() {
        let row = row.map_err(|e| csv_err("labels", e))?;
        let cell = match row.config.as_deref().filter(|s| !s.is_empty()) {
            None => None,
            Some(s) => Some(Cell::parse(s).ok_or_else(|| Error::format(format!("labels: unknown config '{s}'")))?),
        };
        let state = Activity::from_name(&row.state).ok_or_else(|| Error::format(format!("labels: unknown state '{}'", row.state)))?;
        grouped.entry((cell, row.site_id)).or_default().push(Interval { start: row.t_start, end: row.t_end, state });
    }
    let mut out = LabelSet::new();
    for ((cell, site), mut intervals) in grouped {
        intervals.sort_by(|a, b| a.start.total_cmp(&b.start));
        out.entry(cell).or_default().push(ActivityLabel::new(site, intervals).map_err(|e| Error::format(format!("labels: site {site}: {e}")))?);
    }
    Ok(out)
}

pub fn labels_csv(rows: &[(Option<Cell>, &ActivityLabel)]) -> String {
    let mut out = String::from("config,site_id,t_start,t_end,state\n");
    for (cell, label) in rows {
        let cfg = cell.map(|c| c.label()).unwrap_or_default();
        for i in label.intervals() {
            let _ = writeln!(out, "{cfg},{},{},{},{}", label.site_id, i.start, i.end, i.state.name());
        }
    }
    out
}

/// `config,ring,mu_n,sigma_n,mu,snr,contact` rows.
pub fn snr_csv(rows: &[(Cell, SnrReport)]) -> String {
    let mut out = String::from("config,ring,mu_n,sigma_n,mu,snr,contact\n");
    for (cell, r) in rows {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", cell.label(), r.site_id, r.mu_n, r.sigma_n, r.mu, r.snr, r.contact);
    }
    out
}

/// Two-row table in the published layout, with the published values and the
/// ordering checks beneath it.
pub fn table_summary(table: &ConfigurationTable, omitted: &[String]) -> String {
    let mut out = String::from("Average contact SNR (mean over rings ± std over rings)\n\n");
    let _ = writeln!(out, "{:<10}{:>20}{:>20}{:>20}", "", "No covering", "Covering (rest)", "Covering (squeeze)");
    for (tof, name) in [(TofMode::WithTof, "With ToF"), (TofMode::NoTof, "No ToF")] {
        let _ = write!(out, "{name:<10}");
        for cov in Covering::ALL {
            let cell = Cell::new(tof, cov);
            let text = match table.get(cell) {
                Some(c) => format!("{:.2} ± {:.2} ({})", c.snr, c.snr_spread, table1(cell)),
                None => String::from("-"),
            };
            let _ = write!(out, "{text:>20}");
        }
        out.push('\n');
    }
    let mark = |v: Option<bool>| match v {
        Some(true) => "yes",
        Some(false) => "NO",
        None => "n/a",
    };
    out.push_str("\npublished value in parentheses\n");
    for (k, cov) in Covering::ALL.into_iter().enumerate() {
        let _ = writeln!(out, "no-ToF > with-ToF ({}): {}", cov.name(), mark(table.checks.tof_degrades[k]));
    }
    for (k, tof) in TofMode::ALL.into_iter().enumerate() {
        let _ = writeln!(out, "squeeze > rest ({}): {}", tof.name(), mark(table.checks.squeeze_exceeds_rest[k]));
    }
    let _ = writeln!(out, "all cells at or above threshold: {}", mark(Some(table.checks.all_above_threshold)));
    if !table.cells.is_empty() {
        let _ = writeln!(out, "worst relative deviation from published: {:.4}", table.worst_relative_error());
    }
    if !omitted.is_empty() {
        out.push_str("\nomitted:\n");
        for o in omitted {
            let _ = writeln!(out, "  {o}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trip() {
        let tr = JointTrajectory::new(vec![(0.0, vec![0.0, 1.0]), (0.5, vec![0.25, -1.0])], 2).unwrap();
        assert_eq!(parse_trajectory(&trajectory_csv(&tr)).unwrap(), tr);
        assert!(parse_trajectory("time,q1\n0,0\n").is_err());
        assert!(parse_trajectory("t,q1\n1,0\n0,0\n").is_err());
    }

    #[test]
    fn labels_with_and_without_config() {
        let set = parse_labels("site_id,t_start,t_end,state\n0,0,1,inactive\n0,1,2,active_rest\n").unwrap();
        assert_eq!(set[&None][0].intervals().len(), 2);
        let set = parse_labels("config,site_id,t_start,t_end,state\nwith_tof:rest,1,0,1,inactive\n,2,0,1,active_squeeze\n").unwrap();
        assert_eq!(set.len(), 2);
        assert!(parse_labels("site_id,t_start,t_end,state\n0,0,1,sleeping\n").is_err());
        let rows: Vec<_> = set.iter().flat_map(|(c, ls)| ls.iter().map(move |l| (*c, l))).collect();
        assert_eq!(parse_labels(&labels_csv(&rows)).unwrap(), set);
    }
}
