//! Writing a results bundle to disk.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use tropfact_core::io::write_trajectory_jsonl;
use tropfact_core::metrics::Reach;

use crate::experiment::{RankReport, Results};

/// File-system safe version of a dataset or method name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn reach(r: Reach) -> String {
    match r {
        Reach::At(t) => t.to_string(),
        Reach::Never => "never".into(),
    }
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

/// Median DC, RMSE-P and RMSE-A of the final factors: one row per metric
/// and method, one column per dataset.
pub fn metrics_table(res: &Results) -> String {
    let mut s = String::from("metric,method");
    for d in &res.datasets {
        write!(s, ",{}", d.name).unwrap();
    }
    s.push('\n');
    type Pick = fn(&crate::experiment::MethodSummary) -> Option<f64>;
    let rows: [(&str, Pick); 3] = [
        ("DC", |m| m.median_dc),
        ("RMSE-P", |m| m.median_rmse_p),
        ("RMSE-A", |m| m.median_rmse_a),
    ];
    for (metric, pick) in rows {
        for m in &res.methods {
            write!(s, "{metric},{m}").unwrap();
            for d in &res.datasets {
                write!(s, ",{}", opt(res.summary_for(&d.name, m).and_then(pick))).unwrap();
            }
            s.push('\n');
        }
    }
    s
}

pub fn summary_table(res: &Results) -> String {
    let mut s = String::from(
        "dataset,method,median_final_error,ci_low,ci_high,final_ne,time_to_reach,median_dc,median_rmse_p,median_rmse_a\n",
    );
    for m in &res.summary {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            m.dataset,
            m.method,
            m.median_final_error,
            m.final_error_ci.0,
            m.final_error_ci.1,
            m.final_ne,
            reach(m.time_to_reach),
            opt(m.median_dc),
            opt(m.median_rmse_p),
            opt(m.median_rmse_a)
        )
        .unwrap();
    }
    s
}

fn ne_table(res: &Results, d: usize) -> String {
    let ne = &res.ne[d];
    let mut s = String::from("t");
    for c in &ne.curves {
        write!(s, ",{0},{0}_q1,{0}_q3", c.method).unwrap();
    }
    s.push('\n');
    for (t, time) in res.grid.iter().enumerate() {
        write!(s, "{time}").unwrap();
        for c in &ne.curves {
            write!(s, ",{},{},{}", c.median[t], c.q1[t], c.q3[t]).unwrap();
        }
        s.push('\n');
    }
    s
}

fn rank_time_table(res: &Results) -> Option<String> {
    let rot = res.rank_over_time.as_ref()?;
    let mut s = String::from("t");
    for m in &rot.methods {
        write!(s, ",{0},{0}_low,{0}_high", m).unwrap();
    }
    s.push('\n');
    for (t, time) in rot.grid.iter().enumerate() {
        write!(s, "{time}").unwrap();
        for m in 0..rot.methods.len() {
            write!(s, ",{},{},{}", rot.mean[m][t], rot.low[m][t], rot.high[m][t]).unwrap();
        }
        s.push('\n');
    }
    Some(s)
}

/// Plain-text rank report.
pub fn rank_text(reports: &[RankReport]) -> String {
    let mut s = String::new();
    for r in reports {
        write!(s, "{}: average rank over {} datasets", r.criterion, r.datasets.len()).unwrap();
        match r.cd {
            Some(cd) => writeln!(s, ", CD = {cd:.4} (alpha 0.05)").unwrap(),
            None => s.push('\n'),
        }
        let width = r.methods.iter().map(String::len).max().unwrap_or(0);
        let mut order: Vec<usize> = (0..r.methods.len()).collect();
        order.sort_by(|&a, &b| r.average[a].total_cmp(&r.average[b]));
        for i in order {
            writeln!(s, "  {:<width$}  {:.3}", r.methods[i], r.average[i]).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_rank_report(res: &Results, out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out)?;
    write(
        &out.join("ranks.json"),
        &(serde_json::to_string_pretty(&res.rankings)? + "\n"),
    )?;
    write(&out.join("ranks.txt"), &rank_text(&res.rankings))
}

/// Writes `results.json`, the CSV tables, rank reports and per-run
/// trajectories under `out`.
pub fn write_bundle(res: &Results, out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    write(&out.join("results.json"), &(serde_json::to_string_pretty(res)? + "\n"))?;
    write(&out.join("metrics.csv"), &metrics_table(res))?;
    write(&out.join("summary.csv"), &summary_table(res))?;
    if let Some(t) = rank_time_table(res) {
        write(&out.join("rank_over_time.csv"), &t)?;
    }
    write_rank_report(res, out)?;
    let ne_dir = out.join("ne");
    fs::create_dir_all(&ne_dir)?;
    for (d, ne) in res.ne.iter().enumerate() {
        write(&ne_dir.join(format!("{}.csv", slug(&ne.dataset))), &ne_table(res, d))?;
    }
    for run in &res.runs {
        if let Some(traj) = &run.trajectory {
            let dir = out
                .join("trajectories")
                .join(slug(&run.dataset))
                .join(slug(&run.method));
            fs::create_dir_all(&dir)?;
            write_trajectory_jsonl(&dir.join(format!("run{}.jsonl", run.repeat)), traj)?;
        }
    }
    Ok(())
}
