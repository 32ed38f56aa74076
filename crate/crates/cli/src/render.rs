//! Plain-text output.

use std::fmt::Write;

use webclass::classify::{ClassLabel, ClassificationReport, Status};
use webclass::corpus::{table_row, TensorPath, COLUMNS, REGRESSION_TOL};
use webclass::engine::FrameInvariants;

use crate::CorpusRow;

fn labels(ls: &[ClassLabel]) -> String {
    if ls.is_empty() {
        return "-".into();
    }
    ls.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(" ")
}

pub fn report(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let c = &r.config;
    let _ = writeln!(s, "web: {}", r.web);
    let _ = writeln!(
        s,
        "config: samples={} seed={} tol_zero={:e} tol_nonzero={:e} box={}",
        c.samples, c.seed, c.tol_zero, c.tol_nonzero, c.box_halfwidth
    );
    let _ = writeln!(s, "isoclinicity: {}", r.isoclinicity);
    let _ = writeln!(s, "classes: {}", labels(&r.classes));
    let _ = writeln!(s, "implied: {}", labels(&r.implied));
    if !r.undetermined.is_empty() {
        let _ = writeln!(s, "undetermined: {}", labels(&r.undetermined));
    }
    let _ = writeln!(s, "row: {}", table_row(&r.web, &r.classes));
    for (l, ids) in &r.support {
        let _ = writeln!(s, "  {l}: {}", ids.join(", "));
    }
    let _ = writeln!(
        s,
        "fingerprint (vanishing b): {}",
        if r.fingerprint.is_empty() {
            "-".into()
        } else {
            r.fingerprint.join(" ")
        }
    );
    let _ = writeln!(s, "verdicts:");
    for (id, v) in &r.verdicts {
        let _ = write!(s, "  {id:<18} {:<12} {:.3e}", v.status.to_string(), v.max_residual);
        if let (Some(w), true) = (v.witness, v.status == Status::Fails) {
            let _ = write!(s, "  at {w}");
        }
        s.push('\n');
    }
    for a in &r.advisories {
        let _ = writeln!(s, "advisory: {a}");
    }
    s
}

pub fn corpus(rows: &[CorpusRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Example | {}", COLUMNS.map(String::from).join(" | "));
    let (mut mismatches, mut tensor_failures, mut unverified, mut checked) = (0, 0, 0, 0);
    for r in rows {
        if let Some(e) = &r.error {
            let _ = writeln!(s, "{}: error: {e}", r.id);
            continue;
        }
        let _ = write!(s, "{}", r.row);
        if !r.classes_match {
            mismatches += 1;
            let _ = write!(s, "    [expected {}]", r.expected_row);
        }
        s.push('\n');
        for t in &r.tensors {
            if !t.verified {
                unverified += 1;
                continue;
            }
            checked += 1;
            if t.max_deviation > REGRESSION_TOL {
                tensor_failures += 1;
                let _ = writeln!(
                    s,
                    "    {} deviates by {:.3e} at {}",
                    t.path, t.max_deviation, t.worst_point
                );
            }
        }
        if let Some(rep) = &r.report {
            let ids: Vec<&str> = rep
                .verdicts
                .iter()
                .filter(|(_, v)| v.status == Status::Undetermined)
                .map(|(id, _)| id.as_str())
                .collect();
            if !ids.is_empty() {
                let _ = writeln!(s, "    undetermined: {}", ids.join(" "));
            }
        }
    }
    let _ = writeln!(
        s,
        "{} examples, {mismatches} class mismatches, {tensor_failures}/{checked} tensor values outside {REGRESSION_TOL:e} ({unverified} unverified values not compared)",
        rows.len()
    );
    s
}

fn idx(ns: &[usize]) -> String {
    ns.iter().map(|n| (n + 1).to_string()).collect()
}

pub fn invariants(name: &str, inv: &FrameInvariants) -> String {
    let mut s = String::new();
    let pt = inv.point;
    let _ = writeln!(s, "web: {name}");
    let _ = writeln!(s, "point: x1={} x2={} y1={} y2={}", pt.x1, pt.x2, pt.y1, pt.y2);
    let _ = writeln!(s, "det f_bar = {}", inv.jac.det_bar);
    let _ = writeln!(s, "det f_tilde = {}", inv.jac.det_tilde);
    for p in TensorPath::all() {
        let _ = writeln!(s, "{p} = {}", p.value(inv));
    }
    let cov = [
        ("p1", &inv.cov_pq.p1),
        ("p2", &inv.cov_pq.p2),
        ("q1", &inv.cov_pq.q1),
        ("q2", &inv.cov_pq.q2),
    ];
    for (label, t) in cov {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let _ = writeln!(s, "{label}_{} = {}", idx(&[i, j, k]), t[i][j][k]);
                }
            }
        }
    }
    s
}
