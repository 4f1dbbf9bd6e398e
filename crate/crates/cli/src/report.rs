//! Plain-text rendering of evaluation and experiment results. Percentages
//! are shown with one decimal; fold summaries as "mean ±std".

use std::collections::BTreeMap;
use std::fmt::Write;

use framecrf::eval::{EvalReport, LengthBin, MeanStd, PRF};
use framecrf::experiments::{AblationRow, CompositionRow};

fn pct(x: f64) -> String {
    format!("{:5.1}", x * 100.0)
}

fn ms(m: &MeanStd) -> String {
    format!("{:5.1} ±{:.1}", m.mean * 100.0, m.std * 100.0)
}

fn prf_cells(p: &PRF) -> String {
    format!(
        "{:>6} {:>6} {:>6}  {} {} {}",
        p.tp,
        p.fp,
        p.fn_,
        pct(p.precision),
        pct(p.recall),
        pct(p.fmeasure)
    )
}

const PRF_HEADER: &str = "    tp     fp     fn   prec   rec     f";

pub fn render_eval(
    cascade: &str,
    report: &EvalReport,
    by_target: &BTreeMap<String, PRF>,
    by_length: &[LengthBin],
    by_question: &BTreeMap<String, PRF>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cascade: {cascade}");
    let _ = writeln!(out);
    let _ = writeln!(out, "level  {PRF_HEADER}");
    let l = &report.levels;
    for (name, prf) in [("DC", &l.dc), ("SC", &l.sc), ("DR", &l.dr), ("SR", &l.sr)] {
        let _ = writeln!(out, "{name:<6} {}", prf_cells(prf));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "role selection by target type");
    let _ = writeln!(out, "{:<14} {PRF_HEADER}", "target");
    for (kind, prf) in by_target {
        let _ = writeln!(out, "{kind:<14} {}", prf_cells(prf));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "role selection by sentence length");
    let _ = writeln!(out, "{:<4} {:>8} {:>6} {PRF_HEADER}", "bin", "mean_len", "sents");
    for (i, bin) in by_length.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i:<4} {:>8.1} {:>6} {}",
            bin.mean_length,
            bin.n_sentences,
            prf_cells(&bin.prf)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "role selection by question");
    let _ = writeln!(out, "{:<14} {PRF_HEADER}", "question");
    for (q, prf) in by_question {
        let _ = writeln!(out, "{q:<14} {}", prf_cells(prf));
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "warnings: {}", report.warnings.len());
    }
    out
}

pub fn render_ablation(rows: &[AblationRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:<16} {:<16} {:<16}", "configuration", "sr_prec", "sr_rec", "sr_f");
    for row in rows {
        let _ = writeln!(
            out,
            "{:<24} {:<16} {:<16} {:<16}",
            row.label,
            ms(&row.sr.precision),
            ms(&row.sr.recall),
            ms(&row.sr.fmeasure)
        );
    }
    out
}

pub fn render_composition(rows: &[CompositionRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>8} {:<16} {:<16}",
        "training mix", "targets", "sr_f", "per-repeat sr_f"
    );
    for row in rows {
        let targets: usize = row.repeats.iter().map(|r| r.train_targets).sum::<usize>() / row.repeats.len();
        let per: Vec<String> =
            row.repeats.iter().map(|r| pct(r.levels.sr.fmeasure).trim().to_string()).collect();
        let _ = writeln!(
            out,
            "{:<28} {:>8} {:<16} {}",
            row.label,
            targets,
            ms(&row.sr.fmeasure),
            per.join(" ")
        );
    }
    out
}
