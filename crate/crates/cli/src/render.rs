use std::fmt::Write;

use xrepair_core::shapley::{rank, Attribution, Method, ShapleyReport};

pub fn report(r: &ShapleyReport) -> String {
    let mut out = String::new();
    let t = &r.task;
    let _ = writeln!(
        out,
        "target  {}: {} -> {}",
        t.target, t.dirty_value, t.expected
    );
    let method = match r.method {
        Method::ExactEnumeration => "exact enumeration".to_string(),
        Method::PermutationSampling => format!(
            "permutation sampling, m={}, seed={}, imputation={}",
            r.samples.unwrap_or(0),
            r.seed.unwrap_or(0),
            serde_json::to_value(r.imputation)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
        ),
    };
    let _ = writeln!(out, "method  {method} ({} repair calls)", r.evaluations);
    let _ = writeln!(out);

    let ranking = rank(r);
    let sampled = r.values.iter().any(|v| v.stderr.is_some());
    let width = ranking
        .0
        .iter()
        .map(|(p, _)| p.to_string().len())
        .max()
        .unwrap_or(0)
        .max(6);
    let _ = write!(out, "{:>4}  {:<width$}  {:>12}", "rank", "player", "value");
    if sampled {
        let _ = write!(out, "  {:>10}", "stderr");
    }
    out.push('\n');
    for (i, (player, value)) in ranking.0.iter().enumerate() {
        let shown = match value {
            Attribution::Exact(q) => format!("{q} ({:.4})", q.to_f64()),
            Attribution::Estimate(x) => format!("{x:.4}"),
        };
        let _ = write!(
            out,
            "{:>4}  {:<width$}  {:>12}",
            i + 1,
            player.to_string(),
            shown
        );
        if sampled {
            let se = r
                .values
                .iter()
                .find(|v| &v.player == player)
                .and_then(|v| v.stderr)
                .unwrap_or(0.0);
            let _ = write!(out, "  {se:>10.4}");
        }
        out.push('\n');
    }
    out
}

pub fn violation_counts(rows: &[(String, usize)]) -> String {
    let width = rows
        .iter()
        .map(|(id, _)| id.len())
        .max()
        .unwrap_or(0)
        .max(10);
    let mut out = format!("{:<width$}  violations\n", "constraint");
    for (id, n) in rows {
        let _ = writeln!(out, "{id:<width$}  {n:>10}");
    }
    out
}
