use nilheat::bchd::{bchd_terms, AdOp, BchdLaw};
use nilheat::combinatorics::{errors, multi_indices, permutations, strichartz_coefficient};
use serde_json::{json, Value};

use crate::Failure;

/// Rows of strings with the parameters that produced them.
pub struct Table {
    pub params: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    pub fn new(params: Value, columns: Vec<String>) -> Self {
        Self {
            params,
            columns,
            rows: Vec::new(),
        }
    }

    /// The config hash is the first column of every row.
    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = String::from("configHash");
        for c in &self.columns {
            out.push(',');
            out.push_str(&csv_field(c));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(hash);
            for f in r {
                out.push(',');
                out.push_str(&csv_field(f));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, hash: &str) -> String {
        let doc = json!({
            "config": self.params,
            "configHash": hash,
            "columns": self.columns,
            "rows": self.rows,
        });
        serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
    }
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn tuple(xs: impl IntoIterator<Item = impl ToString>) -> String {
    let parts: Vec<String> = xs.into_iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// `[w₁,[w₂,…,[w_k,g]…]]`.
fn bracket_word(word: &[AdOp]) -> String {
    let mut s = "g".to_string();
    for op in word.iter().rev() {
        let x = if *op == AdOp::G { "g" } else { "h" };
        s = format!("[{x},{s}]");
    }
    s
}

pub fn bchd(step: usize, raw: bool) -> Result<Table, Failure> {
    if !(1..=12).contains(&step) {
        return Err(Failure::config("bchd-table needs 1 <= step <= 12"));
    }
    let params = json!({ "command": "bchd-table", "step": step, "raw": raw });
    if raw {
        let mut t = Table::new(params, columns(&["k", "n", "m", "degree", "coefficient"]));
        for term in bchd_terms(step) {
            t.rows.push(vec![
                term.k.to_string(),
                tuple(&term.n),
                tuple(&term.m),
                (term.degree() + 1).to_string(),
                term.coefficient.to_string(),
            ]);
        }
        return Ok(t);
    }
    let law = BchdLaw::new(step)?;
    let mut t = Table::new(params, columns(&["degree", "word", "coefficient"]));
    t.rows.push(vec!["1".into(), "g".into(), "1".into()]);
    t.rows.push(vec!["1".into(), "h".into(), "1".into()]);
    let mut words: Vec<_> = law.words().to_vec();
    words.sort_by_key(|(w, _)| w.len());
    for (w, c) in words {
        t.rows.push(vec![(w.len() + 1).to_string(), bracket_word(&w), c.to_string()]);
    }
    Ok(t)
}

pub fn coefficients(n: usize) -> Result<Table, Failure> {
    if !(1..=8).contains(&n) {
        return Err(Failure::config("coef-table needs 1 <= n <= 8"));
    }
    let params = json!({ "command": "coef-table", "n": n });
    let mut t = Table::new(params, columns(&["sigma", "errors", "coefficient"]));
    for sigma in permutations(n) {
        t.rows.push(vec![
            tuple(&sigma),
            errors(&sigma)?.to_string(),
            strichartz_coefficient(&sigma)?.to_string(),
        ]);
    }
    Ok(t)
}

pub fn f_alpha(n: usize) -> Result<Table, Failure> {
    if !(1..=10).contains(&n) {
        return Err(Failure::config("falpha-table needs 1 <= n <= 10"));
    }
    let params = json!({ "command": "falpha-table", "n": n });
    let mut t = Table::new(params, columns(&["alpha", "p", "q", "f", "decomposition"]));
    for alpha in multi_indices(n) {
        let f = nilheat::combinatorics::f_alpha(&alpha);
        let parts: Vec<String> = f
            .decomposition
            .iter()
            .enumerate()
            .map(|(a, (b, g))| format!("t^{a}: {b}*({g})"))
            .collect();
        t.rows.push(vec![
            alpha.to_string(),
            alpha.p().to_string(),
            alpha.q().to_string(),
            f.poly.to_string(),
            parts.join("; "),
        ]);
    }
    Ok(t)
}
