//! Time-series CSV.
//!
//! Layout: a `# degen-taxis series v1` line, a `# context = {json}` line with
//! the invariant-check context, one header row, then one row per sample.
//! Columns are the 25 scalar diagnostics in `DiagRecord::scalars` order
//! followed by `lp_u[p]` for each tracked exponent. Values use `{:.16e}`,
//! which round-trips every finite `f64`.

use degen_taxis::diagnostics::{Cumulative, InvariantContext};
use degen_taxis::DiagRecord;
use thiserror::Error;

pub const MAGIC: &str = "# degen-taxis series v1";

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing {0}")]
    Missing(&'static str),
}

fn malformed(line: usize, msg: impl Into<String>) -> SeriesError {
    SeriesError::Malformed { line, msg: msg.into() }
}

pub fn header(sample: &DiagRecord) -> Vec<String> {
    let mut cols: Vec<String> = sample.scalars().iter().map(|(n, _)| n.to_string()).collect();
    cols.extend(sample.lp_u.iter().map(|(p, _)| format!("lp_u[{p}]")));
    cols
}

pub fn write_series(samples: &[DiagRecord], ctx: &InvariantContext) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str("# context = ");
    out.push_str(&serde_json::to_string(ctx).expect("context serializes"));
    out.push('\n');
    if let Some(first) = samples.first() {
        out.push_str(&header(first).join(","));
        out.push('\n');
    }
    for s in samples {
        let row: Vec<String> = s
            .scalars()
            .iter()
            .map(|(_, v)| *v)
            .chain(s.lp_u.iter().map(|(_, v)| *v))
            .map(|v| format!("{v:.16e}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_series(text: &str) -> Result<(Vec<DiagRecord>, InvariantContext), SeriesError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(malformed(1, "not a series file")),
    }
    let ctx: InvariantContext = match lines.next() {
        Some((n, l)) => {
            let json = l
                .strip_prefix("# context = ")
                .ok_or_else(|| malformed(n, "expected context line"))?;
            serde_json::from_str(json).map_err(|e| malformed(n, e.to_string()))?
        }
        None => return Err(SeriesError::Missing("context line")),
    };
    let (hline, head) = lines.next().ok_or(SeriesError::Missing("header row"))?;
    let cols: Vec<&str> = head.split(',').collect();
    let template = DiagRecord {
        t: 0.0,
        mass_u: 0.0,
        mass_v: 0.0,
        sup_v: 0.0,
        min_v: 0.0,
        sup_u: 0.0,
        min_u: 0.0,
        sup_gradv: 0.0,
        ent_u: 0.0,
        log_u: 0.0,
        lyap: 0.0,
        diss_u: 0.0,
        diss_v: 0.0,
        q4: 0.0,
        q6: 0.0,
        energy: 0.0,
        r_uv: 0.0,
        v_gradv2: 0.0,
        lp_u: Vec::new(),
        cum: Cumulative::default(),
    };
    let n_scalar = template.scalars().len();
    if cols.len() < n_scalar || template.scalars().iter().zip(&cols).any(|((a, _), b)| a != b) {
        return Err(malformed(hline, "header does not match the scalar column order"));
    }
    let mut ps = Vec::new();
    for c in &cols[n_scalar..] {
        let p = c
            .strip_prefix("lp_u[")
            .and_then(|r| r.strip_suffix(']'))
            .and_then(|r| r.parse::<f64>().ok())
            .ok_or_else(|| malformed(hline, format!("bad column `{c}`")))?;
        ps.push(p);
    }

    let mut samples = Vec::new();
    for (n, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = l
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(n, e.to_string()))?;
        if vals.len() != cols.len() {
            return Err(malformed(n, format!("expected {} values, got {}", cols.len(), vals.len())));
        }
        let v = &vals;
        samples.push(DiagRecord {
            t: v[0],
            mass_u: v[1],
            mass_v: v[2],
            sup_v: v[3],
            min_v: v[4],
            sup_u: v[5],
            min_u: v[6],
            sup_gradv: v[7],
            ent_u: v[8],
            log_u: v[9],
            lyap: v[10],
            diss_u: v[11],
            diss_v: v[12],
            q4: v[13],
            q6: v[14],
            energy: v[15],
            r_uv: v[16],
            v_gradv2: v[17],
            cum: Cumulative {
                uv: v[18],
                diss_u: v[19],
                diss_v: v[20],
                q4: v[21],
                q6: v[22],
                mass_v: v[23],
                v_gradv2: v[24],
            },
            lp_u: ps.iter().copied().zip(v[n_scalar..].iter().copied()).collect(),
        });
    }
    Ok((samples, ctx))
}
