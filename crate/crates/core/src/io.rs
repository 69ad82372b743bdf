//! Text formats: dataset CSV, edge lists, prior matrices, traces and CPTs.
//!
//! Dataset CSV: a header row of variable names, then one row of integer
//! states per sample. An optional line `#card,c1,c2,...` directly after the
//! header fixes the cardinalities; otherwise each column's cardinality is
//! its largest state plus one (at least 2).
//!
//! Edge list: optional `# nodes N` line, then one `from to` pair per line,
//! 0-based. Blank lines and other `#` lines are ignored.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::evalgen::GroundTruthBn;
use crate::model::{Dag, Dataset, PriorMatrix};
use crate::sampler::TraceRow;
use crate::scalar::Score;

const CARD_TAG: &str = "#card";

pub fn read_dataset<R: Read>(r: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(r);
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(e, 1))?,
        None => return Err(Error::Parse { line: 1, msg: "missing header row".into() }),
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    let n = names.len();
    let mut declared: Option<Vec<usize>> = None;
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec[0] == *CARD_TAG {
            if declared.is_some() || !rows.is_empty() {
                return Err(Error::Parse { line, msg: "cardinality line must directly follow the header".into() });
            }
            let cards = rec
                .iter()
                .skip(1)
                .map(|f| f.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("bad cardinality {f:?}") }))
                .collect::<Result<Vec<_>>>()?;
            if cards.len() != n {
                return Err(Error::Parse { line, msg: format!("{} cardinalities for {n} variables", cards.len()) });
            }
            declared = Some(cards);
            continue;
        }
        if rec.len() != n {
            return Err(Error::Parse { line, msg: format!("{} fields, expected {n}", rec.len()) });
        }
        let row = rec
            .iter()
            .map(|f| f.parse::<u8>().map_err(|_| Error::Parse { line, msg: format!("bad state {f:?}") }))
            .collect::<Result<Vec<_>>>()?;
        if let Some(cards) = &declared {
            if let Some(i) = (0..n).find(|&i| row[i] as usize >= cards[i]) {
                return Err(Error::Parse { line, msg: format!("state {} of {} exceeds its cardinality {}", row[i], names[i], cards[i]) });
            }
        }
        rows.push(row);
    }
    let cards = declared.unwrap_or_else(|| {
        (0..n).map(|i| rows.iter().map(|r| r[i] as usize + 1).max().unwrap_or(2).max(2)).collect()
    });
    Dataset::with_names(names, cards, &rows)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

/// Writes the header, the cardinality line and every row.
pub fn write_dataset<W: Write>(data: &Dataset, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    out.write_record(data.names()).map_err(to_io)?;
    let mut cards = vec![CARD_TAG.to_string()];
    cards.extend(data.cardinalities().iter().map(usize::to_string));
    out.write_record(&cards).map_err(to_io)?;
    for row in data.rows() {
        out.write_record(row.iter().map(u8::to_string)).map_err(to_io)?;
    }
    out.flush()?;
    Ok(())
}

fn to_io(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// Reads an edge list. Without a `# nodes` line the node count is taken
/// from `nodes`, or else one past the largest index seen.
pub fn read_edges<R: Read>(r: R, nodes: Option<usize>) -> Result<Dag> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let text = line.trim();
        if let Some(rest) = text.strip_prefix('#') {
            if let Some(count) = rest.trim().strip_prefix("nodes") {
                let count = count.trim().parse().map_err(|_| Error::Parse { line: lineno, msg: "bad node count".into() })?;
                declared = Some(count);
            }
            continue;
        }
        if text.is_empty() {
            continue;
        }
        let parts: Vec<&str> = text.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty()).collect();
        let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse { line: lineno, msg: format!("bad node index {s:?}") });
        match parts.as_slice() {
            [a, b] => edges.push((parse(a)?, parse(b)?)),
            _ => return Err(Error::Parse { line: lineno, msg: "expected `from to`".into() }),
        }
    }
    let n = match declared.or(nodes) {
        Some(n) => n,
        None => edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0),
    };
    Dag::from_edges(n, &edges)
}

pub fn write_edges<W: Write>(dag: &Dag, mut w: W) -> Result<()> {
    writeln!(w, "# nodes {}", dag.num_nodes())?;
    for (from, to) in dag.edges() {
        writeln!(w, "{from} {to}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `n x n` prior matrix; row `i` holds the priors of node `i`'s
/// candidate parents.
pub fn read_priors<R: Read>(r: R, n: usize) -> Result<PriorMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(r);
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("bad prior {f:?}") }))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Data(format!("prior matrix must be {n}x{n}")));
    }
    PriorMatrix::from_rows(&rows)
}

pub fn write_priors<W: Write>(priors: &PriorMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in priors.rows() {
        out.write_record(row.iter().map(f64::to_string)).map_err(to_io)?;
    }
    out.flush()?;
    Ok(())
}

pub const TRACE_HEADER: [&str; 4] = ["iteration", "proposed_score", "accepted", "best_score"];

pub fn write_trace<S: Score, W: Write>(trace: &[TraceRow<S>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER).map_err(to_io)?;
    for row in trace {
        out.write_record([
            row.iteration.to_string(),
            row.proposed_score.to_string(),
            (row.accepted as u8).to_string(),
            row.best_score.to_string(),
        ])
        .map_err(to_io)?;
    }
    out.flush()?;
    Ok(())
}

/// One line per (node, parent configuration):
/// `node config p0 p1 ...`, preceded by a `# node parents... ` line per node.
pub fn write_cpts<W: Write>(bn: &GroundTruthBn, mut w: W) -> Result<()> {
    for node in 0..bn.dag().num_nodes() {
        let parents: Vec<String> = bn.dag().parents(node).iter().map(|p| p.to_string()).collect();
        writeln!(w, "# node {node} card {} parents [{}]", bn.cardinalities()[node], parents.join(" "))?;
        for k in 0..bn.num_configs(node) {
            let probs: Vec<String> = bn.cpt_row(node, k).iter().map(f64::to_string).collect();
            writeln!(w, "{node} {k} {}", probs.join(" "))?;
        }
    }
    w.flush()?;
    Ok(())
}
