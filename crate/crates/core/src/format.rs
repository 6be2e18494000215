//! Line-oriented text formats. Colors and vertices are 1-based on disk.
//!
//! ```text
//! palette 3
//! 1 2 3
//! ```
//!
//! ```text
//! graph3 4
//! 1 2 3
//! 1 2 4
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::ThreeGraph;
use crate::palette::Palette;

struct Line<'a> {
    number: usize,
    tokens: Vec<(usize, &'a str)>,
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push((s + 1, &body[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        (!tokens.is_empty()).then_some(Line {
            number: i + 1,
            tokens,
        })
    })
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn number(line: &Line, (col, tok): (usize, &str)) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| err(line.number, col, format!("expected a non-negative integer, found `{tok}`")))
}

/// A parsed triple with its line number and entry columns.
type Row = ([u32; 3], usize, Vec<usize>);

fn parse_body(text: &str, keyword: &str) -> Result<(usize, Vec<Row>)> {
    let mut it = lines(text);
    let first = it
        .next()
        .ok_or_else(|| err(1, 1, format!("missing `{keyword} <count>` header")))?;
    if first.tokens.len() != 2 || first.tokens[0].1 != keyword {
        return Err(err(first.number, first.tokens[0].0, format!("expected `{keyword} <count>`")));
    }
    let count = number(&first, first.tokens[1])?;
    let mut rows = Vec::new();
    for line in it {
        if line.tokens.len() != 3 {
            let col = line.tokens.get(3).map_or(line.tokens[0].0, |t| t.0);
            return Err(err(line.number, col, format!("expected 3 entries, found {}", line.tokens.len())));
        }
        let mut triple = [0u32; 3];
        let mut cols = Vec::with_capacity(3);
        for (slot, &tok) in triple.iter_mut().zip(&line.tokens) {
            let v = number(&line, tok)?;
            if v == 0 || v > count {
                return Err(err(line.number, tok.0, format!("entry {v} outside 1..={count}")));
            }
            *slot = (v - 1) as u32;
            cols.push(tok.0);
        }
        rows.push((triple, line.number, cols));
    }
    Ok((count, rows))
}

pub fn parse_palette(text: &str) -> Result<Palette> {
    let (c, rows) = parse_body(text, "palette")?;
    Palette::new(c, rows.into_iter().map(|r| r.0))
}

pub fn parse_graph(text: &str) -> Result<ThreeGraph> {
    let (n, rows) = parse_body(text, "graph3")?;
    for (t, line, cols) in &rows {
        if t[0] == t[1] || t[0] == t[2] || t[1] == t[2] {
            return Err(err(*line, cols[0], "edge vertices must be distinct"));
        }
    }
    ThreeGraph::new(n, rows.into_iter().map(|r| r.0))
}

fn write_rows<'a>(keyword: &str, count: usize, rows: impl Iterator<Item = &'a [u32; 3]>) -> String {
    let mut s = format!("{keyword} {count}\n");
    for [a, b, c] in rows {
        let _ = writeln!(s, "{} {} {}", a + 1, b + 1, c + 1);
    }
    s
}

pub fn write_palette(p: &Palette) -> String {
    write_rows("palette", p.color_count(), p.patterns().iter())
}

pub fn write_graph(g: &ThreeGraph) -> String {
    write_rows("graph3", g.vertex_count(), g.edges().iter())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_round_trip() {
        let text = "palette 3\n1 2 3\n1 3 2\n";
        let p = parse_palette(text).unwrap();
        assert_eq!(p.patterns(), &[[0, 1, 2], [0, 2, 1]]);
        assert_eq!(write_palette(&p), text);
    }

    #[test]
    fn comments_and_blank_lines() {
        let p = parse_palette("# header\npalette 2 # two colors\n\n2 1 1\n1 1 1 # loop\n").unwrap();
        assert_eq!(write_palette(&p), "palette 2\n1 1 1\n2 1 1\n");
    }

    #[test]
    fn graph_round_trip() {
        let text = "graph3 4\n1 2 3\n1 2 4\n";
        assert_eq!(write_graph(&parse_graph(text).unwrap()), text);
        let g = parse_graph("graph3 4\n4 2 1\n").unwrap();
        assert_eq!(write_graph(&g), "graph3 4\n1 2 4\n");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_palette("palette 2\n1 3 1\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        match parse_graph("graph3 4\n1  1 2\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 1)),
            other => panic!("{other:?}"),
        }
        assert!(parse_palette("graph3 2\n").is_err());
        assert!(parse_palette("palette x\n").is_err());
        assert!(parse_palette("").is_err());
        assert!(parse_palette("palette 2\n1 2\n").is_err());
    }
}
