//! Plain-text edge lists and palette files.
//!
//! Edge list: a header line `n m`, then one `u v` line per edge. Palette file: a header
//! `space S`, then one line of whitespace-separated colors per node. Lines starting
//! with `#` are ignored in both.

use std::io::{BufRead, Write};

use super::{ColoringInstance, Graph, GraphError, NodeId, Palette, Variant};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn data_lines(r: impl BufRead) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    r.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => !s.trim().is_empty() && !s.trim_start().starts_with('#'),
        Err(_) => true,
    })
}

fn nums<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>, IoError> {
    s.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| IoError::Parse { line, msg: format!("bad number '{t}'") }))
        .collect()
}

pub fn read_edge_list(r: impl BufRead) -> Result<Graph, IoError> {
    let mut lines = data_lines(r);
    let (ln, header) = lines.next().ok_or(IoError::Parse { line: 0, msg: "empty input".into() })?;
    let h: Vec<usize> = nums(ln, &header?)?;
    if h.len() != 2 {
        return Err(IoError::Parse { line: ln, msg: "header must be 'n m'".into() });
    }
    let mut edges = Vec::with_capacity(h[1]);
    for (ln, l) in lines {
        let e: Vec<NodeId> = nums(ln, &l?)?;
        if e.len() != 2 {
            return Err(IoError::Parse { line: ln, msg: "expected 'u v'".into() });
        }
        edges.push((e[0], e[1]));
    }
    if edges.len() != h[1] {
        return Err(IoError::Parse { line: ln, msg: format!("header promises {} edges, found {}", h[1], edges.len()) });
    }
    Ok(Graph::from_edges(h[0], &edges)?)
}

pub fn write_edge_list(g: &Graph, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{} {}", g.node_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

/// Reads palettes and the color space size.
pub fn read_palettes(r: impl BufRead) -> Result<(Vec<Palette>, u64), IoError> {
    let mut lines = data_lines(r);
    let (ln, header) = lines.next().ok_or(IoError::Parse { line: 0, msg: "empty input".into() })?;
    let header = header?;
    let space = header
        .strip_prefix("space")
        .and_then(|s| s.trim().parse::<u64>().ok())
        .ok_or(IoError::Parse { line: ln, msg: "header must be 'space S'".into() })?;
    let mut out = Vec::new();
    for (ln, l) in lines {
        let cols: Vec<u64> = nums(ln, &l?)?;
        out.push(Palette::from_colors(cols)?);
    }
    Ok((out, space))
}

pub fn write_palettes(palettes: &[Palette], space: u64, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "space {space}")?;
    for p in palettes {
        let s: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", s.join(" "))?;
    }
    Ok(())
}

/// Loads an instance from an edge list and an optional palette file.
pub fn load_instance(edges: impl BufRead, palettes: Option<impl BufRead>, variant: Variant) -> Result<ColoringInstance, IoError> {
    let g = read_edge_list(edges)?;
    match palettes {
        None => Ok(ColoringInstance::delta_plus_one(g)),
        Some(p) => {
            let (pal, space) = read_palettes(p)?;
            Ok(ColoringInstance::with_palettes(g, pal, space, variant)?)
        }
    }
}
