//! Export the transition matrix as a directed graph for external
//! community-detection or visualization tools.

use std::io::Write;

use crate::error::Result;
use crate::model::BlockTransitionModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// One line per edge: `src_symbol/src_clone dst_symbol/dst_clone prob`.
    EdgeList,
    Dot,
}

fn edges(
    model: &BlockTransitionModel,
    threshold: f64,
) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
    model.present_blocks().flat_map(move |(i, j)| {
        let mj = model.layout().clones_of(j);
        model
            .block(i, j)
            .unwrap()
            .iter()
            .enumerate()
            .filter(move |&(_, &p)| p >= threshold && p > 0.0)
            .map(move |(idx, &p)| (i, idx / mj, j, idx % mj, p))
    })
}

/// Number of edges that `export_graph` would emit.
pub fn edge_count(model: &BlockTransitionModel, threshold: f64) -> usize {
    edges(model, threshold).count()
}

pub fn export_graph<W: Write>(
    model: &BlockTransitionModel,
    threshold: f64,
    format: GraphFormat,
    w: &mut W,
) -> Result<()> {
    let name = |sym: usize, clone: usize| format!("{}/{}", model.alphabet().symbol(sym), clone);
    match format {
        GraphFormat::EdgeList => {
            for (si, ci, sj, cj, p) in edges(model, threshold) {
                writeln!(w, "{} {} {}", name(si, ci), name(sj, cj), p)?;
            }
        }
        GraphFormat::Dot => {
            writeln!(w, "digraph chmm {{")?;
            for (si, ci, sj, cj, p) in edges(model, threshold) {
                writeln!(
                    w,
                    "  \"{}\" -> \"{}\" [weight={p}, label=\"{p:.4}\"];",
                    name(si, ci),
                    name(sj, cj)
                )?;
            }
            writeln!(w, "}}")?;
        }
    }
    Ok(())
}
