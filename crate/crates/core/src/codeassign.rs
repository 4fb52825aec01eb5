//! Code assignment stage: random linear coding vectors are generated in a
//! top-down sweep according to the pushback requests, and each node's
//! decodable prefix is determined by Gauss-Jordan elimination.
//!
//! A code on an edge is a vector of `L` field coefficients tagged with its
//! span `m`: the code mixes layers `1..=m` and is zero beyond. A node that
//! can decode a prefix of layers re-encodes them freshly for children whose
//! requests it can satisfy ("secondary source"); otherwise it forwards a
//! random recombination of the incoming codes whose spans fit under the
//! child's request.

use rand::Rng;
use thiserror::Error;

use crate::gf::Field;
use crate::netgraph::{EdgeId, LayeredDag};
use crate::pushback::RequestState;

#[derive(Debug, Error)]
pub enum CodeAssignError {
    #[error("request state covers {got} nodes but the graph has {expected}")]
    NodeCountMismatch { expected: usize, got: usize },
    #[error("span {0} cannot occur with two layers")]
    SpanBeyondTwoLayers(u32),
}

/// The coding vector on one edge. `span = 0` marks an idle edge carrying the
/// zero vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCode {
    pub edge: EdgeId,
    pub span: u32,
    pub coeffs: Vec<u64>,
}

impl EdgeCode {
    fn zero(edge: EdgeId, layers: usize) -> EdgeCode {
        EdgeCode {
            edge,
            span: 0,
            coeffs: vec![0; layers],
        }
    }
}

/// Index of the last nonzero coefficient, counting from one; 0 for the zero
/// vector.
pub fn vector_span(coeffs: &[u64]) -> u32 {
    coeffs
        .iter()
        .rposition(|&c| c != 0)
        .map_or(0, |i| i as u32 + 1)
}

/// Everything the code assignment stage produces: the code on every edge and
/// the decodable prefix `m*` of every node (0 for the source).
#[derive(Debug, Clone)]
pub struct CodeAssignment {
    pub edge_codes: Vec<EdgeCode>,
    pub m_star: Vec<u32>,
}

impl CodeAssignment {
    /// Codes received by `v`, one per incoming edge.
    pub fn received<'a>(
        &'a self,
        g: &'a LayeredDag,
        v: usize,
    ) -> impl Iterator<Item = &'a EdgeCode> {
        g.in_edges(v).iter().map(|&e| &self.edge_codes[e])
    }

    /// Text dump, one line per edge: `edge <id> m <span> vec <c1> ... <cL>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for code in &self.edge_codes {
            out.push_str(&format!("edge {} m {} vec", code.edge, code.span));
            for c in &code.coeffs {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Largest `m` such that every unit vector `e_1..e_m` lies in the row span
/// of the given vectors; 0 when even the base layer is out of reach.
#[allow(clippy::needless_range_loop)] // elimination reads two rows at once
pub fn decodable_prefix<'a, I>(vectors: I, layers: usize, f: &Field) -> u32
where
    I: IntoIterator<Item = &'a [u64]>,
{
    let mut rows: Vec<Vec<u64>> = vectors
        .into_iter()
        .filter(|v| v.iter().any(|&c| c != 0))
        .map(|v| v.to_vec())
        .collect();
    if rows.is_empty() {
        return 0;
    }

    // Reduced row-echelon form.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next_row = 0usize;
    for col in 0..layers {
        let Some(p) = (next_row..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(next_row, p);
        let inv = f.inv(rows[next_row][col]).expect("pivot is nonzero");
        for c in col..layers {
            rows[next_row][c] = f.mul(rows[next_row][c], inv);
        }
        for r in 0..rows.len() {
            if r != next_row && rows[r][col] != 0 {
                let factor = rows[r][col];
                for c in col..layers {
                    let delta = f.mul(factor, rows[next_row][c]);
                    rows[r][c] = f.sub(rows[r][c], delta);
                }
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
        if next_row == rows.len() {
            break;
        }
    }

    // e_j is in the span iff it reduces to zero against the pivot rows.
    let member = |j: usize| -> bool {
        let mut v = vec![0u64; layers];
        v[j] = 1;
        for &(row, col) in &pivots {
            if v[col] != 0 {
                let factor = v[col];
                for c in 0..layers {
                    let delta = f.mul(factor, rows[row][c]);
                    v[c] = f.sub(v[c], delta);
                }
            }
        }
        v.iter().all(|&c| c == 0)
    };

    let mut m = 0u32;
    for j in 0..layers {
        if member(j) {
            m = j as u32 + 1;
        } else {
            break;
        }
    }
    m
}

/// True when the base layer is recoverable from the vectors. This is the
/// high-probability event behind the base-layer guarantee; with `n` codes of
/// span <= n over a field of order q it fails with probability on the order
/// of n^2 / q.
pub fn base_layer_recoverable<'a, I>(vectors: I, layers: usize, f: &Field) -> bool
where
    I: IntoIterator<Item = &'a [u64]>,
{
    decodable_prefix(vectors, layers, f) >= 1
}

/// Decodability of a two-layer code from the span pattern alone, given the
/// number of edge-disjoint incoming codes the spans were read from. Matches
/// Gauss-Jordan elimination over a quasi-infinite field on such inputs: up
/// to `min_cut_v` codes behave as generically independent rows.
pub fn pattern_decodable_2layer(spans: &[u32], min_cut_v: u32) -> Result<u32, CodeAssignError> {
    if let Some(&bad) = spans.iter().find(|&&m| m > 2) {
        return Err(CodeAssignError::SpanBeyondTwoLayers(bad));
    }
    let n1 = spans.iter().filter(|&&m| m == 1).count();
    let n2 = spans.iter().filter(|&&m| m == 2).count();
    Ok(if min_cut_v == 0 || n1 + n2 == 0 {
        0
    } else if min_cut_v == 1 {
        // A single usable direction: only an uncoded base-layer symbol helps.
        if n1 >= 1 {
            1
        } else {
            0
        }
    } else if n2 == 0 {
        1
    } else if n1 + n2 >= 2 {
        2
    } else {
        // One fully mixed code alone: one equation, two unknowns.
        0
    })
}

/// Top-down code generation. Every emitted code keeps its span at or below
/// the receiving child's request, which is what makes the base-layer
/// guarantee go through.
pub fn assign_codes(
    g: &LayeredDag,
    req: &RequestState,
    f: &Field,
    rng: &mut impl Rng,
) -> Result<CodeAssignment, CodeAssignError> {
    if req.q.len() != g.node_count() {
        return Err(CodeAssignError::NodeCountMismatch {
            expected: g.node_count(),
            got: req.q.len(),
        });
    }
    let layers = g.layers() as usize;
    let mut edge_codes: Vec<EdgeCode> = (0..g.edge_count())
        .map(|e| EdgeCode::zero(e, layers))
        .collect();
    let mut m_star = vec![0u32; g.node_count()];

    // A freshly generated code over layers 1..=span has every coefficient
    // in that range nonzero: an encoder never wastes an edge slot on a
    // degenerate vector. Sums of such codes can still cancel coefficients,
    // so forwarded recombinations may carry zeros anywhere.
    fn fresh(f: &Field, layers: usize, span: u32, rng: &mut impl Rng) -> Vec<u64> {
        let mut v = vec![0u64; layers];
        for c in v.iter_mut().take(span as usize) {
            *c = f.random_element(rng, true);
        }
        v
    }

    for &v in g.topo_order() {
        if v == g.source() {
            for &e in g.out_edges(v) {
                let q_u = req.q[g.edge(e).1];
                edge_codes[e] = EdgeCode {
                    edge: e,
                    span: q_u,
                    coeffs: fresh(f, layers, q_u, rng),
                };
            }
            continue;
        }

        let m = decodable_prefix(
            g.in_edges(v)
                .iter()
                .map(|&e| edge_codes[e].coeffs.as_slice()),
            layers,
            f,
        );
        m_star[v] = m;

        for &e in g.out_edges(v) {
            let q_u = req.q[g.edge(e).1];
            if q_u <= m {
                // Decode and act as a secondary source for layers 1..=q_u.
                edge_codes[e] = EdgeCode {
                    edge: e,
                    span: q_u,
                    coeffs: fresh(f, layers, q_u, rng),
                };
                continue;
            }
            // Best effort: recombine the incoming codes that fit under the
            // request, plus fresh combinations of any decoded prefix.
            let usable: Vec<EdgeId> = g
                .in_edges(v)
                .iter()
                .copied()
                .filter(|&ie| {
                    let s = edge_codes[ie].span;
                    s >= 1 && s <= q_u
                })
                .collect();
            let m_max = usable
                .iter()
                .map(|&ie| edge_codes[ie].span)
                .max()
                .unwrap_or(0);
            if m_max == 0 {
                // No incoming code fits under the request. If a prefix was
                // decoded, re-encode it; otherwise the edge stays idle.
                edge_codes[e] = EdgeCode {
                    edge: e,
                    span: m,
                    coeffs: fresh(f, layers, m, rng),
                };
                continue;
            }
            // Local mixing coefficients are nonzero, like fresh draws, so
            // a lone input is relayed rather than erased; sums can still
            // cancel individual coefficients. In the rare case where every
            // mix collapses to zero (e.g. identical inputs over GF(2)), the
            // widest input is forwarded verbatim.
            let mut coeffs = vec![0u64; layers];
            let mut nonzero = false;
            for _ in 0..16 {
                coeffs.iter_mut().for_each(|c| *c = 0);
                for &ie in &usable {
                    let w = f.random_element(rng, true);
                    for (c, &x) in coeffs.iter_mut().zip(edge_codes[ie].coeffs.iter()) {
                        *c = f.add(*c, f.mul(w, x));
                    }
                }
                for c in coeffs.iter_mut().take(m as usize) {
                    *c = f.add(*c, f.random_element(rng, true));
                }
                if coeffs.iter().any(|&c| c != 0) {
                    nonzero = true;
                    break;
                }
            }
            if !nonzero {
                let widest = *usable
                    .iter()
                    .max_by_key(|&&ie| (edge_codes[ie].span, ie))
                    .expect("usable is nonempty");
                coeffs.copy_from_slice(&edge_codes[widest].coeffs);
            }
            // The prefix terms can reach past m_max when cancellations made
            // more layers decodable than any single usable input spans.
            edge_codes[e] = EdgeCode {
                edge: e,
                span: m_max.max(m),
                coeffs,
            };
        }
    }

    Ok(CodeAssignment { edge_codes, m_star })
}

/// Codes sorted by ascending span, with the staircase block boundaries
/// `(r_1, c_1) .. (r_k, c_k)`: the first `r_i` rows live in the first `c_i`
/// columns. This is the structure behind the base-layer guarantee.
#[derive(Debug, Clone)]
pub struct SortedCodingMatrix {
    pub rows: Vec<Vec<u64>>,
    pub blocks: Vec<(usize, usize)>,
}

impl SortedCodingMatrix {
    /// Builds the sorted matrix from nonzero codes. Spans are recomputed
    /// from the actual coefficients.
    pub fn from_vectors<'a, I>(vectors: I) -> SortedCodingMatrix
    where
        I: IntoIterator<Item = &'a [u64]>,
    {
        let mut rows: Vec<Vec<u64>> = vectors
            .into_iter()
            .filter(|v| v.iter().any(|&c| c != 0))
            .map(|v| v.to_vec())
            .collect();
        rows.sort_by_key(|r| vector_span(r));
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            let c = vector_span(r) as usize;
            match blocks.last_mut() {
                Some(last) if last.1 == c => last.0 = i + 1,
                _ => blocks.push((i + 1, c)),
            }
        }
        SortedCodingMatrix { rows, blocks }
    }

    /// The staircase invariant: strictly increasing column bounds, strictly
    /// increasing row counts ending at the full row count, and every row
    /// zero beyond its block's column bound.
    pub fn is_well_formed(&self) -> bool {
        let increasing = self
            .blocks
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        let covers_rows = self
            .blocks
            .last()
            .map_or(self.rows.is_empty(), |&(r, _)| r == self.rows.len());
        let mut start = 0usize;
        let rows_fit = self.blocks.iter().all(|&(r, c)| {
            let ok = self.rows[start..r]
                .iter()
                .all(|row| row.iter().skip(c).all(|&x| x == 0));
            start = r;
            ok
        });
        increasing && covers_rows && rows_fit
    }
}
