//! Directed network topologies and left-stochastic combination matrices.
//!
//! An edge `(l, k)` means agent `l` is in the neighborhood of agent `k`:
//! information flows from `l` to `k`, and `k` assigns the confidence weight
//! `a[l][k]` to it. Columns of a combination matrix therefore sum to one.
//!
//! All indices in this module are 0-based. File formats use 1-based agent
//! labels.

use std::collections::VecDeque;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Column sums of a combination matrix must be within this of one.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;
/// Residual blocks with spectral radius at or above `1 - STABILITY_MARGIN` are rejected.
pub const STABILITY_MARGIN: f64 = 1e-9;

const PERRON_TOLERANCE: f64 = 1e-12;
const PERRON_MAX_ITERATIONS: usize = 1_000_000;

/// Validated directed graph: at least two agents, strongly connected, with at
/// least one self-loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    agents: usize,
    edges: Vec<bool>,
}

impl Adjacency {
    /// Builds a graph from `(from, to)` pairs.
    pub fn from_edges(agents: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut flags = vec![false; agents * agents];
        for (l, k) in edges {
            if l >= agents || k >= agents {
                return Err(Error::DimensionMismatch {
                    what: "edge endpoint",
                    expected: agents,
                    found: l.max(k) + 1,
                });
            }
            flags[l * agents + k] = true;
        }
        Self::from_flags(agents, flags)
    }

    /// Builds a graph from a square boolean matrix, `rows[l][k]` true iff `l -> k`.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let agents = rows.len();
        let mut flags = Vec::with_capacity(agents * agents);
        for row in rows {
            if row.len() != agents {
                return Err(Error::DimensionMismatch {
                    what: "adjacency row length",
                    expected: agents,
                    found: row.len(),
                });
            }
            flags.extend_from_slice(row);
        }
        Self::from_flags(agents, flags)
    }

    fn from_flags(agents: usize, edges: Vec<bool>) -> Result<Self> {
        if agents < 2 {
            return Err(Error::TooFewAgents(agents));
        }
        let adj = Adjacency { agents, edges };
        if !(0..agents).any(|k| adj.has_edge(k, k)) {
            return Err(Error::NoSelfLoop("at least one agent must keep its own belief".into()));
        }
        adj.check_strongly_connected()?;
        Ok(adj)
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges[from * self.agents + to]
    }

    /// Neighborhood of `k` (agents whose beliefs `k` combines), including `k`
    /// itself when it has a self-loop.
    pub fn in_neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.agents).filter(move |&l| self.has_edge(l, k))
    }

    pub fn out_neighbors(&self, l: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.agents).filter(move |&k| self.has_edge(l, k))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.agents)
            .flat_map(move |l| (0..self.agents).map(move |k| (l, k)))
            .filter(|&(l, k)| self.has_edge(l, k))
    }

    /// Length of the shortest directed path from every agent to `target`
    /// (`Some(0)` for the target itself).
    pub fn hop_distances_to(&self, target: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.agents];
        dist[target] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(k) = queue.pop_front() {
            let next = dist[k].map(|d| d + 1);
            for l in self.in_neighbors(k) {
                if dist[l].is_none() {
                    dist[l] = next;
                    queue.push_back(l);
                }
            }
        }
        dist
    }

    /// Strongly connected components (Tarjan), emitted in reverse topological
    /// order: the first component has no edges leaving it.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        struct State {
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            next: usize,
            out: Vec<Vec<usize>>,
        }
        fn visit(adj: &Adjacency, v: usize, s: &mut State) {
            s.index[v] = Some(s.next);
            s.low[v] = s.next;
            s.next += 1;
            s.stack.push(v);
            s.on_stack[v] = true;
            for w in adj.out_neighbors(v) {
                match s.index[w] {
                    None => {
                        visit(adj, w, s);
                        s.low[v] = s.low[v].min(s.low[w]);
                    }
                    Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                    Some(_) => {}
                }
            }
            if Some(s.low[v]) == s.index[v] {
                let mut component = Vec::new();
                while let Some(w) = s.stack.pop() {
                    s.on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                component.sort_unstable();
                s.out.push(component);
            }
        }
        let n = self.agents;
        let mut state = State {
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in 0..n {
            if state.index[v].is_none() {
                visit(self, v, &mut state);
            }
        }
        state.out
    }

    fn check_strongly_connected(&self) -> Result<()> {
        let components = self.strongly_connected_components();
        if components.len() == 1 {
            return Ok(());
        }
        // Nothing outside the sink component is reachable from inside it.
        let sink = &components[0];
        let to = (0..self.agents).find(|a| !sink.contains(a)).unwrap_or(0);
        Err(Error::NotStronglyConnected {
            from: sink[0] + 1,
            to: to + 1,
        })
    }

    /// Reads the CSV adjacency format: a header row (either the agent count or
    /// one label per agent) followed by `K` rows of `K` 0/1 entries.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let header = records
            .next()
            .ok_or_else(|| Error::parse("adjacency csv", "empty file"))??;
        let declared = if header.len() == 1 {
            header[0]
                .parse::<usize>()
                .map_err(|_| Error::parse("adjacency csv line 1", "expected agent count"))?
        } else {
            header.len()
        };
        let mut rows = Vec::with_capacity(declared);
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let line = i + 2;
            let row = rec
                .iter()
                .enumerate()
                .map(|(col, f)| match f {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::parse(
                        format!("adjacency csv line {line}, column {}", col + 1),
                        format!("expected 0 or 1, found {other:?}"),
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != declared {
                return Err(Error::parse(
                    format!("adjacency csv line {line}"),
                    format!("expected {declared} entries, found {}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != declared {
            return Err(Error::parse(
                "adjacency csv",
                format!("expected {declared} rows, found {}", rows.len()),
            ));
        }
        Self::from_rows(&rows)
    }

    /// Reads the edge-list format: one `from,to` pair per line, 1-based.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn read_edge_list(mut reader: impl Read) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = || format!("edge list line {}", i + 1);
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(ctx(), "expected `from,to`"))?;
            let parse = |s: &str| -> Result<usize> {
                let v: usize = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(ctx(), format!("bad agent label {s:?}")))?;
                if v == 0 {
                    return Err(Error::parse(ctx(), "agent labels are 1-based"));
                }
                Ok(v - 1)
            };
            edges.push((parse(a)?, parse(b)?));
        }
        let agents = edges.iter().map(|&(l, k)| l.max(k) + 1).max().unwrap_or(0);
        Self::from_edges(agents, edges)
    }

    pub fn write_edge_list(&self, mut w: impl Write) -> Result<()> {
        for (l, k) in self.edges() {
            writeln!(w, "{},{}", l + 1, k + 1)?;
        }
        Ok(())
    }
}

/// Rules that turn an adjacency pattern into combination weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CombinationRule {
    /// `a[l][k] = 1 / |N_k|` for every neighbor.
    Averaging,
    /// Metropolis weights `1 / max(|N_l|, |N_k|)` with the remainder on the
    /// self-loop. Every agent needs a self-loop.
    Metropolis,
    /// Each agent keeps `alpha` on itself and `1 - alpha` on its single other
    /// in-neighbor (the unidirectional ring weights).
    UniformSelfWeight(f64),
}

/// Left-stochastic matrix of confidence weights over a strongly connected
/// support with at least one self-loop.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationMatrix {
    weights: Matrix,
}

impl CombinationMatrix {
    /// Validates a raw weight matrix.
    pub fn new(weights: Matrix) -> Result<Self> {
        let k = weights.nrows();
        if weights.ncols() != k {
            return Err(Error::DimensionMismatch {
                what: "combination matrix columns",
                expected: k,
                found: weights.ncols(),
            });
        }
        for (col, column) in weights.column_iter().enumerate() {
            for (row, &w) in column.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::NegativeWeight {
                        row: row + 1,
                        column: col + 1,
                        value: w,
                    });
                }
            }
            let sum: f64 = column.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::NotStochastic { column: col + 1, sum });
            }
        }
        Adjacency::from_flags(k, weights.transpose().iter().map(|&w| w > 0.0).collect())?;
        Ok(CombinationMatrix { weights })
    }

    pub fn from_rule(adj: &Adjacency, rule: CombinationRule) -> Result<Self> {
        let n = adj.agents();
        let degree: Vec<usize> = (0..n).map(|k| adj.in_neighbors(k).count()).collect();
        let mut a = Matrix::zeros(n, n);
        match rule {
            CombinationRule::Averaging => {
                for (l, k) in adj.edges() {
                    a[(l, k)] = 1.0 / degree[k] as f64;
                }
            }
            CombinationRule::Metropolis => {
                if let Some(k) = (0..n).find(|&k| !adj.has_edge(k, k)) {
                    return Err(Error::NoSelfLoop(format!(
                        "metropolis rule needs a self-loop at every agent; agent {} has none",
                        k + 1
                    )));
                }
                for (l, k) in adj.edges().filter(|(l, k)| l != k) {
                    a[(l, k)] = 1.0 / degree[l].max(degree[k]) as f64;
                }
                for k in 0..n {
                    let others: f64 = (0..n).filter(|&l| l != k).map(|l| a[(l, k)]).sum();
                    a[(k, k)] = 1.0 - others;
                }
            }
            CombinationRule::UniformSelfWeight(alpha) => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "self weight must lie in (0, 1), got {alpha}"
                    )));
                }
                for k in 0..n {
                    if !adj.has_edge(k, k) {
                        return Err(Error::NoSelfLoop(format!(
                            "uniform self-weight rule needs a self-loop at agent {}",
                            k + 1
                        )));
                    }
                    let others: Vec<usize> = adj.in_neighbors(k).filter(|&l| l != k).collect();
                    if others.len() != 1 {
                        return Err(Error::PatternViolation(format!(
                            "agent {} has {} in-neighbors besides itself (ring rule needs exactly 1)",
                            k + 1,
                            others.len()
                        )));
                    }
                    a[(k, k)] = alpha;
                    a[(others[0], k)] = 1.0 - alpha;
                }
            }
        }
        Self::new(a)
    }

    /// Rank-one matrix `v 1^T` of a fully connected network with centrality `v`.
    pub fn fully_connected(v: &[f64]) -> Result<Self> {
        let n = v.len();
        let total: f64 = v.iter().sum();
        if v.iter().any(|&x| x.is_nan() || x <= 0.0) || (total - 1.0).abs() > STOCHASTIC_TOLERANCE {
            return Err(Error::InvalidParameter(
                "fully connected weights must be positive and sum to 1".into(),
            ));
        }
        Self::new(Matrix::from_fn(n, n, |l, _| v[l]))
    }

    /// Unidirectional ring: agent `k + 1` listens to agent `k` with weight
    /// `1 - alpha` and to itself with weight `alpha`.
    pub fn ring(agents: usize, alpha: f64) -> Result<Self> {
        let adj = Adjacency::from_edges(agents, (0..agents).flat_map(|k| [(k, k), (k, (k + 1) % agents)]))?;
        Self::from_rule(&adj, CombinationRule::UniformSelfWeight(alpha))
    }

    pub fn agents(&self) -> usize {
        self.weights.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.weights
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[(from, to)]
    }

    /// Support of the matrix as an adjacency.
    pub fn support(&self) -> Adjacency {
        let n = self.agents();
        Adjacency {
            agents: n,
            edges: self.weights.transpose().iter().map(|&w| w > 0.0).collect(),
        }
    }

    /// Perron vector: `A v = v`, positive, summing to one.
    ///
    /// Power iteration from the uniform vector, renormalized every step.
    pub fn perron_vector(&self) -> Result<Vector> {
        linalg::power_iteration(&self.weights, PERRON_TOLERANCE, PERRON_MAX_ITERATIONS).map(|(v, _)| v)
    }

    /// Blocks of the post-intervention matrix for an intervention on `agent`.
    pub fn effective_decomposition(&self, agent: usize) -> Result<EffectiveDecomposition> {
        let n = self.agents();
        if agent >= n {
            return Err(Error::DimensionMismatch {
                what: "intervened agent index",
                expected: n,
                found: agent + 1,
            });
        }
        let others: Vec<usize> = (0..n).filter(|&k| k != agent).collect();
        let outgoing = Vector::from_iterator(others.len(), others.iter().map(|&k| self.weights[(agent, k)]));
        let residual = linalg::remove_row_column(&self.weights, agent, agent);
        let radius = linalg::spectral_radius(&residual);
        if radius >= 1.0 - STABILITY_MARGIN {
            return Err(Error::UnstableResidualBlock {
                agent: agent + 1,
                radius,
            });
        }
        let mut effective = self.weights.clone();
        effective.column_mut(agent).fill(0.0);
        effective[(agent, agent)] = 1.0;
        Ok(EffectiveDecomposition {
            agent,
            others,
            outgoing,
            residual,
            effective,
            radius,
        })
    }

    /// Writes the matrix as headerless CSV with 15 significant digits.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_matrix_csv(&self.weights, w)
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        Self::new(read_matrix_csv(reader, "combination matrix csv")?)
    }
}

/// Post-intervention structure for one intervened agent.
///
/// `outgoing[j]` is the weight agent `others[j]` puts on the intervened
/// agent; `residual` couples the remaining agents among themselves, with rows
/// and columns ordered like `others`.
#[derive(Debug, Clone)]
pub struct EffectiveDecomposition {
    pub agent: usize,
    pub others: Vec<usize>,
    pub outgoing: Vector,
    pub residual: Matrix,
    /// Full matrix with the intervened agent's column replaced by a unit vector.
    pub effective: Matrix,
    /// Spectral radius of `residual`.
    pub radius: f64,
}

/// Formats with 15 significant digits.
pub(crate) fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.14e}")
    }
}

pub(crate) fn write_matrix_csv(m: &Matrix, mut w: impl Write) -> Result<()> {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&x| fmt_sig(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub(crate) fn read_matrix_csv(reader: impl Read, what: &str) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, f)| {
                f.parse::<f64>().map_err(|_| {
                    Error::parse(
                        format!("{what} line {}, column {}", i + 1, col + 1),
                        format!("not a number: {f:?}"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    format!("{what} line {}", i + 1),
                    format!("expected {} entries, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(n, m, |r, c| rows[r][c]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Adjacency {
        Adjacency::from_edges(n, (0..n).flat_map(|l| (0..n).map(move |k| (l, k)))).unwrap()
    }

    #[test]
    fn complete_graph_averaging_is_uniform() {
        let a = CombinationMatrix::from_rule(&complete(3), CombinationRule::Averaging).unwrap();
        for x in a.matrix().iter() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ring_weights_match_layout() {
        let a = CombinationMatrix::ring(4, 0.5).unwrap();
        for k in 0..4 {
            assert_eq!(a.weight(k, k), 0.5);
            assert_eq!(a.weight(k, (k + 1) % 4), 0.5);
            let s: f64 = a.matrix().column(k).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(a.weight(0, 2), 0.0);
    }

    #[test]
    fn averaging_columns_are_constant_on_support() {
        let adj = Adjacency::from_edges(3, [(0, 0), (0, 1), (1, 2), (2, 0), (2, 2)]).unwrap();
        let a = CombinationMatrix::from_rule(&adj, CombinationRule::Averaging).unwrap();
        for k in 0..3 {
            let nz: Vec<f64> = a.matrix().column(k).iter().copied().filter(|&x| x > 0.0).collect();
            assert!(nz.iter().all(|&x| x == nz[0]));
        }
    }

    #[test]
    fn rejects_disconnected_and_loopless_graphs() {
        let e = Adjacency::from_edges(3, [(0, 0), (0, 1), (1, 0), (2, 2)]).unwrap_err();
        assert!(matches!(e, Error::NotStronglyConnected { .. }));
        let e = Adjacency::from_edges(2, [(0, 1), (1, 0)]).unwrap_err();
        assert!(matches!(e, Error::NoSelfLoop(_)));
        assert!(matches!(
            Adjacency::from_edges(1, [(0, 0)]),
            Err(Error::TooFewAgents(1))
        ));
    }

    #[test]
    fn unreachable_pair_is_reported_in_the_right_direction() {
        // 0 <-> 1 -> 2 (2 cannot reach back)
        let adj_err = Adjacency::from_edges(3, [(0, 0), (0, 1), (1, 0), (1, 2), (2, 2)]).unwrap_err();
        match adj_err {
            Error::NotStronglyConnected { from, to } => {
                assert_eq!(from, 3);
                assert!(to == 1 || to == 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn metropolis_requires_self_loops() {
        let adj = Adjacency::from_edges(3, [(0, 0), (0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(
            CombinationMatrix::from_rule(&adj, CombinationRule::Metropolis),
            Err(Error::NoSelfLoop(_))
        ));
        let adj = Adjacency::from_edges(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0), (1, 0)]).unwrap();
        let a = CombinationMatrix::from_rule(&adj, CombinationRule::Metropolis).unwrap();
        assert!(a.matrix().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn ring_rule_rejects_non_ring() {
        let e = CombinationMatrix::from_rule(&complete(3), CombinationRule::UniformSelfWeight(0.5)).unwrap_err();
        assert!(matches!(e, Error::PatternViolation(_)));
    }

    #[test]
    fn rank_one_perron_vector_is_its_column() {
        let v = [0.5, 0.3, 0.2];
        let a = CombinationMatrix::fully_connected(&v).unwrap();
        let p = a.perron_vector().unwrap();
        for i in 0..3 {
            assert!((p[i] - v[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn doubly_stochastic_perron_vector_is_uniform() {
        let a = CombinationMatrix::ring(5, 0.3).unwrap();
        let p = a.perron_vector().unwrap();
        assert!(p.iter().all(|&x| (x - 0.2).abs() < 1e-10));
    }

    #[test]
    fn fully_connected_decomposition() {
        let v = [0.4, 0.35, 0.25];
        let a = CombinationMatrix::fully_connected(&v).unwrap();
        let dec = a.effective_decomposition(0).unwrap();
        assert_eq!(dec.others, vec![1, 2]);
        for j in 0..2 {
            assert!((dec.outgoing[j] - 0.4).abs() < 1e-15);
            for i in 0..2 {
                assert!((dec.residual[(i, j)] - v[i + 1]).abs() < 1e-15);
            }
        }
        assert!((dec.radius - 0.6).abs() < 1e-9);
        assert_eq!(dec.effective.column(0).as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn ring_decomposition_is_upper_bidiagonal() {
        let alpha = 0.3;
        let a = CombinationMatrix::ring(4, alpha).unwrap();
        let dec = a.effective_decomposition(0).unwrap();
        let r = &dec.residual;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j {
                    alpha
                } else if j == i + 1 {
                    1.0 - alpha
                } else {
                    0.0
                };
                assert_eq!(r[(i, j)], expected);
            }
        }
        assert_eq!(dec.outgoing.as_slice(), &[1.0 - alpha, 0.0, 0.0]);
        assert!((dec.radius - alpha).abs() < 1e-9);
    }

    #[test]
    fn non_stochastic_matrix_names_column() {
        let m = Matrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.4]);
        match CombinationMatrix::new(m).unwrap_err() {
            Error::NotStochastic { column, .. } => assert_eq!(column, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn csv_formats_parse() {
        let text = "3\n1,1,0\n0,1,1\n1,0,1\n";
        let adj = Adjacency::read_csv(text.as_bytes()).unwrap();
        assert!(adj.has_edge(0, 1) && adj.has_edge(2, 0) && !adj.has_edge(0, 2));
        let labelled = "a,b,c\n1,1,0\n0,1,1\n1,0,1\n";
        assert_eq!(Adjacency::read_csv(labelled.as_bytes()).unwrap(), adj);
        let edges = "# ring\n1,1\n1,2\n2,2\n2,3\n3,3\n3,1\n";
        assert_eq!(Adjacency::read_edge_list(edges.as_bytes()).unwrap(), adj);
        let bad = "2\n1,2\n1,1\n";
        assert!(matches!(Adjacency::read_csv(bad.as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn combination_csv_roundtrip_is_exact_enough() {
        let adj = Adjacency::from_edges(3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0), (0, 2)]).unwrap();
        let a = CombinationMatrix::from_rule(&adj, CombinationRule::Averaging).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let b = CombinationMatrix::read_csv(buf.as_slice()).unwrap();
        assert!((a.matrix() - b.matrix()).amax() < 1e-14);
    }

    #[test]
    fn hop_distances_follow_edge_direction() {
        // 0 -> 1 -> 2 -> 0, all with self-loops
        let adj = Adjacency::from_edges(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(adj.hop_distances_to(2), vec![Some(2), Some(1), Some(0)]);
    }
}
