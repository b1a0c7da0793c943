//! Seeded instance generators addressable by spec strings such as `gnp:n=1000,p=0.01`.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{ColoringInstance, Graph, InstanceMeta, NodeId, Palette, Variant};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    Syntax(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },
}

fn invalid(name: &str, reason: impl Into<String>) -> GenError {
    GenError::InvalidParameter { name: name.into(), reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GenKind {
    Gnp { n: usize, p: f64 },
    CliqueUnion { sizes: Vec<usize>, p: f64 },
    PlantedAcd(Planted),
    LowDegree(Planted),
    TransversalStress { k: usize, delta: usize, t: usize },
    LineGraph(Box<GenSpec>),
}

/// Cliques of size Δ+1−zeta with `zeta` external stubs per member, plus a sparse remainder.
#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    pub n: usize,
    pub delta: usize,
    pub zeta: usize,
    /// Fraction of nodes outside the planted cliques.
    pub sparse: f64,
    /// Target degree of sparse nodes as a fraction of Δ.
    pub sdeg: f64,
    /// Probability of deleting each intra-clique edge.
    pub anti: f64,
    /// Make the sparse part bipartite (and hence triangle-free).
    pub bipartite: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PaletteMode {
    /// `{0..Δ}` everywhere.
    NonList,
    /// Random (Δ+1)-subsets of a color space of size `factor·(Δ+1)`.
    List { factor: u64 },
    /// Random (Δ+1)-subsets of a 63-bit color space.
    Wide,
    /// `{0..d_v}` per node.
    DegPlusOne,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub palettes: PaletteMode,
    /// Colors added to every palette beyond the base size.
    pub extra: u64,
}

struct Params {
    name: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn take<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, GenError> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|_| invalid(key, format!("cannot parse '{s}'"))),
        }
    }

    fn need<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, GenError> {
        self.take(key)?.ok_or_else(|| invalid(key, format!("missing for {}", self.name)))
    }

    fn finish(self) -> Result<(), GenError> {
        match self.map.keys().next() {
            Some(k) => Err(invalid(k, format!("unknown for {}", self.name))),
            None => Ok(()),
        }
    }
}

fn prob(name: &str, p: f64) -> Result<f64, GenError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(invalid(name, "must lie in [0,1]"))
    }
}

fn positive(name: &str, x: usize) -> Result<usize, GenError> {
    if x == 0 {
        Err(invalid(name, "must be positive"))
    } else {
        Ok(x)
    }
}

impl GenSpec {
    pub fn parse(s: &str) -> Result<GenSpec, GenError> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        if kind == "line-graph" {
            let base = GenSpec::parse(rest)?;
            let (palettes, extra) = (base.palettes, base.extra);
            return Ok(GenSpec { kind: GenKind::LineGraph(Box::new(base)), palettes, extra });
        }
        let mut map = BTreeMap::new();
        for kv in rest.split(',').filter(|x| !x.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| GenError::Syntax(format!("expected key=value, got '{kv}'")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut p = Params { name: kind.to_string(), map };
        let extra: u64 = p.take("extra")?.unwrap_or(0);
        let palettes = match (p.take::<u64>("list")?, p.take::<String>("space")?, p.take::<u8>("deg")?) {
            (_, Some(s), _) if s == "wide" => PaletteMode::Wide,
            (_, Some(s), _) => return Err(invalid("space", format!("unknown '{s}'"))),
            (_, _, Some(1)) => PaletteMode::DegPlusOne,
            (Some(f), _, _) if f >= 2 => PaletteMode::List { factor: f },
            (Some(1), _, _) | (None, _, _) => PaletteMode::NonList,
            (Some(_), _, _) => return Err(invalid("list", "factor must be at least 1")),
        };
        let kind = match kind {
            "gnp" => GenKind::Gnp { n: p.need("n")?, p: prob("p", p.need("p")?)? },
            "clique-union" => {
                let sizes: Vec<usize> = if let Some(s) = p.take::<String>("sizes")? {
                    s.split('+')
                        .map(|x| x.parse::<usize>().map_err(|_| invalid("sizes", format!("cannot parse '{x}'"))))
                        .collect::<Result<_, _>>()?
                } else {
                    vec![p.need::<usize>("size")?; p.need::<usize>("k")?]
                };
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(invalid("sizes", "must be positive"));
                }
                GenKind::CliqueUnion { sizes, p: prob("p", p.take("p")?.unwrap_or(0.0))? }
            }
            "planted-acd" | "low-degree" => {
                let low = kind == "low-degree";
                let delta = positive("delta", p.need("delta")?)?;
                let zeta: usize = p.take("zeta")?.unwrap_or(if low { 2 } else { 1 });
                if zeta >= delta {
                    return Err(invalid("zeta", "must be below delta"));
                }
                let n = match (p.take::<usize>("n")?, p.take::<usize>("k")?) {
                    (Some(n), _) => positive("n", n)?,
                    (None, Some(k)) => positive("k", k)? * (delta + 1 - zeta),
                    (None, None) => return Err(invalid("n", "either n or k is required")),
                };
                let sparse = prob("sparse", p.take("sparse")?.unwrap_or(if low { 0.5 } else { 0.1 }))?;
                let sdeg = prob("sdeg", p.take("sdeg")?.unwrap_or(if low { 1.0 } else { 0.5 }))?;
                let anti = prob("anti", p.take("anti")?.unwrap_or(0.0))?;
                let bipartite = p.take::<u8>("bipartite")?.unwrap_or(0) == 1;
                if low {
                    let lg = (n.max(2) as f64).log2().ceil() as usize;
                    if delta > lg * lg {
                        return Err(invalid("delta", format!("low-degree requires delta <= log2(n)^2 = {}", lg * lg)));
                    }
                }
                let pl = Planted { n, delta, zeta, sparse, sdeg, anti, bipartite };
                if low {
                    GenKind::LowDegree(pl)
                } else {
                    GenKind::PlantedAcd(pl)
                }
            }
            "transversal-stress" => {
                let k: usize = p.need("k")?;
                let t: usize = p.need("t")?;
                let delta: usize = p.need("delta")?;
                if k < 2 || t < 2 {
                    return Err(invalid("k", "k and t must be at least 2"));
                }
                if (delta as f64) < 64.0 + 12.0 * ((k * t) as f64).ln() {
                    return Err(invalid("delta", "must be at least 64 + 12 ln(kt)"));
                }
                GenKind::TransversalStress { k, delta, t }
            }
            other => return Err(GenError::Syntax(format!("unknown generator '{other}'"))),
        };
        p.finish()?;
        Ok(GenSpec { kind, palettes, extra })
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pal = match self.palettes {
            PaletteMode::NonList => String::new(),
            PaletteMode::List { factor } => format!(",list={factor}"),
            PaletteMode::Wide => ",space=wide".into(),
            PaletteMode::DegPlusOne => ",deg=1".into(),
        };
        let pal = if self.extra > 0 && !matches!(self.kind, GenKind::LineGraph(_)) { format!("{pal},extra={}", self.extra) } else { pal };
        match &self.kind {
            GenKind::Gnp { n, p } => write!(f, "gnp:n={n},p={p}{pal}"),
            GenKind::CliqueUnion { sizes, p } => {
                let s: Vec<String> = sizes.iter().map(|x| x.to_string()).collect();
                write!(f, "clique-union:sizes={},p={p}{pal}", s.join("+"))
            }
            GenKind::PlantedAcd(pl) | GenKind::LowDegree(pl) => {
                let name = if matches!(self.kind, GenKind::LowDegree(_)) { "low-degree" } else { "planted-acd" };
                write!(
                    f,
                    "{name}:n={},delta={},zeta={},sparse={},sdeg={},anti={}{}{pal}",
                    pl.n,
                    pl.delta,
                    pl.zeta,
                    pl.sparse,
                    pl.sdeg,
                    pl.anti,
                    if pl.bipartite { ",bipartite=1" } else { "" }
                )
            }
            GenKind::TransversalStress { k, delta, t } => write!(f, "transversal-stress:k={k},delta={delta},t={t}"),
            GenKind::LineGraph(base) => write!(f, "line-graph:{base}"),
        }
    }
}

/// Parses `spec` and generates the instance for `seed`.
pub fn generate(spec: &str, seed: u64) -> Result<ColoringInstance, GenError> {
    Ok(generate_spec(&GenSpec::parse(spec)?, seed))
}

pub fn generate_spec(spec: &GenSpec, seed: u64) -> ColoringInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut meta = InstanceMeta { description: spec.to_string(), ..Default::default() };
    let graph = match &spec.kind {
        GenKind::Gnp { n, p } => gnp(*n, *p, &mut rng),
        GenKind::CliqueUnion { sizes, p } => clique_union(sizes, *p, &mut rng),
        GenKind::PlantedAcd(pl) | GenKind::LowDegree(pl) => {
            let (g, omega) = planted(pl, &mut rng);
            meta.clique_number = omega;
            g
        }
        GenKind::TransversalStress { k, delta, t } => {
            let (g, parts) = transversal_stress(*k, *delta, *t, &mut rng);
            meta.parts = Some(parts);
            g
        }
        GenKind::LineGraph(base) => {
            let b = generate_spec(base, seed);
            let dg = b.graph.max_degree();
            meta.base_max_degree = Some(dg);
            let lg = line_graph(&b.graph);
            let size = (2 * dg).saturating_sub(1).max(1) as u64 + spec.extra;
            let mut prng = ChaCha8Rng::seed_from_u64(seed);
            prng.set_stream(1);
            let (palettes, space) = assign_palettes(&lg, spec.palettes, size, &mut prng);
            let variant = Variant::EdgeColoringLifted;
            return ColoringInstance { graph: lg, palettes, color_space: space, variant, meta };
        }
    };
    let mut prng = ChaCha8Rng::seed_from_u64(seed);
    prng.set_stream(1);
    let size = graph.max_degree() as u64 + 1 + spec.extra;
    let (palettes, space) = assign_palettes(&graph, spec.palettes, size, &mut prng);
    let variant = match spec.palettes {
        PaletteMode::NonList => Variant::DeltaPlusOne,
        PaletteMode::DegPlusOne => Variant::DegPlusOneList,
        _ => Variant::DeltaPlusOneList,
    };
    ColoringInstance { graph, palettes, color_space: space, variant, meta }
}

fn assign_palettes(g: &Graph, mode: PaletteMode, size: u64, rng: &mut ChaCha8Rng) -> (Vec<Palette>, u64) {
    let n = g.node_count();
    match mode {
        PaletteMode::NonList => (vec![Palette::range(size); n], size),
        PaletteMode::DegPlusOne => {
            ((0..n as NodeId).map(|v| Palette::range(g.degree(v) as u64 + 1)).collect(), g.max_degree() as u64 + 1)
        }
        PaletteMode::List { factor } => {
            let space = factor * size;
            let p = (0..n)
                .map(|_| {
                    let cols: Vec<u64> = index::sample(rng, space as usize, size as usize).into_iter().map(|c| c as u64).collect();
                    Palette::from_colors(cols).unwrap()
                })
                .collect();
            (p, space)
        }
        PaletteMode::Wide => {
            let space = 1u64 << 63;
            let p = (0..n)
                .map(|_| {
                    let mut cols = Vec::with_capacity(size as usize);
                    while cols.len() < size as usize {
                        let c = rng.gen_range(0..space);
                        if !cols.contains(&c) {
                            cols.push(c);
                        }
                    }
                    Palette::from_colors(cols).unwrap()
                })
                .collect();
            (p, space)
        }
    }
}

/// G(n,p) by geometric skipping over the pair sequence.
pub fn gnp(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    gnp_pairs(n, p, rng, |u, v| edges.push((u, v)));
    Graph::from_edges_dedup(n, edges)
}

fn gnp_pairs(n: usize, p: f64, rng: &mut ChaCha8Rng, mut f: impl FnMut(NodeId, NodeId)) {
    if p <= 0.0 || n < 2 {
        return;
    }
    if p >= 1.0 {
        for u in 0..n as NodeId {
            for v in u + 1..n as NodeId {
                f(u, v);
            }
        }
        return;
    }
    let lq = (1.0 - p).ln();
    let (mut v, mut w): (i64, i64) = (1, -1);
    let n = n as i64;
    while v < n {
        let r: f64 = rng.gen::<f64>();
        w += 1 + ((1.0 - r).ln() / lq).floor() as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            f(w as NodeId, v as NodeId);
        }
    }
}

fn clique_union(sizes: &[usize], p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let n: usize = sizes.iter().sum();
    let mut owner = Vec::with_capacity(n);
    let mut edges = Vec::new();
    let mut base = 0u32;
    for (i, &s) in sizes.iter().enumerate() {
        for u in 0..s as u32 {
            owner.push(i);
            for v in u + 1..s as u32 {
                edges.push((base + u, base + v));
            }
        }
        base += s as u32;
    }
    gnp_pairs(n, p, rng, |u, v| {
        if owner[u as usize] != owner[v as usize] {
            edges.push((u, v));
        }
    });
    Graph::from_edges_dedup(n, edges)
}

/// Returns the graph and its clique number when known by construction.
fn planted(pl: &Planted, rng: &mut ChaCha8Rng) -> (Graph, Option<usize>) {
    let size = pl.delta + 1 - pl.zeta;
    let dense_target = ((1.0 - pl.sparse) * pl.n as f64).round() as usize;
    let k = dense_target / size;
    let n_dense = k * size;
    let n = pl.n.max(n_dense);
    let mut edges = Vec::new();
    let mut group = vec![u32::MAX; n];
    for c in 0..k {
        let base = (c * size) as NodeId;
        for u in 0..size as NodeId {
            group[(base + u) as usize] = c as u32;
            for v in u + 1..size as NodeId {
                if pl.anti == 0.0 || !rng.gen_bool(pl.anti) {
                    edges.push((base + u, base + v));
                }
            }
        }
    }
    // Stub pairing for external edges of clique nodes and for the sparse part.
    let sd = ((pl.sdeg * pl.delta as f64).round() as usize).min(pl.delta);
    let mut stubs: Vec<NodeId> = Vec::new();
    for v in 0..n_dense as NodeId {
        stubs.extend(std::iter::repeat_n(v, pl.zeta));
    }
    for v in n_dense as NodeId..n as NodeId {
        stubs.extend(std::iter::repeat_n(v, sd));
    }
    let side = |v: NodeId| -> u32 { v % 2 };
    for _round in 0..3 {
        stubs.shuffle(rng);
        let mut left = Vec::new();
        for pair in stubs.chunks(2) {
            if pair.len() < 2 {
                left.extend_from_slice(pair);
                continue;
            }
            let (u, v) = (pair[0], pair[1]);
            let same_group = group[u as usize] != u32::MAX && group[u as usize] == group[v as usize];
            let both_sparse = u as usize >= n_dense && v as usize >= n_dense;
            let bad_side = pl.bipartite && both_sparse && side(u) == side(v);
            if u == v || same_group || bad_side {
                left.extend_from_slice(pair);
            } else {
                edges.push((u.min(v), u.max(v)));
            }
        }
        stubs = left;
    }
    let g = Graph::from_edges_dedup(n, edges);
    let omega = if pl.bipartite && k == 0 && g.edge_count() > 0 { Some(2) } else { None };
    (g, omega)
}

/// Parts of size D (largest D with D < kΔ/(16 ln D)); cross-part edges with probability Δ/(2n).
fn transversal_stress(k: usize, delta: usize, t: usize, rng: &mut ChaCha8Rng) -> (Graph, Vec<Vec<NodeId>>) {
    let d = stress_part_size(k, delta);
    let n = d * t;
    let p = delta as f64 / (2.0 * n as f64);
    let mut edges = Vec::new();
    gnp_pairs(n, p, rng, |u, v| {
        if u as usize / d != v as usize / d {
            edges.push((u, v));
        }
    });
    let parts = (0..t).map(|i| (i * d..(i + 1) * d).map(|x| x as NodeId).collect()).collect();
    (Graph::from_edges_dedup(n, edges), parts)
}

pub fn stress_part_size(k: usize, delta: usize) -> usize {
    let bound = (k * delta) as f64 / 16.0;
    let mut d = 2usize;
    while ((d + 1) as f64) < bound / ((d + 1) as f64).ln() {
        d += 1;
    }
    d
}

/// Line graph: one node per edge of `g` (in `g.edges()` order), adjacent when edges share an endpoint.
pub fn line_graph(g: &Graph) -> Graph {
    let edge_list: Vec<(NodeId, NodeId)> = g.edges().collect();
    let mut incident: Vec<Vec<NodeId>> = vec![Vec::new(); g.node_count()];
    for (i, &(u, v)) in edge_list.iter().enumerate() {
        incident[u as usize].push(i as NodeId);
        incident[v as usize].push(i as NodeId);
    }
    let mut edges = Vec::new();
    for inc in &incident {
        for a in 0..inc.len() {
            for b in a + 1..inc.len() {
                edges.push((inc[a], inc[b]));
            }
        }
    }
    Graph::from_edges_dedup(edge_list.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    #[test]
    fn line_graph_of_triangle_is_triangle() {
        let l = line_graph(&named::complete(3));
        assert_eq!(l, named::complete(3));
    }

    #[test]
    fn line_graph_of_path_is_an_edge() {
        let l = line_graph(&named::path(3));
        assert_eq!(l.node_count(), 2);
        assert_eq!(l.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn empty_gnp() {
        let inst = generate("gnp:n=5,p=0", 9).unwrap();
        assert_eq!(inst.n(), 5);
        assert_eq!(inst.delta(), 0);
        assert!(inst.palettes.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(generate("gnp:n=5,p=1.5", 0), Err(GenError::InvalidParameter { .. })));
        assert!(matches!(generate("clique-union:sizes=3+0", 0), Err(GenError::InvalidParameter { .. })));
        assert!(matches!(generate("gnp:n=5", 0), Err(GenError::InvalidParameter { .. })));
        assert!(matches!(generate("mystery:n=5", 0), Err(GenError::Syntax(_))));
        assert!(matches!(generate("gnp:n=5,p=0.1,q=2", 0), Err(GenError::InvalidParameter { .. })));
    }

    #[test]
    fn generation_is_reproducible() {
        for spec in [
            "gnp:n=200,p=0.05",
            "clique-union:k=4,size=10,p=0.02",
            "planted-acd:n=500,delta=30,zeta=3,list=3",
            "low-degree:n=400,delta=16",
            "line-graph:gnp:n=40,p=0.2",
        ] {
            let a = generate(spec, 11).unwrap();
            let b = generate(spec, 11).unwrap();
            assert_eq!(a.graph, b.graph, "{spec}");
            assert_eq!(a.palettes, b.palettes, "{spec}");
            let c = generate(spec, 12).unwrap();
            assert_ne!(a.graph, c.graph, "{spec}");
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for spec in ["gnp:n=200,p=0.05", "planted-acd:n=500,delta=30,zeta=3,sparse=0.1,sdeg=0.5,anti=0,list=3"] {
            let s = GenSpec::parse(spec).unwrap();
            assert_eq!(GenSpec::parse(&s.to_string()).unwrap(), s);
        }
    }

    #[test]
    fn gnp_density_is_plausible() {
        let g = generate("gnp:n=2000,p=0.01", 5).unwrap().graph;
        let expected = 0.01 * 2000.0 * 1999.0 / 2.0;
        let m = g.edge_count() as f64;
        assert!((m - expected).abs() < 5.0 * expected.sqrt(), "{m} vs {expected}");
    }

    #[test]
    fn planted_respects_degree_cap_and_cliques() {
        let inst = generate("planted-acd:n=1000,delta=40,zeta=4,sparse=0.2", 1).unwrap();
        assert!(inst.delta() <= 40);
        let g = &inst.graph;
        // Node 0 sits in a clique of size 37 (= Δ+1−zeta).
        for v in 1..37 {
            assert!(g.has_edge(0, v));
        }
    }

    #[test]
    fn bipartite_planted_instance_is_triangle_free() {
        let inst = generate("planted-acd:n=300,delta=40,sparse=1,sdeg=1,bipartite=1", 2).unwrap();
        assert_eq!(inst.meta.clique_number, Some(2));
        let g = &inst.graph;
        for (u, v) in g.edges() {
            assert_eq!(g.common_neighbor_count(u, v), 0);
        }
    }

    #[test]
    fn list_palettes_have_delta_plus_one_colors() {
        let inst = generate("gnp:n=100,p=0.1,list=3", 4).unwrap();
        let k = inst.delta() + 1;
        assert_eq!(inst.color_space, 3 * k as u64);
        assert!(inst.palettes.iter().all(|p| p.len() == k));
        inst.validate().unwrap();
    }

    #[test]
    fn line_graph_palettes_have_two_delta_minus_one_colors() {
        let inst = generate("line-graph:gnp:n=60,p=0.1", 3).unwrap();
        let dg = inst.meta.base_max_degree.unwrap();
        assert!(inst.palettes.iter().all(|p| p.len() == 2 * dg - 1));
        assert!(inst.delta() <= 2 * dg - 2);
        inst.validate().unwrap();
    }

    #[test]
    fn stress_part_size_matches_definition() {
        for (k, delta) in [(2, 64), (4, 100), (8, 200)] {
            let d = stress_part_size(k, delta);
            let f = |x: usize| (x as f64) < (k * delta) as f64 / (16.0 * (x as f64).ln());
            assert!(f(d) && !f(d + 1), "k={k} delta={delta} d={d}");
        }
        assert_eq!(stress_part_size(2, 64), 4);
    }
}
