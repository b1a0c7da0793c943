use serde::{Deserialize, Serialize};

use super::LivePalette;
use crate::graph::{Color, NodeId, Palette};
use crate::multitrial::ColorCodec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Unassigned,
    Sparse,
    Outlier,
    Core,
    PutAside,
    Bad,
}

/// Dynamic coloring state of one node.
#[derive(Clone, Debug)]
pub struct NodeState {
    pub id: NodeId,
    /// Initial palette Ψ_v.
    pub initial: Palette,
    /// Current palette Ψ(v): Ψ_v minus colors taken by neighbors.
    pub live: LivePalette,
    pub color: Option<Color>,
    pub role: Role,
    pub leader: bool,
    nbr_colored: Vec<u64>,
    colored_nbrs: usize,
    /// Distinct wire values of neighbor colors that lie outside Ψ_v.
    outside: Vec<u64>,
}

impl NodeState {
    pub fn new(id: NodeId, initial: Palette, degree: usize) -> NodeState {
        NodeState {
            id,
            live: LivePalette::new(initial.clone()),
            initial,
            color: None,
            role: Role::Unassigned,
            leader: false,
            nbr_colored: vec![0; degree.div_ceil(64)],
            colored_nbrs: 0,
            outside: Vec::new(),
        }
    }

    pub fn is_colored(&self) -> bool {
        self.color.is_some()
    }

    pub fn nbr_colored(&self, pos: usize) -> bool {
        self.nbr_colored[pos / 64] >> (pos % 64) & 1 == 1
    }

    pub fn colored_neighbors(&self) -> usize {
        self.colored_nbrs
    }

    /// Records that the neighbor at `pos` took the color carried by wire value `value`.
    pub fn on_neighbor_colored(&mut self, pos: usize, value: u64, codec: &ColorCodec) {
        if self.nbr_colored(pos) {
            return;
        }
        self.nbr_colored[pos / 64] |= 1 << (pos % 64);
        self.colored_nbrs += 1;
        let hits = codec.matches(self.id, &self.initial, value);
        if hits.is_empty() {
            if let Err(i) = self.outside.binary_search(&value) {
                self.outside.insert(i, value);
            }
        }
        for c in hits {
            self.live.remove(c);
        }
    }

    /// Takes `c` permanently.
    pub fn adopt(&mut self, c: Color) {
        assert!(self.color.is_none(), "node {} colored twice", self.id);
        assert!(self.live.contains(c), "node {} adopts unavailable color {c}", self.id);
        self.color = Some(c);
    }

    /// The unique live color carried by wire value `value`, if any.
    pub fn decode_live(&self, value: u64, codec: &ColorCodec) -> Option<Color> {
        if codec.is_raw() {
            return self.live.contains(value).then_some(value);
        }
        let mut hits = self.live.iter().filter(|&c| codec.value(self.id, c) == value);
        let first = hits.next();
        if hits.next().is_some() {
            None
        } else {
            first
        }
    }

    /// cs_v: distinct colors taken in N(v) outside Ψ_v.
    pub fn chromatic_slack(&self) -> usize {
        self.outside.len()
    }

    /// |Ψ(v)| minus the number of uncolored neighbors.
    pub fn permanent_slack(&self, degree: usize) -> i64 {
        self.live.len() as i64 - (degree - self.colored_nbrs) as i64
    }
}

/// Fresh states for every node of an instance.
pub fn initial_states(inst: &crate::graph::ColoringInstance) -> Vec<NodeState> {
    (0..inst.n() as NodeId).map(|v| NodeState::new(v, inst.palettes[v as usize].clone(), inst.graph.degree(v))).collect()
}
