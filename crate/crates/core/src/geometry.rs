//! Midpoint, longest edge and the derived distances of a graph's cycle.

use crate::graph::{EdgeId, NodeId, WeightedGraph};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Midpoint {
    /// The point opposite the reference node is a node.
    Node(NodeId),
    /// The point lies strictly inside `edge`, `offset` away from `v_long`.
    Edge { edge: EdgeId, offset: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleGeometry {
    /// Cycle node the midpoint is measured from.
    pub reference: NodeId,
    pub cycle_length: Rational,
    pub midpoint: Midpoint,
    pub v_long: NodeId,
    pub v_short: NodeId,
    pub d_long: Rational,
    pub d_short: Rational,
    pub e_mid_length: Rational,
    pub e_max: EdgeId,
    pub d_i: Rational,
    pub d_t: Rational,
}

impl CycleGeometry {
    pub fn e_mid(&self) -> Option<EdgeId> {
        match self.midpoint {
            Midpoint::Node(_) => None,
            Midpoint::Edge { edge, .. } => Some(edge),
        }
    }

    pub fn v_mid(&self) -> Option<NodeId> {
        match self.midpoint {
            Midpoint::Node(v) => Some(v),
            Midpoint::Edge { .. } => None,
        }
    }
}

/// Geometry with the reference chosen from the start node: the start itself
/// when it lies on the cycle, otherwise the node where its tail attaches.
pub fn cycle_geometry(g: &WeightedGraph) -> CycleGeometry {
    let s = g.start();
    let reference = g.entry_node(s);
    let mut geo = cycle_geometry_at(g, reference);
    let dist = g.distances_from(s);
    match g.tail_position(s) {
        Some((t, _)) => {
            let tail = &g.tails()[t];
            geo.d_i = dist[reference];
            geo.d_t = dist[*tail.nodes.last().unwrap()];
        }
        None if g.tails().len() == 1 => {
            geo.d_i = dist[g.tails()[0].attach];
            geo.d_t = g.tail_length(0);
        }
        None => {}
    }
    geo
}

/// Midpoint and arc distances measured from an arbitrary cycle node.
/// `d_i` and `d_t` are left at zero.
pub fn cycle_geometry_at(g: &WeightedGraph, reference: NodeId) -> CycleGeometry {
    assert!(g.is_cycle_node(reference), "reference must lie on the cycle");
    let m = g.cycle_len();
    let weights = g.cycle_weights();
    let total: Rational = weights.iter().sum();
    let half = total / Rational::integer(2);

    let mut e_max = 0;
    for (k, w) in weights.iter().enumerate() {
        if *w > weights[e_max] {
            e_max = k;
        }
    }

    // Walk forward from the reference until the next node passes the half-way point.
    let mut pos = Rational::ZERO;
    let mut step = 0;
    loop {
        let k = (reference + step) % m;
        let next = pos + weights[k];
        if pos == half {
            return CycleGeometry {
                reference,
                cycle_length: total,
                midpoint: Midpoint::Node(k),
                v_long: k,
                v_short: k,
                d_long: half,
                d_short: half,
                e_mid_length: Rational::ZERO,
                e_max,
                d_i: Rational::ZERO,
                d_t: Rational::ZERO,
            };
        }
        if next > half {
            let forward = k;
            let backward = (k + 1) % m;
            let d_forward = pos;
            let d_backward = total - next;
            let (v_long, d_long, v_short, d_short) = if d_backward > d_forward {
                (backward, d_backward, forward, d_forward)
            } else {
                (forward, d_forward, backward, d_backward)
            };
            return CycleGeometry {
                reference,
                cycle_length: total,
                midpoint: Midpoint::Edge {
                    edge: k,
                    offset: half - d_long,
                },
                v_long,
                v_short,
                d_long,
                d_short,
                e_mid_length: weights[k],
                e_max,
                d_i: Rational::ZERO,
                d_t: Rational::ZERO,
            };
        }
        pos = next;
        step += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle, build_tadpole};
    use crate::rational::q;

    fn ints(ws: &[i128]) -> Vec<Rational> {
        ws.iter().map(|&w| Rational::integer(w)).collect()
    }

    #[test]
    fn unit_square_midpoint_on_node() {
        let g = build_cycle(&ints(&[1, 1, 1, 1])).unwrap();
        let geo = cycle_geometry(&g);
        assert_eq!(geo.midpoint, Midpoint::Node(2));
        assert_eq!((geo.d_long, geo.d_short), (q(2, 1), q(2, 1)));
        assert_eq!(geo.e_mid_length, Rational::ZERO);
    }

    #[test]
    fn skewed_triangle_midpoint_on_edge() {
        let g = build_cycle(&[q(5, 4), q(1, 1), q(3, 4)]).unwrap();
        let geo = cycle_geometry(&g);
        assert_eq!(geo.e_mid(), Some(1));
        assert_eq!((geo.v_long, geo.d_long), (1, q(5, 4)));
        assert_eq!((geo.v_short, geo.d_short), (2, q(3, 4)));
        assert_eq!(geo.e_max, 0);
        assert_eq!(geo.d_short + geo.d_long + geo.e_mid_length, q(3, 1));
    }

    #[test]
    fn triangle_with_node_midpoint() {
        let g = build_cycle(&ints(&[1, 1, 2])).unwrap();
        let geo = cycle_geometry(&g);
        assert_eq!(geo.v_mid(), Some(2));
        assert_eq!(geo.d_long, q(2, 1));
        assert_eq!(geo.e_max, 2);
    }

    #[test]
    fn e_max_ties_pick_smallest_index() {
        let g = build_cycle(&ints(&[2, 1, 2, 2])).unwrap();
        assert_eq!(cycle_geometry(&g).e_max, 0);
    }

    #[test]
    fn tail_distances() {
        let g = build_tadpole(&ints(&[1, 1, 1]), 1, &ints(&[2, 1]), "c0").unwrap();
        let geo = cycle_geometry(&g);
        assert_eq!(geo.reference, 0);
        assert_eq!((geo.d_i, geo.d_t), (q(1, 1), q(3, 1)));

        let g = g.with_start("t1").unwrap();
        let geo = cycle_geometry(&g);
        assert_eq!(geo.reference, 1);
        assert_eq!((geo.d_i, geo.d_t), (q(2, 1), q(1, 1)));
    }
}
