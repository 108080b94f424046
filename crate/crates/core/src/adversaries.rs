//! Lower-bound instances: fixed gadget graphs and adaptive oracles that
//! commit to weights and topology only when the agents force them to.

use crate::engine::{RevealedEdge, RevelationOracle};
use crate::graph::{build_cycle, build_n_tadpole, build_tadpole, WeightedGraph};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdversaryError {
    #[error("bad parameters: {0}")]
    BadParams(String),
}

fn bad(msg: impl Into<String>) -> AdversaryError {
    AdversaryError::BadParams(msg.into())
}

fn path(length: Rational, pieces: usize) -> Vec<Rational> {
    vec![length / Rational::from(pieces); pieces]
}

/// Tadpole on which lightest-edge exploration walks almost everything twice:
/// a `2ε` edge from `s` to the intersection, paths of length `1` (to `c1`)
/// and `1 - 2ε` (between `c1` and the intersection), and a tail of length
/// `1 - 2ε`. Every path is cut into `granularity` equal edges.
pub fn make_ale_lb_tadpole(eps: Rational, granularity: usize) -> Result<WeightedGraph, AdversaryError> {
    let two = Rational::integer(2);
    if !eps.is_positive() || eps >= Rational::new(1, 2) {
        return Err(bad("need 0 < eps < 1/2"));
    }
    if granularity == 0 {
        return Err(bad("granularity must be at least 1"));
    }
    let rest = Rational::ONE - two * eps;
    let mut cycle = vec![two * eps];
    cycle.extend(path(rest, granularity));
    cycle.extend(path(Rational::ONE, granularity));
    build_tadpole(&cycle, 1, &path(rest, granularity), "c0").map_err(|e| bad(e.to_string()))
}

/// Triangle with weights `1 + ε`, `1`, `1 - ε`.
pub fn make_energy_lb_cycle(eps: Rational) -> Result<WeightedGraph, AdversaryError> {
    if !eps.is_positive() || eps >= Rational::new(1, 2) {
        return Err(bad("need 0 < eps < 1/2"));
    }
    build_cycle(&[Rational::ONE + eps, Rational::ONE, Rational::ONE - eps]).map_err(|e| bad(e.to_string()))
}

fn inverse_integer(eps: Rational) -> Result<usize, AdversaryError> {
    if !eps.is_positive() || eps.numer() != 1 {
        return Err(bad("eps must be 1/J for a positive integer J"));
    }
    Ok(eps.denom() as usize)
}

/// Start at the intersection; two paths of length 1 to the far node and a
/// tail of length 1, all made of `ε` edges.
pub fn make_2_5_example(eps: Rational) -> Result<WeightedGraph, AdversaryError> {
    let j = inverse_integer(eps)?;
    let cycle = vec![eps; 2 * j];
    let tail = vec![eps; j];
    build_tadpole(&cycle, 0, &tail, "c0").map_err(|e| bad(e.to_string()))
}

/// Adaptive oracle: from `s` a unit edge to `c3`, a path of `ε = 1/J` edges
/// and `n` tails of total length `ε`. The path closes onto `c3` with an edge
/// of weight 1 as soon as an agent has walked `(J-3)ε` of it; if instead an
/// agent sets off towards `c3` first, the path closes right after the last
/// revealed node with an edge of weight `ε`.
#[derive(Debug, Clone)]
pub struct TimeLowerBound {
    j: usize,
    eps: Rational,
    tails: usize,
    /// `(index of c2 on the path, weight of (c2, c3))` once decided.
    committed: Option<(usize, Rational)>,
    deepest: usize,
}

/// Oracle for one tail of length `ε = 1/J`.
pub fn make_time_lb_adaptive(j: usize) -> Result<TimeLowerBound, AdversaryError> {
    TimeLowerBound::new(j, 1)
}

/// Oracle for `n ≥ 2` tails of length `ε/n` each.
pub fn make_ntad_lb(n: usize, j: usize) -> Result<TimeLowerBound, AdversaryError> {
    if n < 2 {
        return Err(bad("n-tadpole gadget needs n >= 2 (use the single-tail gadget)"));
    }
    TimeLowerBound::new(j, n)
}

/// The same gadget without tails: a cycle instance.
pub fn make_time_lb_cycle(j: usize) -> Result<TimeLowerBound, AdversaryError> {
    TimeLowerBound::new(j, 0)
}

impl TimeLowerBound {
    fn new(j: usize, tails: usize) -> Result<Self, AdversaryError> {
        if j < 4 {
            return Err(bad("J must be at least 4"));
        }
        Ok(TimeLowerBound {
            j,
            eps: Rational::new(1, j as i128),
            tails,
            committed: None,
            deepest: 0,
        })
    }

    pub fn epsilon(&self) -> Rational {
        self.eps
    }

    /// `Some(true)` if the long closing edge was chosen, `Some(false)` for the short one.
    pub fn long_closing_edge(&self) -> Option<bool> {
        self.committed.map(|(_, w)| w == Rational::ONE)
    }

    fn tail_label(&self, i: usize) -> String {
        if self.tails == 1 {
            "t1".to_string()
        } else {
            format!("t{}_1", i + 1)
        }
    }

    fn delta(&self) -> Rational {
        self.eps / Rational::from(self.tails.max(1))
    }

    fn commit_short(&mut self) {
        if self.committed.is_none() {
            self.committed = Some((self.deepest + 1, self.eps));
        }
    }

    fn edge(neighbor: String, weight: Rational) -> RevealedEdge {
        RevealedEdge { neighbor, weight }
    }
}

impl RevelationOracle for TimeLowerBound {
    fn start_label(&self) -> String {
        "s".into()
    }

    fn reveal(&mut self, label: &str) -> Vec<RevealedEdge> {
        if label == "s" {
            let mut out: Vec<RevealedEdge> = (0..self.tails)
                .map(|i| Self::edge(self.tail_label(i), self.delta()))
                .collect();
            out.push(Self::edge("p1".into(), self.eps));
            out.push(Self::edge("c3".into(), Rational::ONE));
            return out;
        }
        if label == "c3" {
            self.commit_short();
            let (m, w) = self.committed.unwrap();
            return vec![Self::edge("s".into(), Rational::ONE), Self::edge(format!("p{m}"), w)];
        }
        if let Some(k) = label.strip_prefix('p').and_then(|x| x.parse::<usize>().ok()) {
            self.deepest = self.deepest.max(k);
            if self.committed.is_none() && k == self.j - 3 {
                self.committed = Some((k, Rational::ONE));
            }
            let prev = if k == 1 { "s".to_string() } else { format!("p{}", k - 1) };
            let next = match self.committed {
                Some((m, w)) if m == k => Self::edge("c3".into(), w),
                _ => Self::edge(format!("p{}", k + 1), self.eps),
            };
            return vec![Self::edge(prev, self.eps), next];
        }
        // A tail end.
        vec![Self::edge("s".into(), self.delta())]
    }

    fn on_depart(&mut self, from: &str, to: &str) {
        if (from == "s" && to == "c3") || (from == "c3" && to == "s") {
            self.commit_short();
        }
    }

    fn finalize(&self) -> WeightedGraph {
        let (m, w) = self.committed.unwrap_or((self.j - 3, Rational::ONE));
        let mut cycle = vec![self.eps; m];
        cycle.push(w);
        cycle.push(Rational::ONE);
        let tails: Vec<(usize, Vec<Rational>)> = (0..self.tails).map(|_| (0, vec![self.delta()])).collect();
        let g = build_n_tadpole(&cycle, &tails, "c0").expect("gadget is well formed");
        let mut labels = vec!["s".to_string()];
        labels.extend((1..=m).map(|k| format!("p{k}")));
        labels.push("c3".into());
        labels.extend((0..self.tails).map(|i| self.tail_label(i)));
        g.relabel(labels).expect("labels are distinct")
    }

    fn total_weight_hint(&self) -> Rational {
        Rational::integer(4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Cycle(usize),
    Tail,
}

/// Adaptive oracle: three indistinguishable `1 - ε` edges leave `s`. The
/// first two branches entered close the cycle (through `ε` edges to `d1`,
/// `d2` and a huge edge between them); the branch entered last is the tail,
/// continuing with `1 + ε` to `e`.
#[derive(Debug, Clone)]
pub struct EnergyLowerBound {
    eps: Rational,
    infinity: Rational,
    roles: [Option<Branch>; 3],
    slots: [Option<usize>; 2],
}

pub const DEFAULT_INFINITY: i128 = 1000;

pub fn make_energy_lb_adaptive(eps: Rational) -> Result<EnergyLowerBound, AdversaryError> {
    EnergyLowerBound::new(eps, Rational::integer(DEFAULT_INFINITY))
}

impl EnergyLowerBound {
    pub fn new(eps: Rational, infinity: Rational) -> Result<Self, AdversaryError> {
        if !eps.is_positive() || eps >= Rational::ONE {
            return Err(bad("need 0 < eps < 1"));
        }
        if infinity <= Rational::integer(10) {
            return Err(bad("the blocking edge must outweigh the rest of the graph"));
        }
        Ok(EnergyLowerBound {
            eps,
            infinity,
            roles: [None; 3],
            slots: [None; 2],
        })
    }

    fn branch_label(i: usize) -> String {
        format!("a{}", i + 1)
    }

    fn assign(&mut self, i: usize) -> Branch {
        if let Some(b) = self.roles[i] {
            return b;
        }
        let b = match self.slots.iter().position(|s| s.is_none()) {
            Some(slot) => {
                self.slots[slot] = Some(i);
                Branch::Cycle(slot)
            }
            None => Branch::Tail,
        };
        self.roles[i] = Some(b);
        b
    }

    fn slot_branch(&mut self, slot: usize) -> usize {
        if let Some(i) = self.slots[slot] {
            return i;
        }
        let i = (0..3).find(|&i| self.roles[i].is_none()).expect("a free branch");
        self.roles[i] = Some(Branch::Cycle(slot));
        self.slots[slot] = Some(i);
        i
    }

    fn resolved(&self) -> ([usize; 2], usize) {
        let mut me = self.clone();
        let a = me.slot_branch(0);
        let b = me.slot_branch(1);
        let tail = (0..3).find(|&i| i != a && i != b).unwrap();
        ([a, b], tail)
    }
}

impl RevelationOracle for EnergyLowerBound {
    fn start_label(&self) -> String {
        "s".into()
    }

    fn reveal(&mut self, label: &str) -> Vec<RevealedEdge> {
        let one = Rational::ONE;
        let e = |n: String, w: Rational| RevealedEdge { neighbor: n, weight: w };
        match label {
            "s" => (0..3).map(|i| e(Self::branch_label(i), one - self.eps)).collect(),
            "d1" | "d2" => {
                let slot = if label == "d1" { 0 } else { 1 };
                let i = self.slot_branch(slot);
                let other = if slot == 0 { "d2" } else { "d1" };
                vec![e(Self::branch_label(i), self.eps), e(other.into(), self.infinity)]
            }
            "e" => {
                let ([a, b], _) = self.resolved();
                let tail = (0..3).find(|&i| i != a && i != b).unwrap();
                self.roles[tail] = Some(Branch::Tail);
                vec![e(Self::branch_label(tail), one + self.eps)]
            }
            _ => {
                let i: usize = label[1..].parse::<usize>().expect("branch label") - 1;
                let back = e("s".into(), one - self.eps);
                match self.assign(i) {
                    Branch::Cycle(slot) => vec![back, e(format!("d{}", slot + 1), self.eps)],
                    Branch::Tail => vec![back, e("e".into(), one + self.eps)],
                }
            }
        }
    }

    fn finalize(&self) -> WeightedGraph {
        let one = Rational::ONE;
        let ([a, b], tail) = self.resolved();
        let cycle = [one - self.eps, self.eps, self.infinity, self.eps, one - self.eps];
        let g = build_tadpole(&cycle, 0, &[one - self.eps, one + self.eps], "c0").expect("gadget is well formed");
        let labels = vec![
            "s".to_string(),
            Self::branch_label(a),
            "d1".into(),
            "d2".into(),
            Self::branch_label(b),
            Self::branch_label(tail),
            "e".into(),
        ];
        g.relabel(labels).expect("labels are distinct")
    }

    fn total_weight_hint(&self) -> Rational {
        self.infinity + Rational::integer(6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cycle_geometry;
    use crate::graph::Shape;
    use crate::rational::q;

    #[test]
    fn ale_gadget_shape() {
        let g = make_ale_lb_tadpole(q(1, 4), 2).unwrap();
        assert!(matches!(g.shape(), Shape::Tadpole { .. }));
        assert_eq!(g.cycle_length(), q(2, 1));
        assert_eq!(g.tail_length(0), q(1, 2));
        assert!(make_ale_lb_tadpole(q(1, 2), 2).is_err());
        assert!(make_ale_lb_tadpole(q(1, 4), 0).is_err());
    }

    #[test]
    fn energy_cycle_gadget() {
        let g = make_energy_lb_cycle(q(1, 4)).unwrap();
        assert_eq!(g.cycle_weights(), vec![q(5, 4), q(1, 1), q(3, 4)]);
        assert!(make_energy_lb_cycle(q(1, 2)).is_err());
    }

    #[test]
    fn doubled_path_family() {
        let g = make_2_5_example(q(1, 10)).unwrap();
        let geo = cycle_geometry(&g);
        assert_eq!((geo.d_short, geo.d_long, geo.d_t), (q(1, 1), q(1, 1), q(1, 1)));
        assert!(make_2_5_example(q(2, 7)).is_err());
    }

    #[test]
    fn time_gadget_default_commitment() {
        let o = make_time_lb_adaptive(10).unwrap();
        let g = o.finalize();
        assert_eq!(g.cycle_len(), 9);
        assert_eq!(g.shortest_distance("s", "c3").unwrap(), q(1, 1));
        assert_eq!(g.shortest_distance("s", "t1").unwrap(), q(1, 10));
        assert!(make_time_lb_adaptive(3).is_err());
        assert!(make_ntad_lb(1, 10).is_err());
        let g = make_ntad_lb(3, 100).unwrap().finalize();
        assert_eq!(g.shape(), Shape::NTadpole { tails: 3 });
        assert_eq!(g.shortest_distance("s", "t2_1").unwrap(), q(1, 300));
    }

    #[test]
    fn energy_gadget_default_commitment() {
        let o = make_energy_lb_adaptive(q(1, 10)).unwrap();
        let g = o.finalize();
        assert_eq!(g.shortest_distance("s", "e").unwrap(), q(2, 1));
        assert_eq!(g.label(5), "a3");
        assert!(make_energy_lb_adaptive(q(1, 1)).is_err());
    }
}
