//! RRT* search tree with a bucket-grid spatial index.

use crate::geometry::ContinuousPoint;
use crate::gridmap::GridMap;

use super::collision::obstacle_free;
use super::PlanError;

pub type NodeId = usize;

/// Minimum decrease in cost-to-come that justifies re-parenting.
pub const REWIRE_EPSILON: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub point: ContinuousPoint,
    pub parent: Option<NodeId>,
    pub cost: f64,
}

/// Uniform bucket grid over `[0, width] x [0, height]`; points never move once inserted.
#[derive(Clone, Debug)]
struct BucketGrid {
    size: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<NodeId>>,
}

impl BucketGrid {
    fn new(width: f64, height: f64, size: f64) -> Self {
        let cols = ((width / size).ceil() as usize).max(1);
        let rows = ((height / size).ceil() as usize).max(1);
        Self {
            size,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
        }
    }

    fn coord(&self, v: f64, n: usize) -> usize {
        ((v / self.size).floor().max(0.0) as usize).min(n - 1)
    }

    fn bucket_of(&self, p: &ContinuousPoint) -> (usize, usize) {
        (self.coord(p.x, self.cols), self.coord(p.y, self.rows))
    }

    fn insert(&mut self, p: &ContinuousPoint, id: NodeId) {
        let (bx, by) = self.bucket_of(p);
        self.buckets[by * self.cols + bx].push(id);
    }

    fn bucket(&self, bx: usize, by: usize) -> &[NodeId] {
        &self.buckets[by * self.cols + bx]
    }
}

#[derive(Clone, Debug)]
pub struct Tree {
    nodes: Vec<Node>,
    children: Vec<Vec<NodeId>>,
    index: BucketGrid,
}

impl Tree {
    /// Tree holding only `root`, indexed over a `width x height` plane.
    pub fn new(root: ContinuousPoint, width: f64, height: f64, bucket_size: f64) -> Self {
        let mut tree = Self {
            nodes: Vec::new(),
            children: Vec::new(),
            index: BucketGrid::new(width, height, bucket_size.max(1e-3)),
        };
        tree.push(Node {
            point: root,
            parent: None,
            cost: 0.0,
        });
        tree
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id]
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = self.nodes.len();
        self.index.insert(&node.point, id);
        if let Some(parent) = node.parent {
            self.children[parent].push(id);
        }
        self.nodes.push(node);
        self.children.push(Vec::new());
        id
    }

    /// Adds a leaf under `parent` with cost `cost(parent) + |parent - point|`.
    pub fn add_child(&mut self, parent: NodeId, point: ContinuousPoint) -> NodeId {
        let cost = self.nodes[parent].cost + self.nodes[parent].point.distance(&point);
        self.push(Node {
            point,
            parent: Some(parent),
            cost,
        })
    }

    /// Node closest to `q`; ties go to the smallest id.
    pub fn nearest(&self, q: &ContinuousPoint) -> NodeId {
        let idx = &self.index;
        let (bx, by) = idx.bucket_of(q);
        let mut best: Option<(f64, NodeId)> = None;
        let max_ring = idx.cols.max(idx.rows);
        for ring in 0..=max_ring {
            if let Some((d2, _)) = best {
                // Every bucket in this ring is at least (ring - 1) buckets away from q.
                let gap = (ring as f64 - 1.0) * idx.size;
                if gap > 0.0 && gap * gap > d2 {
                    break;
                }
            }
            let (x0, x1) = (bx as i64 - ring as i64, bx as i64 + ring as i64);
            let (y0, y1) = (by as i64 - ring as i64, by as i64 + ring as i64);
            for y in y0.max(0)..=y1.min(idx.rows as i64 - 1) {
                let on_edge_row = y == y0 || y == y1;
                let xs: Box<dyn Iterator<Item = i64>> = if on_edge_row {
                    Box::new(x0.max(0)..=x1.min(idx.cols as i64 - 1))
                } else {
                    Box::new([x0, x1].into_iter().filter(|&x| x >= 0 && x < idx.cols as i64))
                };
                for x in xs {
                    for &id in idx.bucket(x as usize, y as usize) {
                        let d2 = self.nodes[id].point.distance_squared(q);
                        let better = match best {
                            None => true,
                            Some((bd, bid)) => d2 < bd || (d2 == bd && id < bid),
                        };
                        if better {
                            best = Some((d2, id));
                        }
                    }
                }
            }
        }
        best.map(|(_, id)| id).expect("tree always holds its root")
    }

    /// Ids of all nodes within `radius` of `q` (inclusive), ascending.
    pub fn near(&self, q: &ContinuousPoint, radius: f64) -> Vec<NodeId> {
        let idx = &self.index;
        let r2 = radius * radius;
        let lo = idx.bucket_of(&ContinuousPoint::new(q.x - radius, q.y - radius));
        let hi = idx.bucket_of(&ContinuousPoint::new(q.x + radius, q.y + radius));
        let mut out = Vec::new();
        for y in lo.1..=hi.1 {
            for x in lo.0..=hi.0 {
                out.extend(
                    idx.bucket(x, y)
                        .iter()
                        .copied()
                        .filter(|&id| self.nodes[id].point.distance_squared(q) <= r2),
                );
            }
        }
        out.sort_unstable();
        out
    }

    /// Moves `id` under `new_parent` and recomputes the costs of its whole subtree.
    pub fn reparent(&mut self, id: NodeId, new_parent: NodeId) {
        if let Some(old) = self.nodes[id].parent {
            self.children[old].retain(|&c| c != id);
        }
        self.nodes[id].parent = Some(new_parent);
        self.children[new_parent].push(id);
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let parent = self.nodes[n].parent.expect("non-root node");
            self.nodes[n].cost =
                self.nodes[parent].cost + self.nodes[parent].point.distance(&self.nodes[n].point);
            stack.extend_from_slice(&self.children[n]);
        }
    }

    /// Points from the root to `id`.
    pub fn path_to(&self, id: NodeId) -> Vec<ContinuousPoint> {
        let mut out = vec![self.nodes[id].point];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(self.nodes[p].point);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Inserts `x_new` under the cheapest collision-free neighbour, then re-parents every
    /// neighbour whose cost-to-come drops by more than [`REWIRE_EPSILON`] through it.
    ///
    /// Candidates are the nodes within `radius` plus `nearest`. `nearest` is tried first
    /// and only a strictly cheaper parent displaces it.
    pub fn extend_and_rewire(
        &mut self,
        map: &GridMap,
        x_new: ContinuousPoint,
        radius: f64,
        nearest: NodeId,
    ) -> Result<NodeId, PlanError> {
        let neighbors = self.near(&x_new, radius);
        let mut best: Option<(f64, NodeId)> = None;
        for cand in std::iter::once(nearest).chain(neighbors.iter().copied()) {
            let node = &self.nodes[cand];
            let cost = node.cost + node.point.distance(&x_new);
            let improves = best.is_none_or(|(b, _)| cost < b - REWIRE_EPSILON);
            if improves && obstacle_free(map, node.point, x_new) {
                best = Some((cost, cand));
            }
        }
        let (_, parent) = best.ok_or(PlanError::NoValidParent)?;
        let new_id = self.add_child(parent, x_new);

        for n in neighbors {
            if n == parent {
                continue;
            }
            let via_new = self.nodes[new_id].cost + x_new.distance(&self.nodes[n].point);
            if via_new < self.nodes[n].cost - REWIRE_EPSILON
                && obstacle_free(map, x_new, self.nodes[n].point)
            {
                self.reparent(n, new_id);
            }
        }
        Ok(new_id)
    }

    /// Cost-to-come of every node recomputed from the root along parent links.
    pub fn recomputed_costs(&self) -> Vec<f64> {
        (0..self.nodes.len())
            .map(|id| {
                let path = self.path_to(id);
                path.windows(2).fold(0.0, |acc, w| acc + w[0].distance(&w[1]))
            })
            .collect()
    }
}
