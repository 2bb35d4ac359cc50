use serde::{Deserialize, Serialize};

use crate::geom::{self, Point};
use crate::mesh::{BoundaryKind, Mesh, Topology};

/// Boundary classification of a velocity node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Interior,
    /// On the boundary of body `i`.
    Gamma(usize),
    /// Outer boundary with prescribed velocity; the tag (if any) supplies it.
    Dirichlet(Option<usize>),
    /// Outer boundary with prescribed traction.
    Neumann(usize),
}

impl NodeClass {
    fn priority(self) -> u8 {
        match self {
            NodeClass::Interior => 0,
            NodeClass::Neumann(_) => 1,
            NodeClass::Dirichlet(_) => 2,
            NodeClass::Gamma(_) => 3,
        }
    }
}

/// Edge of the outer boundary carrying a traction condition.
#[derive(Clone, Copy, Debug)]
pub struct NeumannEdge {
    pub cell: usize,
    /// Local edge index (0: 01, 1: 12, 2: 20).
    pub local_edge: usize,
    pub tag: usize,
}

/// Taylor–Hood numbering. Velocity nodes are the mesh vertices followed by
/// the edge midpoints; velocity dof `2 * node + component`. Pressure dofs are
/// the vertices.
#[derive(Clone, Debug)]
pub struct DofMap {
    n_vertices: usize,
    topology: Topology,
    node_coords: Vec<Point>,
    node_class: Vec<NodeClass>,
    cell_nodes: Vec<[usize; 6]>,
    neumann_edges: Vec<NeumannEdge>,
}

fn rank_dirichlet(kind: BoundaryKind) -> u8 {
    match kind {
        BoundaryKind::Wall => 2,
        BoundaryKind::Inflow => 1,
        _ => 0,
    }
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let topology = mesh.topology();
        let nv = mesh.n_vertices();
        let mut node_coords = mesh.vertices().to_vec();
        node_coords.extend(topology.edges.iter().map(|e| geom::midpoint(mesh.vertices()[e[0]], mesh.vertices()[e[1]])));
        let n_nodes = node_coords.len();
        let tag_map = mesh.boundary_tag_map();
        let mut node_class = vec![NodeClass::Interior; n_nodes];
        let mut neumann_edges = Vec::new();
        let assign = |slot: &mut NodeClass, class: NodeClass| {
            let replace = class.priority() > slot.priority()
                || (class.priority() == slot.priority()
                    && match (class, *slot) {
                        // At wall/inflow corners the wall value wins.
                        (NodeClass::Dirichlet(Some(a)), NodeClass::Dirichlet(Some(b))) => {
                            rank_dirichlet(mesh.tags()[a].kind) > rank_dirichlet(mesh.tags()[b].kind)
                                || (rank_dirichlet(mesh.tags()[a].kind) == rank_dirichlet(mesh.tags()[b].kind) && a < b)
                        }
                        (NodeClass::Dirichlet(None), NodeClass::Dirichlet(Some(_))) => true,
                        (NodeClass::Gamma(a), NodeClass::Gamma(b)) => a < b,
                        (NodeClass::Neumann(a), NodeClass::Neumann(b)) => a < b,
                        _ => false,
                    });
            if replace {
                *slot = class;
            }
        };
        for (e, edge) in topology.edges.iter().enumerate() {
            if !topology.is_boundary_edge(e) {
                continue;
            }
            let tag = tag_map.get(&(edge[0], edge[1])).copied();
            let class = match tag.map(|t| mesh.tags()[t].kind) {
                Some(BoundaryKind::Swimmer(i)) => NodeClass::Gamma(i),
                Some(BoundaryKind::Outflow) => NodeClass::Neumann(tag.unwrap()),
                Some(_) => NodeClass::Dirichlet(tag),
                None => NodeClass::Dirichlet(None),
            };
            if let NodeClass::Neumann(t) = class {
                let cell = topology.edge_cells[e][0].unwrap();
                let local_edge = topology.cell_edges[cell].iter().position(|&x| x == e).unwrap();
                neumann_edges.push(NeumannEdge { cell, local_edge, tag: t });
            }
            for node in [edge[0], edge[1], nv + e] {
                assign(&mut node_class[node], class);
            }
        }
        let cell_nodes = mesh
            .cells()
            .iter()
            .zip(&topology.cell_edges)
            .map(|(c, e)| [c[0], c[1], c[2], nv + e[0], nv + e[1], nv + e[2]])
            .collect();
        DofMap { n_vertices: nv, topology, node_coords, node_class, cell_nodes, neumann_edges }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_nodes()
    }

    pub fn n_pressure(&self) -> usize {
        self.n_vertices
    }

    /// Total size of the velocity–pressure system.
    pub fn n_total(&self) -> usize {
        self.n_velocity() + self.n_pressure()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    pub fn node_class(&self, node: usize) -> NodeClass {
        self.node_class[node]
    }

    pub fn node_classes(&self) -> &[NodeClass] {
        &self.node_class
    }

    pub fn cell_nodes(&self, cell: usize) -> [usize; 6] {
        self.cell_nodes[cell]
    }

    pub fn neumann_edges(&self) -> &[NeumannEdge] {
        &self.neumann_edges
    }

    pub fn has_neumann(&self) -> bool {
        !self.neumann_edges.is_empty()
    }

    /// Velocity nodes on the boundary of `body`, ascending.
    pub fn gamma_nodes(&self, body: usize) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&n| self.node_class[n] == NodeClass::Gamma(body)).collect()
    }

    /// Velocity nodes with prescribed outer-boundary values, ascending.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&n| matches!(self.node_class[n], NodeClass::Dirichlet(_))).collect()
    }

    pub fn velocity_dof(node: usize, component: usize) -> usize {
        2 * node + component
    }

    /// Index of pressure dof `vertex` in the combined system.
    pub fn pressure_dof(&self, vertex: usize) -> usize {
        self.n_velocity() + vertex
    }

    /// Velocity at a node from a velocity vector.
    pub fn node_velocity(u: &[f64], node: usize) -> Point {
        [u[2 * node], u[2 * node + 1]]
    }

    /// Interpolates a nodal function `f` into a velocity vector.
    pub fn interpolate(&self, f: impl Fn(Point) -> Point) -> Vec<f64> {
        self.node_coords.iter().flat_map(|&x| f(x)).collect()
    }
}
