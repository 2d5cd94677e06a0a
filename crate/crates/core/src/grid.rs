//! Network description, admittance assembly and slack partitioning.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::complex::{ComplexVector, SparseComplexMatrix};
use crate::error::{Error, Result};

/// One series branch in pi-model form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRecord {
    pub from: usize,
    pub to: usize,
    /// Series impedance `r + jx` in per-unit.
    pub impedance: Complex64,
    /// Total shunt admittance, split half to each terminal.
    pub shunt: Complex64,
    pub in_service: bool,
}

impl BranchRecord {
    pub fn new(from: usize, to: usize, impedance: Complex64) -> Self {
        Self {
            from,
            to,
            impedance,
            shunt: Complex64::new(0.0, 0.0),
            in_service: true,
        }
    }

    pub fn with_shunt(mut self, shunt: Complex64) -> Self {
        self.shunt = shunt;
        self
    }

    pub fn out_of_service(mut self) -> Self {
        self.in_service = false;
        self
    }

    pub fn admittance(&self) -> Complex64 {
        self.impedance.inv()
    }

    fn connects(&self, a: usize, b: usize) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

/// Consumed complex power at a node; negative active power is generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadRecord {
    pub node: usize,
    pub power: Complex64,
    /// Voltage exponent: 0 constant power, 1 constant current, 2 constant impedance.
    pub alpha: f64,
}

impl LoadRecord {
    pub fn new(node: usize, power: Complex64, alpha: f64) -> Self {
        Self { node, power, alpha }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TieMode {
    Open,
    Closed,
}

/// Raw grid description, as read from files, before assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInputs {
    pub branches: Vec<BranchRecord>,
    pub loads: Vec<LoadRecord>,
    /// Branches (by endpoint pair) whose status is controlled by [`TieMode`].
    pub ties: Vec<(usize, usize)>,
    /// External id of the slack node.
    pub slack: usize,
    pub slack_voltage: Complex64,
}

impl GridInputs {
    pub fn new(branches: Vec<BranchRecord>, loads: Vec<LoadRecord>) -> Self {
        Self {
            branches,
            loads,
            ties: Vec::new(),
            slack: 0,
            slack_voltage: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_ties(mut self, ties: Vec<(usize, usize)>) -> Self {
        self.ties = ties;
        self
    }

    pub fn with_slack(mut self, slack: usize, voltage: Complex64) -> Self {
        self.slack = slack;
        self.slack_voltage = voltage;
        self
    }

    /// Replaces every load exponent (nodes without a load record are unaffected,
    /// their power is zero).
    pub fn with_uniform_alpha(mut self, alpha: f64) -> Self {
        for load in &mut self.loads {
            load.alpha = alpha;
        }
        self
    }

    /// Sets the in-service flag of every tie branch according to `mode`.
    pub fn set_tie_mode(&self, mode: TieMode) -> Result<Self> {
        let mut out = self.clone();
        for &(a, b) in &self.ties {
            let mut found = false;
            for branch in out.branches.iter_mut().filter(|br| br.connects(a, b)) {
                branch.in_service = mode == TieMode::Closed;
                found = true;
            }
            if !found {
                return Err(Error::UnknownTie { from: a, to: b });
            }
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<GridModel> {
        GridModel::build(self)
    }
}

/// Rebuilds the grid with tie branches opened or closed.
pub fn set_tie_lines(inputs: &GridInputs, mode: TieMode) -> Result<GridModel> {
    inputs.set_tie_mode(mode)?.build()
}

/// Full bus admittance matrix from the in-service branches.
///
/// Diagonal: sum of incident series admittances plus half shunts.
/// Off-diagonal: negated series admittance of the connecting branch.
pub fn build_ybus(branches: &[BranchRecord], node_count: usize) -> SparseComplexMatrix {
    let mut triplets = Vec::with_capacity(4 * branches.len() + node_count);
    // Keep every diagonal in the pattern, even for isolated nodes.
    for k in 0..node_count {
        triplets.push((k, k, Complex64::new(0.0, 0.0)));
    }
    for br in branches.iter().filter(|br| br.in_service) {
        let y = br.admittance();
        let half = br.shunt * 0.5;
        triplets.push((br.from, br.from, y + half));
        triplets.push((br.to, br.to, y + half));
        triplets.push((br.from, br.to, -y));
        triplets.push((br.to, br.from, -y));
    }
    SparseComplexMatrix::from_triplets(node_count, node_count, triplets)
}

/// Blocks of the admittance matrix split against the slack node.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedYbus {
    pub slack: usize,
    /// Non-slack block, nodes in ascending order with the slack removed.
    pub y_nn: SparseComplexMatrix,
    /// Slack column restricted to non-slack rows.
    pub y_n0: ComplexVector,
    /// Slack row restricted to non-slack columns.
    pub y_0n: ComplexVector,
    pub y_00: Complex64,
}

impl PartitionedYbus {
    pub fn reassemble(&self) -> SparseComplexMatrix {
        let n = self.y_nn.nrows();
        let s = self.slack;
        let full = |k: usize| if k >= s { k + 1 } else { k };
        let mut triplets: Vec<_> = self
            .y_nn
            .iter()
            .map(|(r, c, v)| (full(r), full(c), v))
            .collect();
        triplets.push((s, s, self.y_00));
        for k in 0..n {
            if self.y_n0[k] != Complex64::new(0.0, 0.0) {
                triplets.push((full(k), s, self.y_n0[k]));
            }
            if self.y_0n[k] != Complex64::new(0.0, 0.0) {
                triplets.push((s, full(k), self.y_0n[k]));
            }
        }
        SparseComplexMatrix::from_triplets(n + 1, n + 1, triplets)
    }
}

pub fn partition(y_full: &SparseComplexMatrix, slack: usize) -> PartitionedYbus {
    let n = y_full.nrows() - 1;
    let reduced = |k: usize| if k > slack { k - 1 } else { k };
    let mut y_n0 = ComplexVector::zeros(n);
    let mut y_0n = ComplexVector::zeros(n);
    let mut y_00 = Complex64::new(0.0, 0.0);
    let mut triplets = Vec::with_capacity(y_full.nnz());
    for (r, c, v) in y_full.iter() {
        match (r == slack, c == slack) {
            (true, true) => y_00 = v,
            (true, false) => y_0n[reduced(c)] = v,
            (false, true) => y_n0[reduced(r)] = v,
            (false, false) => triplets.push((reduced(r), reduced(c), v)),
        }
    }
    PartitionedYbus {
        slack,
        y_nn: SparseComplexMatrix::from_triplets(n, n, triplets),
        y_n0,
        y_0n,
        y_00,
    }
}

/// Immutable, assembled grid. Internally the slack is node 0 and the
/// non-slack nodes are `1..=n`; vectors indexed by non-slack node use `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    node_count: usize,
    slack_voltage: Complex64,
    y_full: SparseComplexMatrix,
    blocks: PartitionedYbus,
    injections: ComplexVector,
    alpha: Vec<f64>,
    node_ids: Vec<usize>,
    in_service_branches: usize,
}

impl GridModel {
    pub fn build(inputs: &GridInputs) -> Result<Self> {
        let total = inputs
            .branches
            .iter()
            .flat_map(|b| [b.from, b.to])
            .chain(inputs.loads.iter().map(|l| l.node))
            .chain(core::iter::once(inputs.slack))
            .max()
            .map_or(1, |m| m + 1);

        if !(inputs.slack_voltage.re.is_finite() && inputs.slack_voltage.im.is_finite())
            || inputs.slack_voltage.norm() < crate::wirtinger::SHORT_CIRCUIT_FLOOR
        {
            return Err(Error::InvalidConfig(
                "slack voltage must be finite and nonzero",
            ));
        }

        for (index, br) in inputs.branches.iter().enumerate() {
            if br.from == br.to {
                return Err(Error::InvalidBranch {
                    index,
                    reason: "from and to nodes are equal",
                });
            }
            let finite = [br.impedance, br.shunt]
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite());
            if !finite {
                return Err(Error::InvalidBranch {
                    index,
                    reason: "non-finite impedance or shunt",
                });
            }
            if br.impedance == Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidBranch {
                    index,
                    reason: "zero series impedance",
                });
            }
        }
        for (i, a) in inputs.branches.iter().enumerate() {
            if let Some(b) = inputs.branches[..i]
                .iter()
                .find(|b| b.connects(a.from, a.to))
            {
                return Err(Error::DuplicateBranch {
                    from: b.from,
                    to: b.to,
                });
            }
        }

        // external id -> internal index with the slack moved to 0
        let slack = inputs.slack;
        let internal = |e: usize| match e.cmp(&slack) {
            core::cmp::Ordering::Equal => 0,
            core::cmp::Ordering::Less => e + 1,
            core::cmp::Ordering::Greater => e,
        };
        let mut node_ids = vec![0usize; total];
        for e in 0..total {
            node_ids[internal(e)] = e;
        }

        let branches: Vec<BranchRecord> = inputs
            .branches
            .iter()
            .map(|b| BranchRecord {
                from: internal(b.from),
                to: internal(b.to),
                ..*b
            })
            .collect();
        check_connected(&branches, total).map_err(|k| Error::Disconnected { node: node_ids[k] })?;

        let n = total - 1;
        let mut injections = ComplexVector::zeros(n);
        let mut alpha = vec![0.0; n];
        let mut seen = vec![false; n];
        for load in &inputs.loads {
            if load.node == slack {
                return Err(Error::InvalidLoad {
                    node: load.node,
                    reason: "load placed on the slack node",
                });
            }
            if !(load.power.re.is_finite() && load.power.im.is_finite() && load.alpha.is_finite()) {
                return Err(Error::InvalidLoad {
                    node: load.node,
                    reason: "non-finite power or exponent",
                });
            }
            let k = internal(load.node) - 1;
            if seen[k] {
                return Err(Error::InvalidLoad {
                    node: load.node,
                    reason: "more than one load record",
                });
            }
            seen[k] = true;
            injections[k] = -load.power;
            alpha[k] = load.alpha;
        }

        let y_full = build_ybus(&branches, total);
        let blocks = partition(&y_full, 0);
        Ok(Self {
            node_count: n,
            slack_voltage: inputs.slack_voltage,
            y_full,
            blocks,
            injections,
            alpha,
            node_ids,
            in_service_branches: branches.iter().filter(|b| b.in_service).count(),
        })
    }

    /// Number of non-slack nodes.
    pub fn n(&self) -> usize {
        self.node_count
    }

    pub fn slack_voltage(&self) -> Complex64 {
        self.slack_voltage
    }

    pub fn y_full(&self) -> &SparseComplexMatrix {
        &self.y_full
    }

    pub fn y_nn(&self) -> &SparseComplexMatrix {
        &self.blocks.y_nn
    }

    pub fn y_n0(&self) -> &ComplexVector {
        &self.blocks.y_n0
    }

    pub fn blocks(&self) -> &PartitionedYbus {
        &self.blocks
    }

    /// Power injected into the network at each non-slack node (negated load).
    pub fn injections(&self) -> &ComplexVector {
        &self.injections
    }

    /// Power consumed at each non-slack node at nominal voltage.
    pub fn loads(&self) -> ComplexVector {
        self.injections.iter().map(|s| -s).collect()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// External node id for each internal index (slack first).
    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    pub fn in_service_branches(&self) -> usize {
        self.in_service_branches
    }

    /// External ids of nodes whose exponent lies outside `[0, 2]`.
    pub fn alpha_out_of_range(&self) -> Vec<usize> {
        self.alpha
            .iter()
            .enumerate()
            .filter(|(_, a)| !(0.0..=2.0).contains(*a))
            .map(|(k, _)| self.node_ids[k + 1])
            .collect()
    }

    pub fn with_uniform_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha: vec![alpha; self.node_count],
            ..self.clone()
        }
    }

    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != self.node_count {
            return Err(Error::DimensionMismatch {
                expected: self.node_count,
                found: alpha.len(),
            });
        }
        Ok(Self {
            alpha,
            ..self.clone()
        })
    }

    /// Flat profile `v0 * 1` over the non-slack nodes.
    pub fn flat_start(&self) -> ComplexVector {
        ComplexVector::filled(self.node_count, self.slack_voltage)
    }
}

/// Returns the first internal node unreachable from node 0.
fn check_connected(branches: &[BranchRecord], total: usize) -> core::result::Result<(), usize> {
    let mut adjacency = vec![Vec::new(); total];
    for br in branches.iter().filter(|b| b.in_service) {
        adjacency[br.from].push(br.to);
        adjacency[br.to].push(br.from);
    }
    let mut reached = vec![false; total];
    let mut queue = VecDeque::from([0usize]);
    reached[0] = true;
    while let Some(k) = queue.pop_front() {
        for &m in &adjacency[k] {
            if !reached[m] {
                reached[m] = true;
                queue.push_back(m);
            }
        }
    }
    match reached.iter().position(|r| !r) {
        Some(k) => Err(k),
        None => Ok(()),
    }
}
