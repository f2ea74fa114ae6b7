//! Cell membership with join-order leadership and versioned routing tables.
//!
//! Rules applied by [`CellState::join`] and [`CellState::leave`]:
//!
//! - The first node to join an empty cell becomes its leader.
//! - The joiner receives the lowest-indexed free address from the cell's block,
//!   the routing-table version goes up by one and the new table is sent to it.
//! - When the leader leaves, the most recent joiner still present takes over.
//!   Leaves never change the version.
//! - Released addresses go to the back of the free list.
//!
//! [`run_script`] folds a timestamped event list over a set of initially empty
//! cells. Delivery is synchronous and lossless.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::IpAllocation;

/// First address of the global pool; cell blocks are carved upward from here.
pub const DEFAULT_BASE_ADDR: Ipv4Addr = Ipv4Addr::new(10, 0, 0, 0);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error("node id must be non-empty")]
    EmptyNodeId,
    #[error("node {node} is already a member of cell {cell}")]
    DuplicateJoin { node: NodeId, cell: u32 },
    #[error("cell {cell} is full: its address pool is exhausted")]
    PoolExhausted { cell: u32 },
    #[error("node {node} is not a member of cell {cell}")]
    NotMember { node: NodeId, cell: u32 },
    #[error("cell {cell} does not exist ({cells} cells)")]
    UnknownCell { cell: u32, cells: u32 },
    #[error("timestamp {time} does not follow {previous}")]
    NonMonotonicTime { time: u64, previous: u64 },
    #[error("address space overflows IPv4 from base {base} with {total} addresses")]
    AddressOverflow { base: Ipv4Addr, total: u32 },
    #[error("invariant violated in cell {cell}: {detail}")]
    Invariant { cell: u32, detail: String },
}

impl CellError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyNodeId => "empty_node_id",
            Self::DuplicateJoin { .. } => "duplicate_join",
            Self::PoolExhausted { .. } => "pool_exhausted",
            Self::NotMember { .. } => "not_member",
            Self::UnknownCell { .. } => "unknown_cell",
            Self::NonMonotonicTime { .. } => "non_monotonic_time",
            Self::AddressOverflow { .. } => "address_overflow",
            Self::Invariant { .. } => "invariant_violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, CellError> {
        let id = id.into();
        if id.is_empty() {
            return Err(CellError::EmptyNodeId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for NodeId {
    type Err = CellError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingTable {
    pub version: u64,
    pub entries: BTreeMap<NodeId, Ipv4Addr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellState {
    pub cell_id: u32,
    #[serde(skip)]
    block: Vec<Ipv4Addr>,
    ip_pool: VecDeque<Ipv4Addr>,
    /// Join order, earliest first.
    members: Vec<NodeId>,
    leader: Option<NodeId>,
    table: RoutingTable,
}

/// State change produced by one join or leave.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellDelta {
    Joined {
        ip: Ipv4Addr,
        became_leader: bool,
        /// The table (with the new version) delivered to the joiner.
        table_sent: RoutingTable,
    },
    Left {
        ip_released: Ipv4Addr,
        was_leader: bool,
        new_leader: Option<NodeId>,
    },
}

impl CellState {
    /// An empty cell owning `block`.
    pub fn new(cell_id: u32, block: Vec<Ipv4Addr>) -> Self {
        Self {
            cell_id,
            ip_pool: block.iter().copied().collect(),
            block,
            members: Vec::new(),
            leader: None,
            table: RoutingTable::default(),
        }
    }

    pub fn block(&self) -> &[Ipv4Addr] {
        &self.block
    }

    pub fn free_ips(&self) -> impl Iterator<Item = &Ipv4Addr> {
        self.ip_pool.iter()
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn leader(&self) -> Option<&NodeId> {
        self.leader.as_ref()
    }

    pub fn table(&self) -> &RoutingTable {
        &self.table
    }

    pub fn version(&self) -> u64 {
        self.table.version
    }

    pub fn is_member(&self, node: &NodeId) -> bool {
        self.table.entries.contains_key(node)
    }

    pub fn ip_of(&self, node: &NodeId) -> Option<Ipv4Addr> {
        self.table.entries.get(node).copied()
    }

    pub fn join(&mut self, node: NodeId) -> Result<CellDelta, CellError> {
        if self.is_member(&node) {
            return Err(CellError::DuplicateJoin {
                node,
                cell: self.cell_id,
            });
        }
        let ip = self
            .ip_pool
            .pop_front()
            .ok_or(CellError::PoolExhausted { cell: self.cell_id })?;
        let became_leader = self.leader.is_none();
        if became_leader {
            self.leader = Some(node.clone());
        }
        self.members.push(node.clone());
        self.table.entries.insert(node, ip);
        self.table.version += 1;
        Ok(CellDelta::Joined {
            ip,
            became_leader,
            table_sent: self.table.clone(),
        })
    }

    pub fn leave(&mut self, node: &NodeId) -> Result<CellDelta, CellError> {
        let ip_released = self
            .table
            .entries
            .remove(node)
            .ok_or_else(|| CellError::NotMember {
                node: node.clone(),
                cell: self.cell_id,
            })?;
        self.members.retain(|m| m != node);
        self.ip_pool.push_back(ip_released);
        let was_leader = self.leader.as_ref() == Some(node);
        if was_leader {
            self.leader = self.members.last().cloned();
        }
        let new_leader = if was_leader {
            self.leader.clone()
        } else {
            None
        };
        Ok(CellDelta::Left {
            ip_released,
            was_leader,
            new_leader,
        })
    }

    /// Checks leader, table and address-conservation invariants.
    pub fn check_invariants(&self) -> Result<(), CellError> {
        let fail = |detail: String| {
            Err(CellError::Invariant {
                cell: self.cell_id,
                detail,
            })
        };
        match &self.leader {
            None if !self.members.is_empty() => return fail("nonempty cell without leader".into()),
            Some(l) if !self.members.contains(l) => {
                return fail(format!("leader {l} not a member"))
            }
            _ => {}
        }
        if self.table.entries.len() != self.members.len()
            || !self
                .members
                .iter()
                .all(|m| self.table.entries.contains_key(m))
        {
            return fail("routing table does not match membership".into());
        }
        let mut all: Vec<Ipv4Addr> = self
            .table
            .entries
            .values()
            .chain(self.ip_pool.iter())
            .copied()
            .collect();
        all.sort_unstable();
        let mut block = self.block.clone();
        block.sort_unstable();
        if all != block {
            return fail("assigned and free addresses do not partition the block".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventOp {
    Join,
    Leave,
}

impl EventOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Join => "join",
            Self::Leave => "leave",
        }
    }
}

impl FromStr for EventOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "join" => Ok(Self::Join),
            "leave" => Ok(Self::Leave),
            other => Err(format!("unknown op '{other}' (expected join or leave)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub time: u64,
    pub op: EventOp,
    pub cell: u32,
    pub node: NodeId,
}

impl Event {
    pub fn join(time: u64, cell: u32, node: &str) -> Self {
        Self {
            time,
            op: EventOp::Join,
            cell,
            node: NodeId::new(node).expect("non-empty id"),
        }
    }

    pub fn leave(time: u64, cell: u32, node: &str) -> Self {
        Self {
            time,
            op: EventOp::Leave,
            cell,
            node: NodeId::new(node).expect("non-empty id"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventResult {
    Joined,
    JoinedAsLeader,
    Left,
    LeaderHandoff,
    CellEmptied,
}

impl EventResult {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Joined => "joined",
            Self::JoinedAsLeader => "joined_as_leader",
            Self::Left => "left",
            Self::LeaderHandoff => "leader_handoff",
            Self::CellEmptied => "cell_emptied",
        }
    }
}

/// One applied event with the cell's state after it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub time: u64,
    pub op: EventOp,
    pub cell: u32,
    pub node: NodeId,
    pub result: EventResult,
    pub leader: Option<NodeId>,
    pub version: u64,
    /// Address assigned (join) or released (leave).
    pub ip: Ipv4Addr,
    #[serde(skip)]
    pub delta: CellDelta,
}

/// A set of cells sharing one address space. Node ids are unique across
/// cells: a node belongs to at most one cell at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    allocation: IpAllocation,
    cells: Vec<CellState>,
    location: HashMap<NodeId, u32>,
    last_time: Option<u64>,
}

impl Network {
    pub fn new(allocation: IpAllocation) -> Result<Self, CellError> {
        Self::with_base(allocation, DEFAULT_BASE_ADDR)
    }

    pub fn with_base(allocation: IpAllocation, base: Ipv4Addr) -> Result<Self, CellError> {
        let base_u = u32::from(base);
        if base_u.checked_add(allocation.total_ips).is_none() {
            return Err(CellError::AddressOverflow {
                base,
                total: allocation.total_ips,
            });
        }
        let cells = (0..allocation.cells)
            .map(|c| {
                let block = allocation
                    .block(c)
                    .map(|i| Ipv4Addr::from(base_u + i))
                    .collect();
                CellState::new(c, block)
            })
            .collect();
        Ok(Self {
            allocation,
            cells,
            location: HashMap::new(),
            last_time: None,
        })
    }

    pub fn allocation(&self) -> &IpAllocation {
        &self.allocation
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<CellState> {
        self.cells
    }

    /// Applies one event. On error the network is left unchanged.
    pub fn apply(&mut self, event: &Event) -> Result<LogEntry, CellError> {
        if let Some(previous) = self.last_time {
            if event.time <= previous {
                return Err(CellError::NonMonotonicTime {
                    time: event.time,
                    previous,
                });
            }
        }
        let cells = self.allocation.cells;
        let idx = event.cell as usize;
        if event.cell >= cells {
            return Err(CellError::UnknownCell {
                cell: event.cell,
                cells,
            });
        }
        let delta = match event.op {
            EventOp::Join => {
                if let Some(&cell) = self.location.get(&event.node) {
                    return Err(CellError::DuplicateJoin {
                        node: event.node.clone(),
                        cell,
                    });
                }
                let delta = self.cells[idx].join(event.node.clone())?;
                self.location.insert(event.node.clone(), event.cell);
                delta
            }
            EventOp::Leave => {
                let delta = self.cells[idx].leave(&event.node)?;
                self.location.remove(&event.node);
                delta
            }
        };
        self.last_time = Some(event.time);
        let cell = &self.cells[idx];
        let (result, ip) = match &delta {
            CellDelta::Joined {
                ip,
                became_leader: true,
                ..
            } => (EventResult::JoinedAsLeader, *ip),
            CellDelta::Joined { ip, .. } => (EventResult::Joined, *ip),
            CellDelta::Left { ip_released, .. } if cell.members.is_empty() => {
                (EventResult::CellEmptied, *ip_released)
            }
            CellDelta::Left {
                ip_released,
                was_leader: true,
                ..
            } => (EventResult::LeaderHandoff, *ip_released),
            CellDelta::Left { ip_released, .. } => (EventResult::Left, *ip_released),
        };
        Ok(LogEntry {
            time: event.time,
            op: event.op,
            cell: event.cell,
            node: event.node.clone(),
            result,
            leader: cell.leader.clone(),
            version: cell.version(),
            ip,
            delta,
        })
    }

    pub fn check_invariants(&self) -> Result<(), CellError> {
        self.cells.iter().try_for_each(CellState::check_invariants)
    }
}

/// A failed script: the offending event's position and the cause.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("event {index}: {source}")]
pub struct ScriptError {
    pub index: usize,
    #[source]
    pub source: CellError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub cells: Vec<CellState>,
    pub log: Vec<LogEntry>,
}

/// Runs `events` against `allocation.cells` empty cells, verifying every cell
/// invariant after each event. Aborts at the first failing event.
pub fn run_script(events: &[Event], allocation: IpAllocation) -> Result<SimOutcome, ScriptError> {
    let mut net = Network::new(allocation).map_err(|source| ScriptError { index: 0, source })?;
    let mut log = Vec::with_capacity(events.len());
    for (index, event) in events.iter().enumerate() {
        let entry = net
            .apply(event)
            .map_err(|source| ScriptError { index, source })?;
        net.cells[event.cell as usize]
            .check_invariants()
            .map_err(|source| ScriptError { index, source })?;
        log.push(entry);
    }
    Ok(SimOutcome {
        cells: net.into_cells(),
        log,
    })
}
