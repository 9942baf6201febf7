//! Control/data message definitions, the analytic message-size budget and a
//! bit-exact wire codec.
//!
//! Wire convention: fields are packed most-significant-bit first in the
//! order given by each `encode_*` function, then zero-padded to a whole
//! byte. Positions and radio ranges travel as whole meters, energy metrics
//! as 32-bit fixed point (millijoules / whole packets / microwatts).

use std::fmt;

use crate::types::{NodeId, Position, Protocol, ScenarioConfig, SimTime, Variant};

/// Message type codes. 1–5 follow the protocol's explicit assignments,
/// 6 the worked repair-permission example, the rest are artifact-assigned.
pub const TYPE_RREQ: u8 = 1;
pub const TYPE_RREQ_REPAIR: u8 = 2;
pub const TYPE_RREP: u8 = 3;
pub const TYPE_LINK_FAIL: u8 = 4;
pub const TYPE_REPAIR_REQUEST: u8 = 5;
pub const TYPE_REPAIR_PERMISSION: u8 = 6;
pub const TYPE_HELLO: u8 = 7;
pub const TYPE_ACK: u8 = 8;
pub const TYPE_PROACTIVE_ACK: u8 = 9;
pub const TYPE_DATA: u8 = 10;
pub const TYPE_DATA_ACK: u8 = 11;
pub const TYPE_DETECTION_REQUEST: u8 = 12;
pub const TYPE_DETECTION_PROBE: u8 = 13;
pub const TYPE_SESSION_INFO: u8 = 14;

/// Wire width of the message type field. The analytic formulas below keep
/// the printed 3-bit (beacon) and 2-bit (data) constants; the actual codec
/// needs 4 bits for the full code table, and the size theorems are
/// re-verified under that width in the test suite.
pub const TYPE_FIELD_BITS: u32 = 4;

/// Fixed-point width for energy/power metric fields.
pub const METRIC_FIELD_BITS: u32 = 32;

/// `⌈log₂ v⌉` for `v ≥ 2`.
pub fn ceil_log2(v: u64) -> u32 {
    debug_assert!(v >= 2);
    64 - (v - 1).leading_zeros()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizeError {
    ParameterTooSmall { name: &'static str, value: u64 },
}

impl fmt::Display for SizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeError::ParameterTooSmall { name, value } => {
                write!(f, "bit budget parameter {name} = {value} is below 2")
            }
        }
    }
}

impl std::error::Error for SizeError {}

/// The scenario-wide parameters every field width derives from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetParams {
    /// Total node count N.
    pub n: u64,
    /// Topology side X, meters.
    pub x: u64,
    /// Topology side Y, meters.
    pub y: u64,
    /// Minimum radio range among all nodes, meters.
    pub r_min: u64,
    /// Maximum radio range among all nodes, meters.
    pub r_max: u64,
    /// Total simulation time TM, ticks.
    pub tm: u64,
    /// Upper limit of data packets per session, PAC.
    pub pac: u64,
}

impl BudgetParams {
    pub fn new(
        n: u64,
        x: u64,
        y: u64,
        r_min: u64,
        r_max: u64,
        tm: u64,
        pac: u64,
    ) -> Result<Self, SizeError> {
        for (name, value) in [
            ("N", n),
            ("X", x),
            ("Y", y),
            ("R_min", r_min),
            ("R_max", r_max),
            ("TM", tm),
            ("PAC", pac),
        ] {
            if value < 2 {
                return Err(SizeError::ParameterTooSmall { name, value });
            }
        }
        Ok(BudgetParams { n, x, y, r_min, r_max, tm, pac })
    }
}

/// Bits of one beacon: 3 + ⌈log₂N⌉ + ⌈log₂X⌉ + ⌈log₂Y⌉ + ⌈log₂R_max⌉ + ⌈log₂TM⌉.
pub fn bits_hello(p: &BudgetParams) -> u64 {
    3 + (ceil_log2(p.n) + ceil_log2(p.x) + ceil_log2(p.y) + ceil_log2(p.r_max) + ceil_log2(p.tm))
        as u64
}

/// Bits added to a route request by the HELLO-free attributes:
/// log₂X + log₂Y + log₂√(X²+Y²) − 3 − log₂R_min, evaluated with real logs,
/// rounded up to whole bits and floored at zero.
pub fn bits_add_rreq(p: &BudgetParams) -> u64 {
    let x = p.x as f64;
    let y = p.y as f64;
    let r = p.r_min as f64;
    let v = x.log2() + y.log2() + (x * x + y * y).sqrt().log2() - 3.0 - r.log2();
    if v <= 0.0 {
        0
    } else {
        v.ceil() as u64
    }
}

/// Signed bit difference between one link-fail message and the two extra
/// data-packet transmissions it avoids. N cancels; always negative.
pub fn bits_link_fail_delta(p: &BudgetParams) -> i64 {
    let n = ceil_log2(p.n) as i64;
    let pac = ceil_log2(p.pac) as i64;
    let tm = ceil_log2(p.tm) as i64;
    (3 + 4 * n + pac) - 2 * (3 + 2 * n + tm + pac)
}

/// Bits of one repair-permission message, exact form before the PAC < N
/// approximation: 3 + 3⌈log₂N⌉ + ⌈log₂PAC⌉.
pub fn bits_repair_permission(p: &BudgetParams) -> u64 {
    3 + (3 * ceil_log2(p.n) + ceil_log2(p.pac)) as u64
}

// ---------------------------------------------------------------------------
// Message structs
// ---------------------------------------------------------------------------

/// Protocol-specific route-request metric field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RreqMetric {
    /// AODV / MFR: no metric field.
    None,
    /// Minimum residual energy along the path so far, joules (whole mJ on wire).
    MinResidualEnergy(f64),
    /// Residual packet capacity f_Eng, packets (whole packets on wire).
    ResidualPacketCapacity(f64),
    /// Minimum per-hop transmission power so far, milliwatts (µW on wire);
    /// `None` until the first router computes the first hop.
    MinTransPower(Option<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rreq {
    /// True for route-repair requests (type 2).
    pub repair: bool,
    pub source: NodeId,
    /// Source location; for repair requests this slot carries the
    /// initiator's location (the cone origin of the directional flood).
    pub source_location: Position,
    pub destination: NodeId,
    pub session_id: u64,
    pub number_of_data_packets: u32,
    pub initiator: NodeId,
    /// 0 iff the initiator is the source; otherwise Z+1 where Z is the
    /// number of routers between source and initiator.
    pub max_hop_count_difference: u32,
    pub router_sequence: Vec<NodeId>,
    /// Parallel to `router_sequence`; populated by MFR only.
    pub router_locations: Vec<Position>,
    /// Classical variant: the per-hop counter carried instead of the
    /// router sequence. Zero in the HELLO-free variant.
    pub hop_count_field: u32,
    pub timestamp: SimTime,
    pub metric: RreqMetric,
    /// Repair requests only: the destination's last known location, the
    /// directional flood's target.
    pub target_location: Option<Position>,
}

impl Rreq {
    pub fn message_type_id(&self) -> u8 {
        if self.repair {
            TYPE_RREQ_REPAIR
        } else {
            TYPE_RREQ
        }
    }

    /// Hop count of the path the request has traversed.
    pub fn hop_count(&self, variant: Variant) -> u32 {
        match variant {
            Variant::Classical => self.hop_count_field + 1,
            Variant::MinusHello => self.router_sequence.len() as u32 + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rrep {
    pub destination: NodeId,
    pub destination_location: Position,
    pub source: NodeId,
    pub session_id: u64,
    pub initiator: NodeId,
    pub max_hop_count_difference: u32,
    pub current_hop_count: u32,
    pub optimum_router_sequence: Vec<NodeId>,
    pub timestamp: SimTime,
    /// HELLO-free variant: the flood's aim point (the source's location as
    /// known to the reply's originator).
    pub target_location: Option<Position>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkFail {
    pub source: NodeId,
    pub destination: NodeId,
    /// The node about to leave its predecessor's radio circle.
    pub sender: NodeId,
    pub predecessor: NodeId,
    pub session_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairRequest {
    pub source: NodeId,
    pub destination: NodeId,
    pub session_id: u64,
    pub link_break_timestamp: SimTime,
    pub initiator: NodeId,
    /// β: the initiator's measured source→initiator delay.
    pub recv_delay_source: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairPermission {
    pub source: NodeId,
    pub destination: NodeId,
    pub session_id: u64,
    pub grantee: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hello {
    pub sender: NodeId,
    pub location: Position,
    pub radio_range: f64,
    pub timestamp: SimTime,
}

/// HELLO-ACK and RREQ-ACK. In the HELLO-free variant the ACK additionally
/// lists the sender's known downlink neighbors (ids and locations) for
/// exposed-terminal reasoning.
#[derive(Debug, Clone, PartialEq)]
pub struct Ack {
    pub sender: NodeId,
    pub location: Position,
    pub radio_range: f64,
    pub timestamp: SimTime,
    pub downlink_neighbors: Vec<(NodeId, Position)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProactiveAck {
    pub sender: NodeId,
    pub location: Position,
    pub radio_range: f64,
    pub timestamp: SimTime,
    pub min_receive_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataPacket {
    pub source: NodeId,
    pub destination: NodeId,
    pub session_id: u64,
    /// 1-based sequence id within the session.
    pub sequence: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataAck {
    pub acker: NodeId,
    pub source: NodeId,
    pub destination: NodeId,
    pub session_id: u64,
    pub sequence: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRequest {
    pub detector: NodeId,
    pub wait_interval: SimTime,
    pub timestamp: SimTime,
    /// The detector's neighbor list; every recipient probes the others.
    pub targets: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionProbe {
    pub prober: NodeId,
    pub target: NodeId,
    pub detector: NodeId,
    pub timestamp: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionDirection {
    pub source: NodeId,
    pub destination: NodeId,
    pub session_id: u64,
    pub next_hop_location: Position,
}

/// Broadcast before the first data packet of a session: the sender's live
/// sessions and where their next hops sit.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionInfo {
    pub sender: NodeId,
    pub entries: Vec<SessionDirection>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlMessage {
    Rreq(Rreq),
    Rrep(Rrep),
    LinkFail(LinkFail),
    RepairRequest(RepairRequest),
    RepairPermission(RepairPermission),
    Hello(Hello),
    Ack(Ack),
    ProactiveAck(ProactiveAck),
    Data(DataPacket),
    DataAck(DataAck),
    DetectionRequest(DetectionRequest),
    DetectionProbe(DetectionProbe),
    SessionInfo(SessionInfo),
}

impl ControlMessage {
    pub fn message_type_id(&self) -> u8 {
        match self {
            ControlMessage::Rreq(r) => r.message_type_id(),
            ControlMessage::Rrep(_) => TYPE_RREP,
            ControlMessage::LinkFail(_) => TYPE_LINK_FAIL,
            ControlMessage::RepairRequest(_) => TYPE_REPAIR_REQUEST,
            ControlMessage::RepairPermission(_) => TYPE_REPAIR_PERMISSION,
            ControlMessage::Hello(_) => TYPE_HELLO,
            ControlMessage::Ack(_) => TYPE_ACK,
            ControlMessage::ProactiveAck(_) => TYPE_PROACTIVE_ACK,
            ControlMessage::Data(_) => TYPE_DATA,
            ControlMessage::DataAck(_) => TYPE_DATA_ACK,
            ControlMessage::DetectionRequest(_) => TYPE_DETECTION_REQUEST,
            ControlMessage::DetectionProbe(_) => TYPE_DETECTION_PROBE,
            ControlMessage::SessionInfo(_) => TYPE_SESSION_INFO,
        }
    }
}

// ---------------------------------------------------------------------------
// Bit budget (field widths) and codec
// ---------------------------------------------------------------------------

/// Field widths for one scenario, derived from the budget parameters plus
/// the protocol/variant (they decide which fields exist on the wire).
#[derive(Debug, Clone, PartialEq)]
pub struct BitBudget {
    pub params: BudgetParams,
    pub protocol: Protocol,
    pub variant: Variant,
    pub w_id: u32,
    pub w_x: u32,
    pub w_y: u32,
    pub w_r: u32,
    pub w_tm: u32,
    pub w_pac: u32,
    /// Hop counters, router-sequence and neighbor-list length prefixes
    /// (maximum hop count is bounded by N).
    pub w_hc: u32,
}

impl BitBudget {
    pub fn new(params: BudgetParams, protocol: Protocol, variant: Variant) -> Self {
        BitBudget {
            params,
            protocol,
            variant,
            w_id: ceil_log2(params.n),
            w_x: ceil_log2(params.x),
            w_y: ceil_log2(params.y),
            w_r: ceil_log2(params.r_max),
            w_tm: ceil_log2(params.tm),
            w_pac: ceil_log2(params.pac),
            w_hc: ceil_log2(params.n),
        }
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, SizeError> {
        let params = BudgetParams::new(
            cfg.node_count as u64,
            cfg.area_x.ceil() as u64,
            cfg.area_y.ceil() as u64,
            cfg.radio_range_range.min.floor() as u64,
            cfg.radio_range_range.max.ceil() as u64,
            cfg.total_time.ticks(),
            cfg.packet_load as u64,
        )?;
        Ok(BitBudget::new(params, cfg.protocol, cfg.variant))
    }

    /// Wire size of a beacon under this budget (type field at its real width).
    pub fn wire_hello_bits(&self) -> u64 {
        (TYPE_FIELD_BITS + self.w_id + self.w_x + self.w_y + self.w_r + self.w_tm) as u64
    }

    /// Wire size of a message, equal to `encode(..)` output length.
    pub fn encoded_bits(&self, msg: &ControlMessage) -> Result<u64, EncodeError> {
        Ok(encode(msg, self)?.len_bits as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodeError {
    /// A field value does not fit its computed width.
    FieldOverflow { field: &'static str },
    /// Positions and ranges must be whole meters on the wire.
    NotWholeUnits { field: &'static str },
    /// The message shape is not valid for the budget's variant/protocol.
    InvalidShape { detail: &'static str },
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeError::FieldOverflow { field } => write!(f, "field {field} overflows its width"),
            EncodeError::NotWholeUnits { field } => {
                write!(f, "field {field} is not in whole wire units")
            }
            EncodeError::InvalidShape { detail } => write!(f, "invalid message shape: {detail}"),
        }
    }
}

impl std::error::Error for EncodeError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    Truncated,
    UnknownType(u8),
    NonZeroPadding,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::Truncated => write!(f, "bit string too short"),
            DecodeError::UnknownType(t) => write!(f, "unknown message type code {t}"),
            DecodeError::NonZeroPadding => write!(f, "trailing padding bits are not zero"),
        }
    }
}

impl std::error::Error for DecodeError {}

/// An encoded message: exact bit length plus zero-padded bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitString {
    pub bytes: Vec<u8>,
    pub len_bits: usize,
}

struct BitWriter {
    bytes: Vec<u8>,
    len_bits: usize,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter { bytes: Vec::new(), len_bits: 0 }
    }

    fn push(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            let bit = (value >> i) & 1;
            let byte_idx = self.len_bits / 8;
            if byte_idx == self.bytes.len() {
                self.bytes.push(0);
            }
            if bit == 1 {
                self.bytes[byte_idx] |= 0x80 >> (self.len_bits % 8);
            }
            self.len_bits += 1;
        }
    }

    fn finish(self) -> BitString {
        BitString { bytes: self.bytes, len_bits: self.len_bits }
    }
}

struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bits: &'a BitString) -> Self {
        BitReader { bits, pos: 0 }
    }

    fn take(&mut self, width: u32) -> Result<u64, DecodeError> {
        if self.pos + width as usize > self.bits.len_bits {
            return Err(DecodeError::Truncated);
        }
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self.bits.bytes[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        Ok(v)
    }
}

/// Field-level helpers shared by encode and decode.
struct Codec<'a> {
    b: &'a BitBudget,
}

impl<'a> Codec<'a> {
    fn check(&self, value: u64, width: u32, field: &'static str) -> Result<u64, EncodeError> {
        if width < 64 && value >= (1u64 << width) {
            return Err(EncodeError::FieldOverflow { field });
        }
        Ok(value)
    }

    fn put_id(&self, w: &mut BitWriter, id: NodeId, field: &'static str) -> Result<(), EncodeError> {
        w.push(self.check(id.0 as u64, self.b.w_id, field)?, self.b.w_id);
        Ok(())
    }

    fn get_id(&self, r: &mut BitReader) -> Result<NodeId, DecodeError> {
        Ok(NodeId(r.take(self.b.w_id)? as u32))
    }

    fn put_whole(
        &self,
        w: &mut BitWriter,
        value: f64,
        width: u32,
        field: &'static str,
    ) -> Result<(), EncodeError> {
        if !(value.is_finite() && value >= 0.0 && value.fract() == 0.0) {
            return Err(EncodeError::NotWholeUnits { field });
        }
        w.push(self.check(value as u64, width, field)?, width);
        Ok(())
    }

    fn put_pos(&self, w: &mut BitWriter, p: Position, field: &'static str) -> Result<(), EncodeError> {
        self.put_whole(w, p.x, self.b.w_x, field)?;
        self.put_whole(w, p.y, self.b.w_y, field)
    }

    fn get_pos(&self, r: &mut BitReader) -> Result<Position, DecodeError> {
        let x = r.take(self.b.w_x)? as f64;
        let y = r.take(self.b.w_y)? as f64;
        Ok(Position::new(x, y))
    }

    fn put_time(&self, w: &mut BitWriter, t: SimTime, field: &'static str) -> Result<(), EncodeError> {
        w.push(self.check(t.ticks(), self.b.w_tm, field)?, self.b.w_tm);
        Ok(())
    }

    fn get_time(&self, r: &mut BitReader) -> Result<SimTime, DecodeError> {
        Ok(SimTime(r.take(self.b.w_tm)?))
    }

    /// 1-based packet counts/sequences travel zero-based so that PAC itself
    /// always fits ⌈log₂PAC⌉ bits.
    fn put_pac(&self, w: &mut BitWriter, v: u32, field: &'static str) -> Result<(), EncodeError> {
        if v == 0 {
            return Err(EncodeError::FieldOverflow { field });
        }
        w.push(self.check(v as u64 - 1, self.b.w_pac, field)?, self.b.w_pac);
        Ok(())
    }

    fn get_pac(&self, r: &mut BitReader) -> Result<u32, DecodeError> {
        Ok(r.take(self.b.w_pac)? as u32 + 1)
    }

    fn put_hc(&self, w: &mut BitWriter, v: u32, field: &'static str) -> Result<(), EncodeError> {
        w.push(self.check(v as u64, self.b.w_hc, field)?, self.b.w_hc);
        Ok(())
    }

    /// Fixed-point metric: `scale` wire units per in-memory unit.
    fn put_fixed(
        &self,
        w: &mut BitWriter,
        value: f64,
        scale: f64,
        field: &'static str,
    ) -> Result<(), EncodeError> {
        let scaled = value * scale;
        if !(scaled.is_finite() && scaled >= 0.0) {
            return Err(EncodeError::FieldOverflow { field });
        }
        let rounded = scaled.round();
        if (rounded - scaled).abs() > 1e-6 {
            return Err(EncodeError::NotWholeUnits { field });
        }
        w.push(self.check(rounded as u64, METRIC_FIELD_BITS, field)?, METRIC_FIELD_BITS);
        Ok(())
    }

    fn get_fixed(&self, r: &mut BitReader, scale: f64) -> Result<f64, DecodeError> {
        Ok(r.take(METRIC_FIELD_BITS)? as f64 / scale)
    }
}

/// Quantizes a continuous position to whole wire meters.
pub fn wire_position(p: Position) -> Position {
    Position::new(p.x.floor().max(0.0), p.y.floor().max(0.0))
}

/// Quantizes joules to whole millijoules for the MMBCR metric field.
pub fn wire_joules(j: f64) -> f64 {
    (j * 1000.0).floor() / 1000.0
}

/// Quantizes milliwatts to whole microwatts for the MTPR metric field.
pub fn wire_milliwatts(mw: f64) -> f64 {
    (mw * 1000.0).round() / 1000.0
}

pub fn encode(msg: &ControlMessage, budget: &BitBudget) -> Result<BitString, EncodeError> {
    let c = Codec { b: budget };
    let mut w = BitWriter::new();
    w.push(msg.message_type_id() as u64, TYPE_FIELD_BITS);
    match msg {
        ControlMessage::Rreq(m) => encode_rreq(&c, &mut w, m)?,
        ControlMessage::Rrep(m) => encode_rrep(&c, &mut w, m)?,
        ControlMessage::LinkFail(m) => {
            c.put_id(&mut w, m.source, "link_fail.source")?;
            c.put_id(&mut w, m.destination, "link_fail.destination")?;
            c.put_id(&mut w, m.sender, "link_fail.sender")?;
            c.put_id(&mut w, m.predecessor, "link_fail.predecessor")?;
            w.push(c.check(m.session_id, budget.w_tm, "link_fail.session_id")?, budget.w_tm);
        }
        ControlMessage::RepairRequest(m) => {
            c.put_id(&mut w, m.source, "repair_request.source")?;
            c.put_id(&mut w, m.destination, "repair_request.destination")?;
            w.push(c.check(m.session_id, budget.w_tm, "repair_request.session_id")?, budget.w_tm);
            c.put_time(&mut w, m.link_break_timestamp, "repair_request.link_break_timestamp")?;
            c.put_id(&mut w, m.initiator, "repair_request.initiator")?;
            c.put_time(&mut w, m.recv_delay_source, "repair_request.recv_delay_source")?;
        }
        ControlMessage::RepairPermission(m) => {
            c.put_id(&mut w, m.source, "repair_permission.source")?;
            c.put_id(&mut w, m.destination, "repair_permission.destination")?;
            w.push(
                c.check(m.session_id, budget.w_tm, "repair_permission.session_id")?,
                budget.w_tm,
            );
            c.put_id(&mut w, m.grantee, "repair_permission.grantee")?;
        }
        ControlMessage::Hello(m) => {
            c.put_id(&mut w, m.sender, "hello.sender")?;
            c.put_pos(&mut w, m.location, "hello.location")?;
            c.put_whole(&mut w, m.radio_range, budget.w_r, "hello.radio_range")?;
            c.put_time(&mut w, m.timestamp, "hello.timestamp")?;
        }
        ControlMessage::Ack(m) => {
            c.put_id(&mut w, m.sender, "ack.sender")?;
            c.put_pos(&mut w, m.location, "ack.location")?;
            c.put_whole(&mut w, m.radio_range, budget.w_r, "ack.radio_range")?;
            c.put_time(&mut w, m.timestamp, "ack.timestamp")?;
            c.put_hc(&mut w, m.downlink_neighbors.len() as u32, "ack.neighbor_count")?;
            for (id, pos) in &m.downlink_neighbors {
                c.put_id(&mut w, *id, "ack.neighbor_id")?;
                c.put_pos(&mut w, *pos, "ack.neighbor_location")?;
            }
        }
        ControlMessage::ProactiveAck(m) => {
            c.put_id(&mut w, m.sender, "proactive_ack.sender")?;
            c.put_pos(&mut w, m.location, "proactive_ack.location")?;
            c.put_whole(&mut w, m.radio_range, budget.w_r, "proactive_ack.radio_range")?;
            c.put_time(&mut w, m.timestamp, "proactive_ack.timestamp")?;
            c.put_fixed(&mut w, m.min_receive_power, 1000.0, "proactive_ack.min_receive_power")?;
        }
        ControlMessage::Data(m) => {
            c.put_id(&mut w, m.source, "data.source")?;
            c.put_id(&mut w, m.destination, "data.destination")?;
            w.push(c.check(m.session_id, budget.w_tm, "data.session_id")?, budget.w_tm);
            c.put_pac(&mut w, m.sequence, "data.sequence")?;
        }
        ControlMessage::DataAck(m) => {
            c.put_id(&mut w, m.acker, "data_ack.acker")?;
            c.put_id(&mut w, m.source, "data_ack.source")?;
            c.put_id(&mut w, m.destination, "data_ack.destination")?;
            w.push(c.check(m.session_id, budget.w_tm, "data_ack.session_id")?, budget.w_tm);
            c.put_pac(&mut w, m.sequence, "data_ack.sequence")?;
        }
        ControlMessage::DetectionRequest(m) => {
            c.put_id(&mut w, m.detector, "detection_request.detector")?;
            c.put_time(&mut w, m.wait_interval, "detection_request.wait_interval")?;
            c.put_time(&mut w, m.timestamp, "detection_request.timestamp")?;
            c.put_hc(&mut w, m.targets.len() as u32, "detection_request.target_count")?;
            for t in &m.targets {
                c.put_id(&mut w, *t, "detection_request.target")?;
            }
        }
        ControlMessage::DetectionProbe(m) => {
            c.put_id(&mut w, m.prober, "detection_probe.prober")?;
            c.put_id(&mut w, m.target, "detection_probe.target")?;
            c.put_id(&mut w, m.detector, "detection_probe.detector")?;
            c.put_time(&mut w, m.timestamp, "detection_probe.timestamp")?;
        }
        ControlMessage::SessionInfo(m) => {
            c.put_id(&mut w, m.sender, "session_info.sender")?;
            c.put_hc(&mut w, m.entries.len() as u32, "session_info.entry_count")?;
            for e in &m.entries {
                c.put_id(&mut w, e.source, "session_info.source")?;
                c.put_id(&mut w, e.destination, "session_info.destination")?;
                w.push(c.check(e.session_id, budget.w_tm, "session_info.session_id")?, budget.w_tm);
                c.put_pos(&mut w, e.next_hop_location, "session_info.next_hop_location")?;
            }
        }
    }
    Ok(w.finish())
}

fn encode_rreq(c: &Codec, w: &mut BitWriter, m: &Rreq) -> Result<(), EncodeError> {
    let b = c.b;
    c.put_id(w, m.source, "rreq.source")?;
    match b.variant {
        Variant::MinusHello => {
            c.put_pos(w, m.source_location, "rreq.source_location")?;
            c.put_id(w, m.destination, "rreq.destination")?;
            w.push(c.check(m.session_id, b.w_tm, "rreq.session_id")?, b.w_tm);
            c.put_pac(w, m.number_of_data_packets, "rreq.number_of_data_packets")?;
            c.put_id(w, m.initiator, "rreq.initiator")?;
            c.put_hc(w, m.max_hop_count_difference, "rreq.max_hop_count_difference")?;
            if b.protocol == Protocol::Mfr
                && m.router_locations.len() != m.router_sequence.len()
            {
                return Err(EncodeError::InvalidShape {
                    detail: "MFR route request needs one location per router",
                });
            }
            c.put_hc(w, m.router_sequence.len() as u32, "rreq.router_count")?;
            for (i, id) in m.router_sequence.iter().enumerate() {
                c.put_id(w, *id, "rreq.router_id")?;
                if b.protocol == Protocol::Mfr {
                    c.put_pos(w, m.router_locations[i], "rreq.router_location")?;
                }
            }
            c.put_time(w, m.timestamp, "rreq.timestamp")?;
        }
        Variant::Classical => {
            if !m.router_sequence.is_empty() || m.repair || m.target_location.is_some() {
                return Err(EncodeError::InvalidShape {
                    detail: "classical route requests carry a hop counter, not a router sequence",
                });
            }
            c.put_id(w, m.destination, "rreq.destination")?;
            w.push(c.check(m.session_id, b.w_tm, "rreq.session_id")?, b.w_tm);
            c.put_pac(w, m.number_of_data_packets, "rreq.number_of_data_packets")?;
            c.put_hc(w, m.hop_count_field, "rreq.hop_count")?;
            c.put_time(w, m.timestamp, "rreq.timestamp")?;
        }
    }
    match (b.protocol, &m.metric) {
        (Protocol::Aodv | Protocol::Mfr, RreqMetric::None) => {}
        (Protocol::Mmbcr, RreqMetric::MinResidualEnergy(j)) => {
            c.put_fixed(w, *j, 1000.0, "rreq.minimum_residual_energy")?;
        }
        (Protocol::Mrpc, RreqMetric::ResidualPacketCapacity(p)) => {
            c.put_fixed(w, *p, 1.0, "rreq.f_eng")?;
        }
        (Protocol::Mtpr, RreqMetric::MinTransPower(p)) => {
            w.push(u64::from(p.is_some()), 1);
            if let Some(mw) = p {
                c.put_fixed(w, *mw, 1000.0, "rreq.minimum_transmission_power")?;
            }
        }
        _ => {
            return Err(EncodeError::InvalidShape {
                detail: "route-request metric does not match the protocol",
            })
        }
    }
    if b.variant == Variant::MinusHello && m.repair {
        match m.target_location {
            Some(p) => c.put_pos(w, p, "rreq.target_location")?,
            None => {
                return Err(EncodeError::InvalidShape {
                    detail: "repair route request needs a target location",
                })
            }
        }
    } else if m.target_location.is_some() {
        return Err(EncodeError::InvalidShape {
            detail: "only repair route requests carry a target location",
        });
    }
    Ok(())
}

fn encode_rrep(c: &Codec, w: &mut BitWriter, m: &Rrep) -> Result<(), EncodeError> {
    let b = c.b;
    c.put_id(w, m.destination, "rrep.destination")?;
    match b.variant {
        Variant::MinusHello => {
            c.put_pos(w, m.destination_location, "rrep.destination_location")?;
            c.put_id(w, m.source, "rrep.source")?;
            w.push(c.check(m.session_id, b.w_tm, "rrep.session_id")?, b.w_tm);
            c.put_id(w, m.initiator, "rrep.initiator")?;
            c.put_hc(w, m.max_hop_count_difference, "rrep.max_hop_count_difference")?;
            c.put_hc(w, m.current_hop_count, "rrep.current_hop_count")?;
            c.put_hc(w, m.optimum_router_sequence.len() as u32, "rrep.router_count")?;
            for id in &m.optimum_router_sequence {
                c.put_id(w, *id, "rrep.router_id")?;
            }
            c.put_time(w, m.timestamp, "rrep.timestamp")?;
            match m.target_location {
                Some(p) => c.put_pos(w, p, "rrep.target_location")?,
                None => {
                    return Err(EncodeError::InvalidShape {
                        detail: "route reply needs a target location in the HELLO-free variant",
                    })
                }
            }
        }
        Variant::Classical => {
            if !m.optimum_router_sequence.is_empty() || m.target_location.is_some() {
                return Err(EncodeError::InvalidShape {
                    detail: "classical route replies travel the reverse path without a sequence",
                });
            }
            c.put_id(w, m.source, "rrep.source")?;
            w.push(c.check(m.session_id, b.w_tm, "rrep.session_id")?, b.w_tm);
            c.put_hc(w, m.current_hop_count, "rrep.current_hop_count")?;
            c.put_time(w, m.timestamp, "rrep.timestamp")?;
        }
    }
    Ok(())
}

pub fn decode(bits: &BitString, budget: &BitBudget) -> Result<ControlMessage, DecodeError> {
    let c = Codec { b: budget };
    let mut r = BitReader::new(bits);
    let ty = r.take(TYPE_FIELD_BITS)? as u8;
    let msg = match ty {
        TYPE_RREQ | TYPE_RREQ_REPAIR => decode_rreq(&c, &mut r, ty == TYPE_RREQ_REPAIR)?,
        TYPE_RREP => decode_rrep(&c, &mut r)?,
        TYPE_LINK_FAIL => ControlMessage::LinkFail(LinkFail {
            source: c.get_id(&mut r)?,
            destination: c.get_id(&mut r)?,
            sender: c.get_id(&mut r)?,
            predecessor: c.get_id(&mut r)?,
            session_id: r.take(budget.w_tm)?,
        }),
        TYPE_REPAIR_REQUEST => ControlMessage::RepairRequest(RepairRequest {
            source: c.get_id(&mut r)?,
            destination: c.get_id(&mut r)?,
            session_id: r.take(budget.w_tm)?,
            link_break_timestamp: c.get_time(&mut r)?,
            initiator: c.get_id(&mut r)?,
            recv_delay_source: c.get_time(&mut r)?,
        }),
        TYPE_REPAIR_PERMISSION => ControlMessage::RepairPermission(RepairPermission {
            source: c.get_id(&mut r)?,
            destination: c.get_id(&mut r)?,
            session_id: r.take(budget.w_tm)?,
            grantee: c.get_id(&mut r)?,
        }),
        TYPE_HELLO => ControlMessage::Hello(Hello {
            sender: c.get_id(&mut r)?,
            location: c.get_pos(&mut r)?,
            radio_range: r.take(budget.w_r)? as f64,
            timestamp: c.get_time(&mut r)?,
        }),
        TYPE_ACK => {
            let sender = c.get_id(&mut r)?;
            let location = c.get_pos(&mut r)?;
            let radio_range = r.take(budget.w_r)? as f64;
            let timestamp = c.get_time(&mut r)?;
            let count = r.take(budget.w_hc)?;
            let mut downlink_neighbors = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let id = c.get_id(&mut r)?;
                let pos = c.get_pos(&mut r)?;
                downlink_neighbors.push((id, pos));
            }
            ControlMessage::Ack(Ack { sender, location, radio_range, timestamp, downlink_neighbors })
        }
        TYPE_PROACTIVE_ACK => ControlMessage::ProactiveAck(ProactiveAck {
            sender: c.get_id(&mut r)?,
            location: c.get_pos(&mut r)?,
            radio_range: r.take(budget.w_r)? as f64,
            timestamp: c.get_time(&mut r)?,
            min_receive_power: c.get_fixed(&mut r, 1000.0)?,
        }),
        TYPE_DATA => ControlMessage::Data(DataPacket {
            source: c.get_id(&mut r)?,
            destination: c.get_id(&mut r)?,
            session_id: r.take(budget.w_tm)?,
            sequence: c.get_pac(&mut r)?,
        }),
        TYPE_DATA_ACK => ControlMessage::DataAck(DataAck {
            acker: c.get_id(&mut r)?,
            source: c.get_id(&mut r)?,
            destination: c.get_id(&mut r)?,
            session_id: r.take(budget.w_tm)?,
            sequence: c.get_pac(&mut r)?,
        }),
        TYPE_DETECTION_REQUEST => {
            let detector = c.get_id(&mut r)?;
            let wait_interval = c.get_time(&mut r)?;
            let timestamp = c.get_time(&mut r)?;
            let count = r.take(budget.w_hc)?;
            let mut targets = Vec::with_capacity(count as usize);
            for _ in 0..count {
                targets.push(c.get_id(&mut r)?);
            }
            ControlMessage::DetectionRequest(DetectionRequest {
                detector,
                wait_interval,
                timestamp,
                targets,
            })
        }
        TYPE_DETECTION_PROBE => ControlMessage::DetectionProbe(DetectionProbe {
            prober: c.get_id(&mut r)?,
            target: c.get_id(&mut r)?,
            detector: c.get_id(&mut r)?,
            timestamp: c.get_time(&mut r)?,
        }),
        TYPE_SESSION_INFO => {
            let sender = c.get_id(&mut r)?;
            let count = r.take(budget.w_hc)?;
            let mut entries = Vec::with_capacity(count as usize);
            for _ in 0..count {
                entries.push(SessionDirection {
                    source: c.get_id(&mut r)?,
                    destination: c.get_id(&mut r)?,
                    session_id: r.take(budget.w_tm)?,
                    next_hop_location: c.get_pos(&mut r)?,
                });
            }
            ControlMessage::SessionInfo(SessionInfo { sender, entries })
        }
        other => return Err(DecodeError::UnknownType(other)),
    };
    // Everything after the payload must be zero padding within the last byte.
    let consumed = r.pos;
    if consumed != bits.len_bits {
        return Err(DecodeError::Truncated);
    }
    let pad = bits.bytes.len() * 8 - bits.len_bits;
    if pad > 0 {
        let last = bits.bytes[bits.bytes.len() - 1];
        if last & ((1u8 << pad) - 1) != 0 {
            return Err(DecodeError::NonZeroPadding);
        }
    }
    Ok(msg)
}

fn decode_rreq(c: &Codec, r: &mut BitReader, repair: bool) -> Result<ControlMessage, DecodeError> {
    let b = c.b;
    let source = c.get_id(r)?;
    let mut m = match b.variant {
        Variant::MinusHello => {
            let source_location = c.get_pos(r)?;
            let destination = c.get_id(r)?;
            let session_id = r.take(b.w_tm)?;
            let number_of_data_packets = c.get_pac(r)?;
            let initiator = c.get_id(r)?;
            let max_hop_count_difference = r.take(b.w_hc)? as u32;
            let count = r.take(b.w_hc)?;
            let mut router_sequence = Vec::with_capacity(count as usize);
            let mut router_locations = Vec::new();
            for _ in 0..count {
                router_sequence.push(c.get_id(r)?);
                if b.protocol == Protocol::Mfr {
                    router_locations.push(c.get_pos(r)?);
                }
            }
            let timestamp = c.get_time(r)?;
            Rreq {
                repair,
                source,
                source_location,
                destination,
                session_id,
                number_of_data_packets,
                initiator,
                max_hop_count_difference,
                router_sequence,
                router_locations,
                hop_count_field: 0,
                timestamp,
                metric: RreqMetric::None,
                target_location: None,
            }
        }
        Variant::Classical => {
            let destination = c.get_id(r)?;
            let session_id = r.take(b.w_tm)?;
            let number_of_data_packets = c.get_pac(r)?;
            let hop_count_field = r.take(b.w_hc)? as u32;
            let timestamp = c.get_time(r)?;
            Rreq {
                repair,
                source,
                source_location: Position::new(0.0, 0.0),
                destination,
                session_id,
                number_of_data_packets,
                initiator: source,
                max_hop_count_difference: 0,
                router_sequence: Vec::new(),
                router_locations: Vec::new(),
                hop_count_field,
                timestamp,
                metric: RreqMetric::None,
                target_location: None,
            }
        }
    };
    m.metric = match b.protocol {
        Protocol::Aodv | Protocol::Mfr => RreqMetric::None,
        Protocol::Mmbcr => RreqMetric::MinResidualEnergy(c.get_fixed(r, 1000.0)?),
        Protocol::Mrpc => RreqMetric::ResidualPacketCapacity(c.get_fixed(r, 1.0)?),
        Protocol::Mtpr => {
            let present = r.take(1)? == 1;
            RreqMetric::MinTransPower(if present {
                Some(c.get_fixed(r, 1000.0)?)
            } else {
                None
            })
        }
    };
    if b.variant == Variant::MinusHello && repair {
        m.target_location = Some(c.get_pos(r)?);
    }
    Ok(ControlMessage::Rreq(m))
}

fn decode_rrep(c: &Codec, r: &mut BitReader) -> Result<ControlMessage, DecodeError> {
    let b = c.b;
    let destination = c.get_id(r)?;
    let m = match b.variant {
        Variant::MinusHello => {
            let destination_location = c.get_pos(r)?;
            let source = c.get_id(r)?;
            let session_id = r.take(b.w_tm)?;
            let initiator = c.get_id(r)?;
            let max_hop_count_difference = r.take(b.w_hc)? as u32;
            let current_hop_count = r.take(b.w_hc)? as u32;
            let count = r.take(b.w_hc)?;
            let mut optimum_router_sequence = Vec::with_capacity(count as usize);
            for _ in 0..count {
                optimum_router_sequence.push(c.get_id(r)?);
            }
            let timestamp = c.get_time(r)?;
            let target_location = Some(c.get_pos(r)?);
            Rrep {
                destination,
                destination_location,
                source,
                session_id,
                initiator,
                max_hop_count_difference,
                current_hop_count,
                optimum_router_sequence,
                timestamp,
                target_location,
            }
        }
        Variant::Classical => {
            let source = c.get_id(r)?;
            let session_id = r.take(b.w_tm)?;
            let current_hop_count = r.take(b.w_hc)? as u32;
            let timestamp = c.get_time(r)?;
            Rrep {
                destination,
                destination_location: Position::new(0.0, 0.0),
                source,
                session_id,
                initiator: destination,
                max_hop_count_difference: 0,
                current_hop_count,
                optimum_router_sequence: Vec::new(),
                timestamp,
                target_location: None,
            }
        }
    };
    Ok(ControlMessage::Rrep(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;

    fn params(n: u64, x: u64, y: u64, r_min: u64, r_max: u64, tm: u64, pac: u64) -> BudgetParams {
        BudgetParams::new(n, x, y, r_min, r_max, tm, pac).unwrap()
    }

    fn table1_params(rng: &mut SimRng) -> BudgetParams {
        // Table-1 ranges: N in 20..=100, 500x500 area, radio 50..=100,
        // TM up to a day of ticks, PAC a per-session packet load.
        let n = 20 + rng.below(81);
        let r_min = 50 + rng.below(26);
        let r_max = r_min + rng.below(101 - r_min);
        let tm = 1000 + rng.below(86_400_000);
        let pac = 2 + rng.below(18);
        params(n, 500, 500, r_min, r_max.max(r_min), tm, pac)
    }

    #[test]
    fn budget_params_reject_small_values() {
        assert!(BudgetParams::new(1, 500, 500, 50, 100, 1000, 5).is_err());
        assert!(BudgetParams::new(2, 500, 500, 50, 100, 1000, 1).is_err());
    }

    #[test]
    fn bits_hello_examples() {
        assert_eq!(bits_hello(&params(2, 2, 2, 2, 2, 2, 2)), 8);
        assert_eq!(bits_hello(&params(100, 500, 500, 50, 100, 1 << 20, 5)), 55);
        // Doubling a power-of-two TM adds exactly one bit.
        let a = bits_hello(&params(100, 500, 500, 50, 100, 1 << 12, 5));
        let b = bits_hello(&params(100, 500, 500, 50, 100, 1 << 13, 5));
        assert_eq!(b, a + 1);
    }

    #[test]
    fn bits_add_rreq_examples() {
        assert_eq!(bits_add_rreq(&params(100, 500, 500, 50, 100, 1 << 20, 5)), 19);
        // Degenerate geometry floors at zero: 2 + 2 + 2.5 - 3 - log2(12) < 0.
        assert_eq!(bits_add_rreq(&params(100, 4, 4, 12, 100, 1 << 20, 5)), 0);
    }

    #[test]
    fn bits_link_fail_delta_examples() {
        assert_eq!(bits_link_fail_delta(&params(100, 500, 500, 50, 100, 2, 2)), -6);
        // N cancels.
        let a = bits_link_fail_delta(&params(4, 500, 500, 50, 100, 4096, 64));
        let b = bits_link_fail_delta(&params(1 << 20, 500, 500, 50, 100, 4096, 64));
        assert_eq!(a, b);
    }

    #[test]
    fn bits_repair_permission_examples() {
        assert_eq!(bits_repair_permission(&params(2, 500, 500, 50, 100, 1 << 20, 2)), 7);
        let p = params(100, 500, 500, 50, 100, 1 << 20, 50);
        assert_eq!(bits_repair_permission(&p), 30);
        assert!(bits_repair_permission(&p) < 4 * bits_hello(&p));
    }

    #[test]
    fn size_theorems_over_broad_parameter_grid() {
        let mut rng = SimRng::new(101, 0);
        let draw = |rng: &mut SimRng| 2 + rng.below((1 << 30) - 1);
        for _ in 0..20_000 {
            let n = draw(&mut rng);
            let p = params(
                n,
                draw(&mut rng),
                draw(&mut rng),
                draw(&mut rng),
                draw(&mut rng),
                draw(&mut rng),
                draw(&mut rng),
            );
            assert!(bits_add_rreq(&p) < 2 * bits_hello(&p), "add_rreq violation at {p:?}");
            assert!(bits_link_fail_delta(&p) < 0, "link-fail violation at {p:?}");
            // The repair-permission bound assumes PAC < N (stated premise).
            let pac = 2 + rng.below(n.max(3) - 2);
            let p2 = BudgetParams { pac, ..p };
            assert!(
                bits_repair_permission(&p2) < 4 * bits_hello(&p2),
                "repair-permission violation at {p2:?}"
            );
        }
    }

    #[test]
    fn size_theorems_hold_under_wire_widths() {
        // Re-check the three inequalities with the codec's actual widths
        // (4-bit type field) across the Table-1 grid.
        let mut rng = SimRng::new(77, 0);
        for _ in 0..10_000 {
            let p = table1_params(&mut rng);
            let b = BitBudget::new(p, Protocol::Aodv, Variant::MinusHello);
            let hello = b.wire_hello_bits();
            // Additional HELLO-free RREQ attributes: initiator id, maximum
            // hop count difference and the router-sequence length prefix.
            let wire_add = (b.w_id + b.w_hc + b.w_hc) as u64;
            assert!(wire_add < 2 * hello);
            let link_fail = (TYPE_FIELD_BITS + 4 * b.w_id + b.w_tm) as i64;
            let data = (TYPE_FIELD_BITS + 2 * b.w_id + b.w_tm + b.w_pac) as i64;
            assert!(link_fail - 2 * data < 0);
            let perm = (TYPE_FIELD_BITS + 3 * b.w_id + b.w_tm) as u64;
            assert!(perm < 4 * hello);
        }
    }

    // Node ids for the worked route-establishment topology.
    const S: NodeId = NodeId(0);
    const P: NodeId = NodeId(1);
    const I: NodeId = NodeId(2);
    const D: NodeId = NodeId(8);
    const W: NodeId = NodeId(6);
    const U: NodeId = NodeId(7);

    fn fig3_budget(protocol: Protocol, variant: Variant) -> BitBudget {
        BitBudget::new(params(9, 500, 500, 50, 100, 1024, 5), protocol, variant)
    }

    #[test]
    fn worked_rreq_round_trip() {
        // <1, s, (X_s(100), Y_s(100)), d, 3, 5, s, 0, p, i, 108>
        let b = fig3_budget(Protocol::Aodv, Variant::MinusHello);
        let m = ControlMessage::Rreq(Rreq {
            repair: false,
            source: S,
            source_location: Position::new(120.0, 250.0),
            destination: D,
            session_id: 3,
            number_of_data_packets: 5,
            initiator: S,
            max_hop_count_difference: 0,
            router_sequence: vec![P, I],
            router_locations: vec![],
            hop_count_field: 0,
            timestamp: SimTime(108),
            metric: RreqMetric::None,
            target_location: None,
        });
        let bits = encode(&m, &b).unwrap();
        assert_eq!(decode(&bits, &b).unwrap(), m);
    }

    #[test]
    fn worked_link_fail_round_trip() {
        // <4, s, d, u, w, 3>
        let b = fig3_budget(Protocol::Aodv, Variant::MinusHello);
        let m = ControlMessage::LinkFail(LinkFail {
            source: S,
            destination: D,
            sender: U,
            predecessor: W,
            session_id: 3,
        });
        let bits = encode(&m, &b).unwrap();
        assert_eq!(decode(&bits, &b).unwrap(), m);
        // Hand-summed width: 4 + 4*w_id + w_tm = 4 + 16 + 10.
        assert_eq!(bits.len_bits, 30);
    }

    #[test]
    fn empty_router_sequence_round_trips() {
        let b = fig3_budget(Protocol::Aodv, Variant::MinusHello);
        let m = ControlMessage::Rreq(Rreq {
            repair: false,
            source: S,
            source_location: Position::new(120.0, 250.0),
            destination: D,
            session_id: 3,
            number_of_data_packets: 5,
            initiator: S,
            max_hop_count_difference: 0,
            router_sequence: vec![],
            router_locations: vec![],
            hop_count_field: 0,
            timestamp: SimTime(100),
            metric: RreqMetric::None,
            target_location: None,
        });
        let bits = encode(&m, &b).unwrap();
        assert_eq!(decode(&bits, &b).unwrap(), m);
    }

    #[test]
    fn hello_wire_size_matches_hand_sum() {
        let b = fig3_budget(Protocol::Aodv, Variant::Classical);
        let m = ControlMessage::Hello(Hello {
            sender: P,
            location: Position::new(10.0, 20.0),
            radio_range: 80.0,
            timestamp: SimTime(55),
        });
        let bits = encode(&m, &b).unwrap();
        // 4 + w_id(4) + w_x(9) + w_y(9) + w_r(7) + w_tm(10)
        assert_eq!(bits.len_bits as u64, b.wire_hello_bits());
        assert_eq!(bits.len_bits, 43);
    }

    #[test]
    fn rreq_size_grows_linearly_in_router_count() {
        for (protocol, extra) in [(Protocol::Aodv, 0), (Protocol::Mfr, 9 + 9)] {
            let b = fig3_budget(protocol, Variant::MinusHello);
            let mut sizes = Vec::new();
            for k in 0..4usize {
                let m = ControlMessage::Rreq(Rreq {
                    repair: false,
                    source: S,
                    source_location: Position::new(1.0, 2.0),
                    destination: D,
                    session_id: 9,
                    number_of_data_packets: 5,
                    initiator: S,
                    max_hop_count_difference: 0,
                    router_sequence: (1..=k as u32).map(NodeId).collect(),
                    router_locations: (0..k).map(|i| Position::new(i as f64, 3.0)).collect(),
                    hop_count_field: 0,
                    timestamp: SimTime(10),
                    metric: RreqMetric::None,
                    target_location: None,
                });
                sizes.push(b.encoded_bits(&m).unwrap());
            }
            let slope = (b.w_id + extra) as u64;
            for k in 1..sizes.len() {
                assert_eq!(sizes[k] - sizes[k - 1], slope, "{protocol:?}");
            }
        }
    }

    #[test]
    fn field_overflow_names_field() {
        let b = fig3_budget(Protocol::Aodv, Variant::MinusHello);
        let m = ControlMessage::Data(DataPacket {
            source: S,
            destination: NodeId(100), // does not fit w_id = 4
            session_id: 3,
            sequence: 1,
        });
        match encode(&m, &b) {
            Err(EncodeError::FieldOverflow { field }) => assert_eq!(field, "data.destination"),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn fractional_position_rejected() {
        let b = fig3_budget(Protocol::Aodv, Variant::Classical);
        let m = ControlMessage::Hello(Hello {
            sender: P,
            location: Position::new(10.5, 20.0),
            radio_range: 80.0,
            timestamp: SimTime(55),
        });
        assert!(matches!(encode(&m, &b), Err(EncodeError::NotWholeUnits { .. })));
    }

    #[test]
    fn truncated_bitstring_rejected() {
        let b = fig3_budget(Protocol::Aodv, Variant::MinusHello);
        let m = ControlMessage::LinkFail(LinkFail {
            source: S,
            destination: D,
            sender: U,
            predecessor: W,
            session_id: 3,
        });
        let mut bits = encode(&m, &b).unwrap();
        bits.len_bits -= 6;
        bits.bytes.pop();
        assert_eq!(decode(&bits, &b), Err(DecodeError::Truncated));
    }

    fn random_message(rng: &mut SimRng, b: &BitBudget) -> ControlMessage {
        let p = &b.params;
        let id = |rng: &mut SimRng| NodeId(rng.below(p.n) as u32);
        let pos = |rng: &mut SimRng| Position::new(rng.below(p.x) as f64, rng.below(p.y) as f64);
        let time = |rng: &mut SimRng| SimTime(rng.below(p.tm));
        let seq = |rng: &mut SimRng| 1 + rng.below(p.pac) as u32;
        let range = |rng: &mut SimRng| (2 + rng.below(p.r_max - 1)) as f64;
        let metric = |rng: &mut SimRng| match b.protocol {
            Protocol::Aodv | Protocol::Mfr => RreqMetric::None,
            Protocol::Mmbcr => RreqMetric::MinResidualEnergy(rng.below(10_000) as f64 / 1000.0),
            Protocol::Mrpc => RreqMetric::ResidualPacketCapacity(rng.below(100_000) as f64),
            Protocol::Mtpr => RreqMetric::MinTransPower(if rng.below(4) == 0 {
                None
            } else {
                Some(rng.below(1_000_000) as f64 / 1000.0)
            }),
        };
        match rng.below(11) {
            0 => {
                let repair = b.variant == Variant::MinusHello && rng.below(2) == 1;
                let k = rng.below(4) as usize;
                ControlMessage::Rreq(Rreq {
                    repair,
                    source: id(rng),
                    source_location: pos(rng),
                    destination: id(rng),
                    session_id: rng.below(p.tm),
                    number_of_data_packets: seq(rng),
                    initiator: id(rng),
                    max_hop_count_difference: rng.below(p.n) as u32,
                    router_sequence: if b.variant == Variant::MinusHello {
                        (0..k).map(|_| id(rng)).collect()
                    } else {
                        vec![]
                    },
                    router_locations: if b.protocol == Protocol::Mfr
                        && b.variant == Variant::MinusHello
                    {
                        (0..k).map(|_| pos(rng)).collect()
                    } else {
                        vec![]
                    },
                    hop_count_field: if b.variant == Variant::Classical {
                        rng.below(p.n) as u32
                    } else {
                        0
                    },
                    timestamp: time(rng),
                    metric: metric(rng),
                    target_location: repair.then(|| pos(rng)),
                })
            }
            1 => {
                let minus = b.variant == Variant::MinusHello;
                ControlMessage::Rrep(Rrep {
                    destination: id(rng),
                    destination_location: if minus { pos(rng) } else { Position::new(0.0, 0.0) },
                    source: id(rng),
                    session_id: rng.below(p.tm),
                    initiator: if minus { id(rng) } else { NodeId(0) },
                    max_hop_count_difference: if minus { rng.below(p.n) as u32 } else { 0 },
                    current_hop_count: rng.below(p.n) as u32,
                    optimum_router_sequence: if minus {
                        (0..rng.below(4)).map(|_| id(rng)).collect()
                    } else {
                        vec![]
                    },
                    timestamp: time(rng),
                    target_location: minus.then(|| pos(rng)),
                })
            }
            2 => ControlMessage::LinkFail(LinkFail {
                source: id(rng),
                destination: id(rng),
                sender: id(rng),
                predecessor: id(rng),
                session_id: rng.below(p.tm),
            }),
            3 => ControlMessage::RepairRequest(RepairRequest {
                source: id(rng),
                destination: id(rng),
                session_id: rng.below(p.tm),
                link_break_timestamp: time(rng),
                initiator: id(rng),
                recv_delay_source: time(rng),
            }),
            4 => ControlMessage::RepairPermission(RepairPermission {
                source: id(rng),
                destination: id(rng),
                session_id: rng.below(p.tm),
                grantee: id(rng),
            }),
            5 => ControlMessage::Hello(Hello {
                sender: id(rng),
                location: pos(rng),
                radio_range: range(rng),
                timestamp: time(rng),
            }),
            6 => ControlMessage::Ack(Ack {
                sender: id(rng),
                location: pos(rng),
                radio_range: range(rng),
                timestamp: time(rng),
                downlink_neighbors: (0..rng.below(4)).map(|_| (id(rng), pos(rng))).collect(),
            }),
            7 => ControlMessage::ProactiveAck(ProactiveAck {
                sender: id(rng),
                location: pos(rng),
                radio_range: range(rng),
                timestamp: time(rng),
                min_receive_power: rng.below(300_000) as f64 / 1000.0,
            }),
            8 => ControlMessage::Data(DataPacket {
                source: id(rng),
                destination: id(rng),
                session_id: rng.below(p.tm),
                sequence: seq(rng),
            }),
            9 => ControlMessage::DataAck(DataAck {
                acker: id(rng),
                source: id(rng),
                destination: id(rng),
                session_id: rng.below(p.tm),
                sequence: seq(rng),
            }),
            _ => ControlMessage::SessionInfo(SessionInfo {
                sender: id(rng),
                entries: (0..rng.below(4))
                    .map(|_| SessionDirection {
                        source: id(rng),
                        destination: id(rng),
                        session_id: rng.below(p.tm),
                        next_hop_location: pos(rng),
                    })
                    .collect(),
            }),
        }
    }

    #[test]
    fn random_messages_round_trip() {
        let mut rng = SimRng::new(2024, 0);
        for protocol in Protocol::ALL {
            for variant in Variant::ALL {
                let b = BitBudget::new(
                    params(40, 500, 400, 50, 100, 30_000, 16),
                    protocol,
                    variant,
                );
                for _ in 0..200 {
                    let m = random_message(&mut rng, &b);
                    let bits = encode(&m, &b)
                        .unwrap_or_else(|e| panic!("encode failed for {m:?}: {e}"));
                    let back = decode(&bits, &b)
                        .unwrap_or_else(|e| panic!("decode failed for {m:?}: {e}"));
                    assert_eq!(back, m);
                }
            }
        }
    }
}
