//! Shared domain types: node identities, planar positions, simulation time,
//! session keys and the scenario configuration.

use std::fmt;

/// Unique node identifier, dense in `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Planar position in meters inside the topology rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }
}

/// Euclidean distance between two positions, in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    (dx * dx + dy * dy).sqrt()
}

/// Simulation time in integer millisecond ticks.
///
/// Integer ticks keep the event queue ordering exact; ties are broken by
/// insertion sequence in the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn ticks(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl std::ops::Add<u64> for SimTime {
    type Output = SimTime;
    fn add(self, rhs: u64) -> SimTime {
        SimTime(self.0 + rhs)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms", self.0)
    }
}

/// `<source, destination, session>` triple that uniquely identifies one
/// route-discovery context network-wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SessionKey {
    pub source: NodeId,
    pub destination: NodeId,
    pub session_id: u64,
}

impl fmt::Display for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}>", self.source, self.destination, self.session_id)
    }
}

/// Routing protocol family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Aodv,
    Mmbcr,
    Mrpc,
    Mtpr,
    Mfr,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::Aodv,
        Protocol::Mmbcr,
        Protocol::Mrpc,
        Protocol::Mtpr,
        Protocol::Mfr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Aodv => "AODV",
            Protocol::Mmbcr => "MMBCR",
            Protocol::Mrpc => "MRPC",
            Protocol::Mtpr => "MTPR",
            Protocol::Mfr => "MFR",
        }
    }

    pub fn parse(s: &str) -> Option<Protocol> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AODV" => Some(Protocol::Aodv),
            "MMBCR" => Some(Protocol::Mmbcr),
            "MRPC" => Some(Protocol::Mrpc),
            "MTPR" => Some(Protocol::Mtpr),
            "MFR" => Some(Protocol::Mfr),
            _ => None,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Protocol variant: classical (periodic HELLO beacons) or the HELLO-free
/// transformation where neighborhood knowledge is gathered during discovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Classical,
    MinusHello,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Classical, Variant::MinusHello];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Classical => "classical",
            Variant::MinusHello => "minus_hello",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classical" => Some(Variant::Classical),
            "minus_hello" | "minus-hello" | "minushello" => Some(Variant::MinusHello),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inclusive numeric range used for per-node attribute draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    pub fn mid(self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn contains(self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub area_x: f64,
    pub area_y: f64,
    pub node_count: u32,
    /// Node speed range, m/s.
    pub speed_range: Range,
    /// Radio range, meters.
    pub radio_range_range: Range,
    /// Initial (= maximum) battery energy, joules.
    pub initial_energy_range: Range,
    /// Transmission power band, milliwatts; the Friis constant is calibrated
    /// so full-range transmissions land inside this band.
    pub tx_power_range: Range,
    /// Receive power draw / minimum receive power, milliwatts.
    pub rx_power_range: Range,
    /// HELLO beacon interval (classical) and proactive-ACK interval, ms.
    pub hello_interval: SimTime,
    /// Data packet payload size, bytes.
    pub packet_size: u32,
    /// Channel capacity, bits per second.
    pub channel_capacity: u64,
    /// Waypoint dwell time, ms.
    pub pause_time: SimTime,
    /// Data packets per session (PAC).
    pub packet_load: u32,
    /// Session arrival rate, sessions per second.
    pub session_arrival_rate: f64,
    /// Medium constant of the Friis form; scales the calibrated constant.
    pub medium_constant_c: f64,
    /// Route-request time-to-live, ms.
    pub ttl: SimTime,
    /// Per-node message queue capacity, packets (mq).
    pub queue_capacity: u32,
    pub rng_seed: u64,
    pub protocol: Protocol,
    pub variant: Variant,
    /// Total simulation time (TM), ms.
    pub total_time: SimTime,
    /// CBR inter-packet gap as a multiple of the data-packet airtime.
    pub cbr_gap_factor: u32,
}

/// Configuration or input validation failure.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey(String),
    BadValue { key: String, detail: String },
    MissingValue(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown key \"{k}\""),
            ConfigError::BadValue { key, detail } => write!(f, "bad value for \"{key}\": {detail}"),
            ConfigError::MissingValue(k) => write!(f, "missing value for \"{k}\""),
            ConfigError::Invalid(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    /// Checks the structural invariants: nonempty ranges, at least two nodes,
    /// a positive medium constant and parameters large enough for the bit
    /// budget (every budget parameter must be at least 2).
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn range_ok(name: &str, r: Range) -> Result<(), ConfigError> {
            if !(r.min.is_finite() && r.max.is_finite()) || r.min > r.max {
                return Err(ConfigError::Invalid(format!(
                    "{name} range must satisfy min <= max, got [{}, {}]",
                    r.min, r.max
                )));
            }
            if r.min <= 0.0 {
                return Err(ConfigError::Invalid(format!("{name} range must be positive")));
            }
            Ok(())
        }
        if self.node_count < 2 {
            return Err(ConfigError::Invalid("node_count must be at least 2".into()));
        }
        if self.area_x < 2.0 || self.area_y < 2.0 {
            return Err(ConfigError::Invalid("topology area sides must be at least 2 m".into()));
        }
        range_ok("speed", self.speed_range)?;
        range_ok("radio_range", self.radio_range_range)?;
        range_ok("initial_energy", self.initial_energy_range)?;
        range_ok("tx_power", self.tx_power_range)?;
        range_ok("rx_power", self.rx_power_range)?;
        if self.radio_range_range.min < 2.0 {
            return Err(ConfigError::Invalid("radio range must be at least 2 m".into()));
        }
        if self.medium_constant_c <= 0.0 || !self.medium_constant_c.is_finite() {
            return Err(ConfigError::Invalid("medium_constant_c must be positive".into()));
        }
        if self.hello_interval.ticks() == 0 {
            return Err(ConfigError::Invalid("hello_interval must be positive".into()));
        }
        if self.packet_size == 0 {
            return Err(ConfigError::Invalid("packet_size must be positive".into()));
        }
        if self.channel_capacity == 0 {
            return Err(ConfigError::Invalid("channel_capacity must be positive".into()));
        }
        if self.packet_load < 2 {
            return Err(ConfigError::Invalid(
                "packet_load must be at least 2 (bit budget parameter)".into(),
            ));
        }
        if self.session_arrival_rate < 0.0 || !self.session_arrival_rate.is_finite() {
            return Err(ConfigError::Invalid("session_arrival_rate must be non-negative".into()));
        }
        if self.ttl.ticks() == 0 {
            return Err(ConfigError::Invalid("ttl must be positive".into()));
        }
        if self.queue_capacity == 0 {
            return Err(ConfigError::Invalid("queue_capacity must be positive".into()));
        }
        if self.total_time.ticks() < 2 {
            return Err(ConfigError::Invalid("total_time must be at least 2 ms".into()));
        }
        if self.cbr_gap_factor == 0 {
            return Err(ConfigError::Invalid("cbr_gap_factor must be positive".into()));
        }
        Ok(())
    }

    /// Effective Friis constant: `medium_constant_c` scaled so that a
    /// transmission at the mean radio range with the mean minimum receive
    /// power costs the midpoint of the configured transmission band.
    pub fn calibrated_c(&self) -> f64 {
        let mid_rx = self.rx_power_range.mid();
        let mid_r = self.radio_range_range.mid();
        let mid_tx = self.tx_power_range.mid();
        self.medium_constant_c * mid_rx * mid_r * mid_r / mid_tx
    }

    /// Data packet payload size in bits.
    pub fn packet_bits(&self) -> u64 {
        self.packet_size as u64 * 8
    }

    /// Airtime of a payload in whole ticks (at least 1).
    pub fn airtime(&self, bits: u64) -> u64 {
        let ms = (bits * 1000).div_ceil(self.channel_capacity);
        ms.max(1)
    }
}
