//! Readers and a writer for the TransportationNetworks (TNTP) text formats.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Network, NetworkError, NodeMap, OdPair, Result};
use crate::cost::CostFunction;

/// One row of a TNTP link table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TntpLink {
    pub capacity: f64,
    pub length: f64,
    pub free_flow_time: f64,
    pub b: f64,
    pub power: f64,
    pub speed: f64,
    pub toll: f64,
    pub link_type: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TntpNetwork {
    pub network: Network,
    /// Link parameters, indexed by edge id.
    pub links: Vec<TntpLink>,
    pub node_map: NodeMap,
    pub num_zones: Option<usize>,
    pub first_thru_node: Option<u64>,
}

impl TntpNetwork {
    /// BPR latency of every edge.
    pub fn cost_functions(&self) -> Vec<CostFunction> {
        self.links
            .iter()
            .map(|l| CostFunction::Bpr {
                free_flow_time: l.free_flow_time,
                capacity: l.capacity,
                b: l.b,
                power: l.power,
            })
            .collect()
    }

    /// Free-flow time of every edge, the weights used to pick shortest paths.
    pub fn free_flow_times(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.free_flow_time).collect()
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> NetworkError {
    NetworkError::Parse {
        line,
        msg: msg.into(),
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').trim()))
}

#[derive(Default)]
struct Metadata {
    entries: HashMap<String, String>,
    /// 1-based line number where the body starts.
    body_start: usize,
    ended: bool,
}

fn read_metadata(text: &str) -> Result<Metadata> {
    let mut meta = Metadata::default();
    for (no, line) in lines(text) {
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        if !line.starts_with('<') {
            meta.body_start = no;
            return Ok(meta);
        }
        let close = line
            .find('>')
            .ok_or_else(|| parse_err(no, "unterminated metadata tag"))?;
        let key = line[1..close].trim().to_ascii_uppercase();
        if key == "END OF METADATA" {
            meta.ended = true;
            meta.body_start = no + 1;
            return Ok(meta);
        }
        meta.entries.insert(key, line[close + 1..].trim().to_string());
    }
    meta.body_start = usize::MAX;
    Ok(meta)
}

fn meta_number<T: std::str::FromStr>(meta: &Metadata, key: &str) -> Result<Option<T>> {
    match meta.entries.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| parse_err(0, format!("metadata <{key}> is not a number: {v:?}"))),
    }
}

/// Parses a TNTP `_net` file.
///
/// Node labels `1..=n` become vertices `0..n`; the mapping is kept in
/// [`TntpNetwork::node_map`].
pub fn parse_tntp_net(text: &str) -> Result<TntpNetwork> {
    let meta = read_metadata(text)?;
    if !meta.ended {
        return Err(parse_err(0, "missing <END OF METADATA>"));
    }
    let num_nodes: usize = meta_number(&meta, "NUMBER OF NODES")?
        .ok_or_else(|| parse_err(0, "missing <NUMBER OF NODES>"))?;
    let num_links: usize = meta_number(&meta, "NUMBER OF LINKS")?
        .ok_or_else(|| parse_err(0, "missing <NUMBER OF LINKS>"))?;
    let node_map = NodeMap::one_based(num_nodes);

    let mut arcs = Vec::with_capacity(num_links);
    let mut links = Vec::with_capacity(num_links);
    for (no, line) in lines(text).skip(meta.body_start.saturating_sub(1)) {
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let body = line.split(';').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() < 7 {
            return Err(parse_err(
                no,
                format!("expected at least 7 link fields, found {}", fields.len()),
            ));
        }
        let num = |i: usize| -> Result<f64> {
            match fields.get(i) {
                None => Ok(0.0),
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| parse_err(no, format!("field {} is not a number: {s:?}", i + 1))),
            }
        };
        let node = |i: usize| -> Result<usize> {
            let label: u64 = fields[i]
                .parse()
                .map_err(|_| parse_err(no, format!("bad node id {:?}", fields[i])))?;
            node_map.vertex(label).ok_or_else(|| {
                NetworkError::Validation(format!(
                    "line {no}: node {label} outside 1..={num_nodes}"
                ))
            })
        };
        let tail = node(0)?;
        let head = node(1)?;
        let link = TntpLink {
            capacity: num(2)?,
            length: num(3)?,
            free_flow_time: num(4)?,
            b: num(5)?,
            power: num(6)?,
            speed: num(7)?,
            toll: num(8)?,
            link_type: num(9)? as i64,
        };
        if !(link.capacity > 0.0) {
            return Err(NetworkError::Validation(format!(
                "line {no}: capacity must be positive, got {}",
                link.capacity
            )));
        }
        if !(link.free_flow_time > 0.0) || link.b < 0.0 || link.power < 1.0 {
            return Err(NetworkError::Validation(format!(
                "line {no}: BPR parameters out of range (fft {}, b {}, power {})",
                link.free_flow_time, link.b, link.power
            )));
        }
        arcs.push((tail, head));
        links.push(link);
    }
    if arcs.len() != num_links {
        return Err(parse_err(
            0,
            format!(
                "<NUMBER OF LINKS> says {num_links} but {} rows were read",
                arcs.len()
            ),
        ));
    }
    let network = Network::new(num_nodes, &arcs)?;
    Ok(TntpNetwork {
        network,
        links,
        node_map,
        num_zones: meta_number(&meta, "NUMBER OF ZONES")?,
        first_thru_node: meta_number(&meta, "FIRST THRU NODE")?,
    })
}

/// Writes `net` in the TNTP link-table format. Floats use Rust's shortest
/// round-trip representation, so parsing the output reproduces `net` exactly.
pub fn write_tntp_net(net: &TntpNetwork) -> String {
    let mut s = String::new();
    if let Some(z) = net.num_zones {
        let _ = writeln!(s, "<NUMBER OF ZONES> {z}");
    }
    let _ = writeln!(s, "<NUMBER OF NODES> {}", net.network.num_vertices());
    if let Some(f) = net.first_thru_node {
        let _ = writeln!(s, "<FIRST THRU NODE> {f}");
    }
    let _ = writeln!(s, "<NUMBER OF LINKS> {}", net.network.num_edges());
    let _ = writeln!(s, "<END OF METADATA>\n");
    let _ = writeln!(
        s,
        "~\tinit_node\tterm_node\tcapacity\tlength\tfree_flow_time\tb\tpower\tspeed\ttoll\tlink_type\t;"
    );
    for (e, l) in net.network.edges().iter().zip(&net.links) {
        let _ = writeln!(
            s,
            "\t{}\t{}\t{:?}\t{:?}\t{:?}\t{:?}\t{:?}\t{:?}\t{:?}\t{}\t;",
            net.node_map.label(e.tail),
            net.node_map.label(e.head),
            l.capacity,
            l.length,
            l.free_flow_time,
            l.b,
            l.power,
            l.speed,
            l.toll,
            l.link_type
        );
    }
    s
}

/// Parses a TNTP `_trips` file into O/D pairs.
///
/// Zero-flow entries and diagonal entries are dropped; repeated
/// origin/destination entries are summed. Pair ids follow file order.
pub fn parse_tntp_trips(text: &str, node_map: &NodeMap) -> Result<Vec<OdPair>> {
    let meta = read_metadata(text)?;
    let start = if meta.body_start == usize::MAX {
        usize::MAX
    } else {
        meta.body_start.max(1)
    };
    let mut origin: Option<usize> = None;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    let lookup = |no: usize, tok: &str| -> Result<usize> {
        let label: u64 = tok
            .parse()
            .map_err(|_| parse_err(no, format!("bad node id {tok:?}")))?;
        node_map
            .vertex(label)
            .ok_or_else(|| NetworkError::Validation(format!("line {no}: unknown node {label}")))
    };
    for (no, line) in lines(text).skip(start.saturating_sub(1)) {
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("Origin") {
            origin = Some(lookup(no, rest.trim())?);
            continue;
        }
        let o = origin.ok_or_else(|| parse_err(no, "destination entries before any `Origin`"))?;
        for entry in line.split(';') {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            let (d, flow) = entry
                .split_once(':')
                .ok_or_else(|| parse_err(no, format!("expected `dest : flow`, got {entry:?}")))?;
            let d = lookup(no, d.trim())?;
            let flow: f64 = flow
                .trim()
                .parse()
                .map_err(|_| parse_err(no, format!("bad flow {:?}", flow.trim())))?;
            if !flow.is_finite() || flow < 0.0 {
                return Err(NetworkError::Validation(format!(
                    "line {no}: flow must be finite and nonnegative, got {flow}"
                )));
            }
            if flow == 0.0 || d == o {
                continue;
            }
            match index.get(&(o, d)) {
                Some(&i) => pairs[i].2 += flow,
                None => {
                    index.insert((o, d), pairs.len());
                    pairs.push((o, d, flow));
                }
            }
        }
    }
    pairs
        .into_iter()
        .enumerate()
        .map(|(id, (o, d, m))| OdPair::new(id, o, d, m))
        .collect()
}
