//! Line-oriented plan files.
//!
//! ```text
//! #plan v1 scheme=LIN K=6 t=2 L=3 alpha=3 K_f=0 phi=1
//! #fields round slot position user packet subpacket suppress group
//! V 110000
//! ...
//! 1 1 1 1 3 1 2,5 -
//! ...
//! #end records=120
//! ```
//!
//! `V` rows are the placement the plan relies on (the virtual network's for
//! grouped plans). Empty suppress sets and missing groups are written as `-`.

use std::collections::{BTreeMap, HashMap};

use cyclic_caching::delivery::{CacheLayout, StreamDescriptor, Transmission, TransmissionPlan};
use cyclic_caching::{GroupingMap, PlacementMatrix, Scheme, SchemeParams};

use crate::error::CliError;

pub const FIELDS: &str = "round slot position user packet subpacket suppress group";

fn list(values: &[usize]) -> String {
    if values.is_empty() {
        "-".to_string()
    } else {
        values
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Serializes `plan`, built for `scheme`.
pub fn write_plan(plan: &TransmissionPlan, scheme: Scheme) -> String {
    let p = &plan.params;
    let mut out = format!(
        "#plan v1 scheme={scheme} K={} t={} L={} alpha={} K_f={} phi={}\n#fields {FIELDS}\n",
        p.users,
        p.caching_gain,
        p.antennas,
        p.multiplexing,
        p.phantoms,
        plan.layout.group_size()
    );
    for row in plan.layout.placement().row_strings() {
        out.push_str("V ");
        out.push_str(&row);
        out.push('\n');
    }
    let mut records = 0;
    for tx in &plan.transmissions {
        for s in &tx.streams {
            records += 1;
            out.push_str(&format!(
                "{} {} {} {} {} {} {} {}\n",
                tx.round,
                tx.slot,
                s.position,
                s.user,
                s.packet,
                s.subpacket,
                list(&s.suppress_at),
                s.group.map_or_else(|| "-".to_string(), |g| g.to_string())
            ));
        }
    }
    out.push_str(&format!("#end records={records}\n"));
    out
}

/// A parsed plan plus the file line of every transmission and stream.
#[derive(Debug, Clone)]
pub struct ParsedPlan {
    pub scheme: Scheme,
    pub plan: TransmissionPlan,
    /// `(transmission index, position)` to 1-based line number.
    pub stream_lines: HashMap<(usize, usize), usize>,
    /// First line of each transmission.
    pub transmission_lines: Vec<usize>,
}

fn parse_usize(line: usize, what: &str, token: &str) -> Result<usize, CliError> {
    token.parse().map_err(|_| {
        CliError::parse(
            line,
            format!("{what} '{token}' is not a non-negative integer"),
        )
    })
}

fn parse_list(line: usize, what: &str, token: &str) -> Result<Vec<usize>, CliError> {
    if token == "-" {
        return Ok(Vec::new());
    }
    token
        .split(',')
        .map(|x| parse_usize(line, what, x))
        .collect()
}

/// Line number, the six numeric fields, suppress set and group of one stream line.
type Record = (usize, [usize; 6], Vec<usize>, Option<usize>);

struct Header {
    scheme: Scheme,
    params: SchemeParams,
    phi: usize,
}

fn parse_header(text: &str) -> Result<Header, CliError> {
    let rest = text
        .strip_prefix("#plan v1")
        .ok_or_else(|| CliError::parse(1, "expected '#plan v1' header"))?;
    let mut fields = BTreeMap::new();
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| CliError::parse(1, format!("malformed header field '{token}'")))?;
        fields.insert(key, value);
    }
    let get = |key: &str| {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| CliError::parse(1, format!("header lacks {key}")))
    };
    let num = |key: &str| get(key).and_then(|v| parse_usize(1, key, v));
    let scheme: Scheme = get("scheme")?
        .parse()
        .map_err(|e: cyclic_caching::Error| CliError::parse(1, e.to_string()))?;
    let params = SchemeParams::new(num("K")?, num("t")?, num("L")?, num("alpha")?)
        .with_phantoms(num("K_f")?)
        .validate()
        .map_err(|e| CliError::parse(1, e.to_string()))?;
    Ok(Header {
        scheme,
        params,
        phi: num("phi")?,
    })
}

/// Parses a plan file; structural problems are reported with their line.
pub fn parse_plan(text: &str) -> Result<ParsedPlan, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let header = match lines.next() {
        Some((_, l)) => parse_header(l)?,
        None => return Err(CliError::parse(1, "empty plan file")),
    };
    match lines.next() {
        Some((_, l)) if l.strip_prefix("#fields").map(str::trim) == Some(FIELDS) => {}
        Some((n, _)) => return Err(CliError::parse(n, format!("expected '#fields {FIELDS}'"))),
        None => return Err(CliError::parse(2, "missing field list")),
    }

    let mut rows = Vec::new();
    let mut records: Vec<Record> = Vec::new();
    let mut end: Option<(usize, usize)> = None;
    let mut last_line = 2;
    for (n, line) in lines {
        last_line = n;
        if let Some((end_line, _)) = end {
            if !line.trim().is_empty() {
                return Err(CliError::parse(
                    n,
                    format!("content after the #end line {end_line}"),
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if let Some(row) = line.strip_prefix("V ") {
            if !records.is_empty() {
                return Err(CliError::parse(n, "placement row after stream records"));
            }
            rows.push(row.trim().to_string());
            continue;
        }
        if let Some(rest) = line.strip_prefix("#end") {
            let count = rest
                .trim()
                .strip_prefix("records=")
                .ok_or_else(|| CliError::parse(n, "expected '#end records=<count>'"))?;
            end = Some((n, parse_usize(n, "record count", count)?));
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 8 {
            return Err(CliError::parse(
                n,
                format!("expected 8 fields, found {}", tokens.len()),
            ));
        }
        let names = ["round", "slot", "position", "user", "packet", "subpacket"];
        let mut nums = [0usize; 6];
        for (slot, (name, token)) in nums.iter_mut().zip(names.iter().zip(&tokens)) {
            *slot = parse_usize(n, name, token)?;
        }
        let suppress = parse_list(n, "suppress user", tokens[6])?;
        let group = match tokens[7] {
            "-" => None,
            g => Some(parse_usize(n, "group", g)?),
        };
        records.push((n, nums, suppress, group));
    }
    match end {
        None => {
            return Err(CliError::parse(
                last_line,
                "file ends without the '#end records=<count>' line (truncated?)",
            ))
        }
        Some((n, count)) if count != records.len() => {
            return Err(CliError::parse(
                n,
                format!("trailer announces {count} records, found {}", records.len()),
            ))
        }
        Some(_) => {}
    }

    let params = header.params;
    let effective_users = params.effective_users();
    let layout = {
        let placement =
            PlacementMatrix::from_rows(&rows).map_err(|e| CliError::parse(3, e.to_string()))?;
        if header.phi == 0 || header.phi * placement.users() != effective_users {
            return Err(CliError::parse(
                1,
                format!(
                    "phi = {} with {} placement rows does not cover {effective_users} users",
                    header.phi,
                    placement.users()
                ),
            ));
        }
        if header.phi == 1 {
            CacheLayout::Cyclic(placement)
        } else {
            let grouping = GroupingMap::new(header.phi, placement.users())
                .map_err(|e| CliError::parse(1, e.to_string()))?;
            CacheLayout::Grouped {
                placement,
                grouping,
            }
        }
    };

    let mut transmissions: Vec<Transmission> = Vec::new();
    let mut stream_lines = HashMap::new();
    let mut transmission_lines = Vec::new();
    let mut counters: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (n, [round, slot, position, user, packet, subpacket], suppress_at, group) in records {
        let same = transmissions
            .last()
            .is_some_and(|t| t.round == round && t.slot == slot);
        if !same {
            transmissions.push(Transmission {
                round,
                slot,
                streams: Vec::new(),
            });
            transmission_lines.push(n);
        }
        let index = transmissions.len() - 1;
        let tx = transmissions.last_mut().expect("just pushed");
        if position != tx.streams.len() + 1 {
            return Err(CliError::parse(
                n,
                format!(
                    "position {position} breaks the sequence, expected {}",
                    tx.streams.len() + 1
                ),
            ));
        }
        stream_lines.insert((index, position), n);
        let next = counters.entry((user, packet)).or_insert(1);
        *next = (*next).max(subpacket + 1);
        tx.streams.push(StreamDescriptor {
            position,
            user,
            packet,
            subpacket,
            suppress_at,
            group,
        });
    }

    let phi = header.phi;
    Ok(ParsedPlan {
        scheme: header.scheme,
        plan: TransmissionPlan {
            subpackets: (params.caching_gain + params.multiplexing) / phi,
            real_users: params.users,
            params,
            layout,
            transmissions,
            counters,
        },
        stream_lines,
        transmission_lines,
    })
}
