//! JSON schema for channels, superchannels, families, bipartite channels and
//! states. A matrix is `{"re": [[...]], "im": [[...]]}` with `im` optional.
//! Floats are written in shortest round-trip form, so parse ∘ emit is the
//! identity bit for bit.

use std::fmt;

use qsc_core::channels::Channel;
use qsc_core::entropies::{BipartiteChannel, ClassicalLegs};
use qsc_core::linalg::{CMatrix, C64};
use qsc_core::majorization::ChannelFamily;
use qsc_core::supermaps::{DimSpec, Realization, Superchannel};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Malformed input: a parse error with position, or a field that does not
/// fit the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn field(name: &str, e: impl fmt::Display) -> InputError {
    InputError(format!("field `{}`: {}", name, e))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.rows).map(|i| (0..m.cols).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        MatrixJson { re: rows(|z| z.re), im: Some(rows(|z| z.im)) }
    }

    pub fn to_matrix(&self, name: &str) -> Result<CMatrix, InputError> {
        let r = self.re.len();
        let c = self.re.first().map_or(0, |row| row.len());
        if r == 0 || c == 0 {
            return Err(field(name, "matrix is empty"));
        }
        if let Some(i) = self.re.iter().position(|row| row.len() != c) {
            return Err(field(name, format!("row {} of `re` has {} entries, expected {}", i, self.re[i].len(), c)));
        }
        if let Some(im) = &self.im {
            if im.len() != r || im.iter().any(|row| row.len() != c) {
                return Err(field(name, format!("`im` must be {}x{} like `re`", r, c)));
            }
        }
        Ok(CMatrix::from_fn(r, c, |i, j| {
            C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    d_in: usize,
    d_out: usize,
    choi: MatrixJson,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct SuperchannelJson {
    dims: [usize; 4],
    choi: MatrixJson,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct FamilyJson {
    dims: [usize; 2],
    channels: Vec<ChannelJson>,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default)]
#[serde(deny_unknown_fields)]
struct LegsJson {
    #[serde(default)]
    a0: bool,
    #[serde(default)]
    a1: bool,
    #[serde(default)]
    b0: bool,
    #[serde(default)]
    b1: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct BipartiteJson {
    dims: [usize; 4],
    choi: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classical: Option<LegsJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct StateJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<usize>>,
    state: MatrixJson,
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError(e.to_string()))
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn channel_from(c: &ChannelJson, name: &str) -> Result<Channel, InputError> {
    let m = c.choi.to_matrix(&format!("{}.choi", name))?;
    Channel::new(c.d_in, c.d_out, m).map_err(|e| field(name, e))
}

fn channel_to(c: &Channel) -> ChannelJson {
    ChannelJson { d_in: c.d_in, d_out: c.d_out, choi: MatrixJson::from_matrix(&c.choi) }
}

pub fn parse_channel_json(text: &str) -> Result<Channel, InputError> {
    channel_from(&parse::<ChannelJson>(text)?, "channel")
}

pub fn emit_channel_json(c: &Channel) -> String {
    pretty(&channel_to(c))
}

pub fn channel_value(c: &Channel) -> Value {
    serde_json::to_value(channel_to(c)).expect("serializable")
}

pub fn parse_superchannel_json(text: &str) -> Result<Superchannel, InputError> {
    let s: SuperchannelJson = parse(text)?;
    let [a0, a1, b0, b1] = s.dims;
    let m = s.choi.to_matrix("choi")?;
    Superchannel::new(DimSpec::new(a0, a1, b0, b1), m).map_err(|e| field("choi", e))
}

pub fn emit_superchannel_json(s: &Superchannel) -> String {
    pretty(&superchannel_value(s))
}

pub fn superchannel_value(s: &Superchannel) -> Value {
    let j = SuperchannelJson { dims: s.dims.as_array(), choi: MatrixJson::from_matrix(&s.choi) };
    serde_json::to_value(j).expect("serializable")
}

pub fn parse_family_json(text: &str) -> Result<ChannelFamily, InputError> {
    let f: FamilyJson = parse(text)?;
    let channels = f
        .channels
        .iter()
        .enumerate()
        .map(|(k, c)| channel_from(c, &format!("channels[{}]", k)))
        .collect::<Result<Vec<_>, _>>()?;
    ChannelFamily::new(f.dims[0], f.dims[1], channels).map_err(|e| field("channels", e))
}

pub fn emit_family_json(f: &ChannelFamily) -> String {
    pretty(&FamilyJson { dims: [f.d_in, f.d_out], channels: f.channels.iter().map(channel_to).collect() })
}

pub fn parse_bipartite_json(text: &str) -> Result<BipartiteChannel, InputError> {
    let b: BipartiteJson = parse(text)?;
    let [a0, a1, b0, b1] = b.dims;
    let m = b.choi.to_matrix("choi")?;
    let mut omega = BipartiteChannel::new(DimSpec::new(a0, a1, b0, b1), m).map_err(|e| field("choi", e))?;
    if let Some(l) = b.classical {
        let legs = ClassicalLegs { a0: l.a0, a1: l.a1, b0: l.b0, b1: l.b1 };
        omega = omega.with_classical(legs).map_err(|e| field("classical", e))?;
    }
    Ok(omega)
}

pub fn emit_bipartite_json(b: &BipartiteChannel) -> String {
    let c = b.classical;
    let any = c.a0 || c.a1 || c.b0 || c.b1;
    pretty(&BipartiteJson {
        dims: b.dims.as_array(),
        choi: MatrixJson::from_matrix(&b.choi),
        classical: any.then_some(LegsJson { a0: c.a0, a1: c.a1, b0: c.b0, b1: c.b1 }),
    })
}

/// A density operator with optional subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct StateInput {
    pub dims: Option<Vec<usize>>,
    pub state: CMatrix,
}

pub fn parse_state_json(text: &str) -> Result<StateInput, InputError> {
    let s: StateJson = parse(text)?;
    let m = s.state.to_matrix("state")?;
    if m.rows != m.cols {
        return Err(field("state", format!("matrix is {}x{}, expected square", m.rows, m.cols)));
    }
    if let Some(d) = &s.dims {
        let prod: usize = d.iter().product();
        if prod != m.rows {
            return Err(field("dims", format!("product {} does not match side {}", prod, m.rows)));
        }
    }
    Ok(StateInput { dims: s.dims, state: m })
}

pub fn emit_state_json(s: &StateInput) -> String {
    pretty(&StateJson { dims: s.dims.clone(), state: MatrixJson::from_matrix(&s.state) })
}

pub fn matrix_value(m: &CMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(m)).expect("serializable")
}

pub fn realization_value(r: &Realization) -> Value {
    json!({ "d_e": r.d_e, "pre": channel_value(&r.pre), "post": channel_value(&r.post) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsc_core::channels::random_channel;

    #[test]
    fn matrix_without_imaginary_part() {
        let m = MatrixJson { re: vec![vec![1.0, 0.0], vec![0.0, 0.0]], im: None }.to_matrix("m").unwrap();
        assert_eq!(m, CMatrix::diag(&[1.0, 0.0]));
    }

    #[test]
    fn ragged_rows_are_reported_by_field() {
        let text = r#"{"d_in": 1, "d_out": 2, "choi": {"re": [[1, 0], [0]]}}"#;
        let e = parse_channel_json(text).unwrap_err();
        assert!(e.0.contains("channel.choi") && e.0.contains("row 1"), "{}", e);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let e = parse_channel_json("{\n  \"d_in\": 1,\n  \"d_out\": }").unwrap_err();
        assert!(e.0.contains("line 3"), "{}", e);
    }

    #[test]
    fn channel_roundtrip_is_exact() {
        let c = random_channel(2, 3, 2, 4).unwrap();
        assert_eq!(parse_channel_json(&emit_channel_json(&c)).unwrap(), c);
    }
}
