//! JSON dump of a constructed family member.

use serde::Serialize;

use privstate_core::families::FamilyReference;
use privstate_core::{family_construct, Family, StateFamilyParams};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct PartDump {
    pub label: String,
    pub dim: usize,
    pub party: String,
    pub role: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ReferenceDump {
    pub log_negativity: Option<f64>,
    pub hashing: Option<f64>,
}

impl From<FamilyReference> for ReferenceDump {
    fn from(r: FamilyReference) -> Self {
        Self { log_negativity: r.log_negativity, hashing: r.hashing }
    }
}

#[derive(Debug, Serialize)]
pub struct StateDump {
    pub family: &'static str,
    pub d: usize,
    pub dim: usize,
    pub layout: Vec<PartDump>,
    pub order: &'static str,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
    pub reference: ReferenceDump,
}

pub fn construct(family: Family, d: usize) -> Result<StateDump, CliError> {
    let s = family_construct(&StateFamilyParams::new(family, d))?;
    let layout = s
        .state
        .layout()
        .parts()
        .iter()
        .map(|p| PartDump { label: p.label.clone(), dim: p.dim, party: p.party.to_string(), role: p.role.name() })
        .collect();
    let m = s.state.matrix();
    let n = m.nrows();
    let entries = (0..n).flat_map(|r| (0..n).map(move |c| [m[(r, c)].re, m[(r, c)].im])).collect();
    Ok(StateDump {
        family: family.name(),
        d,
        dim: n,
        layout,
        order: "row-major",
        entries,
        reference: s.reference.into(),
    })
}

pub fn construct_json(family: Family, d: usize) -> Result<String, CliError> {
    let mut s = serde_json::to_string(&construct(family, d)?).expect("dump serializes");
    s.push('\n');
    Ok(s)
}
