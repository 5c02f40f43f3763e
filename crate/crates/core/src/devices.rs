//! Guiding input, device functions and DOM annotation for the two-screen split.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classifier::{ClassifierConfig, Function};
use crate::error::{Error, Result};
use crate::segmenter::Block;
use crate::snapshot::{DomNode, DomSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceId {
    Device1,
    Device2,
}

impl DeviceId {
    /// The master device.
    pub const MASTER: DeviceId = DeviceId::Device1;

    pub fn as_str(self) -> &'static str {
        match self {
            DeviceId::Device1 => "device1",
            DeviceId::Device2 => "device2",
        }
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Screen {
    Large,
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMeans {
    Touch,
    Keyboard,
    Mouse,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Tv,
    Portable,
    Desktop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub device_id: DeviceId,
    pub screen: Option<Screen>,
    pub input: BTreeSet<InputMeans>,
    pub kind: Option<DeviceKind>,
    /// Explicit function, wins over anything derived from the hardware.
    pub function: Option<Function>,
}

impl DeviceProfile {
    fn has_input_means(&self) -> bool {
        self.input.iter().any(|&i| i != InputMeans::None)
    }
}

/// Function a device is best at: explicit choice first, then display-oriented
/// hardware (a TV, or a large screen without input) as multimedia, then any
/// input means as interactive. Anything else defaults to interactive.
pub fn derive_device_function(p: &DeviceProfile) -> Function {
    if let Some(f) = p.function {
        return f;
    }
    let display_only = p.screen == Some(Screen::Large) && !p.has_input_means();
    if p.kind == Some(DeviceKind::Tv) || display_only {
        Function::Multimedia
    } else {
        Function::Interactive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidingInput {
    pub devices: [DeviceProfile; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileJson {
    screen: Option<Screen>,
    #[serde(default)]
    input: Option<Value>,
    kind: Option<DeviceKind>,
    function: Option<String>,
}

impl GuidingInput {
    /// Accepts `{"device1":"multimedia","device2":"interactive"}` or the
    /// profile form `{"device1":{"screen":"large","input":"none","kind":"tv"},...}`.
    /// Fails when the two devices end up with the same function.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let value: Value = serde_json::from_slice(bytes)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::config("guiding input must be a JSON object"))?;
        if let Some(extra) = obj.keys().find(|k| *k != "device1" && *k != "device2") {
            return Err(Error::config(format!("unexpected device key \"{extra}\"")));
        }
        let profile = |id: DeviceId| -> Result<DeviceProfile> {
            let v = obj
                .get(id.as_str())
                .ok_or_else(|| Error::config(format!("missing \"{id}\"")))?;
            parse_profile(id, v)
        };
        let gi = GuidingInput {
            devices: [profile(DeviceId::Device1)?, profile(DeviceId::Device2)?],
        };
        gi.functions()?;
        Ok(gi)
    }

    pub fn short(device1: Function, device2: Function) -> Result<Self> {
        let p = |device_id, f| DeviceProfile {
            device_id,
            screen: None,
            input: BTreeSet::new(),
            kind: None,
            function: Some(f),
        };
        let gi = GuidingInput {
            devices: [p(DeviceId::Device1, device1), p(DeviceId::Device2, device2)],
        };
        gi.functions()?;
        Ok(gi)
    }

    /// Derived functions of device1 and device2, which must differ.
    pub fn functions(&self) -> Result<(Function, Function)> {
        let f1 = derive_device_function(&self.devices[0]);
        let f2 = derive_device_function(&self.devices[1]);
        if f1 == f2 {
            return Err(Error::config(format!("both devices resolve to function \"{f1}\"")));
        }
        Ok((f1, f2))
    }

    pub fn device_for(&self, f: Function) -> Result<DeviceId> {
        let (f1, _) = self.functions()?;
        Ok(if f == f1 { DeviceId::Device1 } else { DeviceId::Device2 })
    }
}

fn parse_profile(device_id: DeviceId, v: &Value) -> Result<DeviceProfile> {
    if let Some(s) = v.as_str() {
        return Ok(DeviceProfile {
            device_id,
            screen: None,
            input: BTreeSet::new(),
            kind: None,
            function: Some(s.parse()?),
        });
    }
    let raw: ProfileJson = serde_json::from_value(v.clone())
        .map_err(|e| Error::config(format!("{device_id}: {e}")))?;
    let input = match raw.input {
        None | Some(Value::Null) => BTreeSet::new(),
        Some(Value::String(s)) => s.split('+').map(parse_input).collect::<Result<_>>()?,
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| {
                i.as_str()
                    .ok_or_else(|| Error::config("input entries must be strings"))
                    .and_then(parse_input)
            })
            .collect::<Result<_>>()?,
        Some(other) => return Err(Error::config(format!("{device_id}: bad input {other}"))),
    };
    Ok(DeviceProfile {
        device_id,
        screen: raw.screen,
        input,
        kind: raw.kind,
        function: raw.function.as_deref().map(str::parse).transpose()?,
    })
}

fn parse_input(s: &str) -> Result<InputMeans> {
    serde_json::from_value(Value::String(s.trim().to_ascii_lowercase()))
        .map_err(|_| Error::config(format!("unknown input means \"{s}\"")))
}

/// Element to device assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDom {
    #[serde(skip)]
    pub snapshot_ref: String,
    pub annotations: BTreeMap<String, DeviceId>,
}

impl AnnotatedDom {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("annotation serialization is infallible")
    }
}

/// Annotate every element referenced by a block with the device whose
/// function matches the block. Other elements stay unannotated.
pub fn annotate(s: &DomSnapshot, blocks: &[Block], gi: &GuidingInput) -> Result<AnnotatedDom> {
    let (f1, _) = gi.functions()?;
    let mut annotations = BTreeMap::new();
    for block in blocks {
        let device = if block.function == f1 { DeviceId::Device1 } else { DeviceId::Device2 };
        for r in &block.dom_refs {
            annotations.insert(r.clone(), device);
        }
    }
    Ok(AnnotatedDom {
        snapshot_ref: snapshot_ref(s),
        annotations,
    })
}

fn snapshot_ref(s: &DomSnapshot) -> String {
    if s.url.is_empty() { s.root.id.clone() } else { s.url.clone() }
}

/// Complete a partial annotation over the retained elements.
///
/// An unannotated element takes the majority device among its annotated
/// descendants (ties go to device1), else the device of its nearest annotated
/// ancestor, else device1. Existing annotations are never changed.
pub fn resolve_annotations(a: &AnnotatedDom, s: &DomSnapshot, cfg: &ClassifierConfig) -> AnnotatedDom {
    let mut majority = BTreeMap::new();
    count_descendants(&s.root, &a.annotations, &mut majority);

    let mut resolved = a.annotations.clone();
    assign_top_down(&s.root, None, cfg, &majority, &mut resolved);
    AnnotatedDom {
        snapshot_ref: a.snapshot_ref.clone(),
        annotations: resolved,
    }
}

/// Returns (device1, device2) counts of annotated elements strictly below
/// `node`, and records the majority for every node that has any.
fn count_descendants<'s>(
    node: &'s DomNode,
    given: &BTreeMap<String, DeviceId>,
    majority: &mut BTreeMap<&'s str, DeviceId>,
) -> (usize, usize) {
    let mut below = (0, 0);
    for child in &node.children {
        let (c1, c2) = count_descendants(child, given, majority);
        below.0 += c1;
        below.1 += c2;
        match given.get(&child.id) {
            Some(DeviceId::Device1) => below.0 += 1,
            Some(DeviceId::Device2) => below.1 += 1,
            None => {}
        }
    }
    if below.0 + below.1 > 0 {
        let d = if below.1 > below.0 { DeviceId::Device2 } else { DeviceId::Device1 };
        majority.insert(node.id.as_str(), d);
    }
    below
}

fn assign_top_down(
    node: &DomNode,
    inherited: Option<DeviceId>,
    cfg: &ClassifierConfig,
    majority: &BTreeMap<&str, DeviceId>,
    out: &mut BTreeMap<String, DeviceId>,
) {
    let mut current = out.get(&node.id).copied();
    if current.is_none() && cfg.is_retained(node) {
        let d = majority
            .get(node.id.as_str())
            .copied()
            .or(inherited)
            .unwrap_or(DeviceId::MASTER);
        out.insert(node.id.clone(), d);
        current = Some(d);
    }
    let pass_down = current.or(inherited);
    for child in &node.children {
        assign_top_down(child, pass_down, cfg, majority, out);
    }
}
