use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::availability::{ClusterConfig, SystemConfig};
use crate::error::{Error, Result};
use crate::money::Money;

/// A deployable redundancy choice for one slot of the base architecture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaOption {
    pub option_id: String,
    pub label: String,
    /// Redundancy shape this option deploys. Its name is replaced by the slot
    /// name when a system is assembled.
    pub cluster: ClusterConfig,
    pub monthly_infra_cost: Money,
    pub monthly_labor_cost: Money,
}

impl HaOption {
    pub fn monthly_cost(&self) -> Money {
        self.monthly_infra_cost + self.monthly_labor_cost
    }

    fn validate(&self, slot: &str) -> Result<()> {
        let subject = || format!("slot `{slot}` option `{}`", self.option_id);
        if self.option_id.is_empty() {
            return Err(Error::invalid(
                format!("slot `{slot}`"),
                "option_id",
                "must not be empty",
            ));
        }
        if self.monthly_infra_cost.is_negative() {
            return Err(Error::invalid(subject(), "monthly_infra_cost", "must be >= 0"));
        }
        if self.monthly_labor_cost.is_negative() {
            return Err(Error::invalid(subject(), "monthly_labor_cost", "must be >= 0"));
        }
        self.cluster.validate()
    }
}

/// One cluster position in the base architecture with its option menu.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub options: Vec<HaOption>,
    /// Index into `options` of the as-built (usually "no HA") option.
    pub baseline: usize,
}

impl Slot {
    /// Builds a slot; `baseline` defaults to the first option.
    pub fn new(name: impl Into<String>, options: Vec<HaOption>, baseline: Option<&str>) -> Result<Self> {
        let name = name.into();
        let baseline = match baseline {
            None => 0,
            Some(id) => options
                .iter()
                .position(|o| o.option_id == id)
                .ok_or_else(|| Error::Unknown {
                    what: "baseline option",
                    name: id.to_string(),
                    context: format!(" in slot `{name}`"),
                })?,
        };
        let slot = Slot {
            name,
            options,
            baseline,
        };
        slot.validate()?;
        Ok(slot)
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::invalid("catalog", "slot name", "must not be empty"));
        }
        if self.options.is_empty() {
            return Err(Error::invalid(
                format!("slot `{}`", self.name),
                "options",
                "at least one option is required",
            ));
        }
        if self.baseline >= self.options.len() {
            return Err(Error::invalid(
                format!("slot `{}`", self.name),
                "baseline",
                "index out of range",
            ));
        }
        let mut ids = HashSet::new();
        for option in &self.options {
            option.validate(&self.name)?;
            if !ids.insert(option.option_id.as_str()) {
                return Err(Error::Duplicate {
                    what: "option id",
                    key: format!("{}/{}", self.name, option.option_id),
                });
            }
        }
        Ok(())
    }

    pub fn option_index(&self, option_id: &str) -> Option<usize> {
        self.options.iter().position(|o| o.option_id == option_id)
    }

    pub fn baseline_option(&self) -> &HaOption {
        &self.options[self.baseline]
    }
}

/// Slot name → chosen option id.
///
/// Ordered by slot name, which also fixes the lexicographic tie-break order
/// independently of how the catalog declares its slots.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChoiceMap(pub BTreeMap<String, String>);

impl ChoiceMap {
    pub fn get(&self, slot: &str) -> Option<&str> {
        self.0.get(slot).map(String::as_str)
    }

    pub fn insert(&mut self, slot: impl Into<String>, option: impl Into<String>) -> Option<String> {
        self.0.insert(slot.into(), option.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Parses `slot=option,slot=option`. Whitespace around tokens is ignored;
    /// an empty string is an empty map.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ChoiceMap::default();
        if text.trim().is_empty() {
            return Ok(map);
        }
        for (i, part) in text.split(',').enumerate() {
            let column = text.split(',').take(i).map(|p| p.len() + 1).sum::<usize>() + 1;
            let parse_err = |message: String| Error::Parse {
                source_name: "choices".into(),
                line: 1,
                column,
                message,
            };
            let (slot, option) = part
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `slot=option`, found `{}`", part.trim())))?;
            let (slot, option) = (slot.trim(), option.trim());
            if slot.is_empty() || option.is_empty() {
                return Err(parse_err(format!("empty slot or option in `{}`", part.trim())));
            }
            if map.insert(slot, option).is_some() {
                return Err(Error::Duplicate {
                    what: "slot in choices",
                    key: slot.to_string(),
                });
            }
        }
        Ok(map)
    }
}

impl fmt::Display for ChoiceMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (slot, option) in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{slot}={option}")?;
        }
        Ok(())
    }
}

impl<S: Into<String>, O: Into<String>> FromIterator<(S, O)> for ChoiceMap {
    fn from_iter<I: IntoIterator<Item = (S, O)>>(iter: I) -> Self {
        ChoiceMap(iter.into_iter().map(|(s, o)| (s.into(), o.into())).collect())
    }
}

/// Per-slot option menus for the base architecture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptionCatalog {
    slots: Vec<Slot>,
}

impl OptionCatalog {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::invalid("catalog", "slots", "at least one slot is required"));
        }
        let mut names = HashSet::new();
        for slot in &slots {
            slot.validate()?;
            if !names.insert(slot.name.as_str()) {
                return Err(Error::Duplicate {
                    what: "slot name",
                    key: slot.name.clone(),
                });
            }
        }
        Ok(OptionCatalog { slots })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, name: &str) -> Option<&Slot> {
        self.slots.iter().find(|s| s.name == name)
    }

    /// Number of candidates, `Π k_slot`; `None` on overflow.
    pub fn candidate_count(&self) -> Option<usize> {
        self.slots
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.options.len()))
    }

    pub(crate) fn baseline_indices(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.baseline).collect()
    }

    /// Resolves a complete choice map to per-slot option indices.
    pub fn resolve(&self, choices: &ChoiceMap) -> Result<Vec<usize>> {
        for slot in choices.0.keys() {
            if self.slot(slot).is_none() {
                return Err(Error::Unknown {
                    what: "slot",
                    name: slot.clone(),
                    context: String::new(),
                });
            }
        }
        self.slots
            .iter()
            .map(|slot| {
                let id = choices.get(&slot.name).ok_or_else(|| {
                    Error::invalid("choices", "slot", format!("no option chosen for slot `{}`", slot.name))
                })?;
                slot.option_index(id).ok_or_else(|| Error::Unknown {
                    what: "option",
                    name: id.to_string(),
                    context: format!(" in slot `{}`", slot.name),
                })
            })
            .collect()
    }

    /// Fills slots missing from `partial` with their baseline option.
    pub fn complete_with_baseline(&self, partial: &ChoiceMap) -> Result<ChoiceMap> {
        let mut full = partial.clone();
        for slot in &self.slots {
            if full.get(&slot.name).is_none() {
                full.insert(slot.name.clone(), slot.baseline_option().option_id.clone());
            }
        }
        self.resolve(&full)?;
        Ok(full)
    }

    pub(crate) fn choice_map(&self, indices: &[usize]) -> ChoiceMap {
        self.slots
            .iter()
            .zip(indices)
            .map(|(slot, &i)| (slot.name.clone(), slot.options[i].option_id.clone()))
            .collect()
    }

    /// Serial system for the given option indices; clusters are named after slots.
    pub(crate) fn assemble(&self, indices: &[usize]) -> Result<(SystemConfig, Money)> {
        let mut clusters = Vec::with_capacity(self.slots.len());
        let mut costs: Vec<(&str, Money)> = Vec::with_capacity(self.slots.len());
        for (slot, &i) in self.slots.iter().zip(indices) {
            let option = &slot.options[i];
            let mut cluster = option.cluster.clone();
            cluster.name = slot.name.clone();
            clusters.push(cluster);
            costs.push((&slot.name, option.monthly_cost()));
        }
        costs.sort_by(|a, b| a.0.cmp(b.0));
        let cha = costs.into_iter().map(|(_, c)| c).sum();
        Ok((SystemConfig::new(clusters)?, cha))
    }

    /// Assembles the system and aggregated monthly HA cost for a choice map.
    pub fn assemble_choices(&self, choices: &ChoiceMap) -> Result<(SystemConfig, Money)> {
        self.assemble(&self.resolve(choices)?)
    }
}

/// Mixed-radix odometer over option indices: slots in catalog order, the
/// last slot varying fastest.
#[derive(Clone, Debug)]
pub(crate) struct IndexOdometer {
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl IndexOdometer {
    pub(crate) fn new(catalog: &OptionCatalog) -> Self {
        let radices: Vec<usize> = catalog.slots.iter().map(|s| s.options.len()).collect();
        let next = if radices.iter().all(|&r| r > 0) {
            Some(vec![0; radices.len()])
        } else {
            None
        };
        IndexOdometer { radices, next }
    }
}

impl Iterator for IndexOdometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut following = current.clone();
        for pos in (0..following.len()).rev() {
            following[pos] += 1;
            if following[pos] < self.radices[pos] {
                self.next = Some(following);
                break;
            }
            following[pos] = 0;
        }
        Some(current)
    }
}

/// Every element of the cross product of slot option lists, in odometer order.
pub fn enumerate_candidates(catalog: &OptionCatalog) -> impl Iterator<Item = ChoiceMap> + '_ {
    IndexOdometer::new(catalog).map(move |indices| catalog.choice_map(&indices))
}

/// Slots whose chosen option differs from the slot baseline.
pub fn classify_clustered_slots(choices: &ChoiceMap, catalog: &OptionCatalog) -> Result<BTreeSet<String>> {
    let indices = catalog.resolve(choices)?;
    Ok(catalog
        .slots
        .iter()
        .zip(indices)
        .filter(|(slot, i)| *i != slot.baseline)
        .map(|(slot, _)| slot.name.clone())
        .collect())
}
