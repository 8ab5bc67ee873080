//! Country groups, code aliases, and the per-year lookup of document rows.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::parse_label;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("group {0:?} has no members")]
    Empty(String),
    #[error("group {group:?} lists {member:?} more than once")]
    Duplicate { group: String, member: String },
}

/// Either every country present in a given year, or a fixed list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Membership {
    All(AllMembers),
    Only(Vec<String>),
}

/// Serialized as the string `"all"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllMembers {
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryGroup {
    pub name: String,
    pub members: Membership,
}

impl CountryGroup {
    pub fn new(name: &str, members: &[&str]) -> Result<Self, GroupError> {
        let group = CountryGroup {
            name: name.to_string(),
            members: Membership::Only(members.iter().map(|m| m.to_string()).collect()),
        };
        group.validate()?;
        Ok(group)
    }

    pub fn everyone(name: &str) -> Self {
        CountryGroup {
            name: name.to_string(),
            members: Membership::All(AllMembers::All),
        }
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        if let Membership::Only(members) = &self.members {
            if members.is_empty() {
                return Err(GroupError::Empty(self.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for m in members {
                if !seen.insert(m) {
                    return Err(GroupError::Duplicate {
                        group: self.name.clone(),
                        member: m.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Members present in `year`, as `(country, document row)` in country order.
    pub fn present<'a>(&self, year: &'a BTreeMap<String, usize>, aliases: &AliasTable) -> Vec<(&'a str, usize)> {
        match &self.members {
            Membership::All(_) => year.iter().map(|(c, &r)| (c.as_str(), r)).collect(),
            Membership::Only(members) => {
                let wanted: BTreeSet<&str> = members.iter().map(|m| aliases.canonical(m)).collect();
                year.iter()
                    .filter(|(c, _)| wanted.contains(c.as_str()))
                    .map(|(c, &r)| (c.as_str(), r))
                    .collect()
            }
        }
    }
}

/// The original fifteen EU member states.
pub fn eu15() -> CountryGroup {
    CountryGroup::new(
        "eu15",
        &[
            "AUT", "BEL", "DNK", "FIN", "FRA", "DEU", "GRC", "IRL", "ITA", "LUX", "NLD", "PRT", "ESP", "SWE", "GBR",
        ],
    )
    .unwrap()
}

pub fn emerging_economies() -> CountryGroup {
    CountryGroup::new(
        "emerging",
        &["BRA", "CHN", "IND", "IDN", "MEX", "RUS", "ZAF", "KOR", "TUR", "SAU"],
    )
    .unwrap()
}

/// Maps historical or alternate country codes onto one analytic entity,
/// e.g. the USSR onto Russia.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AliasTable(pub BTreeMap<String, String>);

impl Default for AliasTable {
    fn default() -> Self {
        AliasTable(BTreeMap::from([("SUN".to_string(), "RUS".to_string())]))
    }
}

impl AliasTable {
    pub fn none() -> Self {
        AliasTable(BTreeMap::new())
    }

    pub fn canonical<'a>(&'a self, code: &'a str) -> &'a str {
        self.0.get(code).map(String::as_str).unwrap_or(code)
    }
}

/// year → canonical country → document row.
pub type YearIndex = BTreeMap<i32, BTreeMap<String, usize>>;

/// Indexes document labels of the form `<country>_<year>` by year, applying
/// aliases. If two labels collapse onto the same entity in one year, the
/// first one wins.
pub fn index_documents(labels: &[String], aliases: &AliasTable) -> YearIndex {
    let mut out = YearIndex::new();
    for (row, label) in labels.iter().enumerate() {
        let Some((country, year)) = parse_label(label) else {
            continue;
        };
        let canonical = aliases.canonical(country).to_string();
        let slot = out.entry(year).or_default();
        if slot.contains_key(&canonical) {
            log::warn!("{label}: {canonical} already has a document in {year}; ignoring");
            continue;
        }
        slot.insert(canonical, row);
    }
    out
}
