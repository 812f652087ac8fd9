//! The feature layout manifest: which mnemonics get individual slots and how
//! every instruction maps onto a group slot.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::{FeatureError, FEATURE_DIM, GROUP_SLOTS, MNEMONIC_SLOTS};

const DEFAULT_MANIFEST: &str = include_str!("default_layout.txt");

/// Parsed layout. Slot indices are fixed by manifest order: mnemonic slots
/// `0..132` in declaration order, then group slots `132..140` in `!group`
/// declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayout {
    mnemonics: Vec<String>,
    groups: Vec<String>,
    slot_of: HashMap<String, usize>,
    group_of_mnemonic: HashMap<String, usize>,
    catch_all: usize,
}

impl FeatureLayout {
    /// The layout shipped with the crate.
    pub fn default_layout() -> &'static FeatureLayout {
        static LAYOUT: OnceLock<FeatureLayout> = OnceLock::new();
        LAYOUT.get_or_init(|| {
            FeatureLayout::parse(DEFAULT_MANIFEST).expect("bundled layout must be valid")
        })
    }

    /// Parse a manifest. Grammar per line: blank and `#` lines are ignored,
    /// `!group NAME` declares a group, `MNEMONIC,GROUP` binds a mnemonic to an
    /// already-declared group.
    pub fn parse(manifest: &str) -> Result<Self, FeatureError> {
        let mut groups: Vec<String> = Vec::new();
        let mut mnemonics: Vec<String> = Vec::new();
        let mut group_of_mnemonic = HashMap::new();
        let mut slot_of = HashMap::new();

        for (idx, raw) in manifest.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            let err = |message: String| FeatureError::Layout { line: lineno, message };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix("!group") {
                let name = name.trim();
                if name.is_empty() || name.contains(',') {
                    return Err(err(format!("bad group name {name:?}")));
                }
                if !mnemonics.is_empty() {
                    return Err(err("group declarations must precede mnemonics".into()));
                }
                if groups.iter().any(|g| g == name) {
                    return Err(err(format!("duplicate group {name:?}")));
                }
                groups.push(name.to_string());
                continue;
            }
            let (mnemonic, group) = line
                .split_once(',')
                .ok_or_else(|| err("expected \"mnemonic,group\"".into()))?;
            let mnemonic = mnemonic.trim().to_ascii_lowercase();
            let group = group.trim();
            if mnemonic.is_empty() {
                return Err(err("empty mnemonic".into()));
            }
            let group_idx = groups
                .iter()
                .position(|g| g == group)
                .ok_or_else(|| err(format!("mnemonic {mnemonic:?} names undeclared group {group:?}")))?;
            if slot_of.contains_key(&mnemonic) {
                return Err(err(format!("duplicate mnemonic {mnemonic:?}")));
            }
            slot_of.insert(mnemonic.clone(), mnemonics.len());
            group_of_mnemonic.insert(mnemonic.clone(), group_idx);
            mnemonics.push(mnemonic);
        }

        if mnemonics.len() != MNEMONIC_SLOTS || groups.len() != GROUP_SLOTS {
            return Err(FeatureError::LayoutShape {
                mnemonics: mnemonics.len(),
                groups: groups.len(),
            });
        }
        let catch_all = groups
            .iter()
            .position(|g| g == "misc")
            .ok_or(FeatureError::MissingCatchAll)?;

        Ok(Self { mnemonics, groups, slot_of, group_of_mnemonic, catch_all })
    }

    /// Render the manifest text this layout round-trips through.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        out.push_str("# Opcode feature layout.\n");
        out.push_str("# Mnemonic slots come first, group slots follow; order defines indices.\n");
        for g in &self.groups {
            let _ = writeln!(out, "!group {g}");
        }
        for m in &self.mnemonics {
            let _ = writeln!(out, "{m},{}", self.groups[self.group_of_mnemonic[m]]);
        }
        out
    }

    pub fn mnemonic_slot(&self, mnemonic: &str) -> Option<usize> {
        self.slot_of.get(mnemonic).copied()
    }

    /// Group slot index (into the full vector) an instruction counts toward.
    /// Unknown mnemonics land in the catch-all group.
    pub fn group_slot(&self, mnemonic: &str) -> usize {
        let g = self.group_of_mnemonic.get(mnemonic).copied().unwrap_or(self.catch_all);
        MNEMONIC_SLOTS + g
    }

    pub fn mnemonics(&self) -> &[String] {
        &self.mnemonics
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn catch_all_group(&self) -> usize {
        self.catch_all
    }

    /// Stable column names `f0..f139` with a human-readable mapping.
    pub fn describe_slot(&self, slot: usize) -> String {
        debug_assert!(slot < FEATURE_DIM);
        if slot < MNEMONIC_SLOTS {
            format!("count[{}]", self.mnemonics[slot])
        } else {
            format!("group[{}]", self.groups[slot - MNEMONIC_SLOTS])
        }
    }
}
