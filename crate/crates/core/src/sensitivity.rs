//! Attribute sensitivity classification and acceptance bands.
//!
//! Every attribute gets one of three sensitivity levels. Precedence, highest
//! first:
//!
//! 1. an explicit per-attribute override from the config file,
//! 2. a tag match: a column tag whose configured keywords appear in an
//!    extracted rule sentence (restricting rule types force High, purely
//!    granting ones allow Low, a configured tag with no rule hit lands on
//!    Medium),
//! 3. the fail-safe default: High.
//!
//! Tags without a configured keyword list do not participate; an untagged or
//! unconfigured attribute is treated as High so nothing silently leaks when
//! rules or configs are missing.
//!
//! Each level maps to an acceptance band `[t_min, t_max]` on the normalized
//! distributional distance between real and synthetic marginals. The band
//! floor forces high-risk attributes measurably away from the original
//! distribution; the ceiling keeps the data useful.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::DeonticRule;
use crate::synth::DistortionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensitivityLevel {
    Low,
    Medium,
    High,
}

impl SensitivityLevel {
    pub const ALL: [SensitivityLevel; 3] = [
        SensitivityLevel::Low,
        SensitivityLevel::Medium,
        SensitivityLevel::High,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensitivityLevel::Low => "Low",
            SensitivityLevel::Medium => "Medium",
            SensitivityLevel::High => "High",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Some(SensitivityLevel::Low),
            "medium" => Some(SensitivityLevel::Medium),
            "high" => Some(SensitivityLevel::High),
            _ => None,
        }
    }
}

/// Why an attribute ended up at its level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// Pinned in the `[overrides]` config section.
    ExplicitConfig,
    /// Decided by a tag whose keywords were checked against the rules.
    /// `rule_source` is absent when the tag was configured but matched no
    /// rule sentence (the Medium case).
    TagMatch {
        tag: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        rule_source: Option<String>,
    },
    /// Fail-safe: nothing known about the attribute.
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub level: SensitivityLevel,
    pub provenance: Provenance,
}

/// Total mapping from attribute name to level, kept sorted for stable
/// serialization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensitivityMap {
    entries: BTreeMap<String, MapEntry>,
}

impl SensitivityMap {
    pub fn insert(&mut self, attribute: impl Into<String>, entry: MapEntry) {
        self.entries.insert(attribute.into(), entry);
    }

    pub fn get(&self, attribute: &str) -> Option<&MapEntry> {
        self.entries.get(attribute)
    }

    pub fn level_of(&self, attribute: &str) -> Result<SensitivityLevel> {
        self.entries
            .get(attribute)
            .map(|e| e.level)
            .ok_or_else(|| Error::invalid(format!("no sensitivity level for `{attribute}`")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &MapEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Counts per level, always reporting all three levels.
    pub fn histogram(&self) -> BTreeMap<SensitivityLevel, usize> {
        let mut hist: BTreeMap<SensitivityLevel, usize> =
            SensitivityLevel::ALL.iter().map(|&l| (l, 0)).collect();
        for entry in self.entries.values() {
            *hist.get_mut(&entry.level).unwrap() += 1;
        }
        hist
    }

    pub fn save(&self, path: &Path, provenance: Option<&str>) -> Result<()> {
        #[derive(Serialize)]
        struct Record<'a> {
            attribute: &'a str,
            level: SensitivityLevel,
            provenance: &'a Provenance,
        }
        let mut out = String::new();
        if let Some(line) = provenance {
            writeln!(out, "# {line}").unwrap();
        }
        for (attribute, entry) in &self.entries {
            let record = Record {
                attribute,
                level: entry.level,
                provenance: &entry.provenance,
            };
            let line = serde_json::to_string(&record).map_err(|e| Error::invalid(e.to_string()))?;
            out.push_str(&line);
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::write(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Record {
            attribute: String,
            level: SensitivityLevel,
            provenance: Provenance,
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let mut map = SensitivityMap::default();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let record: Record = serde_json::from_str(trimmed)
                .map_err(|e| Error::parse(path, idx + 1, format!("bad map record: {e}")))?;
            map.insert(
                record.attribute,
                MapEntry {
                    level: record.level,
                    provenance: record.provenance,
                },
            );
        }
        Ok(map)
    }
}

/// Tag keywords used when no `[tags]` section is configured. Keys are
/// lowercase tag names; keywords are matched as case-insensitive substrings
/// of rule sentences.
pub fn default_tag_keywords() -> BTreeMap<String, Vec<String>> {
    BTreeMap::from([
        (
            "pii".to_string(),
            vec!["data".to_string(), "personal".to_string(), "consent".to_string()],
        ),
        ("location".to_string(), vec!["location".to_string()]),
        (
            "public".to_string(),
            vec![
                "provide data".to_string(),
                "transmit this data".to_string(),
                "shared with the public".to_string(),
            ],
        ),
    ])
}

/// Assigns a sensitivity level to every schema attribute. The result is
/// total over the schema and every entry carries provenance.
pub fn classify_attributes(
    schema: &crate::dataset::Schema,
    rules: &[DeonticRule],
    tag_keywords: &BTreeMap<String, Vec<String>>,
    overrides: &BTreeMap<String, SensitivityLevel>,
) -> SensitivityMap {
    let lowered_rules: Vec<(String, &DeonticRule)> = rules
        .iter()
        .map(|r| (r.sentence.to_lowercase(), r))
        .collect();
    let mut map = SensitivityMap::default();
    for column in &schema.columns {
        if let Some(&level) = overrides.get(&column.name) {
            map.insert(
                column.name.clone(),
                MapEntry {
                    level,
                    provenance: Provenance::ExplicitConfig,
                },
            );
            continue;
        }
        let mut restricting: Option<(String, String)> = None;
        let mut granting: Option<(String, String)> = None;
        let mut configured_tag: Option<String> = None;
        for tag in &column.tags {
            let Some(keywords) = tag_keywords.get(&tag.to_lowercase()) else {
                continue;
            };
            configured_tag.get_or_insert_with(|| tag.clone());
            for keyword in keywords {
                let needle = keyword.to_lowercase();
                if needle.is_empty() {
                    continue;
                }
                for (sentence, rule) in &lowered_rules {
                    if !sentence.contains(&needle) {
                        continue;
                    }
                    let hit = (tag.clone(), rule.source.clone());
                    if rule.deontic_type.is_restricting() {
                        restricting.get_or_insert(hit);
                    } else {
                        granting.get_or_insert(hit);
                    }
                }
            }
        }
        let entry = if let Some((tag, source)) = restricting {
            MapEntry {
                level: SensitivityLevel::High,
                provenance: Provenance::TagMatch {
                    tag,
                    rule_source: Some(source),
                },
            }
        } else if let Some((tag, source)) = granting {
            MapEntry {
                level: SensitivityLevel::Low,
                provenance: Provenance::TagMatch {
                    tag,
                    rule_source: Some(source),
                },
            }
        } else if let Some(tag) = configured_tag {
            MapEntry {
                level: SensitivityLevel::Medium,
                provenance: Provenance::TagMatch {
                    tag,
                    rule_source: None,
                },
            }
        } else {
            MapEntry {
                level: SensitivityLevel::High,
                provenance: Provenance::Default,
            }
        };
        map.insert(column.name.clone(), entry);
    }
    map
}

/// Normalized-distance acceptance band. `t_min > 0` is a distortion floor:
/// the synthetic marginal must move at least that far from the real one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceBand {
    pub t_min: f64,
    pub t_max: f64,
}

impl AcceptanceBand {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        let band = AcceptanceBand { t_min, t_max };
        band.validate()?;
        Ok(band)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t_min.is_finite()
            && self.t_max.is_finite()
            && 0.0 <= self.t_min
            && self.t_min <= self.t_max
            && self.t_max <= 1.0;
        if !ok {
            return Err(Error::invalid(format!(
                "acceptance band [{}, {}] violates 0 <= t_min <= t_max <= 1",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, value: f64) -> bool {
        self.t_min <= value && value <= self.t_max
    }
}

/// Per-level band settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandConfig {
    pub low: AcceptanceBand,
    pub medium: AcceptanceBand,
    pub high: AcceptanceBand,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig {
            low: AcceptanceBand {
                t_min: 0.0,
                t_max: 0.05,
            },
            medium: AcceptanceBand {
                t_min: 0.01,
                t_max: 0.08,
            },
            high: AcceptanceBand {
                t_min: 0.03,
                t_max: 0.12,
            },
        }
    }
}

impl BandConfig {
    pub fn for_level(&self, level: SensitivityLevel) -> AcceptanceBand {
        match level {
            SensitivityLevel::Low => self.low,
            SensitivityLevel::Medium => self.medium,
            SensitivityLevel::High => self.high,
        }
    }

    /// Valid bands whose floors do not decrease with the level.
    pub fn validate(&self) -> Result<()> {
        self.low.validate()?;
        self.medium.validate()?;
        self.high.validate()?;
        if self.low.t_min > self.medium.t_min || self.medium.t_min > self.high.t_min {
            return Err(Error::invalid(format!(
                "band floors must not decrease with level: Low {} / Medium {} / High {}",
                self.low.t_min, self.medium.t_min, self.high.t_min
            )));
        }
        Ok(())
    }
}

/// Expands a sensitivity map into one acceptance band per attribute.
pub fn privacy_bands(
    map: &SensitivityMap,
    config: &BandConfig,
) -> Result<BTreeMap<String, AcceptanceBand>> {
    config.validate()?;
    Ok(map
        .iter()
        .map(|(name, entry)| (name.clone(), config.for_level(entry.level)))
        .collect())
}

/// Parsed sensitivity config file. Missing sections fall back to defaults;
/// a present-but-empty `[tags]` section clears the default keyword table.
#[derive(Debug, Clone)]
pub struct SensitivityConfig {
    pub tag_keywords: BTreeMap<String, Vec<String>>,
    pub overrides: BTreeMap<String, SensitivityLevel>,
    pub bands: BandConfig,
    pub distortion: DistortionConfig,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            tag_keywords: default_tag_keywords(),
            overrides: BTreeMap::new(),
            bands: BandConfig::default(),
            distortion: DistortionConfig::default(),
        }
    }
}

/// Reads a sectioned sensitivity config:
///
/// ```text
/// [tags]
/// PII = data, consent
/// [overrides]
/// farm_income = High
/// [bands]
/// High = 0.03, 0.12
/// [distortion]
/// High = 0.05, 0.05
/// ```
pub fn load_sensitivity_config(path: &Path) -> Result<SensitivityConfig> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        Tags,
        Overrides,
        Bands,
        Distortion,
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    let mut config = SensitivityConfig::default();
    let mut section: Option<Section> = None;
    let mut saw_tags = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = Some(match name.trim().to_ascii_lowercase().as_str() {
                "tags" => Section::Tags,
                "overrides" => Section::Overrides,
                "bands" => Section::Bands,
                "distortion" => Section::Distortion,
                other => {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("unknown section `[{other}]`"),
                    ))
                }
            });
            if section == Some(Section::Tags) && !saw_tags {
                saw_tags = true;
                config.tag_keywords.clear();
            }
            continue;
        }
        let Some(section) = section else {
            return Err(Error::parse(path, line_no, "line outside any section"));
        };
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, line_no, "expected `name = value`"))?;
        let name = name.trim();
        let value = value.trim();
        if name.is_empty() {
            return Err(Error::parse(path, line_no, "empty name before `=`"));
        }
        match section {
            Section::Tags => {
                let keywords: Vec<String> = value
                    .split(',')
                    .map(|k| k.trim().to_string())
                    .filter(|k| !k.is_empty())
                    .collect();
                config.tag_keywords.insert(name.to_lowercase(), keywords);
            }
            Section::Overrides => {
                let level = SensitivityLevel::from_name(value).ok_or_else(|| {
                    Error::parse(path, line_no, format!("unknown sensitivity level `{value}`"))
                })?;
                config.overrides.insert(name.to_string(), level);
            }
            Section::Bands => {
                let level = SensitivityLevel::from_name(name).ok_or_else(|| {
                    Error::parse(path, line_no, format!("unknown sensitivity level `{name}`"))
                })?;
                let (t_min, t_max) = parse_pair(value)
                    .ok_or_else(|| Error::parse(path, line_no, "expected `t_min, t_max`"))?;
                let band = AcceptanceBand { t_min, t_max };
                band.validate()
                    .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
                match level {
                    SensitivityLevel::Low => config.bands.low = band,
                    SensitivityLevel::Medium => config.bands.medium = band,
                    SensitivityLevel::High => config.bands.high = band,
                }
            }
            Section::Distortion => {
                let level = SensitivityLevel::from_name(name).ok_or_else(|| {
                    Error::parse(path, line_no, format!("unknown sensitivity level `{name}`"))
                })?;
                let (noise, flip) = parse_pair(value).ok_or_else(|| {
                    Error::parse(path, line_no, "expected `noise_scale, flip_prob`")
                })?;
                config.distortion.set_level(level, noise, flip);
            }
        }
    }
    config
        .bands
        .validate()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    config
        .distortion
        .validate()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    Ok(config)
}

fn parse_pair(value: &str) -> Option<(f64, f64)> {
    let (a, b) = value.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}
