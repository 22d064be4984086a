//! Deontic rule extraction from policy text.
//!
//! Legal data-sharing documents express what parties must, must not, and may
//! do through modal verb phrases. This module scans a document sentence by
//! sentence and emits a [`DeonticRule`] for every occurrence of a trigger
//! phrase from a [`TriggerLexicon`]. Matching is case-insensitive,
//! token-boundary-aware ("canal" never triggers "can") and longest-first
//! ("must not" wins over "must"), and matches never overlap.
//!
//! The built-in lexicon targets agricultural data-sharing codes of conduct
//! and farm lease agreements; custom lexicons can be loaded from a sectioned
//! text file:
//!
//! ```text
//! [Obligation]
//! shall
//! must
//! [Prohibition]
//! shall not
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeonticType {
    /// The party is required to act.
    Obligation,
    /// The party is barred from acting.
    Prohibition,
    /// The party is authorized to act.
    Permission,
    /// The party holds a right that others must respect.
    Entitlement,
}

impl DeonticType {
    pub const ALL: [DeonticType; 4] = [
        DeonticType::Obligation,
        DeonticType::Prohibition,
        DeonticType::Permission,
        DeonticType::Entitlement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeonticType::Obligation => "Obligation",
            DeonticType::Prohibition => "Prohibition",
            DeonticType::Permission => "Permission",
            DeonticType::Entitlement => "Entitlement",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obligation" => Some(DeonticType::Obligation),
            "prohibition" => Some(DeonticType::Prohibition),
            "permission" | "permissions" => Some(DeonticType::Permission),
            "entitlement" => Some(DeonticType::Entitlement),
            _ => None,
        }
    }

    /// Obligations and prohibitions restrict data handling; permissions and
    /// entitlements grant it. Sensitivity classification keys off this.
    pub fn is_restricting(self) -> bool {
        matches!(self, DeonticType::Obligation | DeonticType::Prohibition)
    }
}

const OBLIGATION_TRIGGERS: &[&str] = &[
    "shall be required",
    "will be required",
    "shall be obligated",
    "shall",
    "must",
    "will",
    "have to",
    "should",
    "ought to have",
    "will be paid",
    "shall be paid",
    "agree",
    "agrees",
    "acknowledges",
    "acknowledge",
    "represents and warrants",
    "shall be responsible for",
    "will be responsible for",
];

const PROHIBITION_TRIGGERS: &[&str] = &[
    "shall not",
    "will not",
    "must not",
    "may not",
    "cannot",
    "shall have no right",
    "can not",
    "shall not be allowed",
    "will not be allowed",
    "shall not assist",
    "shall be prohibited",
    "will be prohibited",
    "nor shall",
    "not to be",
    "neither lessor nore lessee may",
    "in no event shall",
    "nor will",
    "will not allow",
    "nor may",
];

const PERMISSION_TRIGGERS: &[&str] = &[
    "shall be permitted",
    "shall also be permitted",
    "can",
    "may",
    "could",
    "shall be allowed",
    "will be allowed",
    "is permitted",
    "will allow",
    "has the right",
    "or at landlord's option",
    "shall be permitted to",
];

#[derive(Debug, Clone)]
struct LexiconEntry {
    phrase: String,
    tokens: Vec<String>,
    deontic_type: DeonticType,
}

/// Trigger phrases grouped by deontic type, prepared for longest-first
/// matching.
#[derive(Debug, Clone)]
pub struct TriggerLexicon {
    /// Sorted by descending token count so the first match is the longest.
    entries: Vec<LexiconEntry>,
}

impl TriggerLexicon {
    /// Builds a lexicon from `(phrase, type)` pairs. Phrases are matched
    /// case-insensitively; a phrase listed under two types is an error.
    pub fn new(phrases: Vec<(String, DeonticType)>) -> Result<Self> {
        let mut entries: Vec<LexiconEntry> = Vec::new();
        for (raw, deontic_type) in phrases {
            let phrase = raw.trim().to_lowercase();
            if phrase.is_empty() {
                return Err(Error::invalid("empty trigger phrase"));
            }
            let tokens: Vec<String> = tokenize(&phrase).into_iter().map(|t| t.lower).collect();
            if tokens.is_empty() {
                return Err(Error::invalid(format!(
                    "trigger phrase `{raw}` has no word tokens"
                )));
            }
            if let Some(existing) = entries.iter().find(|e| e.tokens == tokens) {
                if existing.deontic_type != deontic_type {
                    return Err(Error::invalid(format!(
                        "trigger phrase `{phrase}` appears under both {} and {}",
                        existing.deontic_type.name(),
                        deontic_type.name()
                    )));
                }
                continue;
            }
            entries.push(LexiconEntry {
                phrase,
                tokens,
                deontic_type,
            });
        }
        if entries.is_empty() {
            return Err(Error::invalid("lexicon has no trigger phrases"));
        }
        entries.sort_by(|a, b| {
            b.tokens
                .len()
                .cmp(&a.tokens.len())
                .then_with(|| a.phrase.cmp(&b.phrase))
        });
        Ok(TriggerLexicon { entries })
    }

    /// The built-in lexicon of modal phrases from agricultural data-sharing
    /// codes of conduct and lease agreements. No entitlement triggers are
    /// predefined; add them via a lexicon file when a document needs them.
    pub fn builtin() -> Self {
        let mut phrases = Vec::new();
        for &p in OBLIGATION_TRIGGERS {
            phrases.push((p.to_string(), DeonticType::Obligation));
        }
        for &p in PROHIBITION_TRIGGERS {
            phrases.push((p.to_string(), DeonticType::Prohibition));
        }
        for &p in PERMISSION_TRIGGERS {
            phrases.push((p.to_string(), DeonticType::Permission));
        }
        TriggerLexicon::new(phrases).expect("built-in lexicon is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All `(phrase, type)` pairs, longest phrases first.
    pub fn phrases(&self) -> impl Iterator<Item = (&str, DeonticType)> {
        self.entries
            .iter()
            .map(|e| (e.phrase.as_str(), e.deontic_type))
    }
}

/// Reads a lexicon file: sections headed by `[TypeName]`, one phrase per
/// line, `#` comments allowed.
pub fn load_lexicon(path: &Path) -> Result<TriggerLexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    let mut current: Option<DeonticType> = None;
    let mut phrases = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = Some(DeonticType::from_name(section.trim()).ok_or_else(|| {
                Error::parse(
                    path,
                    line_no,
                    format!("unknown deontic type `{}`", section.trim()),
                )
            })?);
            continue;
        }
        let Some(deontic_type) = current else {
            return Err(Error::parse(
                path,
                line_no,
                "trigger phrase appears before any [Type] section",
            ));
        };
        phrases.push((line.to_string(), deontic_type));
    }
    TriggerLexicon::new(phrases)
        .map_err(|e| Error::parse(path, 0, format!("invalid lexicon: {e}")))
}

/// One extracted rule: the sentence it came from, the matched trigger, where
/// the trigger starts (character offset within the sentence), its deontic
/// type, and a `document#ordinal` source marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeonticRule {
    pub sentence: String,
    pub trigger: String,
    pub start_index: usize,
    pub deontic_type: DeonticType,
    pub source: String,
}

/// A sentence with its character offset into the source document.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub text: String,
    pub offset: usize,
}

/// Splits text at `.`, `!`, `?`, or `;` followed by whitespace or end of
/// input. The terminator stays with its sentence; empty segments are
/// dropped. Abbreviations are not special-cased, so "e.g. x" splits early;
/// this over-splitting is acceptable because trigger phrases never span
/// sentence boundaries in practice.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    let is_terminator = |c: char| matches!(c, '.' | '!' | '?' | ';');
    while i < chars.len() {
        let c = chars[i];
        let at_boundary =
            is_terminator(c) && (i + 1 == chars.len() || chars[i + 1].is_whitespace());
        if at_boundary {
            push_sentence(&chars, start, i + 1, &mut sentences);
            start = i + 1;
        }
        i += 1;
    }
    push_sentence(&chars, start, chars.len(), &mut sentences);
    sentences
}

fn push_sentence(chars: &[char], start: usize, end: usize, out: &mut Vec<Sentence>) {
    let mut lo = start;
    while lo < end && chars[lo].is_whitespace() {
        lo += 1;
    }
    let mut hi = end;
    while hi > lo && chars[hi - 1].is_whitespace() {
        hi -= 1;
    }
    if lo < hi {
        out.push(Sentence {
            text: chars[lo..hi].iter().collect(),
            offset: lo,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    lower: String,
    char_start: usize,
    byte_start: usize,
    byte_end: usize,
}

/// Word tokens are maximal runs of alphanumerics and apostrophes. The
/// typographic apostrophe is folded to `'` so lease clauses copied from
/// word processors still match.
fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<Token> = None;
    for (char_idx, (byte_idx, ch)) in text.char_indices().enumerate() {
        let is_word = ch.is_alphanumeric() || ch == '\'' || ch == '\u{2019}';
        if is_word {
            let folded = if ch == '\u{2019}' { '\'' } else { ch };
            match current.as_mut() {
                Some(tok) => {
                    tok.lower.extend(folded.to_lowercase());
                    tok.byte_end = byte_idx + ch.len_utf8();
                }
                None => {
                    let mut lower = String::new();
                    lower.extend(folded.to_lowercase());
                    current = Some(Token {
                        lower,
                        char_start: char_idx,
                        byte_start: byte_idx,
                        byte_end: byte_idx + ch.len_utf8(),
                    });
                }
            }
        } else if let Some(tok) = current.take() {
            tokens.push(tok);
        }
    }
    if let Some(tok) = current.take() {
        tokens.push(tok);
    }
    tokens
}

/// Extracts every trigger occurrence from `text`. Rules are returned in
/// document order with `source` set to `{source_id}#{sentence_ordinal}`
/// (ordinals are 1-based).
pub fn extract_rules(text: &str, lexicon: &TriggerLexicon, source_id: &str) -> Vec<DeonticRule> {
    let mut rules = Vec::new();
    for (ordinal, sentence) in split_sentences(text).iter().enumerate() {
        let tokens = tokenize(&sentence.text);
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = None;
            for entry in &lexicon.entries {
                if phrase_matches(&tokens, i, &entry.tokens, &sentence.text) {
                    matched = Some(entry);
                    break;
                }
            }
            match matched {
                Some(entry) => {
                    let last = &tokens[i + entry.tokens.len() - 1];
                    let trigger = sentence.text[tokens[i].byte_start..last.byte_end].to_string();
                    rules.push(DeonticRule {
                        sentence: sentence.text.clone(),
                        trigger,
                        start_index: tokens[i].char_start,
                        deontic_type: entry.deontic_type,
                        source: format!("{source_id}#{}", ordinal + 1),
                    });
                    i += entry.tokens.len();
                }
                None => i += 1,
            }
        }
    }
    rules
}

/// A phrase matches when its tokens equal consecutive sentence tokens and
/// the gaps between them hold nothing but whitespace, so "shall, not" does
/// not read as "shall not".
fn phrase_matches(tokens: &[Token], start: usize, phrase: &[String], sentence: &str) -> bool {
    if start + phrase.len() > tokens.len() {
        return false;
    }
    for (k, word) in phrase.iter().enumerate() {
        if &tokens[start + k].lower != word {
            return false;
        }
        if k > 0 {
            let gap = &sentence[tokens[start + k - 1].byte_end..tokens[start + k].byte_start];
            if !gap.chars().all(char::is_whitespace) {
                return false;
            }
        }
    }
    true
}

/// Writes rules as one JSON record per line, optionally preceded by a `#`
/// provenance line.
pub fn export_rules(rules: &[DeonticRule], path: &Path, provenance: Option<&str>) -> Result<()> {
    let mut out = String::new();
    if let Some(line) = provenance {
        writeln!(out, "# {line}").unwrap();
    }
    for rule in rules {
        let line = serde_json::to_string(rule).map_err(|e| Error::invalid(e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::write(path, e))
}

/// Reads a rule file written by [`export_rules`], skipping `#` lines.
pub fn import_rules(path: &Path) -> Result<Vec<DeonticRule>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    let mut rules = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rule: DeonticRule = serde_json::from_str(trimmed)
            .map_err(|e| Error::parse(path, idx + 1, format!("bad rule record: {e}")))?;
        rules.push(rule);
    }
    Ok(rules)
}
