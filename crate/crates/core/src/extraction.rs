//! Claim extraction from a controlled subject / verb phrase / object grammar,
//! plus an explicit `@claim(s, p, o)` directive syntax.

use std::path::Path;

use crate::error::{read_file, Error, Result};
use crate::model::{normalize_entity, Claim, EntityId, Object, Polarity, Response, Span, Triple};

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Clone, Debug, PartialEq, Eq)]
struct Pattern {
    tokens: Vec<String>,
    predicate: EntityId,
}

/// Verb-phrase lexicon and negation markers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimGrammar {
    /// Lexicon order.
    patterns: Vec<Pattern>,
    /// Indices into `patterns`, longest first, ties in lexicon order.
    by_length: Vec<usize>,
    negation_markers: Vec<String>,
}

impl Default for ClaimGrammar {
    fn default() -> Self {
        ClaimGrammar::parse(DEFAULT_LEXICON, "lexicon.tsv").expect("bundled lexicon parses")
    }
}

fn tokens(phrase: &str) -> Vec<String> {
    phrase.split_whitespace().map(str::to_lowercase).collect()
}

impl ClaimGrammar {
    pub fn new(entries: impl IntoIterator<Item = (String, EntityId)>) -> Result<Self> {
        let mut patterns = Vec::new();
        for (phrase, predicate) in entries {
            let tokens = tokens(&phrase);
            if tokens.is_empty() {
                return Err(Error::InvalidArgument("empty verb phrase".into()));
            }
            if !patterns.iter().any(|p: &Pattern| p.tokens == tokens) {
                patterns.push(Pattern { tokens, predicate });
            }
        }
        let mut by_length: Vec<usize> = (0..patterns.len()).collect();
        by_length.sort_by_key(|&i| std::cmp::Reverse(patterns[i].tokens.len()));
        Ok(ClaimGrammar {
            patterns,
            by_length,
            negation_markers: vec!["not".into(), "never".into()],
        })
    }

    /// Lexicon text: `verb phrase<TAB>predicate` per line, `#` comments.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((phrase, predicate)) = line.split_once('\t') else {
                return Err(Error::format(source_name, i + 1, "expected `verb phrase<TAB>predicate`"));
            };
            if phrase.trim().is_empty() {
                return Err(Error::format(source_name, i + 1, "empty verb phrase"));
            }
            let predicate = normalize_entity(predicate).map_err(|e| Error::format(source_name, i + 1, e.to_string()))?;
            entries.push((phrase.trim().to_string(), predicate));
        }
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_file(path)?, &path.display().to_string())
    }

    pub fn with_negation_markers(mut self, markers: impl IntoIterator<Item = String>) -> Self {
        self.negation_markers = markers.into_iter().map(|m| m.to_lowercase()).collect();
        self
    }

    pub fn negation_markers(&self) -> &[String] {
        &self.negation_markers
    }

    /// The first lexicon phrase for `predicate`.
    pub fn phrase_for(&self, predicate: &EntityId) -> Option<&[String]> {
        self.patterns
            .iter()
            .find(|p| &p.predicate == predicate)
            .map(|p| p.tokens.as_slice())
    }

    pub fn predicates(&self) -> impl Iterator<Item = &EntityId> {
        self.patterns.iter().map(|p| &p.predicate)
    }

    fn is_marker(&self, token: &str) -> bool {
        self.negation_markers.iter().any(|m| m == token)
    }

    /// `(predicate, first token index, end token index, negated)` of the
    /// winning pattern in a sentence's lowercase tokens.
    fn match_sentence(&self, words: &[String]) -> Option<(&EntityId, usize, usize, bool)> {
        for &pi in &self.by_length {
            let pattern = &self.patterns[pi];
            for start in 0..words.len() {
                if let Some((end, negated)) = self.match_at(&pattern.tokens, words, start) {
                    let mut subject_end = start;
                    let mut negated = negated;
                    while subject_end > 0 && self.is_marker(&words[subject_end - 1]) {
                        subject_end -= 1;
                        negated = true;
                    }
                    if subject_end > 0 && end < words.len() {
                        return Some((&pattern.predicate, subject_end, end, negated));
                    }
                }
            }
        }
        None
    }

    fn match_at(&self, pattern: &[String], words: &[String], start: usize) -> Option<(usize, bool)> {
        let mut i = start;
        let mut negated = false;
        for (k, tok) in pattern.iter().enumerate() {
            if k > 0 {
                while i < words.len() && self.is_marker(&words[i]) && &words[i] != tok {
                    negated = true;
                    i += 1;
                }
            }
            if words.get(i) != Some(tok) {
                return None;
            }
            i += 1;
        }
        Some((i, negated))
    }
}

/// Sentence byte spans: text up to and including `.`, `?` or `!` followed by
/// whitespace or the end of the text; trailing text without a terminator is
/// a final sentence.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if start.is_none() {
            if c.is_whitespace() {
                continue;
            }
            start = Some(i);
        }
        if matches!(c, '.' | '?' | '!') && chars.peek().is_none_or(|(_, n)| n.is_whitespace()) {
            out.push(Span::new(start.take().unwrap_or(i), i + c.len_utf8()));
        }
    }
    if let Some(s) = start {
        out.push(Span::new(s, text.trim_end().len()));
    }
    out
}

/// Claims found in a text plus a note for every sentence that matched no
/// pattern.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Extraction {
    pub claims: Vec<Claim>,
    pub notes: Vec<String>,
}

fn sentence_claim(grammar: &ClaimGrammar, sentence: &str, span: Span) -> std::result::Result<Claim, String> {
    let body = sentence.trim_end_matches(['.', '?', '!']);
    let raw: Vec<&str> = body.split_whitespace().collect();
    let words: Vec<String> = raw.iter().map(|w| w.to_lowercase()).collect();
    let Some((predicate, subject_end, object_start, negated)) = grammar.match_sentence(&words) else {
        return Err("no verb phrase from the lexicon".into());
    };
    let subject = normalize_entity(&raw[..subject_end].join(" ")).map_err(|e| e.to_string())?;
    let object = Object::parse_surface(&raw[object_start..].join(" ")).map_err(|e| e.to_string())?;
    let polarity = if negated { Polarity::Negated } else { Polarity::Asserted };
    Ok(Claim::new(subject, predicate.clone(), object, polarity, span))
}

/// Extracts at most one claim per sentence, in text order.
pub fn extract(text: &str, grammar: &ClaimGrammar) -> Extraction {
    let mut out = Extraction::default();
    for span in split_sentences(text) {
        let sentence = &text[span.start..span.end];
        match sentence_claim(grammar, sentence, span) {
            Ok(c) => out.claims.push(c),
            Err(why) => out.notes.push(format!("skipped sentence {sentence:?}: {why}")),
        }
    }
    out
}

/// Claims of a response's text under `grammar`.
///
/// ```
/// use claimguard::extraction::{extract_claims, ClaimGrammar};
/// use claimguard::model::Response;
/// let claims = extract_claims(&Response::new("Einstein was not born in Paris.", vec![]), &ClaimGrammar::default());
/// assert_eq!(claims[0].to_string(), "~born_in(einstein, paris)");
/// ```
pub fn extract_claims(response: &Response, grammar: &ClaimGrammar) -> Vec<Claim> {
    extract(&response.text, grammar).claims
}

/// Whether a text uses the directive syntax.
pub fn has_directives(text: &str) -> bool {
    text.lines().any(|l| {
        let l = l.trim_start();
        l.starts_with("@claim") || l.starts_with("!@claim")
    })
}

/// Parses `@claim(subject, predicate, object)` lines, `!` prefix for negation.
/// Blank lines and `#` comments are ignored; any other line is malformed.
pub fn parse_structured_claims(text: &str) -> Result<Vec<Claim>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, raw_line) in text.split_inclusive('\n').enumerate() {
        let line_start = offset;
        offset += raw_line.len();
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| Error::MalformedDirective {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (negated, rest) = match line.strip_prefix('!') {
            Some(r) => (true, r.trim_start()),
            None => (false, line),
        };
        let inner = rest
            .strip_prefix("@claim")
            .map(str::trim_start)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad("expected @claim(subject, predicate, object)"))?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [s, p, o] = parts.as_slice() else {
            return Err(bad(&format!("expected 3 arguments, found {}", parts.len())));
        };
        let subject = normalize_entity(s).map_err(|e| bad(&e.to_string()))?;
        let predicate = normalize_entity(p).map_err(|e| bad(&e.to_string()))?;
        let object = Object::parse_surface(o).map_err(|e| bad(&e.to_string()))?;
        let lead = raw_line.len() - raw_line.trim_start().len();
        let span = Span::new(line_start + lead, line_start + lead + line.len());
        let polarity = if negated { Polarity::Negated } else { Polarity::Asserted };
        out.push(Claim::new(subject, predicate, object, polarity, span));
    }
    Ok(out)
}

/// Directive claims when the text uses directives, grammar claims otherwise.
pub fn claims_from_text(text: &str, grammar: &ClaimGrammar) -> Result<Extraction> {
    if has_directives(text) {
        Ok(Extraction {
            claims: parse_structured_claims(text)?,
            notes: Vec::new(),
        })
    } else {
        Ok(extract(text, grammar))
    }
}

fn object_surface(object: &Object) -> String {
    match object {
        Object::Entity(e) => e.display_name(),
        other => other.to_string(),
    }
}

/// Canonical sentence for a fact, e.g. `Einstein was born in Ulm.`; `None`
/// when the lexicon has no phrase for the predicate.
pub fn render_triple(triple: &Triple, polarity: Polarity, grammar: &ClaimGrammar) -> Option<String> {
    let phrase = grammar.phrase_for(&triple.predicate)?;
    let mut words: Vec<&str> = phrase.iter().map(String::as_str).collect();
    if polarity == Polarity::Negated {
        let at = if words.len() > 1 { 1 } else { 0 };
        words.insert(at, "not");
    }
    Some(format!(
        "{} {} {}.",
        triple.subject.display_name(),
        words.join(" "),
        object_surface(&triple.object)
    ))
}

pub fn render_claim(claim: &Claim, grammar: &ClaimGrammar) -> Option<String> {
    render_triple(&claim.triple, claim.polarity, grammar)
}
