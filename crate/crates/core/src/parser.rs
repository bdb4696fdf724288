//! Online Drain-style template mining.
//!
//! Lines are first split into a header and a free-text message using a
//! LogHub-style format string (`<Date> <Time> <Pid> <Level> <Component>: <Content>`).
//! The message is pre-masked (numbers, block ids, addresses become `<*>`) and
//! then routed through a fixed-depth prefix tree: the first level buckets by
//! token count, the following `max_depth - 2` levels by leading tokens, and the
//! leaves hold candidate templates that are merged position-wise.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Literal marker used for variable positions.
pub const WILDCARD: &str = "<*>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("invalid header format `{0}`: {1}")]
    InvalidFormat(String, String),
    #[error("template table line {line}: {reason}")]
    TemplateTable { line: usize, reason: String },
}

/// One raw line after header stripping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLogRecord {
    pub line_no: usize,
    pub header_fields: BTreeMap<String, String>,
    pub content: String,
}

/// Describes how a dataset lays out its header in front of the message.
///
/// Placeholders are written as `<Name>`; the placeholder called `Content`
/// must appear exactly once and captures the message. Whitespace between
/// placeholders matches any run of whitespace, other literals match exactly.
#[derive(Debug, Clone)]
pub struct HeaderFormat {
    spec: String,
    fields: Vec<String>,
    regex: Regex,
}

impl HeaderFormat {
    pub const CONTENT: &'static str = "Content";

    pub fn new(spec: &str) -> Result<Self, ParseError> {
        let placeholder = Regex::new(r"<([A-Za-z_][A-Za-z0-9_]*)>").expect("static regex");
        let mut pattern = String::from("^");
        let mut fields = Vec::new();
        let mut last = 0;
        let mut content_seen = 0;
        for caps in placeholder.captures_iter(spec) {
            let whole = caps.get(0).unwrap();
            pattern.push_str(&literal_pattern(&spec[last..whole.start()]));
            let name = caps[1].to_string();
            if fields.contains(&name) {
                return Err(ParseError::InvalidFormat(
                    spec.to_string(),
                    format!("field `{name}` appears twice"),
                ));
            }
            if name == Self::CONTENT {
                content_seen += 1;
                pattern.push_str(&format!("(?P<{name}>.*)"));
            } else {
                pattern.push_str(&format!("(?P<{name}>.+?)"));
            }
            fields.push(name);
            last = whole.end();
        }
        pattern.push_str(&literal_pattern(&spec[last..]));
        pattern.push('$');
        if content_seen != 1 {
            return Err(ParseError::InvalidFormat(
                spec.to_string(),
                "exactly one <Content> placeholder is required".into(),
            ));
        }
        let regex = Regex::new(&pattern)
            .map_err(|e| ParseError::InvalidFormat(spec.to_string(), e.to_string()))?;
        Ok(Self {
            spec: spec.to_string(),
            fields,
            regex,
        })
    }

    /// Format used by the HDFS corpus.
    pub fn hdfs() -> Self {
        Self::new("<Date> <Time> <Pid> <Level> <Component>: <Content>").expect("static format")
    }

    /// A format that treats the whole line as message text.
    pub fn content_only() -> Self {
        Self::new("<Content>").expect("static format")
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }
}

fn literal_pattern(literal: &str) -> String {
    let mut out = String::new();
    let mut in_space = false;
    for ch in literal.chars() {
        if ch.is_whitespace() {
            if !in_space {
                out.push_str(r"\s+");
                in_space = true;
            }
        } else {
            in_space = false;
            out.push_str(&regex::escape(&ch.to_string()));
        }
    }
    out
}

/// Split a raw line into header fields and message content.
pub fn split_header(
    line_no: usize,
    line: &str,
    format: &HeaderFormat,
) -> Result<RawLogRecord, ParseError> {
    let line = line.trim_end_matches(['\r', '\n']);
    let caps = format
        .regex
        .captures(line.trim())
        .ok_or_else(|| ParseError::MalformedLine {
            line_no,
            reason: format!("does not match header format `{}`", format.spec),
        })?;
    let mut header_fields = BTreeMap::new();
    let mut content = String::new();
    for name in &format.fields {
        let value = caps.name(name).map(|m| m.as_str()).unwrap_or_default();
        if name == HeaderFormat::CONTENT {
            content = value.trim().to_string();
        } else {
            header_fields.insert(name.clone(), value.to_string());
        }
    }
    if content.is_empty() {
        return Err(ParseError::MalformedLine {
            line_no,
            reason: "empty message content".into(),
        });
    }
    Ok(RawLogRecord {
        line_no,
        header_fields,
        content,
    })
}

fn ip_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^/?(?:\d{1,3}\.){3}\d{1,3}(?::\d+)?[,;]?$").expect("static regex")
    })
}

fn block_id() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"blk_[-+]?\d+").expect("static regex"))
}

fn number() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[-+]?(?:0[xX][0-9a-fA-F]+|\d+(?:\.\d+)?)").expect("static regex")
    })
}

/// Replace obviously variable fields with the wildcard marker.
///
/// Whole tokens that are IPv4 addresses (optionally with a leading `/` and a
/// `:port`) become `<*>`, HDFS block ids keep their `blk_` prefix, and every
/// remaining numeric run that stands alone as a word is replaced.
pub fn numeric_premask(content: &str) -> String {
    content
        .split_whitespace()
        .map(|token| {
            if ip_token().is_match(token) {
                return WILDCARD.to_string();
            }
            let token = block_id().replace_all(token, "blk_<*>");
            mask_numbers(&token)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

// Replace numeric runs that stand alone as words; digits glued to letters
// belong to identifiers and stay.
fn mask_numbers(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    let mut last = 0;
    for m in number().find_iter(token) {
        let mut start = m.start();
        let before = token[..start].chars().next_back();
        if token[start..].starts_with(['-', '+']) && before.is_some_and(is_word) {
            start += 1;
        }
        let left = token[..start].chars().next_back();
        let right = token[m.end()..].chars().next();
        if left.is_some_and(|c| is_word(c) || c == '.') || right.is_some_and(is_word) {
            continue;
        }
        out.push_str(&token[last..start]);
        out.push_str(WILDCARD);
        last = m.end();
    }
    out.push_str(&token[last..]);
    out
}

/// A template position: constant text or a variable slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Const(String),
    Wildcard,
}

impl Token {
    pub fn parse(s: &str) -> Self {
        if s == WILDCARD {
            Token::Wildcard
        } else {
            Token::Const(s.to_string())
        }
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Token::Wildcard)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Const(s) => f.write_str(s),
            Token::Wildcard => f.write_str(WILDCARD),
        }
    }
}

pub type TemplateId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTemplate {
    pub template_id: TemplateId,
    pub tokens: Vec<Token>,
    pub support_count: u64,
}

impl LogTemplate {
    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().filter_map(|t| match t {
            Token::Const(s) => Some(s.as_str()),
            Token::Wildcard => None,
        })
    }

    pub fn wildcard_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_wildcard()).count()
    }

    /// Fraction of positions where the template holds a constant equal to the
    /// line's token. Wildcard positions never count as matches.
    fn similarity(&self, tokens: &[Token]) -> (f64, usize) {
        let mut same = 0usize;
        let mut params = 0usize;
        for (t, l) in self.tokens.iter().zip(tokens) {
            match t {
                Token::Wildcard => params += 1,
                Token::Const(_) if t == l => same += 1,
                Token::Const(_) => {}
            }
        }
        (same as f64 / self.tokens.len() as f64, params)
    }

    fn absorb(&mut self, tokens: &[Token]) {
        for (t, l) in self.tokens.iter_mut().zip(tokens) {
            if t != l {
                *t = Token::Wildcard;
            }
        }
        self.support_count += 1;
    }
}

impl fmt::Display for LogTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrainConfig {
    pub max_depth: usize,
    pub similarity_threshold: f64,
    pub max_children: usize,
}

impl Default for DrainConfig {
    fn default() -> Self {
        Self {
            max_depth: 4,
            similarity_threshold: 0.4,
            max_children: 100,
        }
    }
}

impl DrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_depth < 2 {
            return Err(format!("max_depth must be >= 2, got {}", self.max_depth));
        }
        if !(self.similarity_threshold > 0.0 && self.similarity_threshold <= 1.0) {
            return Err(format!(
                "similarity_threshold must lie in (0, 1], got {}",
                self.similarity_threshold
            ));
        }
        if self.max_children < 1 {
            return Err("max_children must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<String, Node>,
    // indices into ParseTree::templates
    groups: Vec<usize>,
}

/// Prefix tree holding every template mined so far.
#[derive(Debug, Clone)]
pub struct ParseTree {
    config: DrainConfig,
    by_length: HashMap<usize, Node>,
    templates: Vec<LogTemplate>,
}

impl Default for ParseTree {
    fn default() -> Self {
        Self::new(DrainConfig::default())
    }
}

impl ParseTree {
    pub fn new(config: DrainConfig) -> Self {
        Self {
            config,
            by_length: HashMap::new(),
            templates: Vec::new(),
        }
    }

    pub fn config(&self) -> &DrainConfig {
        &self.config
    }

    /// Templates in creation order (template_id ascending).
    pub fn templates(&self) -> &[LogTemplate] {
        &self.templates
    }

    pub fn template(&self, id: TemplateId) -> Option<&LogTemplate> {
        self.templates.get((id as usize).checked_sub(1)?)
    }

    /// Route a record to its template, creating or generalising one.
    pub fn parse(&mut self, record: &RawLogRecord) -> TemplateId {
        let tokens = line_tokens(&record.content);
        self.parse_tokens(tokens)
    }

    fn parse_tokens(&mut self, tokens: Vec<Token>) -> TemplateId {
        let threshold = self.config.similarity_threshold;
        let leaf = descend(&mut self.by_length, &self.config, &tokens);
        let mut best: Option<(usize, f64, usize)> = None;
        for &idx in &leaf.groups {
            let (sim, params) = self.templates[idx].similarity(&tokens);
            let better = match best {
                None => true,
                Some((_, bs, bp)) => sim > bs || (sim == bs && params > bp),
            };
            if better {
                best = Some((idx, sim, params));
            }
        }
        match best {
            Some((idx, sim, _)) if sim >= threshold => {
                self.templates[idx].absorb(&tokens);
                self.templates[idx].template_id
            }
            _ => {
                let idx = self.templates.len();
                let template_id = (idx + 1) as TemplateId;
                leaf.groups.push(idx);
                self.templates.push(LogTemplate {
                    template_id,
                    tokens,
                    support_count: 1,
                });
                template_id
            }
        }
    }
}

fn descend<'a>(
    by_length: &'a mut HashMap<usize, Node>,
    config: &DrainConfig,
    tokens: &[Token],
) -> &'a mut Node {
    let max_children = config.max_children;
    let prefix_levels = config.max_depth - 2;
    let mut node = by_length.entry(tokens.len()).or_default();
    for token in tokens.iter().take(prefix_levels) {
        let key = match token {
            Token::Const(s) if !s.chars().any(|c| c.is_ascii_digit()) => s.clone(),
            _ => WILDCARD.to_string(),
        };
        let key = if node.children.contains_key(&key) || key == WILDCARD {
            key
        } else if node.children.contains_key(WILDCARD) {
            if node.children.len() < max_children {
                key
            } else {
                WILDCARD.to_string()
            }
        } else if node.children.len() + 1 < max_children {
            key
        } else {
            WILDCARD.to_string()
        };
        node = node.children.entry(key).or_default();
    }
    node
}

/// Tokenise message content the way the tree sees it.
///
/// Falls back to the unmasked tokens when masking would leave no constant,
/// so every template keeps at least one constant token.
pub fn line_tokens(content: &str) -> Vec<Token> {
    let masked: Vec<Token> = numeric_premask(content)
        .split_whitespace()
        .map(Token::parse)
        .collect();
    if masked.iter().any(|t| !t.is_wildcard()) {
        masked
    } else {
        content
            .split_whitespace()
            .map(|s| Token::Const(s.to_string()))
            .collect()
    }
}

/// Per-line parser output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuredLine {
    pub line_no: usize,
    pub template_id: TemplateId,
    pub label: Option<u8>,
}

/// Streams raw lines through header splitting and the tree, counting
/// malformed lines instead of failing.
#[derive(Debug, Clone)]
pub struct LogParser {
    format: HeaderFormat,
    tree: ParseTree,
    malformed: usize,
    consumed: usize,
}

impl LogParser {
    pub fn new(format: HeaderFormat, config: DrainConfig) -> Self {
        Self {
            format,
            tree: ParseTree::new(config),
            malformed: 0,
            consumed: 0,
        }
    }

    /// Returns `None` for a malformed line.
    pub fn feed(&mut self, line_no: usize, line: &str) -> Option<(RawLogRecord, TemplateId)> {
        self.consumed += 1;
        match split_header(line_no, line, &self.format) {
            Ok(record) => {
                let id = self.tree.parse(&record);
                Some((record, id))
            }
            Err(_) => {
                self.malformed += 1;
                None
            }
        }
    }

    pub fn tree(&self) -> &ParseTree {
        &self.tree
    }

    pub fn into_tree(self) -> ParseTree {
        self.tree
    }

    pub fn malformed(&self) -> usize {
        self.malformed
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }
}

/// Write `template_id \t support_count \t template` rows.
pub fn write_template_table<W: Write>(
    out: &mut W,
    templates: &[LogTemplate],
) -> std::io::Result<()> {
    for t in templates {
        writeln!(out, "{}\t{}\t{}", t.template_id, t.support_count, t)?;
    }
    Ok(())
}

pub fn read_template_table<R: BufRead>(input: R) -> Result<Vec<LogTemplate>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| ParseError::TemplateTable {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| ParseError::TemplateTable {
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut parts = line.splitn(3, '\t');
        let id = parts
            .next()
            .and_then(|s| s.parse::<TemplateId>().ok())
            .ok_or_else(|| bad("bad template_id"))?;
        let support = parts
            .next()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| bad("bad support_count"))?;
        let text = parts.next().ok_or_else(|| bad("missing template text"))?;
        let tokens: Vec<Token> = text.split_whitespace().map(Token::parse).collect();
        if tokens.is_empty() {
            return Err(bad("empty template"));
        }
        out.push(LogTemplate {
            template_id: id,
            tokens,
            support_count: support,
        });
    }
    Ok(out)
}

/// Write `line_no,template_id[,label]` rows. The label column is emitted only
/// when at least one line carries a label.
pub fn write_structured_csv<W: Write>(
    out: &mut W,
    lines: &[StructuredLine],
) -> std::io::Result<()> {
    let labeled = lines.iter().any(|l| l.label.is_some());
    if labeled {
        writeln!(out, "line_no,template_id,label")?;
    } else {
        writeln!(out, "line_no,template_id")?;
    }
    for l in lines {
        match (labeled, l.label) {
            (true, Some(label)) => writeln!(out, "{},{},{}", l.line_no, l.template_id, label)?,
            (true, None) => writeln!(out, "{},{},", l.line_no, l.template_id)?,
            _ => writeln!(out, "{},{}", l.line_no, l.template_id)?,
        }
    }
    Ok(())
}

pub fn read_structured_csv<R: BufRead>(input: R) -> Result<Vec<StructuredLine>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| ParseError::TemplateTable {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if i == 0 && line.starts_with("line_no") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = || ParseError::MalformedLine {
            line_no: i,
            reason: format!("bad structured row `{line}`"),
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 || cols.len() > 3 {
            return Err(bad());
        }
        let line_no = cols[0].parse().map_err(|_| bad())?;
        let template_id = cols[1].parse().map_err(|_| bad())?;
        let label = match cols.get(2).map(|s| s.trim()) {
            None | Some("") => None,
            Some(s) => Some(s.parse::<u8>().map_err(|_| bad())?),
        };
        out.push(StructuredLine {
            line_no,
            template_id,
            label,
        });
    }
    Ok(out)
}
