//! Simplified lexers that reduce source text to its identifier and
//! literal tokens.
//!
//! These are scanners, not parsers: comments, operators, punctuation and
//! reserved keywords are dropped, identifiers and literals are kept in
//! order of appearance. String literals contribute their inner contents
//! without the enclosing quotes and without escape decoding; numeric
//! literals keep their verbatim lexeme. Template and interpolated strings
//! contribute their text fragments plus the tokens of their embedded
//! expressions.
//!
//! Keyword lists are pinned per language version (Java 11, ECMAScript
//! 2018, Python 3.7, C# 7) and shipped as one-keyword-per-line data
//! files. Boolean/null-like lexemes (`true`, `None`, …) are literals, not
//! keywords, so they are emitted. Contextual keywords (`var` in C#,
//! `async` in JavaScript) are identifiers wherever they are not lexically
//! reserved.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::corpus::TokenDocument;
use crate::error::{Error, Result};

/// The supported input languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceLanguage {
    Java,
    JavaScript,
    Python,
    CSharp,
}

static JAVA_KEYWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
static JS_KEYWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
static PYTHON_KEYWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
static CSHARP_KEYWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();

fn keyword_set(data: &'static str) -> HashSet<&'static str> {
    data.lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .collect()
}

impl SourceLanguage {
    pub const ALL: [SourceLanguage; 4] = [
        SourceLanguage::Java,
        SourceLanguage::JavaScript,
        SourceLanguage::Python,
        SourceLanguage::CSharp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceLanguage::Java => "java",
            SourceLanguage::JavaScript => "javascript",
            SourceLanguage::Python => "python",
            SourceLanguage::CSharp => "csharp",
        }
    }

    /// File extension scanned by [`scan_tree`], without the dot.
    pub fn file_extension(self) -> &'static str {
        match self {
            SourceLanguage::Java => "java",
            SourceLanguage::JavaScript => "js",
            SourceLanguage::Python => "py",
            SourceLanguage::CSharp => "cs",
        }
    }

    /// The language's reserved words; emitted tokens never come from this
    /// set.
    pub fn keywords(self) -> &'static HashSet<&'static str> {
        match self {
            SourceLanguage::Java => JAVA_KEYWORDS
                .get_or_init(|| keyword_set(include_str!("../data/keywords/java11.txt"))),
            SourceLanguage::JavaScript => JS_KEYWORDS
                .get_or_init(|| keyword_set(include_str!("../data/keywords/ecmascript2018.txt"))),
            SourceLanguage::Python => PYTHON_KEYWORDS
                .get_or_init(|| keyword_set(include_str!("../data/keywords/python37.txt"))),
            SourceLanguage::CSharp => CSHARP_KEYWORDS
                .get_or_init(|| keyword_set(include_str!("../data/keywords/csharp7.txt"))),
        }
    }

    fn dollar_in_identifiers(self) -> bool {
        matches!(self, SourceLanguage::Java | SourceLanguage::JavaScript)
    }
}

impl std::str::FromStr for SourceLanguage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(SourceLanguage::Java),
            "javascript" | "js" => Ok(SourceLanguage::JavaScript),
            "python" | "py" => Ok(SourceLanguage::Python),
            "csharp" | "cs" | "c#" => Ok(SourceLanguage::CSharp),
            other => Err(Error::InvalidParams(format!(
                "unknown language {other:?} (supported: java, javascript, python, csharp)"
            ))),
        }
    }
}

/// Extracts the ordered identifier/literal token stream of `text`.
pub fn tokenize_source(text: &str, lang: SourceLanguage) -> Result<Vec<String>> {
    Scanner::new(text, lang, 1, 1).run()
}

// What the previous significant token was; drives the JavaScript
// regex-vs-division heuristic.
#[derive(Clone, Copy, PartialEq)]
enum Prev {
    // Start of input, operator, opening bracket, keyword: a `/` here
    // starts a regex literal.
    Operand,
    // Identifier, literal, `)`, `]`, `}`: a `/` here is division.
    Value,
}

struct Scanner {
    lang: SourceLanguage,
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    tokens: Vec<String>,
    prev: Prev,
}

impl Scanner {
    fn new(source: &str, lang: SourceLanguage, line: usize, col: usize) -> Self {
        Self {
            lang,
            chars: source.chars().collect(),
            pos: 0,
            line,
            col,
            tokens: Vec::new(),
            prev: Prev::Operand,
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn cur(&self) -> Option<char> {
        self.peek(0)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.cur()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, col: usize, message: impl Into<String>) -> Error {
        Error::Lex {
            line,
            column: col,
            message: message.into(),
        }
    }

    fn push_token(&mut self, token: String) {
        if !token.is_empty() {
            self.tokens.push(token);
        }
    }

    fn run(mut self) -> Result<Vec<String>> {
        // Tolerate a hashbang header in scripts.
        if self.lang == SourceLanguage::JavaScript
            && self.cur() == Some('#')
            && self.peek(1) == Some('!')
        {
            while let Some(c) = self.cur() {
                if c == '\n' {
                    break;
                }
                self.bump();
            }
        }

        while let Some(c) = self.cur() {
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            match self.lang {
                SourceLanguage::Python => self.step_python(c)?,
                SourceLanguage::Java => self.step_java(c)?,
                SourceLanguage::JavaScript => self.step_javascript(c)?,
                SourceLanguage::CSharp => self.step_csharp(c)?,
            }
        }
        Ok(self.tokens)
    }

    // ---- shared pieces -------------------------------------------------

    fn is_ident_start(&self, c: char) -> bool {
        c.is_alphabetic() || c == '_' || (c == '$' && self.lang.dollar_in_identifiers())
    }

    fn is_ident_continue(&self, c: char) -> bool {
        c.is_alphanumeric() || c == '_' || (c == '$' && self.lang.dollar_in_identifiers())
    }

    fn scan_word(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.cur() {
            if self.is_ident_continue(c) {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        word
    }

    fn emit_word(&mut self, word: String) {
        if self.lang.keywords().contains(word.as_str()) {
            self.prev = Prev::Operand;
        } else {
            self.prev = Prev::Value;
            self.push_token(word);
        }
    }

    /// Numeric literal, verbatim. Accepts radix prefixes, digit
    /// separators, suffixes and exponents without validating them.
    fn scan_number(&mut self) {
        let mut lexeme = String::new();
        if self.cur() == Some('.') {
            lexeme.push('.');
            self.bump();
        }
        let mut last = '\0';
        while let Some(c) = self.cur() {
            let take = if c.is_ascii_alphanumeric() || c == '_' {
                true
            } else if c == '.' {
                matches!(self.peek(1), Some(d) if d.is_ascii_digit())
            } else if c == '+' || c == '-' {
                matches!(last, 'e' | 'E' | 'p' | 'P')
            } else {
                false
            };
            if !take {
                break;
            }
            lexeme.push(c);
            last = c;
            self.bump();
        }
        self.prev = Prev::Value;
        self.push_token(lexeme);
    }

    fn skip_line_comment(&mut self) {
        while let Some(c) = self.cur() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn skip_block_comment(&mut self) -> Result<()> {
        let (line, col) = (self.line, self.col);
        self.bump(); // '/'
        self.bump(); // '*'
        while let Some(c) = self.bump() {
            if c == '*' && self.cur() == Some('/') {
                self.bump();
                return Ok(());
            }
        }
        Err(self.error(line, col, "unterminated block comment"))
    }

    /// Single-line quoted literal with backslash escapes; the inner text
    /// is kept verbatim. `multiline` permits raw newlines inside.
    fn scan_quoted(&mut self, quote: char, multiline: bool, escapes: bool) -> Result<String> {
        let (line, col) = (self.line, self.col);
        self.bump(); // opening quote
        let mut content = String::new();
        while let Some(c) = self.cur() {
            if c == quote {
                self.bump();
                return Ok(content);
            }
            if c == '\n' && !multiline {
                break;
            }
            if c == '\\' && escapes {
                content.push(c);
                self.bump();
                if let Some(next) = self.bump() {
                    content.push(next);
                    continue;
                }
                break;
            }
            content.push(c);
            self.bump();
        }
        Err(self.error(line, col, format!("unterminated {quote} literal")))
    }

    /// Interpolated-string body: text fragments are emitted verbatim as
    /// literal tokens, `{…}` holes (with `{{`/`}}` escapes) are lexed
    /// recursively as expressions of the same language.
    fn scan_interpolated(
        &mut self,
        quote: char,
        multiline: bool,
        escapes: bool,
        doubled_quote_escape: bool,
    ) -> Result<()> {
        let (line, col) = (self.line, self.col);
        self.bump(); // opening quote
        let mut fragment = String::new();
        while let Some(c) = self.cur() {
            if c == quote {
                if doubled_quote_escape && self.peek(1) == Some(quote) {
                    fragment.push(c);
                    fragment.push(c);
                    self.bump();
                    self.bump();
                    continue;
                }
                self.bump();
                self.push_token(fragment);
                self.prev = Prev::Value;
                return Ok(());
            }
            if c == '\n' && !multiline {
                break;
            }
            if c == '\\' && escapes {
                fragment.push(c);
                self.bump();
                if let Some(next) = self.bump() {
                    fragment.push(next);
                    continue;
                }
                break;
            }
            if c == '{' {
                if self.peek(1) == Some('{') {
                    fragment.push_str("{{");
                    self.bump();
                    self.bump();
                    continue;
                }
                self.push_token(std::mem::take(&mut fragment));
                self.bump();
                self.scan_hole('}')?;
                continue;
            }
            if c == '}' && self.peek(1) == Some('}') {
                fragment.push_str("}}");
                self.bump();
                self.bump();
                continue;
            }
            fragment.push(c);
            self.bump();
        }
        Err(self.error(line, col, "unterminated interpolated string"))
    }

    /// Consumes an embedded expression up to the matching `close`,
    /// balancing braces and skipping over nested quoted strings, then
    /// lexes it recursively.
    fn scan_hole(&mut self, close: char) -> Result<()> {
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        let mut depth = 1usize;
        while let Some(c) = self.cur() {
            match c {
                '{' => depth += 1,
                '}' if close == '}' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                '"' | '\'' => {
                    self.scan_quoted(c, true, true)?;
                    continue;
                }
                _ => {}
            }
            self.bump();
        }
        if self.cur().is_none() {
            return Err(self.error(line, col, "unterminated interpolation hole"));
        }
        let inner: String = self.chars[start..self.pos].iter().collect();
        self.bump(); // closing brace
        let sub = Scanner::new(&inner, self.lang, line, col);
        let tokens = sub.run()?;
        self.tokens.extend(tokens);
        Ok(())
    }

    fn skip_punct(&mut self) {
        let c = self.bump();
        self.prev = match c {
            Some(')') | Some(']') | Some('}') => Prev::Value,
            _ => Prev::Operand,
        };
    }

    // ---- Java ----------------------------------------------------------

    fn step_java(&mut self, c: char) -> Result<()> {
        if c == '/' && self.peek(1) == Some('/') {
            self.skip_line_comment();
        } else if c == '/' && self.peek(1) == Some('*') {
            self.skip_block_comment()?;
        } else if c == '"' || c == '\'' {
            let content = self.scan_quoted(c, false, true)?;
            self.prev = Prev::Value;
            self.push_token(content);
        } else if c.is_ascii_digit()
            || (c == '.' && matches!(self.peek(1), Some(d) if d.is_ascii_digit()))
        {
            self.scan_number();
        } else if self.is_ident_start(c) {
            let word = self.scan_word();
            self.emit_word(word);
        } else {
            self.skip_punct();
        }
        Ok(())
    }

    // ---- JavaScript ------------------------------------------------------

    fn step_javascript(&mut self, c: char) -> Result<()> {
        if c == '/' && self.peek(1) == Some('/') {
            self.skip_line_comment();
        } else if c == '/' && self.peek(1) == Some('*') {
            self.skip_block_comment()?;
        } else if c == '/' && self.prev == Prev::Operand {
            self.scan_regex();
        } else if c == '"' || c == '\'' {
            let content = self.scan_quoted(c, false, true)?;
            self.prev = Prev::Value;
            self.push_token(content);
        } else if c == '`' {
            self.scan_template()?;
        } else if c.is_ascii_digit()
            || (c == '.' && matches!(self.peek(1), Some(d) if d.is_ascii_digit()))
        {
            self.scan_number();
        } else if self.is_ident_start(c) {
            let word = self.scan_word();
            self.emit_word(word);
        } else {
            self.skip_punct();
        }
        Ok(())
    }

    /// Regex literals are skipped entirely (they are neither identifiers
    /// nor one of the kept literal kinds), but must be consumed so their
    /// contents cannot confuse the scanner. If no closing `/` appears on
    /// the line the heuristic was wrong; rewind and treat the `/` as an
    /// operator.
    fn scan_regex(&mut self) {
        let saved = (self.pos, self.line, self.col);
        self.bump(); // '/'
        let mut in_class = false;
        let mut closed = false;
        while let Some(c) = self.cur() {
            if c == '\n' {
                break;
            }
            if c == '\\' {
                self.bump();
                self.bump();
                continue;
            }
            match c {
                '[' => in_class = true,
                ']' => in_class = false,
                '/' if !in_class => {
                    self.bump();
                    closed = true;
                    break;
                }
                _ => {}
            }
            self.bump();
        }
        if closed {
            while let Some(c) = self.cur() {
                if c.is_ascii_alphabetic() {
                    self.bump(); // flags
                } else {
                    break;
                }
            }
            self.prev = Prev::Value;
        } else {
            (self.pos, self.line, self.col) = saved;
            self.bump();
            self.prev = Prev::Operand;
        }
    }

    /// Backtick template: literal fragments plus recursively lexed
    /// `${…}` holes.
    fn scan_template(&mut self) -> Result<()> {
        let (line, col) = (self.line, self.col);
        self.bump(); // '`'
        let mut fragment = String::new();
        while let Some(c) = self.cur() {
            if c == '`' {
                self.bump();
                self.push_token(fragment);
                self.prev = Prev::Value;
                return Ok(());
            }
            if c == '\\' {
                fragment.push(c);
                self.bump();
                if let Some(next) = self.bump() {
                    fragment.push(next);
                    continue;
                }
                break;
            }
            if c == '$' && self.peek(1) == Some('{') {
                self.push_token(std::mem::take(&mut fragment));
                self.bump(); // '$'
                self.bump(); // '{'
                self.scan_hole('}')?;
                continue;
            }
            fragment.push(c);
            self.bump();
        }
        Err(self.error(line, col, "unterminated template literal"))
    }

    // ---- Python ----------------------------------------------------------

    fn step_python(&mut self, c: char) -> Result<()> {
        if c == '#' {
            self.skip_line_comment();
        } else if c == '"' || c == '\'' {
            self.scan_python_string(c, false, false)?;
        } else if c == '\\' && self.peek(1) == Some('\n') {
            self.bump();
            self.bump(); // line continuation
        } else if c.is_ascii_digit()
            || (c == '.' && matches!(self.peek(1), Some(d) if d.is_ascii_digit()))
        {
            self.scan_number();
        } else if self.is_ident_start(c) {
            let word = self.scan_word();
            if let Some(quote) = self.cur().filter(|q| *q == '"' || *q == '\'') {
                if let Some((raw, fstring)) = python_string_prefix(&word) {
                    return self.scan_python_string(quote, raw, fstring);
                }
            }
            self.emit_word(word);
        } else {
            self.skip_punct();
        }
        Ok(())
    }

    fn scan_python_string(&mut self, quote: char, _raw: bool, fstring: bool) -> Result<()> {
        let triple = self.peek(1) == Some(quote) && self.peek(2) == Some(quote);
        if triple {
            let (line, col) = (self.line, self.col);
            self.bump();
            self.bump();
            self.bump();
            let mut content = String::new();
            while let Some(c) = self.cur() {
                if c == quote && self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
                    self.bump();
                    self.bump();
                    self.bump();
                    if fstring {
                        self.emit_fstring_body(&content, line, col)?;
                    } else {
                        self.push_token(content);
                    }
                    self.prev = Prev::Value;
                    return Ok(());
                }
                if c == '\\' {
                    content.push(c);
                    self.bump();
                    if let Some(next) = self.bump() {
                        content.push(next);
                        continue;
                    }
                    break;
                }
                content.push(c);
                self.bump();
            }
            return Err(self.error(line, col, "unterminated triple-quoted string"));
        }
        if fstring {
            self.scan_interpolated(quote, false, true, false)
        } else {
            let content = self.scan_quoted(quote, false, true)?;
            self.prev = Prev::Value;
            self.push_token(content);
            Ok(())
        }
    }

    /// f-string body collected from a triple-quoted literal: split into
    /// fragments and holes after the fact.
    fn emit_fstring_body(&mut self, body: &str, line: usize, col: usize) -> Result<()> {
        let chars: Vec<char> = body.chars().collect();
        let mut i = 0;
        let mut fragment = String::new();
        while i < chars.len() {
            let c = chars[i];
            if c == '{' && chars.get(i + 1) == Some(&'{') {
                fragment.push_str("{{");
                i += 2;
            } else if c == '}' && chars.get(i + 1) == Some(&'}') {
                fragment.push_str("}}");
                i += 2;
            } else if c == '{' {
                self.push_token(std::mem::take(&mut fragment));
                let mut depth = 1;
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && depth > 0 {
                    match chars[j] {
                        '{' => depth += 1,
                        '}' => depth -= 1,
                        _ => {}
                    }
                    j += 1;
                }
                if depth > 0 {
                    return Err(self.error(line, col, "unterminated interpolation hole"));
                }
                let inner: String = chars[start..j - 1].iter().collect();
                let tokens = Scanner::new(&inner, self.lang, line, col).run()?;
                self.tokens.extend(tokens);
                i = j;
            } else {
                fragment.push(c);
                i += 1;
            }
        }
        self.push_token(fragment);
        Ok(())
    }

    // ---- C# ---------------------------------------------------------------

    fn step_csharp(&mut self, c: char) -> Result<()> {
        if c == '/' && self.peek(1) == Some('/') {
            self.skip_line_comment();
        } else if c == '/' && self.peek(1) == Some('*') {
            self.skip_block_comment()?;
        } else if c == '"' || c == '\'' {
            let content = self.scan_quoted(c, false, true)?;
            self.prev = Prev::Value;
            self.push_token(content);
        } else if c == '@' {
            match self.peek(1) {
                Some('"') => {
                    self.bump(); // '@'
                    let content = self.scan_verbatim_string()?;
                    self.prev = Prev::Value;
                    self.push_token(content);
                }
                Some('$') if self.peek(2) == Some('"') => {
                    self.bump();
                    self.bump();
                    self.scan_interpolated('"', true, false, true)?;
                }
                Some(d) if self.is_ident_start(d) => {
                    self.bump(); // '@': verbatim identifier, bypasses keywords
                    let word = self.scan_word();
                    self.prev = Prev::Value;
                    self.push_token(word);
                }
                _ => self.skip_punct(),
            }
        } else if c == '$' {
            match self.peek(1) {
                Some('"') => {
                    self.bump();
                    self.scan_interpolated('"', false, true, false)?;
                }
                Some('@') if self.peek(2) == Some('"') => {
                    self.bump();
                    self.bump();
                    self.scan_interpolated('"', true, false, true)?;
                }
                _ => self.skip_punct(),
            }
        } else if c.is_ascii_digit()
            || (c == '.' && matches!(self.peek(1), Some(d) if d.is_ascii_digit()))
        {
            self.scan_number();
        } else if self.is_ident_start(c) {
            let word = self.scan_word();
            self.emit_word(word);
        } else {
            self.skip_punct();
        }
        Ok(())
    }

    /// `@"…"` verbatim string: no escapes, `""` is an escaped quote,
    /// newlines allowed.
    fn scan_verbatim_string(&mut self) -> Result<String> {
        let (line, col) = (self.line, self.col);
        self.bump(); // '"'
        let mut content = String::new();
        while let Some(c) = self.cur() {
            if c == '"' {
                if self.peek(1) == Some('"') {
                    content.push_str("\"\"");
                    self.bump();
                    self.bump();
                    continue;
                }
                self.bump();
                return Ok(content);
            }
            content.push(c);
            self.bump();
        }
        Err(self.error(line, col, "unterminated verbatim string"))
    }
}

fn python_string_prefix(word: &str) -> Option<(bool, bool)> {
    if word.len() > 2 {
        return None;
    }
    let lower = word.to_ascii_lowercase();
    match lower.as_str() {
        "r" => Some((true, false)),
        "b" | "u" => Some((false, false)),
        "f" => Some((false, true)),
        "rb" | "br" => Some((true, false)),
        "rf" | "fr" => Some((true, true)),
        _ => None,
    }
}

/// A file that failed to lex during a tree scan.
#[derive(Debug, Clone)]
pub struct SkippedFile {
    /// Path relative to the scan root, `/`-separated.
    pub path: String,
    pub reason: String,
}

/// Walks `root` for files with the language's extension, tokenizing each.
/// Documents are keyed by their `/`-separated path relative to `root` and
/// returned in sorted-path order; files that fail to read or lex never
/// abort the scan and are listed in the skip report instead.
pub fn scan_tree(
    root: &Path,
    lang: SourceLanguage,
) -> Result<(Vec<TokenDocument>, Vec<SkippedFile>)> {
    let mut paths: Vec<(String, std::path::PathBuf)> = Vec::new();
    let mut skipped: Vec<SkippedFile> = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            // An unreadable root aborts; deeper failures only skip.
            Err(e) if e.depth() == 0 => {
                return Err(Error::Io(std::io::Error::other(format!(
                    "cannot walk {}: {e}",
                    root.display()
                ))))
            }
            Err(e) => {
                let path = e
                    .path()
                    .map(|p| p.strip_prefix(root).unwrap_or(p).display().to_string())
                    .unwrap_or_else(|| "<unknown>".to_string());
                skipped.push(SkippedFile {
                    path,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let matches_ext = entry
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case(lang.file_extension()));
        if !matches_ext {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        paths.push((rel, entry.path().to_path_buf()));
    }
    paths.sort();

    let results: Vec<(String, std::result::Result<Vec<String>, String>)> = paths
        .into_par_iter()
        .map(|(rel, path)| {
            let outcome = fs::read(&path)
                .map_err(|e| format!("read failed: {e}"))
                .and_then(|bytes| String::from_utf8(bytes).map_err(|_| "invalid UTF-8".to_string()))
                .and_then(|text| tokenize_source(&text, lang).map_err(|e| e.to_string()));
            (rel, outcome)
        })
        .collect();

    let mut docs = Vec::new();
    for (rel, outcome) in results {
        match outcome {
            Ok(tokens) => docs.push(TokenDocument::new(rel, tokens)),
            Err(reason) => skipped.push(SkippedFile { path: rel, reason }),
        }
    }
    Ok((docs, skipped))
}
