//! Words over a finite generator alphabet, kept freely reduced, plus a text
//! format for presentations.
//!
//! The text grammar:
//!
//! ```text
//! file      := "gens" namelist ";" "rels" relatorlist ";"
//! namelist  := name ("," name)*
//! relatorlist := relator ("," relator)*
//! relator   := term ("*"? term)*
//! term      := atom ("^" integer)?
//! atom      := name | "(" relator ")" | "[" relator ("," relator)+ "]"
//! ```
//!
//! `#` starts a comment running to end of line, whitespace is insignificant,
//! and `*` between terms is optional. A bracket with several arguments is the
//! left-normed commutator: `[x,y,z]` = `[[x,y],z]` with `[x,y]` = x^-1 y^-1 x y.
//! Exponent literals must be nonzero; names are `[A-Za-z][A-Za-z0-9_]*`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("zero exponent literal at line {line}, column {col}")]
    ZeroExponent { line: usize, col: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid generator name `{0}`")]
    BadGeneratorName(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("words over different alphabets")]
    AlphabetMismatch,
}

/// A named generator; `index` is its position in the owning alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub index: usize,
    pub name: String,
}

/// Ordered list of generator names shared by all words of a presentation.
#[derive(Debug)]
pub struct Alphabet {
    gens: Vec<Generator>,
    by_name: HashMap<String, usize>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.gens == other.gens
    }
}
impl Eq for Alphabet {}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Arc<Self>, WordError> {
        let mut gens = Vec::with_capacity(names.len());
        let mut by_name = HashMap::new();
        for (index, name) in names.iter().enumerate() {
            let name = name.as_ref();
            if !valid_name(name) {
                return Err(WordError::BadGeneratorName(name.to_string()));
            }
            if by_name.insert(name.to_string(), index).is_some() {
                return Err(WordError::DuplicateGenerator(name.to_string()));
            }
            gens.push(Generator { index, name: name.to_string() });
        }
        Ok(Arc::new(Alphabet { gens, by_name }))
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn name(&self, index: usize) -> &str {
        &self.gens[index].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }
}

/// Freely reduced word: adjacent syllables have distinct generators and all
/// exponents are nonzero.
#[derive(Debug, Clone)]
pub struct Word {
    alphabet: Arc<Alphabet>,
    syllables: Vec<(usize, i64)>,
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.syllables == other.syllables && self.same_alphabet(other)
    }
}
impl Eq for Word {}

impl Word {
    pub fn identity(alphabet: &Arc<Alphabet>) -> Self {
        Word { alphabet: Arc::clone(alphabet), syllables: Vec::new() }
    }

    pub fn generator(alphabet: &Arc<Alphabet>, index: usize) -> Self {
        assert!(index < alphabet.len(), "generator index out of range");
        Word { alphabet: Arc::clone(alphabet), syllables: vec![(index, 1)] }
    }

    /// Single-syllable word `g^exp`; the identity when `exp` is 0.
    pub fn generator_power(alphabet: &Arc<Alphabet>, index: usize, exp: i64) -> Self {
        assert!(index < alphabet.len(), "generator index out of range");
        let syllables = if exp == 0 { Vec::new() } else { vec![(index, exp)] };
        Word { alphabet: Arc::clone(alphabet), syllables }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn syllables(&self) -> &[(usize, i64)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters after expanding exponents.
    pub fn length(&self) -> usize {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs() as usize).sum()
    }

    fn same_alphabet(&self, other: &Word) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || *self.alphabet == *other.alphabet
    }

    fn push_syllable(syllables: &mut Vec<(usize, i64)>, gen: usize, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(&mut (last_gen, ref mut last_exp)) = syllables.last_mut() {
            if last_gen == gen {
                *last_exp += exp;
                if *last_exp == 0 {
                    syllables.pop();
                }
                return;
            }
        }
        syllables.push((gen, exp));
    }

    pub fn multiply(&self, other: &Word) -> Result<Word, WordError> {
        if !self.same_alphabet(other) {
            return Err(WordError::AlphabetMismatch);
        }
        let mut syllables = self.syllables.clone();
        for &(g, e) in &other.syllables {
            Self::push_syllable(&mut syllables, g, e);
        }
        Ok(Word { alphabet: Arc::clone(&self.alphabet), syllables })
    }

    pub fn invert(&self) -> Word {
        let syllables = self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect();
        Word { alphabet: Arc::clone(&self.alphabet), syllables }
    }

    /// x^-1 y^-1 x y.
    pub fn commutator(&self, other: &Word) -> Result<Word, WordError> {
        self.invert().multiply(&other.invert())?.multiply(self)?.multiply(other)
    }

    pub fn power(&self, n: i64) -> Word {
        if n == 0 {
            return Word::identity(&self.alphabet);
        }
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut remaining = n.unsigned_abs();
        let mut acc = Word::identity(&self.alphabet);
        let mut sq = base;
        loop {
            if remaining & 1 == 1 {
                acc = acc.multiply(&sq).expect("same alphabet");
            }
            remaining >>= 1;
            if remaining == 0 {
                return acc;
            }
            sq = sq.multiply(&sq).expect("same alphabet");
        }
    }

    /// Letters as (generator, inverted) pairs with exponents expanded.
    pub fn letters(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.syllables.iter().flat_map(|&(g, e)| {
            let inv = e < 0;
            std::iter::repeat((g, inv)).take(e.unsigned_abs() as usize)
        })
    }

    /// Conjugate-trims `x^-1 u x` to `u`; the normal closure is unchanged.
    pub fn cyclically_reduce(&self) -> Word {
        let mut s = self.syllables.clone();
        loop {
            let n = s.len();
            if n < 2 {
                break;
            }
            let (g0, e0) = s[0];
            let (g1, e1) = s[n - 1];
            if g0 != g1 || (e0 > 0) == (e1 > 0) {
                break;
            }
            let trim = e0.abs().min(e1.abs());
            let sign0 = e0.signum();
            let sign1 = e1.signum();
            s[0].1 -= sign0 * trim;
            s[n - 1].1 -= sign1 * trim;
            if s[n - 1].1 == 0 {
                s.pop();
            }
            if !s.is_empty() && s[0].1 == 0 {
                s.remove(0);
            }
            if s.len() >= 2 && s[0].0 == s[s.len() - 1].0 {
                continue;
            }
            break;
        }
        Word { alphabet: Arc::clone(&self.alphabet), syllables: s }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, &(g, e)) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "{}", self.alphabet.name(g))?;
            } else {
                write!(f, "{}^{}", self.alphabet.name(g), e)?;
            }
        }
        Ok(())
    }
}

/// A finite presentation: alphabet plus freely reduced relator words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub label: String,
    alphabet: Arc<Alphabet>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(label: impl Into<String>, alphabet: Arc<Alphabet>, relators: Vec<Word>) -> Result<Self, WordError> {
        for r in &relators {
            if !(Arc::ptr_eq(r.alphabet(), &alphabet) || **r.alphabet() == *alphabet) {
                return Err(WordError::AlphabetMismatch);
            }
        }
        Ok(Presentation { label: label.into(), alphabet, relators })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Renders the presentation in the text grammar; identity relators are
    /// dropped (they impose nothing).
    pub fn to_text(&self) -> String {
        let names: Vec<&str> = self.alphabet.generators().iter().map(|g| g.name.as_str()).collect();
        let rels: Vec<String> =
            self.relators.iter().filter(|r| !r.is_identity()).map(|r| r.to_string()).collect();
        format!("gens {};\nrels {};\n", names.join(", "), rels.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Comma,
    Semi,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Lexer {
    fn new(text: &str) -> Result<Self, WordError> {
        let mut toks = Vec::new();
        let mut line = 1usize;
        let mut col = 1usize;
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            let (tl, tc) = (line, col);
            match c {
                '\n' => {
                    chars.next();
                    line += 1;
                    col = 1;
                }
                c if c.is_whitespace() => {
                    chars.next();
                    col += 1;
                }
                '#' => {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                        col += 1;
                    }
                }
                ',' | ';' | '*' | '^' | '(' | ')' | '[' | ']' => {
                    chars.next();
                    col += 1;
                    let t = match c {
                        ',' => Tok::Comma,
                        ';' => Tok::Semi,
                        '*' => Tok::Star,
                        '^' => Tok::Caret,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        _ => Tok::RBracket,
                    };
                    toks.push((t, tl, tc));
                }
                c if c.is_ascii_alphabetic() => {
                    let mut name = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            name.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    toks.push((Tok::Ident(name), tl, tc));
                }
                c if c.is_ascii_digit() || c == '-' => {
                    let mut digits = String::new();
                    if c == '-' {
                        digits.push(c);
                        chars.next();
                        col += 1;
                    }
                    let mut any = false;
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            any = true;
                            digits.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    if !any {
                        return Err(WordError::Syntax {
                            line: tl,
                            col: tc,
                            msg: "`-` must introduce an integer".into(),
                        });
                    }
                    let value: i64 = digits.parse().map_err(|_| WordError::Syntax {
                        line: tl,
                        col: tc,
                        msg: format!("integer `{digits}` out of range"),
                    })?;
                    if value == 0 {
                        return Err(WordError::ZeroExponent { line: tl, col: tc });
                    }
                    toks.push((Tok::Int(value), tl, tc));
                }
                other => {
                    return Err(WordError::Syntax {
                        line: tl,
                        col: tc,
                        msg: format!("unexpected character `{other}`"),
                    });
                }
            }
        }
        Ok(Lexer { toks, pos: 0, end_line: line, end_col: col })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> WordError {
        let (line, col) = self.here();
        WordError::Syntax { line, col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), WordError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), WordError> {
        match self.peek() {
            Some(Tok::Ident(name)) if name == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }
}

fn starts_atom(tok: Option<&Tok>) -> bool {
    matches!(tok, Some(Tok::Ident(_)) | Some(Tok::LParen) | Some(Tok::LBracket))
}

fn parse_atom(lx: &mut Lexer, alphabet: &Arc<Alphabet>) -> Result<Word, WordError> {
    match lx.next() {
        Some(Tok::Ident(name)) => match alphabet.index_of(&name) {
            Some(idx) => Ok(Word::generator(alphabet, idx)),
            None => Err(WordError::UnknownGenerator(name)),
        },
        Some(Tok::LParen) => {
            let inner = parse_relator(lx, alphabet)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(inner)
        }
        Some(Tok::LBracket) => {
            let mut args = vec![parse_relator(lx, alphabet)?];
            while lx.peek() == Some(&Tok::Comma) {
                lx.next();
                args.push(parse_relator(lx, alphabet)?);
            }
            lx.expect(Tok::RBracket, "`]`")?;
            if args.len() < 2 {
                return Err(lx.err("commutator needs at least two arguments"));
            }
            let mut acc = args[0].clone();
            for arg in &args[1..] {
                acc = acc.commutator(arg)?;
            }
            Ok(acc)
        }
        _ => Err(lx.err("expected generator, `(`, or `[`")),
    }
}

fn parse_term(lx: &mut Lexer, alphabet: &Arc<Alphabet>) -> Result<Word, WordError> {
    let atom = parse_atom(lx, alphabet)?;
    if lx.peek() == Some(&Tok::Caret) {
        lx.next();
        match lx.next() {
            Some(Tok::Int(e)) => Ok(atom.power(e)),
            _ => Err(lx.err("expected integer exponent after `^`")),
        }
    } else {
        Ok(atom)
    }
}

fn parse_relator(lx: &mut Lexer, alphabet: &Arc<Alphabet>) -> Result<Word, WordError> {
    let mut word = parse_term(lx, alphabet)?;
    loop {
        if lx.peek() == Some(&Tok::Star) {
            lx.next();
            let term = parse_term(lx, alphabet)?;
            word = word.multiply(&term)?;
        } else if starts_atom(lx.peek()) {
            let term = parse_term(lx, alphabet)?;
            word = word.multiply(&term)?;
        } else {
            return Ok(word);
        }
    }
}

/// Parses the full `gens ...; rels ...;` format.
pub fn parse_presentation(text: &str) -> Result<Presentation, WordError> {
    let mut lx = Lexer::new(text)?;
    lx.expect_keyword("gens")?;
    let mut names = Vec::new();
    loop {
        match lx.next() {
            Some(Tok::Ident(name)) => names.push(name),
            _ => return Err(lx.err("expected generator name")),
        }
        match lx.next() {
            Some(Tok::Comma) => continue,
            Some(Tok::Semi) => break,
            _ => return Err(lx.err("expected `,` or `;` in generator list")),
        }
    }
    let alphabet = Alphabet::new(&names)?;
    lx.expect_keyword("rels")?;
    let mut relators = Vec::new();
    if lx.peek() == Some(&Tok::Semi) {
        lx.next();
    } else {
        loop {
            relators.push(parse_relator(&mut lx, &alphabet)?);
            match lx.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::Semi) => break,
                _ => return Err(lx.err("expected `,` or `;` in relator list")),
            }
        }
    }
    if lx.peek().is_some() {
        return Err(lx.err("trailing input after final `;`"));
    }
    Presentation::new("parsed", alphabet, relators)
}

/// Parses a standalone word over a known alphabet; `1` denotes the identity.
pub fn parse_word(text: &str, alphabet: &Arc<Alphabet>) -> Result<Word, WordError> {
    if text.trim() == "1" {
        return Ok(Word::identity(alphabet));
    }
    let mut lx = Lexer::new(text)?;
    let word = parse_relator(&mut lx, alphabet)?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input after word"));
    }
    Ok(word)
}
