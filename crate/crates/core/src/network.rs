//! Reaction networks: species, mass-action reactions `alpha -> beta @ K`,
//! the line-oriented text format and exact conservation laws.
//!
//! Text format (one item per line, UTF-8):
//!
//! ```text
//! # comment
//! species: A B C          (optional, fixes the species order)
//! A + 2 B -> C @ 0.5      (side := 0 | term (+ term)*, term := [coef] name)
//! C -> 0 @ 1
//! ```
//!
//! Without a `species:` line, species are numbered in order of first
//! appearance.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("species name must be a non-empty identifier, got {0:?}")]
    InvalidName(String),
    #[error("duplicate species {0:?}")]
    DuplicateSpecies(String),
    #[error("network has no reactions")]
    NoReactions,
    #[error("reaction {reaction}: vector length {got} does not match {expected} species")]
    DimensionMismatch {
        reaction: usize,
        expected: usize,
        got: usize,
    },
    #[error("reaction {reaction}: rate constant must be positive and finite, got {rate}")]
    NonPositiveRate { reaction: usize, rate: f64 },
    #[error("reaction {reaction}: reactants equal products (no-op reaction)")]
    NoOp { reaction: usize },
    #[error("count vector has {got} entries, network has {expected} species")]
    StateDimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Free-form syntax error message.
    Syntax(String),
    UnknownSpecies(String),
    NonPositiveRate,
    NoOp,
    DuplicateSpecies(String),
    LateSpeciesLine,
    Empty,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => f.write_str(msg),
            ParseErrorKind::UnknownSpecies(name) => write!(f, "unknown species {name:?}"),
            ParseErrorKind::NonPositiveRate => f.write_str("rate must be a positive number"),
            ParseErrorKind::NoOp => f.write_str("reactants equal products (no-op reaction)"),
            ParseErrorKind::DuplicateSpecies(name) => write!(f, "duplicate species {name:?}"),
            ParseErrorKind::LateSpeciesLine => {
                f.write_str("species line must precede every reaction line")
            }
            ParseErrorKind::Empty => f.write_str("no reactions found"),
        }
    }
}

/// Parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

/// Ordered, duplicate-free species names; the index is the species id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpeciesTable {
    names: Vec<String>,
}

impl SpeciesTable {
    pub fn new<I, S>(names: I) -> Result<Self, NetworkError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = SpeciesTable::default();
        for name in names {
            table.push(name.into())?;
        }
        Ok(table)
    }

    fn push(&mut self, name: String) -> Result<usize, NetworkError> {
        if !is_identifier(&name) {
            return Err(NetworkError::InvalidName(name));
        }
        if self.index_of(&name).is_some() {
            return Err(NetworkError::DuplicateSpecies(name));
        }
        self.names.push(name);
        Ok(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One mass-action reaction `alpha -> beta` with rate constant `rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub rate: f64,
}

impl Reaction {
    pub fn new(alpha: Vec<u32>, beta: Vec<u32>, rate: f64) -> Self {
        Self { alpha, beta, rate }
    }

    /// Builds a reaction over `species` species from sparse `(index, coefficient)` lists.
    pub fn from_terms(species: usize, reactants: &[(usize, u32)], products: &[(usize, u32)], rate: f64) -> Self {
        let mut alpha = vec![0; species];
        let mut beta = vec![0; species];
        for &(i, c) in reactants {
            alpha[i] += c;
        }
        for &(i, c) in products {
            beta[i] += c;
        }
        Self { alpha, beta, rate }
    }

    /// Molecularity `sum_i alpha_i`.
    pub fn order(&self) -> u32 {
        self.alpha.iter().sum()
    }

    /// Net change `beta - alpha`.
    pub fn stoichiometry(&self) -> Vec<i64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| b as i64 - a as i64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: SpeciesTable,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new(species: SpeciesTable, reactions: Vec<Reaction>) -> Result<Self, NetworkError> {
        if reactions.is_empty() {
            return Err(NetworkError::NoReactions);
        }
        let m = species.len();
        for (i, r) in reactions.iter().enumerate() {
            for len in [r.alpha.len(), r.beta.len()] {
                if len != m {
                    return Err(NetworkError::DimensionMismatch {
                        reaction: i,
                        expected: m,
                        got: len,
                    });
                }
            }
            if !(r.rate > 0.0 && r.rate.is_finite()) {
                return Err(NetworkError::NonPositiveRate {
                    reaction: i,
                    rate: r.rate,
                });
            }
            if r.alpha == r.beta {
                return Err(NetworkError::NoOp { reaction: i });
            }
        }
        Ok(Self { species, reactions })
    }

    pub fn species(&self) -> &SpeciesTable {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn check_state(&self, len: usize) -> Result<(), NetworkError> {
        if len == self.species.len() {
            Ok(())
        } else {
            Err(NetworkError::StateDimension {
                expected: self.species.len(),
                got: len,
            })
        }
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.text[..self.pos].chars().count() + 1,
            kind,
        }
    }

    fn syntax(&self, msg: &str) -> ParseError {
        self.err(ParseErrorKind::Syntax(msg.to_string()))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == ' ' || c == '\t' || c == '\r' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if pred(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn identifier(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if is_ident_start(c) => Ok(self.take_while(is_ident_char)),
            _ => Err(self.syntax("expected species name")),
        }
    }
}

/// Parsed side: `(name, coefficient, column)` terms.
type Side<'a> = Vec<(&'a str, u32, usize)>;

fn parse_side<'a>(cur: &mut Cursor<'a>) -> Result<Side<'a>, ParseError> {
    cur.skip_ws();
    if cur.peek() == Some('0') {
        let save = cur.pos;
        cur.pos += 1;
        if !matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            return Ok(Vec::new());
        }
        cur.pos = save;
    }
    let mut terms = Vec::new();
    loop {
        cur.skip_ws();
        let column = cur.text[..cur.pos].chars().count() + 1;
        let digits = cur.take_while(|c| c.is_ascii_digit());
        let coefficient = if digits.is_empty() {
            1
        } else {
            match digits.parse::<u32>() {
                Ok(c) if c > 0 => c,
                _ => return Err(cur.syntax("coefficient must be a positive integer")),
            }
        };
        let name = cur.identifier()?;
        terms.push((name, coefficient, column));
        if !cur.eat("+") {
            return Ok(terms);
        }
    }
}

/// Parses the reaction text format.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, ParseError> {
    let mut species = SpeciesTable::default();
    let mut declared = false;
    let mut raw: Vec<(Side<'_>, Side<'_>, f64, usize)> = Vec::new();

    for (line_no, line) in text.lines().enumerate() {
        let mut cur = Cursor {
            text: line,
            pos: 0,
            line: line_no + 1,
        };
        if cur.at_end() || cur.peek() == Some('#') {
            continue;
        }
        if cur.text[cur.pos..].starts_with("species") {
            let save = cur.pos;
            cur.pos += "species".len();
            if cur.eat(":") {
                if !raw.is_empty() || declared {
                    cur.pos = save;
                    return Err(cur.err(ParseErrorKind::LateSpeciesLine));
                }
                while !cur.at_end() {
                    let col = cur.pos;
                    let name = cur.identifier()?;
                    if species.push(name.to_string()).is_err() {
                        cur.pos = col;
                        cur.skip_ws();
                        return Err(cur.err(ParseErrorKind::DuplicateSpecies(name.to_string())));
                    }
                }
                declared = true;
                continue;
            }
            cur.pos = save;
        }
        let lhs = parse_side(&mut cur)?;
        if !cur.eat("->") {
            return Err(cur.syntax("expected '->'"));
        }
        let rhs = parse_side(&mut cur)?;
        if !cur.eat("@") {
            return Err(cur.syntax("expected '@' before the rate constant"));
        }
        cur.skip_ws();
        let rate_col = cur.pos;
        let rate_text = cur.take_while(|c| !c.is_whitespace());
        let rate: f64 = rate_text.parse().map_err(|_| {
            cur.pos = rate_col;
            cur.syntax("expected a decimal rate constant")
        })?;
        if !(rate > 0.0 && rate.is_finite()) {
            cur.pos = rate_col;
            return Err(cur.err(ParseErrorKind::NonPositiveRate));
        }
        if !cur.at_end() {
            return Err(cur.syntax("unexpected trailing input"));
        }
        for &(name, _, column) in lhs.iter().chain(rhs.iter()) {
            if species.index_of(name).is_none() {
                if declared {
                    return Err(ParseError {
                        line: line_no + 1,
                        column,
                        kind: ParseErrorKind::UnknownSpecies(name.to_string()),
                    });
                }
                species
                    .push(name.to_string())
                    .expect("identifier validated by the lexer");
            }
        }
        raw.push((lhs, rhs, rate, line_no + 1));
    }

    if raw.is_empty() {
        return Err(ParseError {
            line: text.lines().count().max(1),
            column: 1,
            kind: ParseErrorKind::Empty,
        });
    }

    let m = species.len();
    let mut reactions = Vec::with_capacity(raw.len());
    for (lhs, rhs, rate, line) in raw {
        let to_vec = |side: &Side<'_>| {
            let mut v = vec![0u32; m];
            for &(name, c, _) in side {
                v[species.index_of(name).unwrap()] += c;
            }
            v
        };
        let (alpha, beta) = (to_vec(&lhs), to_vec(&rhs));
        if alpha == beta {
            return Err(ParseError {
                line,
                column: 1,
                kind: ParseErrorKind::NoOp,
            });
        }
        reactions.push(Reaction { alpha, beta, rate });
    }
    Ok(ReactionNetwork::new(species, reactions).expect("parser enforces network invariants"))
}

fn write_side(out: &mut String, species: &SpeciesTable, v: &[u32]) {
    let mut first = true;
    for (i, &c) in v.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if !first {
            out.push_str(" + ");
        }
        first = false;
        if c != 1 {
            let _ = write!(out, "{c} ");
        }
        out.push_str(species.name(i));
    }
    if first {
        out.push('0');
    }
}

/// Canonical text form; `parse_network(&format_network(n)) == n`.
///
/// A `species:` line is emitted only when first-appearance order would not
/// reproduce the species table.
pub fn format_network(net: &ReactionNetwork) -> String {
    let mut appearance: Vec<usize> = Vec::new();
    for r in &net.reactions {
        for v in [&r.alpha, &r.beta] {
            for (i, &c) in v.iter().enumerate() {
                if c > 0 && !appearance.contains(&i) {
                    appearance.push(i);
                }
            }
        }
    }
    let implicit_ok = appearance.len() == net.species_count()
        && appearance.iter().enumerate().all(|(k, &i)| k == i);

    let mut out = String::new();
    if !implicit_ok {
        out.push_str("species:");
        for name in net.species.names() {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
    }
    for (k, r) in net.reactions.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        write_side(&mut out, &net.species, &r.alpha);
        out.push_str(" -> ");
        write_side(&mut out, &net.species, &r.beta);
        let _ = write!(out, " @ {}", r.rate);
    }
    out
}

impl fmt::Display for ReactionNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_network(self))
    }
}

/// Integer basis `{mu_k}` of the linear invariants `<mu_k, n>`.
///
/// Rows are the reduced row-echelon basis of the left null space of the
/// stoichiometric matrix, each scaled to a primitive integer vector with a
/// positive leading entry, so equal subspaces give equal bases.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConservationBasis {
    pub vectors: Vec<Vec<i64>>,
}

impl ConservationBasis {
    pub fn new(vectors: Vec<Vec<i64>>) -> Self {
        Self { vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// True when every vector is orthogonal to every `beta - alpha` of `net`.
    pub fn is_conserved_by(&self, net: &ReactionNetwork) -> bool {
        net.reactions().iter().all(|r| {
            let d = r.stoichiometry();
            self.vectors
                .iter()
                .all(|mu| mu.iter().zip(&d).map(|(&a, &b)| a as i128 * b as i128).sum::<i128>() == 0)
        })
    }

    /// True when the all-ones vector lies in the rational span of the basis.
    pub fn contains_all_ones(&self, species: usize) -> bool {
        let ones = vec![1i64; species];
        let mut rows = self.vectors.clone();
        let r0 = rank(&rows);
        rows.push(ones);
        rank(&rows) == r0
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn make_primitive(row: &mut [i128]) {
    let g = row.iter().fold(0, |g, &x| gcd(g, x));
    if g > 1 {
        for x in row.iter_mut() {
            *x /= g;
        }
    }
    if let Some(&lead) = row.iter().find(|&&x| x != 0) {
        if lead < 0 {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Fraction-free reduced row echelon form. Each returned row is primitive
/// with a positive pivot, and pivot columns are zero in every other row.
/// Returns `(rows, pivot_columns)`.
fn reduced_echelon(rows: &[Vec<i64>], cols: usize) -> (Vec<Vec<i128>>, Vec<usize>) {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0))
        .collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..cols {
        let Some(p) = (top..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(top, p);
        make_primitive(&mut a[top]);
        let pivot_row = a[top].clone();
        let pv = pivot_row[col];
        for (i, row) in a.iter_mut().enumerate() {
            if i == top || row[col] == 0 {
                continue;
            }
            let b = row[col];
            let g = gcd(pv, b);
            let (fp, fb) = (pv / g, b / g);
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = fp * *x - fb * y;
            }
            make_primitive(row);
        }
        pivots.push(col);
        top += 1;
        if top == a.len() {
            break;
        }
    }
    a.truncate(top);
    (a, pivots)
}

fn rank(rows: &[Vec<i64>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    reduced_echelon(rows, cols).1.len()
}

/// Rank of the stoichiometric matrix with rows `beta - alpha`.
pub fn stoichiometric_rank(net: &ReactionNetwork) -> usize {
    let rows: Vec<Vec<i64>> = net.reactions().iter().map(Reaction::stoichiometry).collect();
    rank(&rows)
}

/// Canonical integer basis of all linear conservation laws of `net`.
pub fn conservation_laws(net: &ReactionNetwork) -> ConservationBasis {
    let m = net.species_count();
    let rows: Vec<Vec<i64>> = net.reactions().iter().map(Reaction::stoichiometry).collect();
    let (ech, pivots) = reduced_echelon(&rows, m);

    // x_f = L, x_{p_k} = -ech[k][f] * L / ech[k][p_k] for each free column f.
    let mut null: Vec<Vec<i64>> = Vec::new();
    for f in (0..m).filter(|c| !pivots.contains(c)) {
        let l = pivots
            .iter()
            .enumerate()
            .fold(1i128, |l, (k, &p)| {
                let d = ech[k][p];
                l / gcd(l, d) * d
            });
        let mut v = vec![0i128; m];
        v[f] = l;
        for (k, &p) in pivots.iter().enumerate() {
            v[p] = -ech[k][f] * (l / ech[k][p]);
        }
        make_primitive(&mut v);
        null.push(v.into_iter().map(|x| x as i64).collect());
    }

    let (canon, _) = reduced_echelon(&null, m);
    ConservationBasis {
        vectors: canon
            .into_iter()
            .map(|r| r.into_iter().map(|x| x as i64).collect())
            .collect(),
    }
}

/// Right-hand sides `b_k = <mu_k, n0>` of the invariant hyperplanes.
pub fn invariant_values(basis: &ConservationBasis, n0: &[u64]) -> Result<Vec<i128>, NetworkError> {
    basis
        .vectors
        .iter()
        .map(|mu| {
            if mu.len() != n0.len() {
                return Err(NetworkError::StateDimension {
                    expected: mu.len(),
                    got: n0.len(),
                });
            }
            Ok(mu.iter().zip(n0).map(|(&a, &n)| a as i128 * n as i128).sum())
        })
        .collect()
}
