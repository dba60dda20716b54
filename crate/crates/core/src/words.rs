//! Kautz words and the word digraph.
//!
//! A vertex of `K(d, D)` is a word of length `m = D` over `{0, ..., d}` with
//! no two equal adjacent symbols; `u -> v` is an edge when `v` is `u` shifted
//! left by one with a fresh symbol appended. All distances follow from the
//! suffix/prefix overlap of two words, so nothing here needs a graph search.

use std::fmt;

use crate::error::{Error, Result};
use crate::num::{self, Count};

/// Default enumeration limit on edges, `2^22`.
pub const DEFAULT_EDGE_CAP: u128 = 1 << 22;
/// Default limit on ordered vertex pairs for all-pairs work.
pub const DEFAULT_PAIR_CAP: u128 = 1 << 32;
/// Default limit on raw words visited by brute-force enumerators.
pub const DEFAULT_WORD_CAP: u128 = 1 << 26;

/// Limits that every enumerating routine checks before doing any work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCap {
    pub edges: u128,
    pub pairs: u128,
    pub words: u128,
}

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap {
            edges: DEFAULT_EDGE_CAP,
            pairs: DEFAULT_PAIR_CAP,
            words: DEFAULT_WORD_CAP,
        }
    }
}

impl EnumerationCap {
    pub fn unlimited() -> Self {
        EnumerationCap {
            edges: u128::MAX,
            pairs: u128::MAX,
            words: u128::MAX,
        }
    }

    pub fn with_edges(self, edges: u128) -> Self {
        EnumerationCap { edges, ..self }
    }

    pub(crate) fn check(what: &'static str, requested: u128, cap: u128) -> Result<()> {
        if requested > cap {
            return Err(Error::Resource {
                what,
                requested,
                cap,
            });
        }
        Ok(())
    }
}

/// Degree and row of a Kautz digraph `K(d, D)`.
///
/// Vertices are words of length `m = D`; `|V| = (d+1) d^(D-1)` and
/// `|E| = (d+1) d^D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphParams {
    d: u32,
    diameter: usize,
}

impl GraphParams {
    pub fn new(d: u32, diameter: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("d must be ≥ 2 (got {d})")));
        }
        if d > 254 {
            return Err(Error::Domain(format!("d must be ≤ 254 (got {d})")));
        }
        if diameter < 1 {
            return Err(Error::Domain("D must be ≥ 1".into()));
        }
        Ok(GraphParams { d, diameter })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// The row index `D`.
    pub fn diameter(&self) -> usize {
        self.diameter
    }

    /// Alphabet size `q = d + 1`.
    pub fn q(&self) -> u32 {
        self.d + 1
    }

    /// Vertex word length. Equal to `D`.
    pub fn word_len(&self) -> usize {
        self.diameter
    }

    /// Parameters of the line digraph, `K(d, D + 1)`.
    pub fn next_row(&self) -> Self {
        GraphParams {
            d: self.d,
            diameter: self.diameter + 1,
        }
    }

    /// Saturates at `u128::MAX`; used for cap checks only.
    pub fn vertex_count_u128(&self) -> u128 {
        let mut n = u128::from(self.q());
        for _ in 1..self.word_len() {
            n = n.saturating_mul(u128::from(self.d));
        }
        n
    }

    pub fn edge_count_u128(&self) -> u128 {
        self.vertex_count_u128().saturating_mul(u128::from(self.d))
    }

    pub fn vertex_count<T: Count>(&self) -> Result<T> {
        let pow: T = num::pow(u64::from(self.d), (self.word_len() - 1) as u32)?;
        num::mul(&num::from_u64(u64::from(self.q()))?, &pow)
    }

    pub fn edge_count<T: Count>(&self) -> Result<T> {
        let pow: T = num::pow(u64::from(self.d), self.word_len() as u32)?;
        num::mul(&num::from_u64(u64::from(self.q()))?, &pow)
    }

    /// `|V| (|V| - 1)`, the number of ordered pairs of distinct vertices.
    pub fn ordered_pair_count<T: Count>(&self) -> Result<T> {
        let v: T = self.vertex_count()?;
        num::mul(&v, &(v.clone() - T::one()))
    }

    pub(crate) fn check_edges(&self, cap: &EnumerationCap) -> Result<()> {
        EnumerationCap::check("edge", self.edge_count_u128(), cap.edges)
    }

    pub(crate) fn check_pairs(&self, cap: &EnumerationCap) -> Result<()> {
        let v = self.vertex_count_u128();
        EnumerationCap::check("vertex-pair", v.saturating_mul(v), cap.pairs)
    }
}

/// True iff `symbols` is a vertex word of the graph described by `params`.
pub fn validate_word(symbols: &[u8], params: &GraphParams) -> bool {
    symbols.len() == params.word_len() && is_proper(symbols, params.q())
}

fn is_proper(symbols: &[u8], q: u32) -> bool {
    symbols.iter().all(|&s| u32::from(s) < q) && symbols.windows(2).all(|p| p[0] != p[1])
}

/// A word over `{0, ..., q-1}` with no equal adjacent symbols.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KautzWord {
    q: u8,
    symbols: Vec<u8>,
}

impl KautzWord {
    /// Builds a word over the alphabet of out-degree `d`.
    pub fn new(symbols: Vec<u8>, d: u32) -> Result<Self> {
        if !(2..=254).contains(&d) {
            return Err(Error::Domain(format!("d must be in 2..=254 (got {d})")));
        }
        if symbols.is_empty() {
            return Err(Error::Domain("empty word".into()));
        }
        if !is_proper(&symbols, d + 1) {
            return Err(Error::Domain(format!(
                "{symbols:?} is not a Kautz word over {} letters",
                d + 1
            )));
        }
        Ok(KautzWord {
            q: (d + 1) as u8,
            symbols,
        })
    }

    /// Parses a digit string such as `"0102"`.
    pub fn parse(text: &str, d: u32) -> Result<Self> {
        let symbols = text
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|v| v as u8)
                    .ok_or_else(|| Error::Parse(format!("bad symbol {c:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        KautzWord::new(symbols, d)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn d(&self) -> u32 {
        u32::from(self.q) - 1
    }

    pub fn last(&self) -> u8 {
        *self.symbols.last().expect("words are non-empty")
    }

    /// The `d` successors in ascending order of the appended symbol.
    pub fn out_neighbors(&self) -> Vec<KautzWord> {
        let last = self.last();
        (0..self.q)
            .filter(|&y| y != last)
            .map(|y| {
                let mut symbols = Vec::with_capacity(self.len());
                symbols.extend_from_slice(&self.symbols[1..]);
                symbols.push(y);
                KautzWord { q: self.q, symbols }
            })
            .collect()
    }

    pub fn is_successor_of(&self, tail: &KautzWord) -> bool {
        self.q == tail.q
            && self.len() == tail.len()
            && self.symbols[..self.len() - 1] == tail.symbols[1..]
            && self.last() != tail.last()
    }
}

impl fmt::Display for KautzWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{}", char::from_digit(u32::from(s), 36).unwrap_or('?'))?;
        }
        Ok(())
    }
}

impl fmt::Debug for KautzWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KautzWord({self})")
    }
}

/// Largest `t` such that the length-`t` suffix of `u` equals the length-`t`
/// prefix of `w`. Both slices must have the same length.
pub fn overlap_len(u: &[u8], w: &[u8]) -> usize {
    debug_assert_eq!(u.len(), w.len());
    let m = u.len();
    (0..=m).rev().find(|&t| u[m - t..] == w[..t]).unwrap_or(0)
}

pub fn max_overlap(u: &KautzWord, w: &KautzWord) -> usize {
    overlap_len(&u.symbols, &w.symbols)
}

/// Directed distance from `u` to `w`: word length minus their overlap.
pub fn distance_by_overlap(u: &KautzWord, w: &KautzWord) -> usize {
    u.len() - max_overlap(u, w)
}

/// A directed edge `tail -> head`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    tail: KautzWord,
    head: KautzWord,
}

impl EdgeRef {
    pub fn new(tail: KautzWord, head: KautzWord) -> Result<Self> {
        if !head.is_successor_of(&tail) {
            return Err(Error::Domain(format!(
                "{head} is not a successor of {tail}"
            )));
        }
        Ok(EdgeRef { tail, head })
    }

    pub fn tail(&self) -> &KautzWord {
        &self.tail
    }

    pub fn head(&self) -> &KautzWord {
        &self.head
    }

    /// Inverse of [`line_digraph_image`]: splits a word of length `m + 1`
    /// into the edge between its two length-`m` windows.
    pub fn from_image(word: &KautzWord) -> Result<Self> {
        let n = word.len();
        if n < 2 {
            return Err(Error::Domain("line image needs length ≥ 2".into()));
        }
        let tail = KautzWord {
            q: word.q,
            symbols: word.symbols[..n - 1].to_vec(),
        };
        let head = KautzWord {
            q: word.q,
            symbols: word.symbols[1..].to_vec(),
        };
        Ok(EdgeRef { tail, head })
    }
}

/// Length of the shortest cycle through `e`, minus one.
pub fn edge_cycle_index(e: &EdgeRef) -> usize {
    distance_by_overlap(&e.head, &e.tail)
}

/// The vertex of the line digraph that corresponds to `e`: tail followed by
/// the head's last symbol.
pub fn line_digraph_image(e: &EdgeRef) -> KautzWord {
    let mut symbols = e.tail.symbols.clone();
    symbols.push(e.head.last());
    KautzWord {
        q: e.tail.q,
        symbols,
    }
}

/// Cycle index of the edge encoded by a length-`m + 1` proper word, without
/// materialising the edge.
pub(crate) fn image_cycle_index(image: &[u8]) -> usize {
    let m = image.len() - 1;
    m - overlap_len(&image[1..], &image[..m])
}

/// Lexicographic ranking of the vertex words of one graph.
///
/// Position 0 has `q` choices and every later position `d` choices (anything
/// but the previous symbol), so ranks are mixed-radix numbers.
#[derive(Clone, Copy, Debug)]
pub struct WordSpace {
    params: GraphParams,
}

impl WordSpace {
    pub fn new(params: GraphParams) -> Self {
        WordSpace { params }
    }

    pub fn params(&self) -> GraphParams {
        self.params
    }

    /// Number of words. Only meaningful for spaces that fit in memory.
    pub fn len(&self) -> usize {
        self.params.vertex_count_u128() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rank(&self, symbols: &[u8]) -> usize {
        let d = self.params.d as usize;
        let mut idx = symbols[0] as usize;
        for p in symbols.windows(2) {
            let r = p[1] as usize - usize::from(p[1] > p[0]);
            idx = idx * d + r;
        }
        idx
    }

    pub fn unrank_into(&self, mut idx: usize, out: &mut [u8]) {
        let d = self.params.d as usize;
        let m = out.len();
        for slot in out[1..].iter_mut().rev() {
            *slot = (idx % d) as u8;
            idx /= d;
        }
        out[0] = idx as u8;
        for i in 1..m {
            if out[i] >= out[i - 1] {
                out[i] += 1;
            }
        }
    }

    pub fn word(&self, idx: usize) -> KautzWord {
        let mut symbols = vec![0; self.params.word_len()];
        self.unrank_into(idx, &mut symbols);
        KautzWord {
            q: self.params.q() as u8,
            symbols,
        }
    }
}

/// All vertex words in lexicographic order.
pub fn enumerate_vertices(params: &GraphParams, cap: &EnumerationCap) -> Result<Vec<KautzWord>> {
    if params.word_len() < 2 {
        return Err(Error::Domain(
            "vertex enumeration needs word length ≥ 2".into(),
        ));
    }
    params.check_edges(cap)?;
    let space = WordSpace::new(*params);
    Ok((0..space.len()).map(|i| space.word(i)).collect())
}

/// Index-based adjacency of the word digraph, successors in ascending order.
#[derive(Clone, Debug)]
pub struct WordGraph {
    params: GraphParams,
    succ: Vec<u32>,
}

impl WordGraph {
    pub fn build(params: &GraphParams, cap: &EnumerationCap) -> Result<Self> {
        params.check_edges(cap)?;
        let space = WordSpace::new(*params);
        let d = params.d as usize;
        let q = params.q() as u8;
        let m = params.word_len();
        let mut succ = Vec::with_capacity(space.len() * d);
        let mut w = vec![0u8; m];
        let mut next = vec![0u8; m];
        for i in 0..space.len() {
            space.unrank_into(i, &mut w);
            next[..m - 1].copy_from_slice(&w[1..]);
            for y in (0..q).filter(|&y| y != w[m - 1]) {
                next[m - 1] = y;
                succ.push(space.rank(&next) as u32);
            }
        }
        Ok(WordGraph {
            params: *params,
            succ,
        })
    }

    pub fn params(&self) -> GraphParams {
        self.params
    }

    pub fn vertex_count(&self) -> usize {
        self.succ.len() / self.params.d as usize
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        let d = self.params.d as usize;
        &self.succ[v * d..(v + 1) * d]
    }
}
