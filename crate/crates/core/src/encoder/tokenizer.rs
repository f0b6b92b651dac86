//! Byte-level BPE tokenizer trained on the (preprocessed) training corpus.
//!
//! Ids 0..3 are reserved for PAD, CLS and UNK. Then come the single bytes
//! seen in the corpus, in byte order, then merged pieces in merge order.
//! Merges never cross whitespace, and a byte outside the learned alphabet
//! encodes to UNK.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::EncoderError;

pub const PAD_ID: u32 = 0;
pub const CLS_ID: u32 = 1;
pub const UNK_ID: u32 = 2;
const N_SPECIAL: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInput {
    pub ids: Vec<u32>,
    pub mask: Vec<u8>,
}

impl EncodedInput {
    /// Number of real (unpadded) positions.
    pub fn real_len(&self) -> usize {
        self.mask.iter().filter(|m| **m == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubwordTokenizer {
    /// Byte content of each non-special piece; index = id - N_SPECIAL.
    pieces: Vec<Vec<u8>>,
    merges: Vec<(u32, u32)>,
    lookup: HashMap<Vec<u8>, u32>,
    merge_rank: HashMap<(u32, u32), (usize, u32)>,
}

impl SubwordTokenizer {
    pub fn train<S: AsRef<str>>(corpus: &[S], vocab_size: usize) -> Result<Self, EncoderError> {
        if corpus.is_empty() {
            return Err(EncoderError::EmptyCorpus);
        }
        if vocab_size < N_SPECIAL + 1 {
            return Err(EncoderError::InvalidConfig(format!(
                "vocab_size must be >= {}, got {vocab_size}",
                N_SPECIAL + 1
            )));
        }

        let mut word_freq: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in corpus {
            for w in doc.as_ref().split_whitespace() {
                *word_freq.entry(w).or_default() += 1;
            }
        }

        let mut byte_freq = [0usize; 256];
        for (w, f) in &word_freq {
            for b in w.bytes() {
                byte_freq[b as usize] += f;
            }
        }
        let mut alphabet: Vec<u8> = (0..=255u8).filter(|b| byte_freq[*b as usize] > 0).collect();
        let room = vocab_size - N_SPECIAL;
        if alphabet.len() > room {
            alphabet.sort_by(|a, b| byte_freq[*b as usize].cmp(&byte_freq[*a as usize]).then(a.cmp(b)));
            alphabet.truncate(room);
            alphabet.sort_unstable();
        }

        let mut tok = Self::from_parts(alphabet.iter().map(|b| vec![*b]).collect(), Vec::new())?;
        let mut words: Vec<(Vec<u32>, usize)> = word_freq
            .iter()
            .map(|(w, f)| (tok.byte_ids(w.as_bytes()), *f))
            .collect();

        while tok.vocab_len() < vocab_size {
            let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
            for (ids, f) in &words {
                for pair in ids.windows(2) {
                    if pair[0] != UNK_ID && pair[1] != UNK_ID {
                        *counts.entry((pair[0], pair[1])).or_default() += f;
                    }
                }
            }
            let Some(best) = counts
                .iter()
                .max_by(|(pa, ca), (pb, cb)| {
                    ca.cmp(cb).then_with(|| {
                        // Smaller (left, right) byte pair wins a tie.
                        let ka = (tok.piece(pa.0), tok.piece(pa.1));
                        let kb = (tok.piece(pb.0), tok.piece(pb.1));
                        kb.cmp(&ka)
                    })
                })
                .map(|(p, _)| *p)
            else {
                break;
            };
            let merged_id = tok.add_merge(best);
            for (ids, _) in &mut words {
                apply_merge(ids, best, merged_id);
            }
        }
        Ok(tok)
    }

    fn from_parts(pieces: Vec<Vec<u8>>, merges: Vec<(u32, u32)>) -> Result<Self, EncoderError> {
        let mut tok = Self {
            pieces: Vec::with_capacity(pieces.len()),
            merges: Vec::with_capacity(merges.len()),
            lookup: HashMap::new(),
            merge_rank: HashMap::new(),
        };
        for p in pieces {
            if p.is_empty() || tok.lookup.contains_key(&p) {
                return Err(EncoderError::Inconsistent("empty or duplicate piece".into()));
            }
            let id = (N_SPECIAL + tok.pieces.len()) as u32;
            tok.lookup.insert(p.clone(), id);
            tok.pieces.push(p);
        }
        for (a, b) in merges {
            if a < N_SPECIAL as u32
                || b < N_SPECIAL as u32
                || a as usize >= tok.vocab_len()
                || b as usize >= tok.vocab_len()
            {
                return Err(EncoderError::Inconsistent(format!(
                    "merge ({a}, {b}) references an unknown piece"
                )));
            }
            let joined = [tok.piece(a), tok.piece(b)].concat();
            let id = *tok
                .lookup
                .get(&joined)
                .ok_or_else(|| EncoderError::Inconsistent(format!("merge ({a}, {b}) has no result piece")))?;
            let rank = tok.merges.len();
            if tok.merge_rank.insert((a, b), (rank, id)).is_some() {
                return Err(EncoderError::Inconsistent(format!("duplicate merge ({a}, {b})")));
            }
            tok.merges.push((a, b));
        }
        Ok(tok)
    }

    fn add_merge(&mut self, pair: (u32, u32)) -> u32 {
        let joined = [self.piece(pair.0), self.piece(pair.1)].concat();
        let id = match self.lookup.get(&joined) {
            Some(id) => *id,
            None => {
                let id = self.vocab_len() as u32;
                self.lookup.insert(joined.clone(), id);
                self.pieces.push(joined);
                id
            }
        };
        self.merge_rank.insert(pair, (self.merges.len(), id));
        self.merges.push(pair);
        id
    }

    /// Total number of ids, specials included.
    pub fn vocab_len(&self) -> usize {
        N_SPECIAL + self.pieces.len()
    }

    /// Byte content of a piece; specials have none.
    pub fn piece(&self, id: u32) -> &[u8] {
        let id = id as usize;
        if id < N_SPECIAL {
            &[]
        } else {
            &self.pieces[id - N_SPECIAL]
        }
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    fn byte_ids(&self, word: &[u8]) -> Vec<u32> {
        word.iter()
            .map(|b| self.lookup.get(std::slice::from_ref(b)).copied().unwrap_or(UNK_ID))
            .collect()
    }

    /// Piece ids of `text` without specials or padding.
    pub fn tokenize(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::new();
        for w in text.split_whitespace() {
            let mut ids = self.byte_ids(w.as_bytes());
            loop {
                let best = ids
                    .windows(2)
                    .filter_map(|p| self.merge_rank.get(&(p[0], p[1])).map(|r| ((p[0], p[1]), *r)))
                    .min_by_key(|(_, (rank, _))| *rank);
                match best {
                    Some((pair, (_, merged))) => apply_merge(&mut ids, pair, merged),
                    None => break,
                }
            }
            out.extend(ids);
        }
        out
    }

    /// `[CLS] + pieces`, truncated and right-padded to exactly `max_length`.
    pub fn encode(&self, text: &str, max_length: usize) -> EncodedInput {
        let mut ids = Vec::with_capacity(max_length);
        ids.push(CLS_ID);
        ids.extend(self.tokenize(text));
        ids.truncate(max_length);
        let real = ids.len();
        ids.resize(max_length, PAD_ID);
        let mut mask = vec![1u8; real];
        mask.resize(max_length, 0);
        EncodedInput { ids, mask }
    }
}

fn apply_merge(ids: &mut Vec<u32>, pair: (u32, u32), merged: u32) {
    let mut out = Vec::with_capacity(ids.len());
    let mut i = 0;
    while i < ids.len() {
        if i + 1 < ids.len() && ids[i] == pair.0 && ids[i + 1] == pair.1 {
            out.push(merged);
            i += 2;
        } else {
            out.push(ids[i]);
            i += 1;
        }
    }
    *ids = out;
}

/// Serialized piece inventory: non-special pieces as hex bytes in id
/// order, then merges in rank order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizerRecord {
    pub pieces_hex: Vec<String>,
    pub merges: Vec<[u32; 2]>,
}

impl From<&SubwordTokenizer> for TokenizerRecord {
    fn from(t: &SubwordTokenizer) -> Self {
        Self {
            pieces_hex: t.pieces.iter().map(hex::encode).collect(),
            merges: t.merges.iter().map(|(a, b)| [*a, *b]).collect(),
        }
    }
}

impl TryFrom<TokenizerRecord> for SubwordTokenizer {
    type Error = EncoderError;

    fn try_from(r: TokenizerRecord) -> Result<Self, Self::Error> {
        let pieces = r
            .pieces_hex
            .iter()
            .map(|h| hex::decode(h).map_err(|e| EncoderError::Inconsistent(format!("bad piece {h:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        SubwordTokenizer::from_parts(pieces, r.merges.into_iter().map(|[a, b]| (a, b)).collect())
    }
}
