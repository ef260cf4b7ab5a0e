use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};

/// Flattened training tokens: the read-only part of the sampler input.
///
/// Shared across chains; every chain owns its own [`SamplerState`].
#[derive(Debug, Clone)]
pub struct TokenLayout {
    pub(crate) words: Vec<u32>,
    /// `basket_start[p]..basket_start[p + 1]` are the tokens of basket `p`.
    pub(crate) basket_start: Vec<usize>,
    pub(crate) basket_store: Vec<usize>,
    pub(crate) n_stores: usize,
    pub(crate) vocab_size: usize,
}

impl TokenLayout {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::from_baskets(
            corpus
                .iter_split(Split::Train)
                .map(|t| (t.store, t.items.as_slice())),
            corpus.n_stores(),
            corpus.vocab_size(),
        )
    }

    pub fn from_baskets<'a, I>(baskets: I, n_stores: usize, vocab_size: usize) -> Self
    where
        I: IntoIterator<Item = (usize, &'a [u32])>,
    {
        let mut words = Vec::new();
        let mut basket_start = vec![0];
        let mut basket_store = Vec::new();
        for (store, items) in baskets {
            words.extend_from_slice(items);
            basket_start.push(words.len());
            basket_store.push(store);
        }
        Self {
            words,
            basket_start,
            basket_store,
            n_stores,
            vocab_size,
        }
    }

    pub fn n_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn n_baskets(&self) -> usize {
        self.basket_store.len()
    }

    pub fn n_stores(&self) -> usize {
        self.n_stores
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn basket(&self, p: usize) -> std::ops::Range<usize> {
        self.basket_start[p]..self.basket_start[p + 1]
    }

    pub fn basket_len(&self, p: usize) -> usize {
        self.basket_start[p + 1] - self.basket_start[p]
    }

    pub fn max_basket_len(&self) -> usize {
        (0..self.n_baskets())
            .map(|p| self.basket_len(p))
            .max()
            .unwrap_or(0)
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn basket_store(&self, p: usize) -> usize {
        self.basket_store[p]
    }

    /// Basket index of every token.
    pub(crate) fn token_baskets(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n_tokens());
        for p in 0..self.n_baskets() {
            out.extend(std::iter::repeat_n(p as u32, self.basket_len(p)));
        }
        out
    }
}

/// Topic assignments, table indicators and every count derived from them.
///
/// Count tables are flat row-major arrays: `basket_topic[p * K + k]` is the
/// number of tokens of basket `p` assigned to topic `k`, and so on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerState {
    pub(crate) k: usize,
    pub(crate) z: Vec<u32>,
    pub(crate) u: Vec<bool>,
    /// N_{k|p,d}
    pub(crate) basket_topic: Vec<u32>,
    /// t_{p,d,k}
    pub(crate) basket_tables: Vec<u32>,
    /// sum_k t_{p,d,k}
    pub(crate) basket_table_total: Vec<u32>,
    /// t_{d,k}
    pub(crate) store_tables: Vec<u32>,
    /// t_d
    pub(crate) store_table_total: Vec<u32>,
    /// N_{k,v}; left empty when topics are held fixed.
    pub(crate) topic_word: Vec<u32>,
    /// N_k
    pub(crate) topic_total: Vec<u32>,
    pub(crate) track_words: bool,
}

impl SamplerState {
    pub(crate) fn empty(layout: &TokenLayout, k: usize, track_words: bool) -> Self {
        let n = layout.n_tokens();
        let p = layout.n_baskets();
        let d = layout.n_stores();
        Self {
            k,
            z: vec![0; n],
            u: vec![false; n],
            basket_topic: vec![0; p * k],
            basket_tables: vec![0; p * k],
            basket_table_total: vec![0; p],
            store_tables: vec![0; d * k],
            store_table_total: vec![0; d],
            topic_word: if track_words {
                vec![0; k * layout.vocab_size()]
            } else {
                Vec::new()
            },
            topic_total: vec![0; k],
            track_words,
        }
    }

    pub fn n_topics(&self) -> usize {
        self.k
    }

    pub fn topics(&self) -> &[u32] {
        &self.z
    }

    pub fn indicators(&self) -> &[bool] {
        &self.u
    }

    pub fn basket_topic_count(&self, p: usize, k: usize) -> u32 {
        self.basket_topic[p * self.k + k]
    }

    pub fn basket_table_count(&self, p: usize, k: usize) -> u32 {
        self.basket_tables[p * self.k + k]
    }

    pub fn store_table_count(&self, d: usize, k: usize) -> u32 {
        self.store_tables[d * self.k + k]
    }

    pub fn topic_word_count(&self, k: usize, v: usize, vocab_size: usize) -> u32 {
        self.topic_word[k * vocab_size + v]
    }

    pub fn topic_total(&self, k: usize) -> u32 {
        self.topic_total[k]
    }

    /// Recomputes every count from `z` and `u` and checks it against the
    /// stored tables, together with the table constraint
    /// `N_{k|p,d} >= 1  =>  1 <= t_{p,d,k} <= N_{k|p,d}`.
    pub fn check_invariants(&self, layout: &TokenLayout) -> Result<()> {
        let k = self.k;
        let mut fresh = SamplerState::empty(layout, k, self.track_words);
        fresh.z.clone_from(&self.z);
        fresh.u.clone_from(&self.u);
        let v = layout.vocab_size();
        for p in 0..layout.n_baskets() {
            let d = layout.basket_store(p);
            for i in layout.basket(p) {
                let topic = self.z[i] as usize;
                if topic >= k {
                    return Err(Error::Invariant(format!("token {i} has topic {topic} >= K")));
                }
                fresh.basket_topic[p * k + topic] += 1;
                if self.u[i] {
                    fresh.basket_tables[p * k + topic] += 1;
                    fresh.basket_table_total[p] += 1;
                    fresh.store_tables[d * k + topic] += 1;
                    fresh.store_table_total[d] += 1;
                }
                if self.track_words {
                    fresh.topic_word[topic * v + layout.words[i] as usize] += 1;
                }
                fresh.topic_total[topic] += 1;
            }
            let size: u32 = (0..k).map(|t| self.basket_topic[p * k + t]).sum();
            if size as usize != layout.basket_len(p) {
                return Err(Error::Invariant(format!(
                    "basket {p}: topic counts sum to {size}, basket has {} tokens",
                    layout.basket_len(p)
                )));
            }
            for t in 0..k {
                let n = self.basket_topic[p * k + t];
                let tables = self.basket_tables[p * k + t];
                let ok = if n == 0 { tables == 0 } else { tables >= 1 && tables <= n };
                if !ok {
                    return Err(Error::Invariant(format!(
                        "basket {p}, topic {t}: {tables} tables for {n} customers"
                    )));
                }
            }
        }
        if fresh != *self {
            return Err(Error::Invariant("count tables disagree with z/u".into()));
        }
        Ok(())
    }
}
