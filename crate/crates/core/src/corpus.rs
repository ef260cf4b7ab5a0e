//! Store-segmented transaction data: ingest, vocabulary, train/test split.
//!
//! A [`Corpus`] groups baskets (transactions) under the store they were
//! recorded at. Products are mapped onto a dense vocabulary of the `top_v`
//! most frequent products, counting each product at most once per basket.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

pub const DEFAULT_MIN_BASKET: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("vocabulary must not be empty".into()));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate product id {t:?}")));
            }
        }
        Ok(Self { terms, index })
    }

    /// Vocabulary of `v` synthetic product ids `p0..p{v-1}`.
    pub fn synthetic(v: usize) -> Result<Self> {
        Self::new((0..v).map(|i| format!("p{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, idx: u32) -> &str {
        &self.terms[idx as usize]
    }

    pub fn get(&self, product: &str) -> Option<u32> {
        self.index.get(product).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub store: usize,
    pub items: Vec<u32>,
    pub split: Split,
}

impl Transaction {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Baskets grouped by store, over a fixed vocabulary.
///
/// Transactions are stored sorted by store index so that each store owns a
/// contiguous range.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    vocabulary: Vocabulary,
    store_ids: Vec<String>,
    transactions: Vec<Transaction>,
    min_basket: usize,
}

/// One line of the input transaction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub store_id: String,
    pub products: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub top_v: usize,
    pub min_basket: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            top_v: 10_000,
            min_basket: DEFAULT_MIN_BASKET,
        }
    }
}

impl Corpus {
    /// Assembles a corpus from already-encoded transactions.
    ///
    /// Duplicate items within a basket are allowed here (the simulator keeps
    /// them); only [`ingest`] deduplicates.
    pub fn from_parts(
        vocabulary: Vocabulary,
        store_ids: Vec<String>,
        mut transactions: Vec<Transaction>,
        min_basket: usize,
    ) -> Result<Self> {
        if transactions.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let v = vocabulary.len() as u32;
        let d = store_ids.len();
        let mut has_train = vec![false; d];
        for (i, t) in transactions.iter().enumerate() {
            if t.store >= d {
                return Err(Error::InvalidArgument(format!(
                    "transaction {i}: store index {} out of range ({d} stores)",
                    t.store
                )));
            }
            if let Some(&bad) = t.items.iter().find(|&&w| w >= v) {
                return Err(Error::InvalidArgument(format!(
                    "transaction {i}: item {bad} outside vocabulary of size {v}"
                )));
            }
            if t.items.is_empty() {
                return Err(Error::InvalidArgument(format!("transaction {i} is empty")));
            }
            if t.split == Split::Train {
                has_train[t.store] = true;
            }
        }
        if let Some(s) = has_train.iter().position(|&h| !h) {
            return Err(Error::InvalidArgument(format!(
                "store {:?} has no training transaction",
                store_ids[s]
            )));
        }
        // stable: keeps file order within a store
        transactions.sort_by_key(|t| t.store);
        Ok(Self {
            vocabulary,
            store_ids,
            transactions,
            min_basket,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn n_stores(&self) -> usize {
        self.store_ids.len()
    }

    pub fn store_ids(&self) -> &[String] {
        &self.store_ids
    }

    pub fn store_index(&self, id: &str) -> Option<usize> {
        self.store_ids.iter().position(|s| s == id)
    }

    pub fn min_basket(&self) -> usize {
        self.min_basket
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn iter_split(&self, split: Split) -> impl Iterator<Item = &Transaction> + '_ {
        self.transactions.iter().filter(move |t| t.split == split)
    }

    pub fn n_tokens(&self, split: Split) -> usize {
        self.iter_split(split).map(Transaction::len).sum()
    }

    pub fn transactions_per_store(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_stores()];
        for t in &self.transactions {
            counts[t.store] += 1;
        }
        counts
    }

    /// Decodes the corpus back into raw records, grouped by store.
    pub fn to_records(&self) -> Vec<Record> {
        self.transactions
            .iter()
            .map(|t| Record {
                store_id: self.store_ids[t.store].clone(),
                products: t
                    .items
                    .iter()
                    .map(|&w| self.vocabulary.term(w).to_string())
                    .collect(),
            })
            .collect()
    }

    pub fn write_records<W: Write>(&self, mut out: W) -> Result<()> {
        for r in self.to_records() {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), &CorpusFile::from(self))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let raw: CorpusFile = serde_json::from_reader(BufReader::new(file))?;
        raw.try_into()
    }
}

/// On-disk representation of a corpus.
#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusFile {
    pub vocabulary: Vec<String>,
    pub stores: Vec<String>,
    pub min_basket: usize,
    pub transactions: Vec<Transaction>,
}

impl From<&Corpus> for CorpusFile {
    fn from(c: &Corpus) -> Self {
        Self {
            vocabulary: c.vocabulary.terms.clone(),
            stores: c.store_ids.clone(),
            min_basket: c.min_basket,
            transactions: c.transactions.clone(),
        }
    }
}

impl TryFrom<CorpusFile> for Corpus {
    type Error = Error;

    fn try_from(f: CorpusFile) -> Result<Self> {
        Corpus::from_parts(
            Vocabulary::new(f.vocabulary)?,
            f.stores,
            f.transactions,
            f.min_basket,
        )
    }
}

/// Parses line-delimited JSON records. Blank lines are skipped.
pub fn read_records<R: Read>(input: R) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            msg: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Builds a corpus from raw records.
///
/// The vocabulary is the `top_v` products appearing in the most baskets,
/// ties broken by product id. Baskets are restricted to that vocabulary,
/// deduplicated, and dropped when fewer than `min_basket` items survive.
/// Products left in no retained basket are then removed, and indices are
/// assigned by frequency over the retained baskets.
/// Stores are re-indexed densely in lexicographic order of their ids.
pub fn ingest_records(records: &[Record], opts: IngestOptions) -> Result<Corpus> {
    if opts.top_v == 0 {
        return Err(Error::InvalidArgument("top_v must be at least 1".into()));
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for r in records {
        let mut seen: Vec<&str> = r.products.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for p in seen {
            *freq.entry(p).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(opts.top_v);
    if ranked.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let selected = Vocabulary::new(ranked.iter().map(|(p, _)| p.to_string()).collect())?;

    let mut kept: Vec<(&str, Vec<u32>)> = Vec::new();
    for r in records {
        let mut items: Vec<u32> = r.products.iter().filter_map(|p| selected.get(p)).collect();
        items.sort_unstable();
        items.dedup();
        if items.len() >= opts.min_basket && !items.is_empty() {
            kept.push((r.store_id.as_str(), items));
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    // Index order follows frequency over the retained baskets, so that
    // re-ingesting the serialized corpus reproduces the same indices.
    let mut retained = vec![0usize; selected.len()];
    for (_, items) in &kept {
        for &i in items {
            retained[i as usize] += 1;
        }
    }
    let mut order: Vec<u32> = (0..selected.len() as u32).filter(|&i| retained[i as usize] > 0).collect();
    order.sort_by(|&a, &b| {
        retained[b as usize]
            .cmp(&retained[a as usize])
            .then_with(|| selected.term(a).cmp(selected.term(b)))
    });
    let mut remap = vec![u32::MAX; selected.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old as usize] = new as u32;
    }
    let vocabulary = Vocabulary::new(order.iter().map(|&i| selected.term(i).to_string()).collect())?;
    for (_, items) in kept.iter_mut() {
        for i in items.iter_mut() {
            *i = remap[*i as usize];
        }
        items.sort_unstable();
    }
    let stores: BTreeMap<&str, usize> = kept
        .iter()
        .map(|(s, _)| (*s, 0))
        .collect::<BTreeMap<_, _>>()
        .into_keys()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let store_ids = stores.keys().map(|s| s.to_string()).collect();
    let transactions = kept
        .into_iter()
        .map(|(s, items)| Transaction {
            store: stores[s],
            items,
            split: Split::Train,
        })
        .collect();
    Corpus::from_parts(vocabulary, store_ids, transactions, opts.min_basket)
}

pub fn ingest<R: Read>(input: R, opts: IngestOptions) -> Result<Corpus> {
    ingest_records(&read_records(input)?, opts)
}

pub fn ingest_path(path: &Path, opts: IngestOptions) -> Result<Corpus> {
    ingest(std::fs::File::open(path)?, opts)
}

/// Tags a stratified random fraction of each store's baskets as test data.
///
/// Each store gets `round(n * test_fraction)` test baskets, capped so that at
/// least one basket stays in training. Previous tags are discarded.
pub fn split(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<Corpus> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = seeded(seed);
    let mut out = corpus.clone();
    let mut start = 0;
    let txs = &mut out.transactions;
    while start < txs.len() {
        let store = txs[start].store;
        let end = start + txs[start..].iter().take_while(|t| t.store == store).count();
        let m = end - start;
        let n_test = ((m as f64 * test_fraction).round() as usize).min(m - 1);
        for t in &mut txs[start..end] {
            t.split = Split::Train;
        }
        for i in sample(&mut rng, m, n_test) {
            txs[start + i].split = Split::Test;
        }
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(store: &str, products: &[&str]) -> Record {
        Record {
            store_id: store.into(),
            products: products.iter().map(|p| p.to_string()).collect(),
        }
    }

    #[test]
    fn filter_rules_hand_trace() {
        let recs = vec![
            rec("s", &["A", "B", "C"]),
            rec("s", &["A", "B"]),
            rec("s", &["A", "B", "C", "D"]),
        ];
        let c = ingest_records(
            &recs,
            IngestOptions {
                top_v: 3,
                min_basket: 3,
            },
        )
        .unwrap();
        assert_eq!(c.vocabulary().terms(), &["A", "B", "C"]);
        assert_eq!(c.transactions().len(), 2);
        for t in c.transactions() {
            assert_eq!(t.items, vec![0, 1, 2]);
        }
    }

    #[test]
    fn duplicates_collapse() {
        let c = ingest_records(&[rec("s", &["A", "A", "B", "C"])], IngestOptions::default()).unwrap();
        assert_eq!(c.transactions()[0].items.len(), 3);
    }

    #[test]
    fn empty_input_is_an_error() {
        let err = ingest("".as_bytes(), IngestOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "empty corpus");
    }

    #[test]
    fn all_baskets_too_small() {
        let err = ingest_records(&[rec("s", &["A", "B"])], IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus));
    }

    #[test]
    fn malformed_line_reports_number() {
        let input = "{\"store_id\":\"a\",\"products\":[\"x\",\"y\",\"z\"]}\n\n{\"store_id\": 3}\n";
        match ingest(input.as_bytes(), IngestOptions::default()) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn frequency_ties_break_lexicographically() {
        let recs = vec![rec("s", &["Z", "M", "A", "B"]), rec("t", &["B", "A", "M", "Z"])];
        let c = ingest_records(
            &recs,
            IngestOptions {
                top_v: 3,
                min_basket: 3,
            },
        )
        .unwrap();
        assert_eq!(c.vocabulary().terms(), &["A", "B", "M"]);
        assert_eq!(c.store_ids(), &["s", "t"]);
    }

    #[test]
    fn stores_reindexed_densely() {
        let recs = vec![
            rec("zeta", &["A", "B", "C"]),
            rec("gone", &["A", "Q"]),
            rec("alpha", &["A", "B", "C"]),
        ];
        let c = ingest_records(&recs, IngestOptions::default()).unwrap();
        assert_eq!(c.store_ids(), &["alpha", "zeta"]);
        assert_eq!(c.transactions_per_store(), vec![1, 1]);
    }

    fn hundred_baskets() -> Corpus {
        let recs: Vec<Record> = (0..100).map(|_| rec("s", &["A", "B", "C"])).collect();
        ingest_records(&recs, IngestOptions::default()).unwrap()
    }

    #[test]
    fn split_is_deterministic_and_sized() {
        let c = hundred_baskets();
        let a = split(&c, 0.1, 7).unwrap();
        let b = split(&c, 0.1, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter_split(Split::Test).count(), 10);
        let other = split(&c, 0.1, 8).unwrap();
        assert_eq!(other.iter_split(Split::Test).count(), 10);
    }

    #[test]
    fn split_keeps_singleton_store_in_train() {
        let recs = vec![rec("one", &["A", "B", "C"]), rec("two", &["A", "B", "C"]), rec("two", &["A", "B", "C"])];
        let c = ingest_records(&recs, IngestOptions::default()).unwrap();
        let s = split(&c, 0.9, 1).unwrap();
        let one = s.transactions().iter().find(|t| t.store == 0).unwrap();
        assert_eq!(one.split, Split::Train);
        assert_eq!(s.iter_split(Split::Test).count(), 1);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let c = hundred_baskets();
        assert!(split(&c, 0.0, 1).is_err());
        assert!(split(&c, 1.0, 1).is_err());
    }

    #[test]
    fn corpus_file_roundtrip() {
        let c = split(&hundred_baskets(), 0.2, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        c.save(&path).unwrap();
        assert_eq!(Corpus::load(&path).unwrap(), c);
    }
}
