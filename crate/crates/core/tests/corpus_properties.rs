use proptest::prelude::*;

use termflow::corpus::{ingest, tokenize, BinScheme, CorpusIndex, DocumentRecord, IndexBuilder, TermQuery};

const WORDS: &[&str] = &["chaos", "theory", "attention", "deficit", "order", "model", "the", "of", "add"];
const DISCIPLINES: &[&str] = &["math", "physics", "education"];

fn arb_doc() -> impl Strategy<Value = (usize, i32, Vec<usize>, Vec<usize>)> {
    (
        0..DISCIPLINES.len(),
        1974..1996i32,
        prop::collection::vec(0..WORDS.len(), 0..6),
        prop::collection::vec(0..WORDS.len(), 0..12),
    )
}

fn records(raw: &[(usize, i32, Vec<usize>, Vec<usize>)]) -> Vec<DocumentRecord> {
    raw.iter()
        .enumerate()
        .map(|(i, (d, year, title, body))| DocumentRecord {
            id: format!("doc{i}"),
            discipline: DISCIPLINES[*d].to_string(),
            year: *year,
            title: title.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" "),
            abstract_text: body.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" "),
        })
        .collect()
}

fn index(docs: &[DocumentRecord]) -> CorpusIndex {
    ingest(docs.iter().cloned().map(Ok), BinScheme::default()).unwrap()
}

fn builder(docs: &[DocumentRecord]) -> IndexBuilder {
    let mut b = IndexBuilder::new();
    for doc in docs {
        b.add(doc.clone()).unwrap();
    }
    b
}

/// Every single-token count in every cell.
fn all_counts(index: &CorpusIndex) -> Vec<(String, String, i32, u32)> {
    let mut out = Vec::new();
    for term in index.vocabulary() {
        for d in index.disciplines() {
            for bin in index.bins() {
                let n = index.term_cell_count(term, d, bin.start_year).unwrap();
                out.push((term.clone(), d.clone(), bin.start_year, n));
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn repeating_tokens_inside_a_document_changes_no_count(
        raw in prop::collection::vec(arb_doc(), 1..40),
        repeats in 1usize..4,
    ) {
        let docs = records(&raw);
        let repeated: Vec<DocumentRecord> = docs
            .iter()
            .map(|d| DocumentRecord {
                abstract_text: vec![d.abstract_text.as_str(); repeats + 1].join(" "),
                title: format!("{} {}", d.title, d.title),
                ..d.clone()
            })
            .collect();
        let (a, b) = (index(&docs), index(&repeated));
        prop_assert_eq!(all_counts(&a), all_counts(&b));
        for term in a.vocabulary() {
            let q = TermQuery::single(term).unwrap();
            for d in a.disciplines() {
                prop_assert_eq!(a.match_counts(&q, d).unwrap(), b.match_counts(&q, d).unwrap());
            }
        }
    }

    #[test]
    fn partition_order_does_not_matter(
        raw in prop::collection::vec(arb_doc(), 0..40),
        cut_a in 0usize..40,
        cut_b in 0usize..40,
    ) {
        let docs = records(&raw);
        let (lo, hi) = (cut_a.min(cut_b).min(docs.len()), cut_a.max(cut_b).min(docs.len()));
        let (p, q, r) = (&docs[..lo], &docs[lo..hi], &docs[hi..]);
        let scheme = BinScheme::default();
        let left = builder(p).merge(builder(q)).unwrap().merge(builder(r)).unwrap().build(scheme).unwrap();
        let right = builder(p).merge(builder(q).merge(builder(r)).unwrap()).unwrap().build(scheme).unwrap();
        let shuffled = builder(r).merge(builder(p)).unwrap().merge(builder(q)).unwrap().build(scheme).unwrap();
        let single = index(&docs);
        prop_assert_eq!(&left, &single);
        prop_assert_eq!(&right, &single);
        prop_assert_eq!(&shuffled, &single);
    }

    #[test]
    fn matches_never_exceed_documents(
        raw in prop::collection::vec(arb_doc(), 1..40),
        term in prop::collection::vec(0..WORDS.len(), 1..3),
        coterms in prop::collection::vec(0..WORDS.len(), 0..2),
    ) {
        let idx = index(&records(&raw));
        let phrase = term.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ");
        let co: Vec<&str> = coterms.iter().map(|&w| WORDS[w]).collect();
        let q = TermQuery::new(&phrase, &co).unwrap();
        for d in idx.disciplines() {
            for bin in idx.bins() {
                let n = idx.count_matches(&q, d, bin.start_year).unwrap();
                prop_assert!(n <= idx.doc_count(d, bin.start_year).unwrap());
            }
        }
    }

    #[test]
    fn every_document_lands_in_exactly_one_bin(
        raw in prop::collection::vec(arb_doc(), 1..60),
        width in 1u32..6,
        anchor in proptest::option::of(1900i32..2000),
    ) {
        let docs = records(&raw);
        let mut scheme = BinScheme::new(width).unwrap();
        if let Some(a) = anchor {
            scheme = scheme.with_anchor(a);
        }
        let idx = ingest(docs.iter().cloned().map(Ok), scheme).unwrap();
        prop_assert_eq!(idx.total_documents(), docs.len());
        for (i, d) in idx.disciplines().iter().enumerate() {
            let expected = docs.iter().filter(|doc| &doc.discipline == d).count() as u64;
            prop_assert_eq!(idx.discipline_size(i), expected);
            for doc in docs.iter().filter(|doc| &doc.discipline == d) {
                let holders: Vec<i32> = idx
                    .bins()
                    .iter()
                    .filter(|b| idx.cell_document_ids(d, b.start_year).unwrap().contains(&doc.id.as_str()))
                    .map(|b| b.start_year)
                    .collect();
                prop_assert_eq!(holders.len(), 1);
                prop_assert!(idx.bins().iter().any(|b| b.start_year == holders[0] && b.contains(doc.year)));
            }
        }
    }

    #[test]
    fn tokens_are_lowercase_alphanumeric(text in "\\PC{0,60}") {
        for token in tokenize(&text) {
            prop_assert!(token.chars().all(char::is_alphanumeric));
            prop_assert_eq!(token.to_lowercase(), token.clone());
            prop_assert!(token.chars().count() >= 2 || token.chars().any(|c| c.is_numeric()));
        }
    }
}
