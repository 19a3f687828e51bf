//! Deterministic synthetic corpora for tests, sweeps, and benchmarks.
//!
//! `topics_corpus` builds four vocabulary-disjoint topics (plus a shared
//! background pool) with 50 documents each, split 40 train / 10 test per
//! topic. `newsgroups_like` builds a harder four-group corpus in newsgroup
//! message shape: header lines, heavier vocabulary overlap, and cross-topic
//! leakage.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, CorpusError, Document, Split};

pub const TOPIC_NAMES: [&str; 4] = ["auto", "crypto", "space", "sport"];

const TOPIC_POOLS: [[&str; 12]; 4] = [
    [
        "engine", "clutch", "sedan", "brake", "torque", "gearbox", "exhaust", "chassis",
        "piston", "mileage", "dealer", "wheel",
    ],
    [
        "cipher", "keypair", "entropy", "hash", "padding", "protocol", "signature", "nonce",
        "decrypt", "plaintext", "escrow", "wiretap",
    ],
    [
        "orbit", "rocket", "lunar", "probe", "telescope", "payload", "thruster", "satellite",
        "astronaut", "launch", "gravity", "module",
    ],
    [
        "goalie", "puck", "playoff", "skate", "defenseman", "rink", "overtime", "roster",
        "penalti", "shutout", "faceoff", "slapshot",
    ],
];

/// Four specialist terms per topic, used only by a couple of training
/// documents and the hard test documents.
const RARE_POOLS: [[&str; 4]; 4] = [
    ["camshaft", "turbocharger", "alternator", "carburetor"],
    ["steganography", "keystream", "cryptanalysis", "blowfish"],
    ["perihelion", "aerobrake", "heliocentric", "spectrometer"],
    ["crosscheck", "benchwarmer", "netminder", "bodycheck"],
];

const BACKGROUND_POOL: [&str; 30] = [
    "people", "think", "year", "good", "point", "thing", "work", "look", "world", "week",
    "question", "reason", "problem", "right", "long", "part", "place", "case", "fact", "group",
    "number", "night", "home", "side", "kind", "head", "hand", "line", "word", "idea",
];

fn bag_to_text(rng: &mut ChaCha8Rng, counts: &[(&str, usize)]) -> String {
    let mut words = Vec::new();
    for &(w, c) in counts {
        for _ in 0..c {
            words.push(w);
        }
    }
    words.shuffle(rng);
    words.join(" ")
}

/// Per-topic word repetition inside a document. Giving every topic its own
/// frequency band keeps the topics separable by word statistics alone.
const TOPIC_BANDS: [usize; 4] = [2, 4, 8, 16];

/// Background word repetition per document, chosen so every document comes
/// out at roughly the same length regardless of its topic band.
fn background_count(topic: usize) -> usize {
    (680 - 12 * (TOPIC_BANDS[topic] + 1)).div_ceil(30)
}

/// Training documents cover every topic word at the topic's frequency band
/// over a uniform background carpet. Counts are exact so all words of one
/// topic share one corpus frequency and stay together in the Huffman tree.
fn train_doc(rng: &mut ChaCha8Rng, topic: usize) -> String {
    let band = TOPIC_BANDS[topic];
    let mut counts: Vec<(&str, usize)> = TOPIC_POOLS[topic]
        .iter()
        .map(|&w| (w, band))
        .collect();
    for &w in BACKGROUND_POOL.iter() {
        counts.push((w, background_count(topic)));
    }
    bag_to_text(rng, &counts)
}

/// Specialist training documents: heavy rare topic terms pitched into the
/// topic's own frequency band, plus light regular topical vocabulary.
fn specialist_doc(rng: &mut ChaCha8Rng, topic: usize) -> String {
    let mut counts: Vec<(&str, usize)> = RARE_POOLS[topic]
        .iter()
        .map(|&w| (w, 19 * TOPIC_BANDS[topic] + 1))
        .collect();
    for &w in TOPIC_POOLS[topic].iter() {
        counts.push((w, 1));
    }
    for &w in BACKGROUND_POOL.iter() {
        counts.push((w, background_count(topic)));
    }
    bag_to_text(rng, &counts)
}

/// Ordinary test documents: drawn from the same distribution as the
/// training documents.
fn test_doc(rng: &mut ChaCha8Rng, topic: usize) -> String {
    train_doc(rng, topic)
}

/// Hard test documents: no regular topic words at all — the label is only
/// reachable through the rare specialist terms.
fn hard_test_doc(rng: &mut ChaCha8Rng, topic: usize) -> String {
    let mut counts: Vec<(&str, usize)> = RARE_POOLS[topic]
        .iter()
        .map(|&w| (w, 3))
        .collect();
    for &w in BACKGROUND_POOL.iter() {
        counts.push((w, 2));
    }
    bag_to_text(rng, &counts)
}

/// Four vocabulary-disjoint topics, 50 documents each (40 train / 10 test),
/// mixed with shared background words. Each topic's training slice carries
/// two rare-term specialist documents, and each topic's test slice ends with
/// three hard documents reachable only through the rare terms.
pub fn topics_corpus(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    for (t, name) in TOPIC_NAMES.iter().enumerate() {
        for i in 0..50 {
            let (split, text) = match i {
                0..=1 => (Split::Train, specialist_doc(&mut rng, t)),
                2..=39 => (Split::Train, train_doc(&mut rng, t)),
                40..=46 => (Split::Test, test_doc(&mut rng, t)),
                _ => (Split::Test, hard_test_doc(&mut rng, t)),
            };
            docs.push(Document {
                id: format!("{name}/d{i:03}"),
                text,
                gold_label: Some(name.to_string()),
                split: Some(split),
            });
        }
    }
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    Corpus::new(docs)
}

pub const NEWSGROUP_NAMES: [&str; 4] = [
    "comp.graphics",
    "rec.sport.hockey",
    "sci.med",
    "talk.politics.guns",
];

const NEWSGROUP_POOLS: [[&str; 12]; 4] = [
    [
        "polygon", "render", "pixel", "shader", "raster", "texture", "viewport", "bitmap",
        "vertex", "opengl", "palette", "antialias",
    ],
    [
        "goalie", "puck", "playoff", "skate", "defenseman", "rink", "overtime", "roster",
        "penalti", "shutout", "faceoff", "slapshot",
    ],
    [
        "patient", "diagnosis", "symptom", "clinical", "dosage", "therapy", "infection",
        "syndrome", "vaccine", "chronic", "physician", "antibiotic",
    ],
    [
        "firearm", "amendment", "militia", "holster", "caliber", "legislation", "permit",
        "ammunition", "concealed", "rifle", "statute", "ban",
    ],
];

/// A harder, newsgroup-shaped corpus: message headers, a large shared
/// background share, and cross-topic leakage. 50 documents per group,
/// 40 train / 10 test.
pub fn newsgroups_like(seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    for (t, name) in NEWSGROUP_NAMES.iter().enumerate() {
        for i in 0..50 {
            let split = if i < 40 { Split::Train } else { Split::Test };
            let mut words = Vec::with_capacity(60);
            for _ in 0..60 {
                let roll: f64 = rng.gen();
                let word = if roll < 0.45 {
                    *NEWSGROUP_POOLS[t].choose(&mut rng).expect("non-empty")
                } else if roll < 0.55 {
                    let other = (t + rng.gen_range(1..4)) % 4;
                    *NEWSGROUP_POOLS[other].choose(&mut rng).expect("non-empty")
                } else {
                    *BACKGROUND_POOL.choose(&mut rng).expect("non-empty")
                };
                words.push(word);
            }
            let body = words.join(" ");
            let text = format!(
                "From: user{i:02}@example.com\nSubject: Re: {name} discussion {i}\nLines: 4\n\n{body}\n"
            );
            docs.push(Document {
                id: format!("{name}/{:05}", 10000 + i),
                text,
                gold_label: Some(name.to_string()),
                split: Some(split),
            });
        }
    }
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    Corpus::new(docs)
}

/// Writes a split-tagged corpus as `<root>/train/<id>` and
/// `<root>/test/<id>` trees, the predefined layout the loader expects.
pub fn write_predefined_tree(corpus: &Corpus, root: &Path) -> Result<(), CorpusError> {
    let mut tagged = corpus.clone();
    for doc in tagged.documents.iter_mut() {
        let sub = match doc.split {
            Some(Split::Test) => "test",
            _ => "train",
        };
        doc.id = format!("{sub}/{}", doc.id);
    }
    crate::corpus::write_tree(&tagged, root)
}
