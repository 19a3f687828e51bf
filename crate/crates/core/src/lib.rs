//! Topic detection toolkit built around Fuzzy ART clustering.
//!
//! The pipeline has three phases: lexical preprocessing (tokenization,
//! stopword filtering, Porter stemming), vector creation (top-n vocabulary
//! and TF-IDF scaled into `[0,1]`), and clustering. Training clusters the
//! document vectors with a Fuzzy ART network; the test phase assigns unseen
//! documents to clusters with a Paragraph Vector classifier. The [`eval`]
//! module scores predictions against gold labels and provides a cosine-kNN
//! baseline.

pub mod corpus;
pub mod eval;
pub mod fuzzyart;
pub mod pvec;
pub mod synthetic;
pub mod textprep;
pub mod vectorizer;

pub use corpus::{Corpus, Document, Split};
pub use fuzzyart::{Assignment, FuzzyArtModel, FuzzyArtParams, InputMode};
pub use pvec::{PvMode, PvModel, PvParams};
pub use textprep::TokenizedDoc;
pub use vectorizer::{DocVector, Vocabulary};
