//! Mixed-type tabular missing-value imputation.
//!
//! The pipeline has four stages:
//!
//! 1. [`preprocess`]: normalize missing tokens, type each column, label-encode
//!    categorical columns and produce a dense first fill.
//! 2. [`factorize`]: optionally refine that fill with a low-rank
//!    reconstruction (NMF for non-negative data, truncated SVD otherwise).
//! 3. [`boost`]: per incomplete column, train an ensemble of gradient-boosted
//!    tree models on the other columns and predict the gaps.
//! 4. [`engine`]: repeat the column sweep for a configurable number of
//!    passes, each pass seeing the previous predictions.
//!
//! [`bench`] adds masking, scoring and baseline imputers for evaluating the
//! engine on complete data.

pub mod bench;
pub mod boost;
pub mod csvio;
pub mod engine;
pub mod error;
pub mod factorize;
pub mod knn;
pub mod labels;
pub mod preprocess;
pub mod profile;
pub mod table;

pub use csvio::{parse_csv, read_csv, to_csv_string, write_csv, write_csv_file};
pub use engine::{xpute, ImputeConfig, RunReport};
pub use error::{Error, Result};
pub use labels::{decode_labels, encode_labels, LabelMap};
pub use preprocess::{preprocessing_df, PreImputeStrategy, PreprocessedTriple};
pub use profile::{profile_column, ColumnKind, ColumnProfile};
pub use table::{Cell, Table};
