//! Kneser-Ney smoothed n-gram grammar models.

mod io;
mod model;
mod vocab;

pub use io::{
    deserialize_model, dump_model, load_model, save_model, serialize_model, FORMAT_VERSION, MAGIC,
};
pub use model::{DiscountSchedule, DiscountSetting, ExtStats, GrammarModel, MAX_ORDER};
pub use vocab::{TokenId, Vocabulary, BOS_SURFACE, EOS_SURFACE, UNK_SURFACE};
