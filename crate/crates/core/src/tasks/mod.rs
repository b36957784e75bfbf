//! Downstream experiments: sentiment classification, document retrieval and
//! topic sentiment tagging.

mod classify;
mod mlp;
mod retrieval;
mod topics;

pub use classify::{
    accuracy, classification_csv, classify_sentiment, count_baseline, Classification, ClassificationRow,
    CountBaseline,
};
pub use mlp::{mlp_finetune, Mlp, MlpComparison, MlpConfig, MlpRun};
pub use retrieval::{
    cosine, hidden_representation, pr_curve, pr_curve_from_representations, rank_by_similarity, retrieve,
    PrCurve,
};
pub use topics::{
    assign_tags, check_agreement, rank_topics, topic_masses, topic_sentiment_report, TopicRow,
    TopicSentimentReport,
};
