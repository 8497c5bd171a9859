"""Spam/ham classification for single tweets from tweet-inherent features.

The pipeline: load a labeled JSONL corpus, extract user/content/sentiment
feature blocks and n-gram vectors, fit one of five classifiers, and
evaluate with stratified cross validation. Everything is seeded and
byte-reproducible.
"""

__version__ = "0.1.0"

from .classify import (
    ClassifierSpec,
    Prediction,
    TrainedModel,
    load_model,
    make_spec,
    predict,
    predict_records,
    save_model,
    train_model,
)
from .corpus import (
    FoldPlan,
    LabeledCorpus,
    TweetRecord,
    UserMetadata,
    load_corpus,
    sample_one_per_user,
    stratified_kfold,
)
from .errors import (
    ChecksumError,
    ConfigError,
    CorpusError,
    FeatureError,
    ModelFormatError,
    ResourceError,
    TweetSpamError,
    VersionError,
)
from .evaluate import (
    ConfusionMatrix,
    EvalReport,
    GridResult,
    Metrics,
    bench_features,
    confusion,
    cross_validate,
    grid_search,
    prf1,
)
from .features import (
    FeatureConfig,
    FeatureMask,
    FeatureVector,
    FittedPipeline,
    ResourceBundle,
    Scaler,
    Vocabulary,
    apply_scaler,
    assemble,
    build_vocabulary,
    chi2_select,
    content_features,
    fit_pipeline,
    fit_scaler,
    ngram_vectorize,
    parse_feature_config,
    sentiment_features,
    user_features,
)
from .text import (
    NormalizedText,
    TagSeq,
    Token,
    pos_tag,
    preprocess,
    strip_for_sentiment,
    tokenize,
)
