"""Self-contained probabilistic text classifier.

A multinomial bag-of-words model with additive smoothing. It exists so
the whole pipeline runs end to end without any external model: it emits
the same (p_real, p_fake) prediction vectors that externally supplied
per-model prediction files carry, and the ensemble does not care which
source they came from. All arithmetic is in log space.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import Dataset, Label, LABELS
from .errors import BadRecord, DegenerateTraining
from .fileio import atomic_write_text
from .preprocess import CleanPolicy, clean_text

_TOKEN_RE = re.compile(r"\w+")

DEFAULT_MODEL_NAME = "baseline-bow"


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; punctuation and whitespace delimit."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class PredictionVector:
    """One model's class probabilities for one item."""

    item_id: int
    p_real: float
    p_fake: float
    model_name: str


@dataclass
class BowModel:
    """Trained bag-of-words model. Counts are the persistent state; the
    log priors and per-class token log likelihoods are derived on
    construction."""

    vocabulary: dict[str, int]
    class_doc_counts: dict[Label, int]
    token_counts: dict[Label, dict[str, int]]
    smoothing_alpha: float
    clean_policy: CleanPolicy = field(default_factory=CleanPolicy)
    model_name: str = DEFAULT_MODEL_NAME
    class_log_priors: dict[Label, float] = field(init=False, repr=False)
    token_log_likelihoods: dict[Label, dict[str, float]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        total_docs = sum(self.class_doc_counts.values())
        if total_docs == 0 or any(self.class_doc_counts.get(c, 0) == 0 for c in LABELS):
            raise DegenerateTraining("both classes must be present in the training data")
        if self.smoothing_alpha <= 0:
            raise ValueError("smoothing_alpha must be positive")
        self.class_log_priors = {
            c: math.log(self.class_doc_counts[c] / total_docs) for c in LABELS
        }
        vocab_size = len(self.vocabulary)
        self.token_log_likelihoods = {}
        for c in LABELS:
            counts = self.token_counts.get(c, {})
            denominator = sum(counts.values()) + self.smoothing_alpha * vocab_size
            self.token_log_likelihoods[c] = {
                token: math.log((counts.get(token, 0) + self.smoothing_alpha) / denominator)
                for token in self.vocabulary
            }


def train(
    dataset: Dataset,
    policy: CleanPolicy | None = None,
    alpha: float = 1.0,
    model_name: str = DEFAULT_MODEL_NAME,
) -> BowModel:
    """Fit the model on a labeled dataset.

    Text is cleaned per the policy first (attribute noise never enters
    the vocabulary under the default policy), then tokenized. Counting
    is order-independent, so training is deterministic regardless of
    dataset order. Raises DegenerateTraining unless both classes occur.
    """
    if policy is None:
        policy = CleanPolicy()
    class_doc_counts: dict[Label, int] = {c: 0 for c in LABELS}
    token_counts: dict[Label, dict[str, int]] = {c: {} for c in LABELS}
    for item in dataset:
        if item.label is None:
            raise DegenerateTraining(f"item {item.id} is unlabeled")
        class_doc_counts[item.label] += 1
        bucket = token_counts[item.label]
        for token in tokenize(clean_text(item.text, policy)):
            bucket[token] = bucket.get(token, 0) + 1
    vocabulary = {
        token: index
        for index, token in enumerate(
            sorted(set(token_counts[Label.REAL]) | set(token_counts[Label.FAKE]))
        )
    }
    return BowModel(
        vocabulary=vocabulary,
        class_doc_counts=class_doc_counts,
        token_counts=token_counts,
        smoothing_alpha=alpha,
        clean_policy=policy,
        model_name=model_name,
    )


def predict(model: BowModel, text: str, item_id: int = -1) -> PredictionVector:
    """Posterior class probabilities for one text.

    Out-of-vocabulary tokens are ignored; with no usable tokens the
    output is exactly the class priors. The pair always sums to 1 up to
    float rounding.
    """
    tokens = [
        t for t in tokenize(clean_text(text, model.clean_policy)) if t in model.vocabulary
    ]
    log_scores: dict[Label, float] = {}
    for c in LABELS:
        likelihoods = model.token_log_likelihoods[c]
        score = model.class_log_priors[c]
        for token in tokens:
            score += likelihoods[token]
        log_scores[c] = score
    peak = max(log_scores.values())
    unnormalized = {c: math.exp(score - peak) for c, score in log_scores.items()}
    z = sum(unnormalized.values())
    return PredictionVector(
        item_id=item_id,
        p_real=unnormalized[Label.REAL] / z,
        p_fake=unnormalized[Label.FAKE] / z,
        model_name=model.model_name,
    )


def predict_dataset(model: BowModel, dataset: Dataset) -> list[PredictionVector]:
    return [predict(model, item.text, item.id) for item in dataset]


def save_model(model: BowModel, path: Path | str, config_hash: str | None = None) -> None:
    """Persist counts and alpha as JSON; log-space values are derived
    again at load time."""
    document = {
        "model_name": model.model_name,
        "smoothing_alpha": model.smoothing_alpha,
        "clean_policy": model.clean_policy.as_dict(),
        "class_doc_counts": {c.value: model.class_doc_counts[c] for c in LABELS},
        "token_counts": {c.value: dict(sorted(model.token_counts[c].items())) for c in LABELS},
    }
    if config_hash is not None:
        document["config_hash"] = config_hash
    atomic_write_text(Path(path), json.dumps(document, indent=2, sort_keys=True) + "\n")


def load_model(path: Path | str) -> BowModel:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
        policy = CleanPolicy(**document["clean_policy"])
        class_doc_counts = {
            Label.parse(name): int(count)
            for name, count in document["class_doc_counts"].items()
        }
        token_counts = {
            Label.parse(name): {t: int(n) for t, n in counts.items()}
            for name, counts in document["token_counts"].items()
        }
        alpha = float(document["smoothing_alpha"])
        model_name = str(document["model_name"])
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise BadRecord(f"not a saved model: {exc}", source=path.name) from None
    vocabulary = {
        token: index
        for index, token in enumerate(
            sorted(set(token_counts[Label.REAL]) | set(token_counts[Label.FAKE]))
        )
    }
    return BowModel(
        vocabulary=vocabulary,
        class_doc_counts=class_doc_counts,
        token_counts=token_counts,
        smoothing_alpha=alpha,
        clean_policy=policy,
        model_name=model_name,
    )


def write_predictions(
    vectors: Sequence[PredictionVector], path: Path | str, header_comment: str | None = None
) -> None:
    """Write vectors in the per-model prediction file shape the ensemble
    loader reads back."""
    lines: list[str] = []
    if header_comment:
        lines.append(f"# {header_comment}")
    lines.append("id\tp_real\tp_fake")
    for vector in sorted(vectors, key=lambda v: v.item_id):
        lines.append(f"{vector.item_id}\t{vector.p_real!r}\t{vector.p_fake!r}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")
