"""Datasets, tokenization, few-shot splits and the synthetic task generator."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from embedhalluc.errors import (
    CapacityError,
    ConfigError,
    CoverageError,
    DataError,
    LabelError,
    ParseError,
)

PAD, UNK, CLS, SEP = 0, 1, 2, 3
SPECIAL_TOKENS = ("<pad>", "<unk>", "<cls>", "<sep>")

KNOWN_METRICS = ("accuracy", "matthews", "f1")


@dataclass
class Vocab:
    token_to_id: dict
    id_to_token: list

    @property
    def size(self):
        return len(self.id_to_token)

    @classmethod
    def build(cls, tokens):
        """Vocabulary over the given tokens, specials first, rest sorted."""
        words = sorted(set(tokens) - set(SPECIAL_TOKENS))
        id_to_token = list(SPECIAL_TOKENS) + words
        return cls({t: i for i, t in enumerate(id_to_token)}, id_to_token)


def tokenize(text, vocab):
    """Lowercased whitespace tokens mapped to ids; unknowns become UNK."""
    return [vocab.token_to_id.get(w, UNK) for w in text.lower().split()]


def detokenize(ids, vocab):
    return " ".join(vocab.id_to_token[i] for i in ids)


def tokenize_example(example, vocab):
    """Token ids for one example; pair tasks join the texts with SEP."""
    text, text2, _ = example
    ids = tokenize(text, vocab)
    if text2 is not None:
        ids = ids + [SEP] + tokenize(text2, vocab)
    return ids


@dataclass
class TaskSchema:
    name: str
    kind: str  # "single" | "pair"
    num_classes: int
    metric: str = "accuracy"
    labels: list = None  # optional label-string -> index order

    def __post_init__(self):
        if self.kind not in ("single", "pair"):
            raise ConfigError(f"unknown task kind {self.kind!r}")
        if self.metric not in KNOWN_METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.num_classes < 2:
            raise ConfigError("a classification task needs at least 2 classes")
        if self.labels is not None and len(self.labels) != self.num_classes:
            raise ConfigError("labels list length must equal num_classes")

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                name=d["name"],
                kind=d.get("kind", "single"),
                num_classes=int(d["num_classes"]),
                metric=d.get("metric", "accuracy"),
                labels=d.get("labels"),
            )
        except KeyError as e:
            raise ConfigError(f"task schema is missing field {e}") from e

    def to_dict(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "num_classes": self.num_classes,
            "metric": self.metric,
            "labels": self.labels,
        }


@dataclass
class TaskDataset:
    name: str
    kind: str
    examples: list  # (text, text2 | None, label)
    num_classes: int
    metric: str = "accuracy"

    def __len__(self):
        return len(self.examples)

    def texts(self):
        for text, text2, _ in self.examples:
            yield text
            if text2 is not None:
                yield text2


def _parse_label(raw, schema, lineno):
    if schema.labels is not None:
        if raw not in schema.labels:
            raise LabelError(f"line {lineno}: unknown label {raw!r}")
        return schema.labels.index(raw)
    try:
        label = int(raw)
    except ValueError:
        raise LabelError(f"line {lineno}: label {raw!r} is not an integer") from None
    if not 0 <= label < schema.num_classes:
        raise LabelError(
            f"line {lineno}: label {label} outside [0, {schema.num_classes})"
        )
    return label


def load_dataset(path, schema):
    """Read a TSV task file: text<TAB>label, or text1<TAB>text2<TAB>label."""
    if isinstance(schema, dict):
        schema = TaskSchema.from_dict(schema)
    want = 2 if schema.kind == "single" else 3
    examples = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
            if not row:
                continue
            if len(row) != want:
                raise ParseError(
                    f"{path}: line {lineno}: expected {want} tab-separated "
                    f"fields, found {len(row)}"
                )
            label = _parse_label(row[-1], schema, lineno)
            text2 = row[1] if schema.kind == "pair" else None
            examples.append((row[0], text2, label))
    if not examples:
        raise DataError(f"{path}: no examples")
    present = {label for _, _, label in examples}
    missing = sorted(set(range(schema.num_classes)) - present)
    if missing:
        raise CoverageError(f"{path}: classes with no examples: {missing}")
    return TaskDataset(
        schema.name, schema.kind, examples, schema.num_classes, schema.metric
    )


def save_dataset(dataset, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        for text, text2, label in dataset.examples:
            if dataset.kind == "pair":
                writer.writerow([text, text2, label])
            else:
                writer.writerow([text, label])


def load_schema(path):
    with open(path, encoding="utf-8") as fh:
        return TaskSchema.from_dict(json.load(fh))


def save_schema(schema, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_dict(), fh, indent=2)


# ---------------------------------------------------------------------------
# few-shot splits


@dataclass
class UnlabeledPool:
    """Sentences without labels; SSL sees nothing else about them."""

    sentences: list  # (text, text2 | None)

    def __len__(self):
        return len(self.sentences)


@dataclass
class FewShotSplit:
    train: list
    validation: list
    unlabeled: UnlabeledPool
    test: list
    seed: int
    # gold labels of the pool, kept only so oracles can score pseudo-labels
    unlabeled_gold: list = field(default_factory=list, repr=False)


def sample_few_shot(dataset, seed, shots=16, pool_per_class=64, require_pool=True):
    """Per-class split: `shots` train, `shots` validation, a pool, rest test.

    Deterministic given (dataset, seed). Exact duplicate examples are
    dropped first so the partitions stay disjoint under text+label
    identity. With ``require_pool=False`` a class may contribute fewer
    than ``pool_per_class`` pool sentences.
    """
    seen, examples = set(), []
    for ex in dataset.examples:
        if ex not in seen:
            seen.add(ex)
            examples.append(ex)

    by_class = {c: [] for c in range(dataset.num_classes)}
    for ex in examples:
        by_class[ex[2]].append(ex)

    rng = np.random.default_rng(seed)
    train, val, pool, pool_gold, test = [], [], [], [], []
    for c in range(dataset.num_classes):
        group = by_class[c]
        need = 2 * shots + 1 + (pool_per_class if require_pool else 0)
        if len(group) < need:
            raise CapacityError(
                f"class {c} has {len(group)} unique examples, needs {need} "
                f"(train {shots} + validation {shots} + pool "
                f"{pool_per_class if require_pool else 0} + 1 test)"
            )
        order = rng.permutation(len(group))
        group = [group[i] for i in order]
        train.extend(group[:shots])
        val.extend(group[shots : 2 * shots])
        take = pool_per_class if require_pool else min(
            pool_per_class, len(group) - 2 * shots - 1
        )
        pool_slice = group[2 * shots : 2 * shots + take]
        pool.extend((t, t2) for t, t2, _ in pool_slice)
        pool_gold.extend(label for _, _, label in pool_slice)
        test.extend(group[2 * shots + take :])

    return FewShotSplit(
        train=train,
        validation=val,
        unlabeled=UnlabeledPool(pool),
        test=test,
        seed=seed,
        unlabeled_gold=pool_gold,
    )


# ---------------------------------------------------------------------------
# synthetic tasks with known ground truth


@dataclass
class SyntheticSpec:
    num_classes: int = 2
    vocab_size: int = 60  # content words, split into class blocks + shared block
    length_range: tuple = (5, 12)
    size: int = 1000
    overlap: float = 0.0  # probability a token comes from the shared block
    metric: str = "accuracy"
    name: str = "synthetic"
    class_token_probs: object = None  # optional explicit (C, vocab_size) matrix
    synonyms_per_word: int = 3

    def validate(self):
        if self.num_classes < 2:
            raise ConfigError("synthetic task needs at least 2 classes")
        blocks = self.num_classes + (1 if self.overlap > 0 else 0)
        if self.vocab_size < blocks:
            raise ConfigError(
                f"vocab_size {self.vocab_size} too small for {blocks} word blocks"
            )
        if self.size <= 0:
            raise DataError("synthetic task size must be positive")
        lo, hi = self.length_range
        if lo < 1 or hi < lo:
            raise ConfigError(f"bad length range {self.length_range}")
        if not 0.0 <= self.overlap < 1.0:
            raise ConfigError("overlap must lie in [0, 1)")


@dataclass
class SyntheticTask:
    dataset: TaskDataset
    vocab: Vocab
    synonyms: dict
    class_token_probs: np.ndarray  # rows: class-conditional word distribution
    words: list


def _word_blocks(spec):
    """Partition content words into per-class blocks plus a shared block."""
    words = [f"w{i:03d}" for i in range(spec.vocab_size)]
    shared_n = (
        int(round(spec.vocab_size * spec.overlap)) if spec.overlap > 0 else 0
    )
    shared_n = min(max(shared_n, 1 if spec.overlap > 0 else 0), spec.vocab_size - spec.num_classes)
    class_words = np.array_split(words[: spec.vocab_size - shared_n], spec.num_classes)
    shared = words[spec.vocab_size - shared_n :]
    return words, [list(b) for b in class_words], shared


def synthetic_task(spec, seed):
    """Generate a task from class-conditional token distributions.

    The generating distributions are returned so downstream components
    can be scored against known ground truth.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    words, class_blocks, shared = _word_blocks(spec)
    index = {w: i for i, w in enumerate(words)}

    if spec.class_token_probs is not None:
        probs = np.asarray(spec.class_token_probs, dtype=np.float64)
        if probs.shape != (spec.num_classes, spec.vocab_size):
            raise ConfigError(
                f"class_token_probs shape {probs.shape} != "
                f"({spec.num_classes}, {spec.vocab_size})"
            )
        if np.any(probs < 0) or np.any(np.abs(probs.sum(axis=1) - 1) > 1e-9):
            raise ConfigError("class_token_probs rows must be distributions")
    else:
        probs = np.zeros((spec.num_classes, spec.vocab_size))
        for c, block in enumerate(class_blocks):
            for w in block:
                probs[c, index[w]] = (1.0 - spec.overlap) / len(block)
            for w in shared:
                probs[c, index[w]] = spec.overlap / len(shared)

    lo, hi = spec.length_range
    examples, seen = [], set()
    labels = np.arange(spec.size) % spec.num_classes
    for c in labels:
        for _ in range(200):
            length = int(rng.integers(lo, hi + 1))
            toks = rng.choice(spec.vocab_size, size=length, p=probs[c])
            text = " ".join(words[t] for t in toks)
            if (text, c) not in seen:
                seen.add((text, c))
                examples.append((text, None, int(c)))
                break
        else:
            raise DataError(
                "could not generate enough unique sentences; enlarge the "
                "vocabulary or length range"
            )
    order = rng.permutation(len(examples))
    examples = [examples[i] for i in order]

    synonyms = {}
    for block in class_blocks + ([shared] if shared else []):
        for w in block:
            others = [o for o in block if o != w]
            if others:
                k = min(spec.synonyms_per_word, len(others))
                picks = rng.choice(len(others), size=k, replace=False)
                synonyms[w] = [others[int(i)] for i in picks]

    dataset = TaskDataset(
        spec.name, "single", examples, spec.num_classes, spec.metric
    )
    vocab = Vocab.build(words)
    return SyntheticTask(dataset, vocab, synonyms, probs, words)


def save_synonyms(synonyms, path):
    """Write `word<TAB>syn1,syn2,...`, one entry per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(synonyms):
            fh.write(f"{word}\t{','.join(synonyms[word])}\n")


def load_synonyms(path):
    synonyms = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}: line {lineno}: expected word<TAB>synonyms")
            word, syns = parts
            entries = [s for s in syns.split(",") if s and s != word]
            synonyms[word] = entries
    return synonyms
