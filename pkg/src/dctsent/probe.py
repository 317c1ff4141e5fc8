"""Probing-task harness: one-hidden-layer MLP classifier on sentence vectors.

Training follows the usual probing setup: minibatch Adam, ``epoch_size``
epochs per validation round, early stopping once ``tenacity`` rounds pass
without a new best validation accuracy, best parameters restored at the end.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DatasetError, DegenerateTaskError, DimensionMismatchError, EmptyInputError, UsageError

SPLIT_ALIASES = {"train": "train", "tr": "train", "dev": "dev", "va": "dev", "test": "test", "te": "test"}

PROBING_TASKS = (
    "SentLen", "WC", "BShift", "TreeDepth", "Tense", "CoordInv", "SubjNum", "ObjNum", "SOMO",
)


@dataclass(frozen=True)
class ProbeConfig:
    kfold: int = 10
    batch_size: int = 128
    nhid: int = 50
    optim: str = "adam"
    tenacity: int = 5
    epoch_size: int = 4
    seed: int = 13
    max_epoch: int = 200
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    nonlinearity: str = "sigmoid"
    validation_split: float = 0.1

    def __post_init__(self):
        for name in ("kfold", "batch_size", "nhid", "tenacity", "epoch_size", "max_epoch"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive")
        if self.optim != "adam":
            raise UsageError(f"unsupported optimizer {self.optim!r}")
        if self.nonlinearity not in _ACTIVATIONS:
            raise UsageError(f"unknown nonlinearity {self.nonlinearity!r}")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# activation, derivative expressed through the activation output
_ACTIVATIONS = {
    "sigmoid": (_sigmoid, lambda h: h * (1.0 - h)),
    "tanh": (np.tanh, lambda h: 1.0 - h * h),
    "relu": (lambda z: np.maximum(z, 0.0), lambda h: (h > 0).astype(h.dtype)),
}


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def init_params(n_in, nhid, n_classes, rng):
    # uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), the common dense-layer default
    b1 = 1.0 / np.sqrt(n_in)
    b2 = 1.0 / np.sqrt(nhid)
    return {
        "W1": rng.uniform(-b1, b1, (n_in, nhid)),
        "b1": rng.uniform(-b1, b1, nhid),
        "W2": rng.uniform(-b2, b2, (nhid, n_classes)),
        "b2": rng.uniform(-b2, b2, n_classes),
    }


def forward(params, x, nonlinearity="sigmoid"):
    act, _ = _ACTIVATIONS[nonlinearity]
    h = act(x @ params["W1"] + params["b1"])
    return h, softmax(h @ params["W2"] + params["b2"])


def loss_and_grads(params, x, y, nonlinearity="sigmoid"):
    """Mean cross-entropy over the batch and its gradient for every parameter."""
    _, dact = _ACTIVATIONS[nonlinearity]
    h, probs = forward(params, x, nonlinearity)
    n = x.shape[0]
    loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    dh = dlogits @ params["W2"].T
    dz = dh * dact(h)
    grads = {
        "W1": x.T @ dz,
        "b1": dz.sum(axis=0),
        "W2": h.T @ dlogits,
        "b2": dlogits.sum(axis=0),
    }
    return loss, grads


class Adam:
    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            if k not in self.m:
                self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)


@dataclass
class ProbeState:
    params: dict
    classes: list
    config: ProbeConfig
    epochs_run: int = 0
    best_epoch: int = 0
    best_dev_accuracy: float = 0.0
    history: list = field(default_factory=list)

    @property
    def n_in(self) -> int:
        return self.params["W1"].shape[0]

    def predict_proba(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.n_in:
            raise DimensionMismatchError(f"input width {x.shape[1]}, classifier expects {self.n_in}")
        return forward(self.params, x, self.config.nonlinearity)[1]

    def predict(self, x):
        return [self.classes[i] for i in np.argmax(self.predict_proba(x), axis=1)]


def _encode_labels(labels, classes):
    lookup = {c: i for i, c in enumerate(classes)}
    return np.array([lookup.get(l, -1) for l in labels], dtype=np.int64)


def _accuracy(params, x, y, nonlinearity):
    if x.shape[0] == 0:
        return 0.0
    pred = np.argmax(forward(params, x, nonlinearity)[1], axis=1)
    return float(np.mean(pred == y))


def train_probe(train_vecs, train_labels, config: ProbeConfig = ProbeConfig(), dev_vecs=None, dev_labels=None) -> ProbeState:
    """Fit the classifier; without a dev split, ``validation_split`` of train is held out."""
    x = np.atleast_2d(np.asarray(train_vecs, dtype=np.float64))
    labels = list(train_labels)
    if x.shape[0] != len(labels):
        raise DimensionMismatchError(f"{x.shape[0]} vectors vs {len(labels)} labels")
    if x.shape[0] == 0:
        raise EmptyInputError("empty training set")
    classes = sorted(set(labels), key=str)
    if len(classes) < 2:
        raise DegenerateTaskError("probing task needs at least two classes")
    y = _encode_labels(labels, classes)
    rng = np.random.default_rng(config.seed)

    if dev_vecs is None:
        perm = rng.permutation(x.shape[0])
        n_dev = max(1, int(round(config.validation_split * x.shape[0])))
        dev_idx, tr_idx = perm[:n_dev], perm[n_dev:]
        xd, yd = x[dev_idx], y[dev_idx]
        x, y = x[tr_idx], y[tr_idx]
    else:
        xd = np.atleast_2d(np.asarray(dev_vecs, dtype=np.float64))
        if xd.shape[1] != x.shape[1]:
            raise DimensionMismatchError("dev vectors differ in width from train vectors")
        yd = _encode_labels(dev_labels, classes)

    params = init_params(x.shape[1], config.nhid, len(classes), rng)
    opt = Adam(config.lr, config.beta1, config.beta2, config.adam_eps)
    state = ProbeState(params, classes, config)
    best = {k: v.copy() for k, v in params.items()}
    best_acc = -1.0
    stale = 0
    n = x.shape[0]
    while state.epochs_run < config.max_epoch and stale < config.tenacity:
        for _ in range(config.epoch_size):
            perm = rng.permutation(n)
            for lo in range(0, n, config.batch_size):
                b = perm[lo:lo + config.batch_size]
                _, grads = loss_and_grads(params, x[b], y[b], config.nonlinearity)
                opt.step(params, grads)
            state.epochs_run += 1
        acc = _accuracy(params, xd, yd, config.nonlinearity)
        state.history.append((state.epochs_run, acc))
        if acc > best_acc:
            best_acc = acc
            best = {k: v.copy() for k, v in params.items()}
            state.best_epoch = state.epochs_run
            stale = 0
        else:
            stale += 1
    state.params = best
    state.best_dev_accuracy = best_acc
    return state


@dataclass(frozen=True)
class ProbeReport:
    task_name: str
    language: str
    encoder: str
    accuracy: float
    n_classes: int
    n_test: int
    dev_accuracy: float | None = None
    epochs_run: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_probe(state: ProbeState, test_vecs, test_labels, task_name="unspecified",
                   language="unspecified", encoder="unspecified") -> ProbeReport:
    x = np.atleast_2d(np.asarray(test_vecs, dtype=np.float64))
    labels = list(test_labels)
    if len(labels) == 0 or x.size == 0:
        raise EmptyInputError("empty test set")
    if x.shape[0] != len(labels):
        raise DimensionMismatchError(f"{x.shape[0]} vectors vs {len(labels)} labels")
    if x.shape[1] != state.n_in:
        raise DimensionMismatchError(f"input width {x.shape[1]}, classifier expects {state.n_in}")
    y = _encode_labels(labels, state.classes)
    acc = _accuracy(state.params, x, y, state.config.nonlinearity)
    return ProbeReport(
        task_name=task_name,
        language=language,
        encoder=encoder,
        accuracy=acc,
        n_classes=len(state.classes),
        n_test=len(labels),
        dev_accuracy=state.best_dev_accuracy,
        epochs_run=state.epochs_run,
    )


def cross_validate(vecs, labels, config: ProbeConfig = ProbeConfig()) -> float:
    """Mean held-out accuracy over ``config.kfold`` shuffled folds."""
    x = np.atleast_2d(np.asarray(vecs, dtype=np.float64))
    labels = np.asarray(list(labels), dtype=object)
    if x.shape[0] < config.kfold:
        raise DatasetError(f"{x.shape[0]} examples cannot fill {config.kfold} folds")
    perm = np.random.default_rng(config.seed).permutation(x.shape[0])
    folds = np.array_split(perm, config.kfold)
    scores = []
    for i, held in enumerate(folds):
        rest = np.concatenate([f for j, f in enumerate(folds) if j != i])
        state = train_probe(x[rest], labels[rest], config)
        scores.append(evaluate_probe(state, x[held], labels[held]).accuracy)
    return float(np.mean(scores))


def gradient_check(params, x, y, nonlinearity="sigmoid", eps=1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    params = {k: np.array(v, dtype=np.float64) for k, v in params.items()}
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    _, grads = loss_and_grads(params, x, y, nonlinearity)
    worst = 0.0
    for name, p in params.items():
        g = grads[name]
        for i in np.ndindex(p.shape):
            orig = p[i]
            p[i] = orig + eps
            up, _ = loss_and_grads(params, x, y, nonlinearity)
            p[i] = orig - eps
            down, _ = loss_and_grads(params, x, y, nonlinearity)
            p[i] = orig
            num = (up - down) / (2 * eps)
            err = abs(num - g[i]) / max(abs(num) + abs(g[i]), 1e-7)
            worst = max(worst, err)
    return worst


def load_probe_file(path) -> dict[str, list[tuple[str, str]]]:
    """Read ``split<TAB>label<TAB>sentence`` rows grouped by split."""
    splits: dict[str, list[tuple[str, str]]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise DatasetError(f"{path}: line {lineno}: expected split, label and sentence")
            split = SPLIT_ALIASES.get(parts[0].strip().lower())
            if split is None:
                raise DatasetError(f"{path}: line {lineno}: unknown split tag {parts[0]!r}")
            splits.setdefault(split, []).append((parts[1], parts[2]))
    return splits


def find_task_files(task_dir) -> dict[str, str]:
    if not os.path.isdir(task_dir):
        raise DatasetError(f"{task_dir}: not a directory")
    found = {}
    for name in sorted(os.listdir(task_dir)):
        stem, ext = os.path.splitext(name)
        if ext in (".tsv", ".txt"):
            found[stem] = os.path.join(task_dir, name)
    if not found:
        raise DatasetError(f"{task_dir}: no task files (*.tsv, *.txt)")
    return found
