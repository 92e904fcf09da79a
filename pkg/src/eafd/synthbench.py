"""Synthetic event-sequence benchmark with planted latent factors.

Six per-user latent factors each drive one observable statistic:

    factor 0  share of category "c0"
    factor 1  amount location (log-normal mu)
    factor 2  event volume (Poisson log-rate)
    factor 3  share of category "c1"
    factor 4  amount dispersion (log-normal sigma)
    factor 5  inter-event gap scale

A configurable subset of factors is encoded into the synthetic
embedding through a fixed random nonlinear map; the rest are blind.
Targets mix encoded and blind factors with configurable weights, so a
published probe catalog comes with known expected verdicts: features
reading encoded factors are recoverable from the embedding (aligned),
features reading blind label-weighted factors carry uplift the
embedding cannot provide (complementary), and statistics of unweighted
or purely noisy channels are decoys (uninformative).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset.core import BINARY, REGRESSION, Dataset, EmbeddingMatrix, EventSequence, TargetLabels
from .dataset.schema import CATEGORICAL, NUMERIC, EventSchema, FieldSpec
from .scoring.records import ALIGNED, COMPLEMENTARY, UNINFORMATIVE

N_FACTORS = 6

BINARY_TARGET = "churn"
REGRESSION_TARGET = "future_spend"


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 5000
    encoded: tuple[int, ...] = (0, 1, 2)
    embed_dim: int = 8
    sigma_z: float = 0.1
    encoder_gain: float = 0.5
    vocab_size: int = 8
    mean_events: float = 60.0
    gap_days: float = 1.5
    share_effect: float = 1.2
    amount_mu: float = 3.0
    amount_effect: float = 0.5
    count_effect: float = 0.4
    volatility_base: float = 0.5
    volatility_effect: float = 0.4
    gap_effect: float = 0.5
    binary_weights: tuple[float, ...] = (0.7, 0.7, 0.7, 1.0, 1.0, 0.0)
    binary_bias: float = 0.0
    regression_weights: tuple[float, ...] = (0.5, 0.8, 0.5, 1.0, 1.0, 0.0)
    regression_noise: float = 0.5
    seed: int = 0

    def __post_init__(self):
        enc = tuple(sorted(set(self.encoded)))
        object.__setattr__(self, "encoded", enc)
        if not enc:
            raise ValueError("encoded factor set must not be empty")
        if any(f < 0 or f >= N_FACTORS for f in enc):
            raise ValueError(f"encoded factors must be in 0..{N_FACTORS - 1}")
        if len(enc) == N_FACTORS:
            raise ValueError("blind factor set must not be empty")
        if self.n_users < 10:
            raise ValueError("need at least 10 users")
        if self.vocab_size < 3:
            raise ValueError("need at least 3 categories")
        if len(self.binary_weights) != N_FACTORS or len(self.regression_weights) != N_FACTORS:
            raise ValueError(f"label weights must have {N_FACTORS} entries")

    @property
    def blind(self) -> tuple[int, ...]:
        return tuple(f for f in range(N_FACTORS) if f not in self.encoded)

    def to_json(self) -> dict:
        return {
            "n_users": self.n_users,
            "encoded": list(self.encoded),
            "embed_dim": self.embed_dim,
            "sigma_z": self.sigma_z,
            "encoder_gain": self.encoder_gain,
            "vocab_size": self.vocab_size,
            "mean_events": self.mean_events,
            "gap_days": self.gap_days,
            "share_effect": self.share_effect,
            "amount_mu": self.amount_mu,
            "amount_effect": self.amount_effect,
            "count_effect": self.count_effect,
            "volatility_base": self.volatility_base,
            "volatility_effect": self.volatility_effect,
            "gap_effect": self.gap_effect,
            "binary_weights": list(self.binary_weights),
            "binary_bias": self.binary_bias,
            "regression_weights": list(self.regression_weights),
            "regression_noise": self.regression_noise,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SynthConfig":
        obj = dict(obj)
        for key in ("encoded", "binary_weights", "regression_weights"):
            if key in obj:
                obj[key] = tuple(obj[key])
        return cls(**obj)


def probe_catalog() -> list[dict]:
    """Published probe features with their generating-factor linkage."""
    return [
        # share of c0 among non-c1 events: immune to the softmax coupling
        # that makes plain shares read the other share factor
        {"name": "share_c0", "dsl": 'count(where mcc == "c0")/count(where mcc != "c1")',
         "category": "categories", "factors": (0,)},
        {"name": "amount_location", "dsl": "median(amount)",
         "category": "amount", "factors": (1,)},
        {"name": "activity_volume", "dsl": "count()",
         "category": "activity", "factors": (2,)},
        {"name": "share_c1", "dsl": 'count(where mcc == "c1")/count()',
         "category": "categories", "factors": (3, 0)},
        {"name": "amount_cv", "dsl": "std(amount)/mean(amount)",
         "category": "amount", "factors": (4,)},
        {"name": "share_c1_recent",
         "dsl": 'count(where mcc == "c1", window=last_events(40))/count(window=last_events(40))',
         "category": "categories", "factors": (3, 0)},
        {"name": "gap_mean", "dsl": "mean_interevent_days()",
         "category": "time", "factors": (5,)},
        {"name": "gap_std", "dsl": "std_interevent_days()",
         "category": "time", "factors": (5,)},
        {"name": "gap_burstiness", "dsl": "burstiness()",
         "category": "time", "factors": ()},
        {"name": "amount_autocorr", "dsl": "autocorr(amount, lag=1)",
         "category": "amount", "factors": ()},
    ]


def expected_verdict(factors: tuple[int, ...], config: SynthConfig) -> str:
    """Manifest verdict from the factor wiring.

    Blind and label-weighted anywhere -> complementary; all factors
    encoded -> aligned; otherwise (pure noise, or blind channels the
    labels ignore) -> uninformative.
    """
    if any(f in config.blind and config.binary_weights[f] != 0.0 for f in factors):
        return COMPLEMENTARY
    if factors and all(f in config.encoded for f in factors):
        return ALIGNED
    return UNINFORMATIVE


def build_manifest(config: SynthConfig) -> dict:
    entries = []
    for item in probe_catalog():
        entries.append(
            {
                "name": item["name"],
                "dsl": item["dsl"],
                "category": item["category"],
                "factors": list(item["factors"]),
                "expected_verdict": expected_verdict(item["factors"], config),
            }
        )
    counts = {v: sum(1 for e in entries if e["expected_verdict"] == v)
              for v in (ALIGNED, COMPLEMENTARY, UNINFORMATIVE)}
    return {
        "version": 1,
        "target": BINARY_TARGET,
        "config": config.to_json(),
        "verdict_counts": counts,
        "entries": entries,
    }


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + np.exp(-x))


def generate(config: SynthConfig, workers: int = 1) -> tuple[Dataset, dict]:
    """Deterministic synthetic dataset plus its ground-truth manifest.

    Every user has an independent PRNG stream keyed by (seed, user
    index), so the output is identical for any worker count.
    """
    vocab = tuple(f"c{i}" for i in range(config.vocab_size))
    schema = EventSchema(
        timestamp_field="t",
        fields=(FieldSpec("mcc", CATEGORICAL), FieldSpec("amount", NUMERIC)),
        vocabularies={"mcc": vocab},
    )

    root = np.random.SeedSequence(config.seed)
    streams = root.spawn(config.n_users + 1)
    rng_global = np.random.default_rng(streams[0])
    enc = list(config.encoded)
    n_enc = len(enc)
    base_logits = rng_global.normal(0.0, 0.3, size=config.vocab_size)
    # orthonormal encoder maps: every encoded factor enters the embedding
    # with the same norm, so per-factor SNR does not wobble across seeds
    P = np.linalg.qr(rng_global.normal(size=(config.embed_dim, n_enc)))[0] * config.encoder_gain
    A = np.linalg.qr(rng_global.normal(size=(config.embed_dim, config.embed_dim)))[0]

    sequences: list[EventSequence | None] = [None] * config.n_users
    Z = np.empty((config.n_users, config.embed_dim), dtype=np.float64)
    y_bin = np.empty(config.n_users, dtype=np.float64)
    y_reg = np.empty(config.n_users, dtype=np.float64)
    w_b = np.asarray(config.binary_weights)
    w_r = np.asarray(config.regression_weights)

    def build_user(i: int) -> None:
        rng = np.random.default_rng(streams[i + 1])
        u = rng.standard_normal(N_FACTORS)
        n_events = max(1, int(rng.poisson(config.mean_events * np.exp(config.count_effect * u[2]))))
        gap_scale = config.gap_days * 86400.0 * np.exp(config.gap_effect * u[5])
        ts = np.cumsum(rng.exponential(gap_scale, size=n_events))
        logits = base_logits.copy()
        logits[0] += config.share_effect * u[0]
        logits[1] += config.share_effect * u[3]
        p = np.exp(logits - logits.max())
        p /= p.sum()
        mcc = rng.choice(config.vocab_size, size=n_events, p=p).astype(np.uint32)
        sigma_amt = config.volatility_base * np.exp(config.volatility_effect * u[4])
        amount = np.exp(rng.normal(config.amount_mu + config.amount_effect * u[1], sigma_amt, size=n_events))
        sequences[i] = EventSequence(
            f"u{i:06d}", ts, {"mcc": mcc}, {"amount": amount}
        )
        Z[i] = A @ np.tanh(P @ u[enc]) + config.sigma_z * rng.standard_normal(config.embed_dim)
        y_bin[i] = float(rng.random() < _sigmoid(config.binary_bias + float(w_b @ u)))
        y_reg[i] = float(w_r @ u) + config.regression_noise * rng.standard_normal()

    if workers <= 1:
        for i in range(config.n_users):
            build_user(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(build_user, range(config.n_users)))

    dataset = Dataset(
        schema,
        tuple(sequences),
        labels={
            BINARY_TARGET: TargetLabels(BINARY, y_bin),
            REGRESSION_TARGET: TargetLabels(REGRESSION, y_reg),
        },
        embeddings=EmbeddingMatrix(Z),
    )
    return dataset, build_manifest(config)


def load_synth_config(path) -> SynthConfig:
    """Read a SynthConfig from a TOML document (table ``[synth]`` or root keys)."""
    import sys

    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    obj = doc.get("synth", doc)
    return SynthConfig.from_json(obj)


def write_manifest(manifest: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
