"""One conditional generator/discriminator pair per column.

The generator maps (other columns, Gaussian noise) to a candidate value
for the target column; the discriminator scores (other columns, value)
pairs in (0, 2), pushing observed rows toward 2 and generated rows toward
0.  Training alternates blocks of discriminator and generator updates with
a supervised accuracy penalty added to the generator objective.

Column kinds: continuous targets use an identity head on standardised
values, binary targets a sigmoid head on {0, 1} codes, and categorical
targets a group of sigmoid heads over one-hot levels whose probabilities
are renormalised at sampling time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, NumericError, ShapeError
from .losses import (
    GEN_TARGET,
    REAL_TARGET,
    binary_cross_entropy_clipped,
    discriminator_loss,
    generator_loss,
)
from .nn import (
    Mlp,
    ParamGrads,
    adam_new,
    adam_step,
    _backward_from_cache,
    _forward_cache,
    forward,
    mlp_new,
)
from .seeding import canonical_seed

COLUMN_KINDS = ("continuous", "binary", "categorical")

# Standard deviations below this are treated as degenerate (scale 1).
_MIN_SCALE = 1e-9


@dataclass
class TrainConfig:
    """Hyperparameters for one adversarial fit.

    ``max_epochs`` caps the total number of generator updates; one cycle
    runs ``disc_iters_per_cycle`` discriminator updates followed by up to
    ``gen_iters_per_cycle`` generator updates.  Training stops early when
    the generator total loss has not improved by ``early_stop_tol`` for
    ``early_stop_patience`` consecutive cycles.
    """

    lr_generator: float = 0.001
    lr_discriminator: float = 0.0005
    l2: float = 0.0001
    gen_iters_per_cycle: int = 50
    disc_iters_per_cycle: int = 10
    batch_size: int = 256
    max_epochs: int = 10_000
    acc_penalty_weight: float = 1.0
    early_stop_patience: int = 50
    early_stop_tol: float = 1e-4
    noise_dim: int = 8
    seed: int = 0

    def validate(self) -> None:
        if self.lr_generator <= 0 or self.lr_discriminator <= 0:
            raise ValueError("learning rates must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        for name in ("gen_iters_per_cycle", "disc_iters_per_cycle", "batch_size", "max_epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.acc_penalty_weight < 0:
            raise ValueError("acc_penalty_weight must be non-negative")
        if self.noise_dim < 1:
            raise ValueError("noise_dim must be at least 1")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be at least 1")


@dataclass
class TrainTrace:
    """Per-cycle training record: losses averaged over each cycle's updates."""

    disc_loss: list[float] = field(default_factory=list)
    gen_loss: list[float] = field(default_factory=list)
    acc_penalty: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.gen_loss)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cycle", "disc_loss", "gen_loss", "acc_penalty"])
            for i, (d, g, a) in enumerate(
                zip(self.disc_loss, self.gen_loss, self.acc_penalty)
            ):
                writer.writerow([i, repr(float(d)), repr(float(g)), repr(float(a))])


@dataclass
class GcinPair:
    """A trained generator/discriminator pair for one column.

    Holds the affine conditioning/target normalisation fitted from the
    training data so imputation can run on raw-scale inputs.
    """

    generator: Mlp
    discriminator: Mlp
    noise_dim: int
    column_index: int
    column_kind: str
    n_levels: int
    cond_shift: np.ndarray
    cond_scale: np.ndarray
    target_shift: float
    target_scale: float

    def __post_init__(self):
        if self.noise_dim < 1:
            raise ValueError("noise_dim must be at least 1")
        cond_width = self.cond_shift.size
        target_width = self.n_levels if self.column_kind == "categorical" else 1
        if self.generator.input_dim != cond_width + self.noise_dim:
            raise ShapeError("generator input width != conditioning width + noise_dim")
        if self.discriminator.input_dim != cond_width + target_width:
            raise ShapeError("discriminator input width != conditioning width + target width")


def scale_architecture(n_samples: int, n_features: int) -> list[int]:
    """Dataset-adaptive hidden sizes: [100] up to 20k rows, [200, 100] for
    mid-sized data, [400, 200] beyond 30k rows when there are >= 50 features."""
    if n_samples <= 0 or n_features <= 0:
        raise ValueError("n_samples and n_features must be positive")
    if n_samples <= 20_000:
        return [100]
    if n_samples < 30_000:
        return [200, 100]
    if n_features >= 50:
        return [400, 200]
    return [200, 100]


def _standardize_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    shift = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale < _MIN_SCALE, 1.0, scale)
    return shift, scale


def _encode_target(x_target: np.ndarray, kind: str, n_levels: int | None):
    """Returns (encoded (n, width) array, shift, scale, width, n_levels)."""
    x_target = np.asarray(x_target, dtype=float)
    if x_target.ndim != 1:
        raise ShapeError(f"x_target must be 1-D, got shape {x_target.shape}")
    if kind == "continuous":
        shift, scale = _standardize_fit(x_target[:, None])
        enc = (x_target[:, None] - shift) / scale
        return enc, float(shift[0]), float(scale[0]), 1, 1
    if kind == "binary":
        if not np.all((x_target == 0.0) | (x_target == 1.0)):
            raise ValueError("binary targets must be coded 0/1")
        return x_target[:, None].copy(), 0.0, 1.0, 1, 2
    if kind == "categorical":
        codes = x_target.astype(int)
        if np.any(codes != x_target) or codes.min() < 0:
            raise ValueError("categorical targets must be non-negative integer codes")
        levels = int(n_levels) if n_levels is not None else int(codes.max()) + 1
        if codes.max() >= levels:
            raise ValueError("categorical code out of range for declared level count")
        enc = np.zeros((codes.size, levels))
        enc[np.arange(codes.size), codes] = 1.0
        return enc, 0.0, 1.0, levels, levels
    raise ValueError(f"unknown column kind {kind!r}")


def _disc_grads(
    disc: Mlp,
    real_inputs: np.ndarray,
    fake_inputs: np.ndarray,
) -> tuple[float, ParamGrads]:
    """Loss and parameter gradients for one discriminator update."""
    d_real, real_acts = _forward_cache(disc, real_inputs)
    d_fake, fake_acts = _forward_cache(disc, fake_inputs)
    loss = discriminator_loss(d_real, d_fake)
    g_real = (d_real - REAL_TARGET) / d_real.shape[0]
    g_fake = d_fake / d_fake.shape[0]
    grads, _ = _backward_from_cache(disc, real_acts, d_real, g_real)
    grads_fake, _ = _backward_from_cache(disc, fake_acts, d_fake, g_fake)
    return loss, grads.accumulate(grads_fake)


def _gen_grads(
    gen: Mlp,
    disc: Mlp,
    cond: np.ndarray,
    target_enc: np.ndarray,
    z: np.ndarray,
    acc_weight: float,
    kind: str,
) -> tuple[float, float, ParamGrads]:
    """Adversarial + accuracy loss and generator gradients for one update.

    Backpropagates through the frozen discriminator into the generated
    values and from there through the generator.
    """
    n = cond.shape[0]
    gen_inputs = np.hstack([cond, z])
    fake, gen_acts = _forward_cache(gen, gen_inputs)
    disc_inputs = np.hstack([cond, fake])
    d_fake, disc_acts = _forward_cache(disc, disc_inputs)

    adv_loss = generator_loss(d_fake)
    d_out_grad = (d_fake - GEN_TARGET) / n
    _, disc_in_grads = _backward_from_cache(disc, disc_acts, d_fake, d_out_grad)
    fake_grad = disc_in_grads[:, cond.shape[1] :].copy()

    if kind == "continuous":
        pen = float(np.mean((fake - target_enc) ** 2))
        fake_grad += acc_weight * 2.0 * (fake - target_enc) / n
    else:
        clipped = np.clip(fake, 1e-12, 1.0 - 1e-12)
        pen_rows = binary_cross_entropy_clipped(target_enc, fake).sum(axis=1)
        pen = float(np.mean(pen_rows))
        fake_grad += acc_weight * (clipped - target_enc) / (clipped * (1.0 - clipped)) / n

    grads, _ = _backward_from_cache(gen, gen_acts, fake, fake_grad)
    return adv_loss, pen, grads


def _minibatch(rng: np.random.Generator, n: int, batch: int) -> np.ndarray:
    if batch >= n:
        return np.arange(n)
    return rng.choice(n, size=batch, replace=False)


def train_gcin(
    X_cond: np.ndarray,
    x_target: np.ndarray,
    kind: str,
    cfg: TrainConfig,
    n_levels: int | None = None,
    column_index: int = 0,
) -> tuple[GcinPair, TrainTrace]:
    """Fit a generator/discriminator pair on fully observed rows.

    ``X_cond`` is the (n_obs, width) conditioning matrix and ``x_target``
    the observed column (raw values for continuous, 0/1 codes for binary,
    integer codes for categorical).  Deterministic given ``cfg.seed``.
    """
    if kind not in COLUMN_KINDS:
        raise ValueError(f"unknown column kind {kind!r}")
    cfg.validate()
    X_cond = np.asarray(X_cond, dtype=float)
    if X_cond.ndim != 2:
        raise ShapeError(f"X_cond must be 2-D, got shape {X_cond.shape}")
    n_obs = X_cond.shape[0]
    if n_obs < 2:
        raise InsufficientDataError(f"need at least 2 observed rows, got {n_obs}")
    if x_target.shape[0] != n_obs:
        raise ShapeError("X_cond and x_target row counts differ")
    if not np.all(np.isfinite(X_cond)):
        raise ValueError("X_cond must not contain missing or non-finite entries")

    target_enc, t_shift, t_scale, t_width, levels = _encode_target(x_target, kind, n_levels)
    cond_shift, cond_scale = _standardize_fit(X_cond)
    cond = (X_cond - cond_shift) / cond_scale

    seed = canonical_seed(cfg.seed)
    k = cfg.noise_dim
    hidden = scale_architecture(n_obs, X_cond.shape[1] + 1)
    gen_head = "identity" if kind == "continuous" else "sigmoid"
    gen = mlp_new(cond.shape[1] + k, hidden, t_width, gen_head, seed=seed)
    disc = mlp_new(cond.shape[1] + t_width, hidden, 1, "scaled_sigmoid_0_2", seed=seed ^ 1)
    gen_opt = adam_new(gen, cfg.lr_generator, cfg.l2)
    disc_opt = adam_new(disc, cfg.lr_discriminator, cfg.l2)

    rng = np.random.default_rng([seed, 2])
    batch = min(cfg.batch_size, n_obs)
    trace = TrainTrace()
    best_total = np.inf
    stall = 0
    gen_done = 0
    cycle = 0

    while gen_done < cfg.max_epochs:
        disc_losses = []
        for _ in range(cfg.disc_iters_per_cycle):
            idx = _minibatch(rng, n_obs, batch)
            z = rng.standard_normal((idx.size, k))
            fake = forward(gen, np.hstack([cond[idx], z]))
            loss, grads = _disc_grads(
                disc,
                np.hstack([cond[idx], target_enc[idx]]),
                np.hstack([cond[idx], fake]),
            )
            adam_step(disc, grads, disc_opt)
            disc_losses.append(loss)

        gen_losses = []
        pens = []
        for _ in range(min(cfg.gen_iters_per_cycle, cfg.max_epochs - gen_done)):
            idx = _minibatch(rng, n_obs, batch)
            z = rng.standard_normal((idx.size, k))
            adv, pen, grads = _gen_grads(
                gen, disc, cond[idx], target_enc[idx], z, cfg.acc_penalty_weight, kind
            )
            adam_step(gen, grads, gen_opt)
            gen_losses.append(adv)
            pens.append(pen)
            gen_done += 1

        cycle_disc = float(np.mean(disc_losses))
        cycle_gen = float(np.mean(gen_losses)) if gen_losses else 0.0
        cycle_pen = float(np.mean(pens)) if pens else 0.0
        if not np.isfinite(cycle_disc) or not np.isfinite(cycle_gen) or not np.isfinite(cycle_pen):
            raise NumericError(f"non-finite training loss at cycle {cycle}")
        trace.disc_loss.append(cycle_disc)
        trace.gen_loss.append(cycle_gen)
        trace.acc_penalty.append(cycle_pen)

        total = cycle_gen + cfg.acc_penalty_weight * cycle_pen
        if total < best_total - cfg.early_stop_tol:
            best_total = total
            stall = 0
        else:
            stall += 1
            if stall >= cfg.early_stop_patience:
                break
        cycle += 1

    pair = GcinPair(
        generator=gen,
        discriminator=disc,
        noise_dim=k,
        column_index=column_index,
        column_kind=kind,
        n_levels=levels,
        cond_shift=cond_shift,
        cond_scale=cond_scale,
        target_shift=t_shift,
        target_scale=t_scale,
    )
    return pair, trace


def impute_column(
    pair: GcinPair,
    X_cond_mis: np.ndarray,
    seed: int,
    deterministic: bool = False,
) -> np.ndarray:
    """Generate one imputation per row of ``X_cond_mis``.

    A fresh noise vector is drawn per row, so repeated calls with
    different seeds yield distinct multiple-imputation draws.  Binary and
    categorical columns are sampled from the generated probabilities
    unless ``deterministic`` asks for threshold/argmax decisions.
    """
    X_cond_mis = np.asarray(X_cond_mis, dtype=float)
    if X_cond_mis.ndim != 2 or X_cond_mis.shape[1] != pair.cond_shift.size:
        raise ShapeError(
            f"expected conditioning of shape (n, {pair.cond_shift.size}), got {X_cond_mis.shape}"
        )
    n_mis = X_cond_mis.shape[0]
    if n_mis == 0:
        return np.empty(0)
    rng = np.random.default_rng(canonical_seed(seed))
    cond = (X_cond_mis - pair.cond_shift) / pair.cond_scale
    z = rng.standard_normal((n_mis, pair.noise_dim))
    out = forward(pair.generator, np.hstack([cond, z]))
    if pair.column_kind == "continuous":
        return out[:, 0] * pair.target_scale + pair.target_shift
    if pair.column_kind == "binary":
        prob = out[:, 0]
        if deterministic:
            return (prob >= 0.5).astype(float)
        return (rng.random(n_mis) < prob).astype(float)
    probs = out / out.sum(axis=1, keepdims=True)
    if deterministic:
        return np.argmax(probs, axis=1).astype(float)
    cum = np.cumsum(probs, axis=1)
    u = rng.random((n_mis, 1))
    return np.argmax(u < cum, axis=1).astype(float)


def with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    """Copy of ``cfg`` with a different seed; used to derive per-column fits."""
    return replace(cfg, seed=seed)
