"""Seeded input-sequence constructions.

Three families, all valued in [0, 1]:

* phased ladders: 1/alpha phases of length round(alpha*T); phases
  j <= i are Unif[0, eps^(K-j)] (scales climbing toward eps^(K-i)),
  phases j > i drop back to Unif[0, eps^K]. A predictor that wants few
  mistakes must chase the ladder up; one that wants small volume must
  not. i = K is the full ladder.
* the atom-plus-tail distribution: an atom of mass 1 - alpha*e^K at
  eps^(K+1), a density proportional to x^(1/ln eps - 1) on
  [eps^(K+1), eps], and a uniform-like tail on [eps, 1]. Its quantile
  function grows geometrically: covering mass 1 - alpha*e^(K-i) costs
  volume ~ eps^(1+K-i), so every extra e-factor of confidence costs a
  1/eps factor of width. Sampled by inverse transform; the atom falls
  out of the u <= 1 - alpha*e^K branch, no rejection step.
* seeded permutations of a fixed multiset (the exchangeable model).

Determinism contract: every sequence is produced by one Philox stream
(counter-based, platform-stable) keyed by SeedSequence((seed, tag)),
tag 0 for values and tag 1 for symmetrization signs. Identical
(spec, seed) pairs give identical bytes on any platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

_VALUES_STREAM = 0
_SIGNS_STREAM = 1

_HEADER_PREFIX = "# tightband-sequence "


class UnsupportedVariantError(ValueError):
    """Operation not defined for this sequence variant."""


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tag))))


def derive_seed(seed: int, *path: int) -> int:
    """Deterministic child seed for (cell, trial, ...) fan-out."""
    ss = np.random.SeedSequence((seed, *path))
    return int(ss.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# atom-plus-tail distribution


@dataclass(frozen=True)
class DkParams:
    """Parameters of the atom-plus-tail distribution.

    K <= ln(1/alpha) keeps the atom's mass 1 - alpha*e^K a probability;
    eps <= 1/2 is the standing scale assumption.
    """

    alpha: float
    eps: float
    K: int

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.eps <= 0.5:
            raise ValueError(f"eps must be in (0, 1/2], got {self.eps}")
        if not (isinstance(self.K, int) and self.K >= 0):
            raise ValueError(f"K must be an integer >= 0, got {self.K}")
        if self.K > math.log(1.0 / self.alpha) + 1e-12:
            raise ValueError(
                f"K = {self.K} exceeds ln(1/alpha) = {math.log(1.0 / self.alpha):.6f}; "
                "the atom's mass 1 - alpha*e^K would be negative"
            )

    @property
    def atom(self) -> float:
        """Location of the point mass: eps^(K+1), the support minimum."""
        return self.eps ** (self.K + 1)

    @property
    def atom_mass(self) -> float:
        """Probability of the point mass: 1 - alpha*e^K."""
        return 1.0 - self.alpha * math.exp(self.K)


def dk_cdf(x, p: DkParams):
    """CDF: 0 below eps^(K+1); 1 - (alpha/e)*x^(1/ln eps) up to eps;
    1 - alpha*(1-x)/(1-eps) up to 1. Right-continuous; the jump at the
    atom has size 1 - alpha*e^K. Scalar in, scalar out; arrays pass
    through elementwise.
    """
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)):
        raise ValueError("dk_cdf is defined on [0, 1]")
    out = np.zeros_like(xa)
    mid = (xa >= p.atom) & (xa <= p.eps)
    top = xa > p.eps
    # x^(1/ln eps) = exp(ln x / ln eps); mid-branch x >= atom > 0
    out[mid] = 1.0 - (p.alpha / math.e) * np.exp(np.log(xa[mid]) / math.log(p.eps))
    out[top] = 1.0 - p.alpha * (1.0 - xa[top]) / (1.0 - p.eps)
    return out if out.ndim else float(out)


def dk_inverse_cdf(u, p: DkParams):
    """Quantile function; the flat u <= 1 - alpha*e^K branch is the atom."""
    ua = np.asarray(u, dtype=float)
    if np.any((ua < 0.0) | (ua > 1.0)):
        raise ValueError("dk_inverse_cdf is defined on [0, 1]")
    out = np.full_like(ua, p.atom)
    mid = (ua > p.atom_mass) & (ua <= 1.0 - p.alpha)
    top = ua > 1.0 - p.alpha
    # ((1-u) e / alpha)^(ln eps), positive since u <= 1 - alpha on this branch
    out[mid] = np.exp(np.log((1.0 - ua[mid]) * math.e / p.alpha) * math.log(p.eps))
    out[top] = 1.0 - (1.0 - ua[top]) * (1.0 - p.eps) / p.alpha
    return out if out.ndim else float(out)


def dk_vstar(c, p: DkParams):
    """Volume needed to capture mass c: F^{-1}(c) - eps^(K+1). Convex in c."""
    inv = dk_inverse_cdf(c, p)
    return inv - p.atom


# ---------------------------------------------------------------------------
# sequence specs


@dataclass(frozen=True)
class PhasedSpec:
    alpha: float
    T: int
    K: int
    eps: float
    i: int

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not (isinstance(self.T, int) and self.T >= 1):
            raise ValueError(f"T must be an integer >= 1, got {self.T}")
        if not 0.0 < self.eps <= 0.5:
            raise ValueError(f"eps must be in (0, 1/2], got {self.eps}")
        if not (isinstance(self.K, int) and self.K >= 1):
            raise ValueError(f"K must be an integer >= 1, got {self.K}")
        if self.K * self.alpha > 1.0 + 1e-12:
            raise ValueError(
                f"K = {self.K} exceeds 1/alpha = {1.0 / self.alpha:.6f}; "
                "the ladder cannot have more than 1/alpha phases"
            )
        if not 1 <= self.i <= self.K:
            raise ValueError(f"i must be in [1, K] = [1, {self.K}], got {self.i}")
        L = self.phase_length
        if L < 1:
            raise ValueError(f"phase length round(alpha*T) = {L} must be >= 1")
        if self.K * L > self.T:
            raise ValueError(
                f"K * round(alpha*T) = {self.K * L} exceeds T = {self.T}; "
                "the ladder does not fit the horizon"
            )

    @property
    def phase_length(self) -> int:
        return int(math.floor(self.alpha * self.T + 0.5))

    def day_scales(self) -> np.ndarray:
        """Upper endpoint of the uniform draw for each day, length T.

        Days past the last full phase keep the scale of their own phase
        index (for j > i that is the eps^K floor).
        """
        j = np.arange(self.T) // self.phase_length + 1
        exponents = np.where(j <= self.i, self.K - j, self.K)
        return self.eps ** exponents.astype(float)


@dataclass(frozen=True)
class DkIidSpec:
    params: DkParams
    T: int

    def __post_init__(self) -> None:
        if not (isinstance(self.T, int) and self.T >= 1):
            raise ValueError(f"T must be an integer >= 1, got {self.T}")


@dataclass(frozen=True)
class DkThenConstantSpec:
    """i.i.d. draws for switch_day days, then the atom exactly, forever."""

    params: DkParams
    T: int
    switch_day: int

    def __post_init__(self) -> None:
        if not (isinstance(self.T, int) and self.T >= 1):
            raise ValueError(f"T must be an integer >= 1, got {self.T}")
        if not 0 <= self.switch_day <= self.T:
            raise ValueError(
                f"switch_day must be in [0, T] = [0, {self.T}], got {self.switch_day}"
            )


@dataclass(frozen=True)
class PermutationSpec:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError("permutation multiset must be nonempty")
        _check_unit_range(self.values)

    @property
    def T(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CustomSpec:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError("custom sequence must be nonempty")
        _check_unit_range(self.values)

    @property
    def T(self) -> int:
        return len(self.values)


Variant = Union[PhasedSpec, DkIidSpec, DkThenConstantSpec, PermutationSpec, CustomSpec]


@dataclass(frozen=True)
class SequenceSpec:
    variant: Variant
    seed: int
    symmetric: bool = False

    def __post_init__(self) -> None:
        if self.symmetric and isinstance(self.variant, (PermutationSpec, CustomSpec)):
            raise UnsupportedVariantError(
                "symmetrization needs a generative variant (phased or atom-plus-tail)"
            )

    @property
    def T(self) -> int:
        return self.variant.T


def _check_unit_range(values) -> None:
    arr = np.asarray(values, dtype=float)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("all values must lie in [0, 1]")


# ---------------------------------------------------------------------------
# generation


def gen_phased(
    alpha: float, T: int, K: int, eps: float, i: int, seed: int, symmetric: bool = False
) -> np.ndarray:
    spec = PhasedSpec(alpha=alpha, T=T, K=K, eps=eps, i=i)
    return generate(SequenceSpec(spec, seed=seed, symmetric=symmetric))


def gen_dk_iid(p: DkParams, T: int, seed: int, symmetric: bool = False) -> np.ndarray:
    return generate(SequenceSpec(DkIidSpec(p, T), seed=seed, symmetric=symmetric))


def gen_dk_then_constant(
    p: DkParams, T: int, switch_day: int, seed: int, symmetric: bool = False
) -> np.ndarray:
    spec = DkThenConstantSpec(p, T, switch_day)
    return generate(SequenceSpec(spec, seed=seed, symmetric=symmetric))


def gen_permutation(multiset: Sequence[float], seed: int) -> np.ndarray:
    """Uniformly random (Fisher-Yates) seeded permutation of the multiset."""
    spec = PermutationSpec(tuple(float(v) for v in multiset))
    return generate(SequenceSpec(spec, seed=seed))


def generate(spec: SequenceSpec) -> np.ndarray:
    """Realize a SequenceSpec into T values in [0, 1]."""
    v = spec.variant
    rng = _stream(spec.seed, _VALUES_STREAM)
    if isinstance(v, PhasedSpec):
        values = rng.random(v.T) * v.day_scales()
    elif isinstance(v, DkIidSpec):
        values = dk_inverse_cdf(rng.random(v.T), v.params)
    elif isinstance(v, DkThenConstantSpec):
        values = np.full(v.T, v.params.atom)
        values[: v.switch_day] = dk_inverse_cdf(rng.random(v.switch_day), v.params)
    elif isinstance(v, PermutationSpec):
        values = rng.permutation(np.asarray(v.values, dtype=float))
    elif isinstance(v, CustomSpec):
        values = np.asarray(v.values, dtype=float)
    else:  # pragma: no cover
        raise UnsupportedVariantError(f"unknown variant {type(v).__name__}")
    if spec.symmetric:
        values = symmetrize(values, spec)
    return values


def symmetrize(values: np.ndarray, spec: SequenceSpec) -> np.ndarray:
    """Recenter a generated sequence around 1/2, variant by variant.

    Phased: a day at scale b maps affinely onto [1/2 - b/2, 1/2 + b/2]
    via y -> 1/2 - b/2 + y. Atom-plus-tail: y -> 1/2 + s*(y - atom)/2
    with an independent fair sign s per day (stream tag 1), so the atom
    lands exactly on 1/2 whichever sign is drawn.
    """
    v = spec.variant
    values = np.asarray(values, dtype=float)
    if len(values) != v.T:
        raise ValueError(f"sequence length {len(values)} != spec horizon {v.T}")
    if isinstance(v, PhasedSpec):
        b = v.day_scales()
        return 0.5 - 0.5 * b + values
    if isinstance(v, (DkIidSpec, DkThenConstantSpec)):
        signs = 2.0 * _stream(spec.seed, _SIGNS_STREAM).integers(0, 2, size=v.T) - 1.0
        return 0.5 + signs * (values - v.params.atom) / 2.0
    raise UnsupportedVariantError(
        f"symmetrization is not defined for {type(v).__name__}"
    )


# ---------------------------------------------------------------------------
# spec serialization and sequence files


def spec_to_dict(spec: SequenceSpec) -> dict:
    v = spec.variant
    if isinstance(v, PhasedSpec):
        body = {"variant": "phased", "alpha": v.alpha, "T": v.T, "K": v.K, "eps": v.eps, "i": v.i}
    elif isinstance(v, DkIidSpec):
        p = v.params
        body = {"variant": "dk_iid", "alpha": p.alpha, "eps": p.eps, "K": p.K, "T": v.T}
    elif isinstance(v, DkThenConstantSpec):
        p = v.params
        body = {
            "variant": "dk_then_constant",
            "alpha": p.alpha,
            "eps": p.eps,
            "K": p.K,
            "T": v.T,
            "switch_day": v.switch_day,
        }
    elif isinstance(v, PermutationSpec):
        body = {"variant": "permutation", "T": v.T, "multiset_sha256": _values_digest(v.values)}
    elif isinstance(v, CustomSpec):
        body = {"variant": "custom", "T": v.T, "values_sha256": _values_digest(v.values)}
    else:  # pragma: no cover
        raise UnsupportedVariantError(f"unknown variant {type(v).__name__}")
    body["seed"] = spec.seed
    body["symmetric"] = spec.symmetric
    return body


def spec_from_dict(d: dict, values: Sequence[float] | None = None) -> SequenceSpec:
    """Rebuild a SequenceSpec from its dict form.

    Permutation and custom variants store only a digest in the dict; pass
    the file's values to rebuild them (the multiset is the sorted values).
    """
    d = dict(d)
    kind = d.pop("variant")
    seed = d.pop("seed")
    symmetric = d.pop("symmetric", False)
    if kind == "phased":
        variant: Variant = PhasedSpec(
            alpha=d["alpha"], T=d["T"], K=d["K"], eps=d["eps"], i=d["i"]
        )
    elif kind == "dk_iid":
        variant = DkIidSpec(DkParams(d["alpha"], d["eps"], d["K"]), d["T"])
    elif kind == "dk_then_constant":
        variant = DkThenConstantSpec(
            DkParams(d["alpha"], d["eps"], d["K"]), d["T"], d["switch_day"]
        )
    elif kind == "permutation":
        if values is None:
            raise ValueError("permutation spec needs the file's values to rebuild")
        variant = PermutationSpec(tuple(sorted(float(v) for v in values)))
    elif kind == "custom":
        if values is None:
            raise ValueError("custom spec needs the file's values to rebuild")
        variant = CustomSpec(tuple(float(v) for v in values))
    else:
        raise UnsupportedVariantError(f"unknown variant {kind!r}")
    return SequenceSpec(variant, seed=seed, symmetric=symmetric)


def _values_digest(values: Sequence[float]) -> str:
    import hashlib

    payload = ",".join(repr(float(v)) for v in sorted(values))
    return hashlib.sha256(payload.encode()).hexdigest()


def write_sequence(path: str | Path, values: np.ndarray, spec: SequenceSpec | None) -> None:
    """One value per line, decimal text, header comment recording the SequenceSpec."""
    lines = []
    if spec is not None:
        lines.append(_HEADER_PREFIX + json.dumps(spec_to_dict(spec), sort_keys=True))
    lines.extend(repr(float(v)) for v in values)
    Path(path).write_text("\n".join(lines) + "\n")


def read_sequence(path: str | Path) -> tuple[np.ndarray, SequenceSpec | None]:
    """Read a sequence file; returns (values, spec or None if no header).

    Plain numeric files (one value per line, '#' comments ignored) are
    accepted so hand-made multisets can feed the CLI directly.
    """
    values: list[float] = []
    spec_dict: dict | None = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(_HEADER_PREFIX):
            spec_dict = json.loads(line[len(_HEADER_PREFIX) :])
        elif line.startswith("#"):
            continue
        else:
            values.append(float(line))
    arr = np.asarray(values, dtype=float)
    spec = spec_from_dict(spec_dict, values=arr) if spec_dict is not None else None
    return arr, spec
